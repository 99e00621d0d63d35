// SPDX-License-Identifier: Apache-2.0
//
// asfcov - parametric channel covariance estimation for large antenna arrays
// Copyright (C) 2026 The asfcov authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef ASFCOV_BENCHMARKS_HPP
#define ASFCOV_BENCHMARKS_HPP

#include "asfcov/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace asfcov {

// Competitor covariance estimators.

struct BenchmarkReport {
    std::string method;
    CMatrix covariance;          // uplink estimate
    int iterations = 0;
    double residual = 0.0;       // final value of the method's stopping quantity
    bool converged = false;
    bool fallback = false;       // SPICE: singular sample covariance in the N >= M branch
    std::vector<double> trace;   // per-iteration monitored quantity (see each method)
    // Discrete measure sum_j weights[j] delta(xi - locations[j]) behind the
    // estimate; empty when the method has no angular model (Toeplitz-PSD).
    std::vector<double> locations;
    RVector weights;
};

/// Covariance of the report's angular measure at wavelength scale nu.
/// Throws std::invalid_argument when the method has no angular model.
CMatrix benchmark_covariance(const BenchmarkReport& report, int m, double nu);

/// Alternating projections (Toeplitz, then PSD) starting from the sample
/// covariance until ||X_{t+1} - X_t||_F <= tol ||X_t||_F; the result gets a
/// final Toeplitz and PSD projection. `trace` holds the Frobenius distance of
/// each PSD iterate to the Toeplitz set.
BenchmarkReport toeplitz_psd(const CMatrix& sample_cov_h, double tol = 1e-8, int max_iter = 500);

struct SpiceOptions {
    double tol = 1e-7;    // relative objective decrease
    int max_iter = 2000;
};

/// SPICE covariance fit over Sigma = D diag(u) D^H + eps I, u >= 0, with
/// eps = 1e-8 tr(R)/M. For N < M the objective is ||Sigma^{-1/2}(R - Sigma)||_F^2,
/// otherwise ||Sigma^{-1/2}(R - Sigma) R^{-1/2}||_F^2. Projected Newton with an
/// analytic Hessian and Armijo backtracking along the projection arc. `steering`
/// columns are the Dirac atoms a(xi_g); `trace` holds the objective per iteration.
BenchmarkReport spice(const CMatrix& sample_cov_y, const CMatrix& steering, const std::vector<double>& locations,
                      int n, const SpiceOptions& options = {});

/// SPICE objective, exposed for checks. `large_sample` selects the N >= M form.
double spice_objective(const CMatrix& sample_cov_y, const CMatrix& steering, const RVector& u, bool large_sample);

struct ProjectionOptions {
    int grid_size = 5000;
    double tol = 1e-6;
    int max_iter = 2000;
};

/// Angular density on a uniform grid of [-1, 1] (endpoints included,
/// trapezoid weights) that matches the M lags in the first column of the
/// sample covariance and is non-negative, by alternating between the affine
/// moment set and the non-negative orthant. `trace` holds, per iteration, the
/// length of the affine correction (non-increasing); `residual` is the
/// moment residual after clipping, relative to the target norm.
BenchmarkReport convex_projection(const CMatrix& sample_cov_h, const ProjectionOptions& options = {},
                                  const std::optional<RVector>& initial_density = std::nullopt);

/// Grid and trapezoid weights used by convex_projection.
std::vector<double> projection_grid(int grid_size);
RVector trapezoid_weights(int grid_size);

} // namespace asfcov

#endif
