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

#ifndef ASFCOV_ESTIMATORS_HPP
#define ASFCOV_ESTIMATORS_HPP

#include "asfcov/channel.hpp"
#include "asfcov/dictionary.hpp"
#include "asfcov/spikes.hpp"
#include "asfcov/types.hpp"

#include <string>
#include <vector>

namespace asfcov {

// ----- Non-negative least squares -------------------------------------------

struct NnlsResult {
    RVector x;
    int iterations = 0; // outer (index-adding) steps
    bool converged = false;
};

/// Lawson-Hanson active-set solver for min ||A x - f|| subject to x >= 0.
/// Stops when every inactive gradient entry w_j = [A^T (f - A x)]_j is at
/// most tol * ||A^T f||_inf. max_outer <= 0 selects 3 * cols(A).
NnlsResult nnls(const RMatrix& a, const RVector& f, double tol = 1e-10, int max_outer = 0);

// ----- Coefficient estimators -----------------------------------------------

/// Coefficients u = [b; c] for the continuous atoms then the spike atoms.
struct EstimatorReport {
    std::string method;
    RVector u;
    SpikeEstimate spikes;
    std::vector<double> objective; // per-iteration objective values
    int iterations = 0;
    bool converged = false;
    double wall_time = 0.0; // seconds
};

/// Real stacking [Re(W A~); Im(W A~)] and [Re(W s~); Im(W s~)] (2M rows).
void stacked_system(const DesignSystem& system, RMatrix& a, RVector& f);

/// ||W (A~ u - s~)||^2
double weighted_residual(const DesignSystem& system, const RVector& u);

/// min ||W (A~ u - s~)|| over u >= 0. Exact for Dirac dictionaries and any
/// dictionary whose continuous atoms have disjoint supports.
EstimatorReport estimate_nnls(const DesignSystem& system, double tol = 1e-10);

struct QpOptions {
    int grid_size = 10000; // points where the continuous density must be >= 0
    double rho = 1.0;
    double alpha = 1.6;
    double sigma = 1e-6;
    double eps_abs = 1e-6;
    double eps_rel = 1e-4;
    int max_iter = 20000;
    bool polish = true;
};

/// min ||W (A~ u - s~)||^2 subject to c >= 0 (spike and Dirac weights) and
/// sum_j b_j psi_j(xi) >= 0 on the constraint grid, so individual b_j may be
/// negative. Operator splitting (ADMM) on the real-stacked problem followed
/// by an optional active-set polish.
EstimatorReport estimate_qp(const DesignSystem& system, const QpOptions& options = {});

/// Smallest value of sum_j b_j psi_j on the constraint grid, relative to the
/// largest magnitude; used to check the density constraint of a QP report.
double min_density_constraint(const DesignSystem& system, const RVector& u, int grid_size);

// ----- Maximum likelihood ---------------------------------------------------

/// f(u) = log det(S(u) + N0 I) + tr((S(u) + N0 I)^{-1} Sy), S(u) = sum u_i S_i.
double neg_log_likelihood(const RVector& u, const DesignSystem& system, const CMatrix& sample_cov_y, double n0);

/// df/du_i = tr((Sigma^{-1} - Sigma^{-1} Sy Sigma^{-1}) S_i), Sigma = S(u) + N0 I.
RVector neg_log_likelihood_gradient(const RVector& u, const DesignSystem& system, const CMatrix& sample_cov_y,
                                    double n0);

struct EmOptions {
    double epsilon = 0.0;  // stop once f decreases by at most this; <= 0 selects 1e-4 * M
    int max_iter = 100;
    double prune_threshold = 1e-10;
    int prune_patience = 5; // consecutive iterations at or below the threshold
};

/// EM for the variances of the rank-one (Dirac) atoms. Each iteration uses the
/// Woodbury form of the posterior: with Sy_model = D U D^H + N0 I and
/// B = U D^H Sy_model^{-1},  u_i <- [U - B D U + B Sy B^H]_ii.
EstimatorReport em_estimate(const CMatrix& sample_cov_y, int n, double n0, const DesignSystem& system,
                            const RVector& u0, const EmOptions& options = {});
EstimatorReport em_estimate(const SampleBatch& batch, const DesignSystem& system, const RVector& u0,
                            const EmOptions& options = {});

// ----- Complexity -----------------------------------------------------------

/// Upper bound on NNLS FLOPs: I outer iterations, J inner iterations on
/// average, G atoms, M antennas.
double flops_nnls(double outer, double inner, double atoms, double m);

/// EM FLOPs for I_EM iterations with G atoms, M antennas and N snapshots.
double flops_em(double iterations, double atoms, double m, double n);

} // namespace asfcov

#endif
