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

#ifndef ASFCOV_QUADRATURE_HPP
#define ASFCOV_QUADRATURE_HPP

#include "asfcov/types.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace asfcov {

struct GaussLegendreRule {
    std::vector<double> nodes;   // on [-1, 1], ascending
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule (Newton iteration on P_n).
GaussLegendreRule gauss_legendre(int n);

/// Integrand in a parametrised form: for parameter t returns the angle xi(t)
/// and the weight g(t) so that the integral is  int g(t) e^{j pi nu k xi(t)} dt.
using LagIntegrand = std::function<std::pair<double, double>(double)>;

struct LagQuadratureResult {
    CVector lags;
    int panels = 0;
    bool converged = false;
};

/// Lags k = 0..M-1 of int_{t0}^{t1} g(t) exp(j pi nu k xi(t)) dt by composite
/// 64-node Gauss-Legendre, doubling the panel count until two successive lag
/// vectors agree to 1e-10 relative (max-norm).
LagQuadratureResult lag_quadrature(const LagIntegrand& integrand, double t0, double t1, int m, double nu);

/// Lags of a density on [lo, hi] in the plain angle variable.
CVector density_lags(const std::function<double(double)>& density, double lo, double hi, int m, double nu);

/// Plain (non-oscillatory) integral of f over [lo, hi], same adaptive rule.
double integrate(const std::function<double(double)>& f, double lo, double hi);

} // namespace asfcov

#endif
