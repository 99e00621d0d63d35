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

#include "asfcov/estimators.hpp"

#include <chrono>
#include <cmath>

namespace asfcov {

void stacked_system(const DesignSystem& system, RMatrix& a, RVector& f)
{
    const Eigen::Index m = system.m;
    const CMatrix wa = system.weights.cast<cdouble>().asDiagonal() * system.moments;
    const CVector wf = system.weights.cast<cdouble>().asDiagonal() * system.target;
    a.resize(2 * m, wa.cols());
    a.topRows(m) = wa.real();
    a.bottomRows(m) = wa.imag();
    f.resize(2 * m);
    f.head(m) = wf.real();
    f.tail(m) = wf.imag();
}

double weighted_residual(const DesignSystem& system, const RVector& u)
{
    if (u.size() != system.size())
        throw std::invalid_argument("weighted_residual: coefficient length mismatch");
    const CVector r = system.moments * u.cast<cdouble>() - system.target;
    return (system.weights.array() * r.array().abs()).square().sum();
}

EstimatorReport estimate_nnls(const DesignSystem& system, double tol)
{
    const auto start = std::chrono::steady_clock::now();
    RMatrix a;
    RVector f;
    stacked_system(system, a, f);
    const NnlsResult sol = nnls(a, f, tol, 3 * system.size());

    EstimatorReport rep;
    rep.method = "nnls";
    rep.u = sol.x;
    rep.iterations = sol.iterations;
    rep.converged = sol.converged;
    rep.objective.push_back(weighted_residual(system, sol.x));
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

double flops_nnls(double outer, double inner, double atoms, double m)
{
    const double i = outer;
    const double poly = i * i * i * i / 8.0 + (m + 0.75) * i * i * i + (3.0 * m + 0.875) * i * i + (2.0 * m + 0.25) * i;
    return 4.0 * (i + 1.0) * atoms * m + (1.0 + inner) * poly;
}

double flops_em(double iterations, double atoms, double m, double n)
{
    const double g = atoms;
    return g * m * (n + (g + 1.0) / 2.0) + iterations * (g * g * g / 2.0 + g * g * (n + 1.5) + g * n);
}

} // namespace asfcov
