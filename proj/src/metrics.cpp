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

#include "asfcov/metrics.hpp"

#include "asfcov/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace asfcov {

namespace {

void check_pair(const CMatrix& truth, const CMatrix& estimate, const char* name)
{
    if (truth.rows() != truth.cols() || estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
        throw std::invalid_argument(std::string(name) + ": matrices must be square and of equal size");
}

CVector phase_canonical(const CVector& v)
{
    const double tiny = 1e-10 * v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (std::abs(v[i]) > tiny)
            return v * (std::conj(v[i]) / std::abs(v[i]));
    return v;
}

bool lexicographic_less(const CVector& a, const CVector& b)
{
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i].real() != b[i].real())
            return a[i].real() < b[i].real();
        if (a[i].imag() != b[i].imag())
            return a[i].imag() < b[i].imag();
    }
    return false;
}

} // namespace

double err_frobenius(const CMatrix& truth, const CMatrix& estimate)
{
    check_pair(truth, estimate, "err_frobenius");
    const double norm = truth.norm();
    if (!(norm > 0.0))
        throw std::invalid_argument("err_frobenius: zero ground truth");
    return (truth - estimate).norm() / norm;
}

double err_nmse(const CMatrix& truth, const CMatrix& estimate, double n0)
{
    check_pair(truth, estimate, "err_nmse");
    if (!(n0 >= 0.0))
        throw std::invalid_argument("err_nmse: noise power must be non-negative");
    const double power = truth.trace().real();
    if (!(power > 0.0))
        throw std::invalid_argument("err_nmse: zero ground truth");

    const HermitianEig eig = hermitian_eig(hermitian_part(estimate));
    RVector shifted = (eig.values.array() + n0).matrix();
    const double cutoff = 1e-12 * std::max(shifted.cwiseAbs().maxCoeff(), 1e-300);
    RVector gain(shifted.size());
    for (Eigen::Index i = 0; i < shifted.size(); ++i)
        gain[i] = std::abs(shifted[i]) > cutoff ? eig.values[i] / shifted[i] : 0.0;
    const CMatrix w = eig.vectors * gain.cast<cdouble>().asDiagonal() * eig.vectors.adjoint();

    const Eigen::Index m = truth.rows();
    const CMatrix residual = CMatrix::Identity(m, m) - w;
    const double err = (residual * truth * residual.adjoint()).trace().real() + n0 * w.squaredNorm();
    return err / power;
}

CMatrix dominant_eigenvectors(const CMatrix& a, int p)
{
    const HermitianEig eig = hermitian_eig(a);
    const Eigen::Index m = eig.values.size();
    if (p < 1 || p > m)
        throw std::invalid_argument("dominant_eigenvectors: p out of range");

    std::vector<CVector> vecs;
    for (Eigen::Index k = 0; k < m; ++k)
        vecs.push_back(phase_canonical(eig.vectors.col(k)));
    // eigenvalues arrive sorted; reorder each block of (numerically) equal ones
    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    const double tie = 1e-12 * std::max(eig.values.cwiseAbs().maxCoeff(), 1e-300);
    for (std::size_t lo = 0; lo < order.size();) {
        std::size_t hi = lo + 1;
        while (hi < order.size() && eig.values[order[lo]] - eig.values[order[hi]] <= tie)
            ++hi;
        std::sort(order.begin() + static_cast<std::ptrdiff_t>(lo), order.begin() + static_cast<std::ptrdiff_t>(hi),
                  [&](Eigen::Index i, Eigen::Index j) {
                      return lexicographic_less(vecs[static_cast<std::size_t>(i)], vecs[static_cast<std::size_t>(j)]);
                  });
        lo = hi;
    }

    CMatrix u(m, p);
    for (int k = 0; k < p; ++k)
        u.col(k) = vecs[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
    return u;
}

double power_efficiency(const CMatrix& truth, const CMatrix& estimate, int p)
{
    check_pair(truth, estimate, "power_efficiency");
    if (p < 1 || p > truth.rows())
        throw std::invalid_argument("power_efficiency: p out of range");
    const CMatrix t = hermitian_part(truth);
    const CMatrix u = dominant_eigenvectors(t, p);
    const CMatrix u_hat = dominant_eigenvectors(hermitian_part(estimate), p);
    const double best = (u.adjoint() * t * u).trace().real();
    if (!(best > 0.0))
        throw std::invalid_argument("power_efficiency: zero ground truth");
    return 1.0 - (u_hat.adjoint() * t * u_hat).trace().real() / best;
}

} // namespace asfcov
