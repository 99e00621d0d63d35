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

#include "asfcov/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace asfcov {

namespace {

void require_square(const CMatrix& a, const char* op)
{
    if (a.rows() != a.cols())
        throw std::invalid_argument(std::string(op) + ": matrix must be square");
}

} // namespace

CMatrix hermitian_part(const CMatrix& a)
{
    require_square(a, "hermitian_part");
    if (!a.allFinite())
        throw std::invalid_argument("hermitian_part: non-finite entries");
    const double scale = a.norm();
    const double asym = (a - a.adjoint()).norm();
    if (asym > 1e-10 * std::max(scale, 1e-300) && asym > 0.0)
        throw std::invalid_argument("hermitian_part: matrix is not Hermitian");
    CMatrix h = 0.5 * (a + a.adjoint());
    for (Eigen::Index k = 0; k < h.rows(); ++k)
        h(k, k) = h(k, k).real();
    return h;
}

HermitianEig hermitian_eig(const CMatrix& input)
{
    CMatrix a = hermitian_part(input);
    const Eigen::Index m = a.rows();
    CMatrix v = CMatrix::Identity(m, m);

    const double fro = a.norm();
    const double stop = 1e-12 * fro;
    constexpr int kMaxSweeps = 64;

    bool converged = (m <= 1) || fro == 0.0;
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
        double off = 0.0;
        for (Eigen::Index q = 1; q < m; ++q)
            for (Eigen::Index p = 0; p < q; ++p)
                off = std::max(off, std::abs(a(p, q)));
        if (off <= stop) {
            converged = true;
            break;
        }

        for (Eigen::Index p = 0; p < m - 1; ++p) {
            for (Eigen::Index q = p + 1; q < m; ++q) {
                const cdouble g = a(p, q);
                const double r = std::abs(g);
                if (r <= 1e-3 * stop)
                    continue;
                const cdouble e = g / r;
                const cdouble ec = std::conj(e);
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double zeta = (aqq - app) / (2.0 * r);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                // A <- A J, with J = diag(1, e^{-i theta}) * [[c, s], [-s, c]]
                for (Eigen::Index k = 0; k < m; ++k) {
                    const cdouble akp = a(k, p);
                    const cdouble akq = a(k, q);
                    a(k, p) = c * akp - s * ec * akq;
                    a(k, q) = s * akp + c * ec * akq;
                }
                // A <- J^H A
                for (Eigen::Index k = 0; k < m; ++k) {
                    const cdouble apk = a(p, k);
                    const cdouble aqk = a(q, k);
                    a(p, k) = c * apk - s * e * aqk;
                    a(q, k) = s * apk + c * e * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = app - t * r;
                a(q, q) = aqq + t * r;

                for (Eigen::Index k = 0; k < m; ++k) {
                    const cdouble vkp = v(k, p);
                    const cdouble vkq = v(k, q);
                    v(k, p) = c * vkp - s * ec * vkq;
                    v(k, q) = s * vkp + c * ec * vkq;
                }
            }
        }
    }
    if (!converged) {
        double off = 0.0;
        for (Eigen::Index q = 1; q < m; ++q)
            for (Eigen::Index p = 0; p < q; ++p)
                off = std::max(off, std::abs(a(p, q)));
        if (off > stop)
            throw NumericalError("hermitian_eig: Jacobi sweeps did not converge");
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return a(i, i).real() > a(j, j).real(); });

    HermitianEig out;
    out.values.resize(m);
    out.vectors.resize(m, m);
    for (Eigen::Index k = 0; k < m; ++k) {
        out.values[k] = a(order[k], order[k]).real();
        out.vectors.col(k) = v.col(order[k]);
    }
    return out;
}

CMatrix toeplitz_from_first_column(const CVector& first_column)
{
    const Eigen::Index m = first_column.size();
    CMatrix t(m, m);
    for (Eigen::Index c = 0; c < m; ++c) {
        for (Eigen::Index r = c; r < m; ++r) {
            const cdouble v = (r == c) ? cdouble(first_column[0].real(), 0.0) : first_column[r - c];
            t(r, c) = v;
            t(c, r) = std::conj(v);
        }
    }
    return t;
}

ToeplitzProjection toeplitz_project(const CMatrix& input)
{
    const CMatrix a = hermitian_part(input);
    const Eigen::Index m = a.rows();
    CVector lags(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        cdouble sum = 0.0;
        for (Eigen::Index i = 0; i + k < m; ++i)
            sum += a(i + k, i);
        lags[k] = sum / static_cast<double>(m - k);
    }
    if (m > 0)
        lags[0] = lags[0].real();
    return {toeplitz_from_first_column(lags), lags};
}

CMatrix psd_project(const CMatrix& a)
{
    const HermitianEig eig = hermitian_eig(a);
    const RVector clamped = eig.values.cwiseMax(0.0);
    CMatrix out = eig.vectors * clamped.cast<cdouble>().asDiagonal() * eig.vectors.adjoint();
    return 0.5 * (out + out.adjoint());
}

CMatrix psd_sqrt(const CMatrix& a)
{
    const HermitianEig eig = hermitian_eig(a);
    const double floor = -1e-10 * a.norm();
    if (eig.values.size() > 0 && eig.values.minCoeff() < floor)
        throw std::invalid_argument("psd_sqrt: matrix is indefinite");
    // eigenvalues at rounding level are treated as exact zeros
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * a.norm();
    const RVector roots = (eig.values.array() > noise).select(eig.values.cwiseSqrt(), 0.0).matrix();
    CMatrix out = eig.vectors * roots.cast<cdouble>().asDiagonal() * eig.vectors.adjoint();
    return 0.5 * (out + out.adjoint());
}

cdouble toeplitz_trace_product(const CMatrix& g, const CVector& s)
{
    const Eigen::Index m = s.size();
    if (g.rows() != m || g.cols() != m)
        throw std::invalid_argument("toeplitz_trace_product: dimension mismatch");
    cdouble acc = 0.0;
    for (Eigen::Index d = 0; d < m; ++d) {
        cdouble upper = 0.0; // sum_c G(c, c+d)
        cdouble lower = 0.0; // sum_r G(r+d, r)
        for (Eigen::Index i = 0; i + d < m; ++i) {
            upper += g(i, i + d);
            lower += g(i + d, i);
        }
        if (d == 0)
            acc += s[0].real() * upper;
        else
            acc += s[d] * upper + std::conj(s[d]) * lower;
    }
    return acc;
}

cdouble frobenius_inner(const CMatrix& a, const CMatrix& b)
{
    return (a.adjoint() * b).trace();
}

} // namespace asfcov
