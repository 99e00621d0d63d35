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

#include "asfcov/benchmarks.hpp"

#include "asfcov/channel.hpp"
#include "asfcov/linalg.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace asfcov {

CMatrix benchmark_covariance(const BenchmarkReport& report, int m, double nu)
{
    if (report.locations.empty())
        throw std::invalid_argument(report.method + ": no angular model for wavelength scaling");
    CVector lags = CVector::Zero(m);
    for (std::size_t j = 0; j < report.locations.size(); ++j) {
        const double w = report.weights[static_cast<Eigen::Index>(j)];
        if (w != 0.0)
            lags += w * array_response(m, report.locations[j], nu);
    }
    return toeplitz_from_first_column(lags);
}

// ----- Toeplitz-PSD ---------------------------------------------------------

BenchmarkReport toeplitz_psd(const CMatrix& sample_cov_h, double tol, int max_iter)
{
    BenchmarkReport rep;
    rep.method = "toeplitz-psd";
    CMatrix x = hermitian_part(sample_cov_h);
    for (int it = 1; it <= max_iter; ++it) {
        const CMatrix t = toeplitz_project(x).matrix;
        const CMatrix next = psd_project(t);
        rep.trace.push_back((next - toeplitz_project(next).matrix).norm());
        const double scale = x.norm();
        rep.residual = (next - x).norm() / (scale > 0.0 ? scale : 1.0);
        x = next;
        rep.iterations = it;
        if (rep.residual <= tol) {
            rep.converged = true;
            break;
        }
    }
    rep.covariance = psd_project(toeplitz_project(x).matrix);
    return rep;
}

// ----- SPICE ----------------------------------------------------------------

namespace {

struct SpiceModel {
    const CMatrix& r;
    const CMatrix& steering;
    double eps;
    bool large_sample;
    CMatrix r_inv; // large-sample branch only

    CMatrix sigma(const RVector& u) const
    {
        CMatrix s = steering * u.cast<cdouble>().asDiagonal() * steering.adjoint();
        s.diagonal().array() += eps;
        return 0.5 * (s + s.adjoint());
    }

    // Objective and, when requested, gradient. Returns +inf when the model
    // covariance is not numerically positive definite.
    double evaluate(const RVector& u, RVector* grad) const
    {
        const CMatrix s = sigma(u);
        const Eigen::LLT<CMatrix> llt(s);
        if (llt.info() != Eigen::Success)
            return std::numeric_limits<double>::infinity();
        const double m = static_cast<double>(r.rows());
        double f;
        if (!large_sample) {
            const CMatrix sr = llt.solve(r); // Sigma^{-1} R
            f = (r * sr).trace().real() - 2.0 * r.trace().real() + s.trace().real();
            if (grad) {
                const CMatrix w = r * llt.solve(steering); // R Sigma^{-1} a_i
                *grad = (m - w.colwise().squaredNorm().array()).matrix().transpose();
            }
        } else {
            f = llt.solve(r).trace().real() - 2.0 * m + (r_inv * s).trace().real();
            if (grad) {
                const CMatrix x = llt.solve(steering);
                const CMatrix rx = r * x;
                const CMatrix ra = r_inv * steering;
                grad->resize(steering.cols());
                for (Eigen::Index i = 0; i < steering.cols(); ++i)
                    (*grad)[i] = -x.col(i).dot(rx.col(i)).real() + steering.col(i).dot(ra.col(i)).real();
            }
        }
        return std::max(f, 0.0);
    }

    // d2f/du_i du_j = 2 Re(B_ij C_ji) with B = D^H Sigma^{-1} D and
    // C = X^H Q X, X = Sigma^{-1} D, Q = R^2 (small sample) or R.
    RMatrix hessian(const RVector& u) const
    {
        const Eigen::LLT<CMatrix> llt(sigma(u));
        const CMatrix x = llt.solve(steering);
        const CMatrix b = steering.adjoint() * x;
        const CMatrix rx = r * x;
        const CMatrix c = large_sample ? CMatrix(x.adjoint() * rx) : CMatrix(rx.adjoint() * rx);
        return 2.0 * b.cwiseProduct(c.transpose()).real();
    }
};

bool invert_hpd(const CMatrix& a, CMatrix& inv)
{
    const HermitianEig eig = hermitian_eig(a);
    const double top = eig.values.size() ? eig.values[0] : 0.0;
    if (!(top > 0.0) || eig.values.minCoeff() <= 1e-12 * top)
        return false;
    inv = eig.vectors * eig.values.cwiseInverse().cast<cdouble>().asDiagonal() * eig.vectors.adjoint();
    inv = 0.5 * (inv + inv.adjoint());
    return true;
}

} // namespace

double spice_objective(const CMatrix& sample_cov_y, const CMatrix& steering, const RVector& u, bool large_sample)
{
    const CMatrix r = hermitian_part(sample_cov_y);
    const double eps = 1e-8 * r.trace().real() / static_cast<double>(r.rows());
    SpiceModel model{r, steering, eps, large_sample, {}};
    if (large_sample && !invert_hpd(r, model.r_inv))
        throw std::invalid_argument("spice_objective: singular sample covariance");
    const double f = model.evaluate(u, nullptr);
    if (!std::isfinite(f))
        throw NumericalError("spice_objective: model covariance not positive definite");
    return f;
}

BenchmarkReport spice(const CMatrix& sample_cov_y, const CMatrix& steering, const std::vector<double>& locations,
                      int n, const SpiceOptions& opt)
{
    const CMatrix r = hermitian_part(sample_cov_y);
    const Eigen::Index m = r.rows();
    if (steering.rows() != m || steering.cols() < 1)
        throw std::invalid_argument("spice: steering matrix does not match the covariance");
    if (static_cast<Eigen::Index>(locations.size()) != steering.cols())
        throw std::invalid_argument("spice: one location per steering column required");
    const double trace_r = r.trace().real();
    if (!(trace_r > 0.0))
        throw std::invalid_argument("spice: sample covariance has zero trace");

    BenchmarkReport rep;
    rep.method = "spice";
    SpiceModel model{r, steering, 1e-8 * trace_r / static_cast<double>(m), n >= m, {}};
    if (model.large_sample && !invert_hpd(r, model.r_inv)) {
        model.large_sample = false;
        rep.fallback = true;
    }

    RVector u(steering.cols());
    for (Eigen::Index i = 0; i < u.size(); ++i)
        u[i] = steering.col(i).dot(r * steering.col(i)).real() / static_cast<double>(m * m);
    u = u.cwiseMax(0.0);

    // Projected Newton: coordinates at the bound with a positive gradient are
    // held (scaled gradient step), the rest take a Newton step; Armijo search
    // along the projection arc keeps the objective monotone.
    const Eigen::Index g_count = u.size();
    RVector g;
    double f = model.evaluate(u, &g);
    if (!std::isfinite(f))
        throw NumericalError("spice: initial model covariance not positive definite");
    const double f0 = f;
    rep.trace.push_back(f);
    const double sigma_armijo = 1e-4;

    for (int it = 1; it <= opt.max_iter; ++it) {
        rep.iterations = it;
        const RMatrix h = model.hessian(u);
        const double stationarity = (u - (u - g).cwiseMax(0.0)).norm();
        const double eps_k = std::min(1e-6 * std::max(u.maxCoeff(), 1e-300), stationarity);

        std::vector<Eigen::Index> free_idx;
        std::vector<char> bound(static_cast<std::size_t>(g_count), 0);
        for (Eigen::Index i = 0; i < g_count; ++i) {
            if (u[i] <= eps_k && g[i] > 0.0)
                bound[static_cast<std::size_t>(i)] = 1;
            else
                free_idx.push_back(i);
        }
        RVector d = RVector::Zero(g_count);
        for (Eigen::Index i = 0; i < g_count; ++i)
            if (bound[static_cast<std::size_t>(i)])
                d[i] = -g[i] / std::max(h(i, i), 1e-300);
        if (!free_idx.empty()) {
            const auto nf = static_cast<Eigen::Index>(free_idx.size());
            RMatrix hf(nf, nf);
            RVector gf(nf);
            for (Eigen::Index a = 0; a < nf; ++a) {
                gf[a] = g[free_idx[static_cast<std::size_t>(a)]];
                for (Eigen::Index b = 0; b < nf; ++b)
                    hf(a, b) = h(free_idx[static_cast<std::size_t>(a)], free_idx[static_cast<std::size_t>(b)]);
            }
            // small ridge keeps the factorisation defined when H is singular
            const double ridge = 1e-12 * std::max(hf.diagonal().maxCoeff(), 1e-300);
            hf.diagonal().array() += ridge;
            const Eigen::LDLT<RMatrix> ldlt(hf);
            RVector df = ldlt.solve(-gf);
            if (ldlt.info() != Eigen::Success || !df.allFinite() || gf.dot(df) >= 0.0)
                df = -gf.cwiseQuotient(hf.diagonal());
            for (Eigen::Index a = 0; a < nf; ++a)
                d[free_idx[static_cast<std::size_t>(a)]] = df[a];
        }

        double alpha = 1.0;
        RVector cand;
        double f_cand = f;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            cand = (u + alpha * d).cwiseMax(0.0);
            f_cand = model.evaluate(cand, nullptr);
            double predicted = 0.0;
            for (Eigen::Index i = 0; i < g_count; ++i)
                predicted += bound[static_cast<std::size_t>(i)] ? g[i] * (u[i] - cand[i]) : -alpha * g[i] * d[i];
            if (f - f_cand >= sigma_armijo * predicted && f_cand <= f) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted || (cand - u).squaredNorm() == 0.0) {
            rep.converged = true;
            break;
        }
        u = cand;
        const double decrease = f - f_cand;
        f = model.evaluate(u, &g);
        rep.trace.push_back(f);
        if ((decrease <= opt.tol * std::max(f_cand, 1e-300) && alpha == 1.0) || f <= 1e-16 * f0) {
            rep.converged = true;
            break;
        }
    }

    rep.residual = f;
    rep.locations = locations;
    rep.weights = u;
    // same lag-domain form as the wavelength-scaled output, so nu = 1 matches bitwise
    rep.covariance = benchmark_covariance(rep, static_cast<int>(steering.rows()), 1.0);
    return rep;
}

// ----- Convex projection ----------------------------------------------------

std::vector<double> projection_grid(int grid_size)
{
    if (grid_size < 2)
        throw std::invalid_argument("projection_grid: need at least two points");
    std::vector<double> grid(static_cast<std::size_t>(grid_size));
    for (int j = 0; j < grid_size; ++j)
        grid[static_cast<std::size_t>(j)] = -1.0 + 2.0 * j / static_cast<double>(grid_size - 1);
    return grid;
}

RVector trapezoid_weights(int grid_size)
{
    if (grid_size < 2)
        throw std::invalid_argument("trapezoid_weights: need at least two points");
    const double h = 2.0 / static_cast<double>(grid_size - 1);
    RVector w = RVector::Constant(grid_size, h);
    w[0] = w[grid_size - 1] = 0.5 * h;
    return w;
}

BenchmarkReport convex_projection(const CMatrix& sample_cov_h, const ProjectionOptions& opt,
                                  const std::optional<RVector>& initial_density)
{
    const CMatrix sh = hermitian_part(sample_cov_h);
    const int m = static_cast<int>(sh.rows());
    const int ng = opt.grid_size;
    const std::vector<double> grid = projection_grid(ng);
    const RVector w = trapezoid_weights(ng);

    // real moment operator: Re lag 0..M-1, Im lag 1..M-1
    const int rows = 2 * m - 1;
    RMatrix a(rows, ng);
    for (int j = 0; j < ng; ++j) {
        const CVector col = array_response(m, grid[static_cast<std::size_t>(j)], 1.0) * w[j];
        for (int k = 0; k < m; ++k)
            a(k, j) = col[k].real();
        for (int k = 1; k < m; ++k)
            a(m + k - 1, j) = col[k].imag();
    }
    RVector b(rows);
    for (int k = 0; k < m; ++k)
        b[k] = sh(k, 0).real();
    for (int k = 1; k < m; ++k)
        b[m + k - 1] = sh(k, 0).imag();
    const double target_norm = std::max(b.norm(), 1e-300);

    const Eigen::LLT<RMatrix> gram(a * a.transpose());
    if (gram.info() != Eigen::Success)
        throw NumericalError("convex_projection: moment operator is rank deficient");

    BenchmarkReport rep;
    rep.method = "projection";
    RVector gamma = RVector::Zero(ng);
    if (initial_density) {
        if (initial_density->size() != ng)
            throw std::invalid_argument("convex_projection: initial density has wrong length");
        gamma = *initial_density;
    }

    rep.residual = (a * gamma - b).norm() / target_norm;
    for (int it = 1; it <= opt.max_iter; ++it) {
        const RVector correction = a.transpose() * gram.solve(a * gamma - b);
        rep.trace.push_back(correction.norm());
        gamma -= correction;
        gamma = gamma.cwiseMax(0.0);
        rep.iterations = it;
        rep.residual = (a * gamma - b).norm() / target_norm;
        if (rep.residual <= opt.tol) {
            rep.converged = true;
            break;
        }
    }

    rep.locations = grid;
    rep.weights = (w.array() * gamma.array()).matrix();
    rep.covariance = benchmark_covariance(rep, m, 1.0);
    return rep;
}

} // namespace asfcov
