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

#include <Eigen/Cholesky>

#include <algorithm>
#include <chrono>
#include <cmath>

namespace asfcov {

namespace {

// Rows of C: the density rows Psi (non-empty ones, scaled to unit max-norm)
// followed by one unit row per Dirac atom.
RMatrix constraint_matrix(const DesignSystem& system, int grid_size)
{
    const Eigen::Index n = system.size();
    const std::vector<Atom> continuous(system.atoms.begin(), system.atoms.begin() + system.continuous_count);
    RMatrix psi = density_matrix(continuous, grid_size);

    std::vector<Eigen::Index> rows;
    RVector row_scale(psi.rows());
    for (Eigen::Index j = 0; j < psi.rows(); ++j) {
        row_scale[j] = psi.row(j).cwiseAbs().maxCoeff();
        if (row_scale[j] > 0.0)
            rows.push_back(j);
    }
    std::vector<Eigen::Index> diracs;
    for (Eigen::Index i = 0; i < n; ++i)
        if (is_dirac(system.atoms[static_cast<std::size_t>(i)]))
            diracs.push_back(i);

    RMatrix c = RMatrix::Zero(static_cast<Eigen::Index>(rows.size() + diracs.size()), n);
    for (std::size_t r = 0; r < rows.size(); ++r)
        c.row(static_cast<Eigen::Index>(r)).head(psi.cols()) = psi.row(rows[r]) / row_scale[rows[r]];
    for (std::size_t d = 0; d < diracs.size(); ++d)
        c(static_cast<Eigen::Index>(rows.size() + d), diracs[d]) = 1.0;
    return c;
}

double inf_norm(const RVector& v)
{
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

double quad_objective(const RMatrix& p, const RVector& q, const RVector& x)
{
    return 0.5 * x.dot(p * x) + q.dot(x);
}

struct Polished {
    RVector x;
    RVector ya;
    bool kkt_ok = false;
};

// Equality-constrained solve on an active set with a regularised KKT system
// and iterative refinement. ya holds the multipliers of the active rows.
Polished solve_active(const RMatrix& p, const RVector& q, const RMatrix& c, const std::vector<Eigen::Index>& active)
{
    RMatrix ca(static_cast<Eigen::Index>(active.size()), c.cols());
    for (std::size_t i = 0; i < active.size(); ++i)
        ca.row(static_cast<Eigen::Index>(i)) = c.row(active[i]);

    const double delta = 1e-9;
    const Eigen::Index n = p.rows();
    RMatrix k = p + delta * RMatrix::Identity(n, n);
    if (ca.rows() > 0)
        k += (ca.transpose() * ca) / delta;
    const Eigen::LLT<RMatrix> llt(k);
    Polished out;
    if (llt.info() != Eigen::Success)
        return out;

    RVector x = llt.solve(-q);
    RVector ya = ca * x / delta;
    for (int iter = 0; iter < 10; ++iter) {
        const RVector r1 = -q - p * x - ca.transpose() * ya;
        const RVector r2 = -ca * x;
        const RVector dx = llt.solve(r1 + ca.transpose() * r2 / delta);
        x += dx;
        ya += (ca * dx - r2) / delta;
    }
    out.x = x;
    out.ya = ya;

    const double scale = std::max({inf_norm(q), inf_norm(p * x), 1e-300});
    const double stationarity = inf_norm(p * x + q + ca.transpose() * ya) / scale;
    const double primal = (c * x).minCoeff();
    const double dual = ya.size() == 0 ? 0.0 : ya.maxCoeff();
    out.kkt_ok = stationarity <= 1e-9 && primal >= -1e-9 && dual <= 1e-9 * scale;
    return out;
}

// Active-set polish seeded by the ADMM iterate: rows with z_i < -y_i start
// active; each round adds violated rows and drops rows whose multiplier has
// the wrong sign.
Polished polish(const RMatrix& p, const RVector& q, const RMatrix& c, const RVector& z, const RVector& y)
{
    std::vector<char> in(static_cast<std::size_t>(c.rows()), 0);
    for (Eigen::Index i = 0; i < c.rows(); ++i)
        in[static_cast<std::size_t>(i)] = z[i] < -y[i];

    Polished best;
    for (int round = 0; round < 25; ++round) {
        std::vector<Eigen::Index> active;
        for (Eigen::Index i = 0; i < c.rows(); ++i)
            if (in[static_cast<std::size_t>(i)])
                active.push_back(i);
        Polished cur = solve_active(p, q, c, active);
        if (cur.x.size() == 0)
            return best;
        const bool feasible = (c * cur.x).minCoeff() >= -1e-9;
        if (feasible && (best.x.size() == 0 || quad_objective(p, q, cur.x) < quad_objective(p, q, best.x)))
            best = cur;
        if (cur.kkt_ok)
            return cur;

        const double scale = std::max({inf_norm(q), inf_norm(p * cur.x), 1e-300});
        bool changed = false;
        for (std::size_t i = 0; i < active.size(); ++i)
            if (cur.ya[static_cast<Eigen::Index>(i)] > 1e-9 * scale) {
                in[static_cast<std::size_t>(active[i])] = 0;
                changed = true;
            }
        const RVector cx = c * cur.x;
        for (Eigen::Index i = 0; i < c.rows(); ++i)
            if (cx[i] < -1e-9 && !in[static_cast<std::size_t>(i)]) {
                in[static_cast<std::size_t>(i)] = 1;
                changed = true;
            }
        if (!changed)
            break;
    }
    return best;
}

} // namespace

double min_density_constraint(const DesignSystem& system, const RVector& u, int grid_size)
{
    if (u.size() != system.size())
        throw std::invalid_argument("min_density_constraint: coefficient length mismatch");
    const RMatrix c = constraint_matrix(system, grid_size);
    return c.rows() == 0 ? 0.0 : (c * u).minCoeff();
}

EstimatorReport estimate_qp(const DesignSystem& system, const QpOptions& opt)
{
    if (opt.grid_size < system.continuous_count)
        throw std::invalid_argument("estimate_qp: constraint grid smaller than the dictionary");
    const auto start = std::chrono::steady_clock::now();

    RMatrix a;
    RVector f;
    stacked_system(system, a, f);
    RMatrix p = a.transpose() * a;
    RVector q = -(a.transpose() * f);
    const double cost_scale = std::max(p.diagonal().maxCoeff(), 1e-300);
    p /= cost_scale;
    q /= cost_scale;

    const RMatrix c = constraint_matrix(system, opt.grid_size);
    const Eigen::Index n = p.rows();
    const RMatrix ct = c.transpose();
    const RMatrix ctc = ct * c;
    double rho = opt.rho;
    Eigen::LLT<RMatrix> kkt;
    auto factor = [&]() {
        kkt.compute(p + opt.sigma * RMatrix::Identity(n, n) + rho * ctc);
        if (kkt.info() != Eigen::Success)
            throw NumericalError("estimate_qp: KKT factorisation failed");
    };
    factor();

    RVector x = RVector::Zero(n);
    RVector z = RVector::Zero(c.rows());
    RVector y = RVector::Zero(c.rows());

    EstimatorReport rep;
    rep.method = "qp";
    for (int it = 1; it <= opt.max_iter; ++it) {
        const RVector xt = kkt.solve(opt.sigma * x - q + ct * (rho * z - y));
        const RVector zt = c * xt;
        x = opt.alpha * xt + (1.0 - opt.alpha) * x;
        const RVector zr = opt.alpha * zt + (1.0 - opt.alpha) * z;
        const RVector znew = (zr + y / rho).cwiseMax(0.0);
        y += rho * (zr - znew);
        z = znew;
        rep.iterations = it;

        if (it % 10 == 0 || it == opt.max_iter) {
            const RVector cx = c * x;
            const RVector px = p * x;
            const RVector cty = ct * y;
            const double rp = inf_norm(cx - z);
            const double rd = inf_norm(px + q + cty);
            const double ep = opt.eps_abs + opt.eps_rel * std::max(inf_norm(cx), inf_norm(z));
            const double ed = opt.eps_abs + opt.eps_rel * std::max({inf_norm(px), inf_norm(cty), inf_norm(q)});
            rep.objective.push_back(weighted_residual(system, x));
            if (rp <= ep && rd <= ed) {
                rep.converged = true;
                break;
            }
            // rebalance the penalty when the scaled residuals drift apart
            if (it % 50 == 0) {
                const double sp = rp / std::max({inf_norm(cx), inf_norm(z), 1e-300});
                const double sd = rd / std::max({inf_norm(px), inf_norm(cty), inf_norm(q), 1e-300});
                const double proposal = std::clamp(rho * std::sqrt(sp / std::max(sd, 1e-300)), 1e-6, 1e6);
                if (proposal > 5.0 * rho || proposal < rho / 5.0) {
                    rho = proposal;
                    factor();
                }
            }
        }
    }

    // Dirac weights are bounded below by zero exactly, and the density rows
    // are restored by moving along b = 1, which every non-empty row sees with
    // weight at least one after row scaling
    auto make_feasible = [&](RVector v) {
        for (Eigen::Index i = 0; i < n; ++i)
            if (is_dirac(system.atoms[static_cast<std::size_t>(i)]))
                v[i] = std::max(v[i], 0.0);
        if (system.continuous_count > 0 && c.rows() > 0) {
            const double worst = (c * v).minCoeff();
            if (worst < 0.0)
                v.head(system.continuous_count).array() -= worst;
        }
        return v;
    };
    x = make_feasible(x);
    rep.objective.push_back(weighted_residual(system, x));

    if (opt.polish && c.rows() > 0) {
        const Polished pol = polish(p, q, c, z, y);
        if (pol.x.size() == n) {
            const RVector cand = make_feasible(pol.x);
            if (pol.kkt_ok || quad_objective(p, q, cand) < quad_objective(p, q, x)) {
                x = cand;
                rep.converged = rep.converged || pol.kkt_ok;
                rep.objective.push_back(weighted_residual(system, x));
            }
        }
    }

    rep.u = x;
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

} // namespace asfcov
