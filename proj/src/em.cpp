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

#include "asfcov/linalg.hpp"

#include <Eigen/Cholesky>

#include <chrono>
#include <cmath>

namespace asfcov {

namespace {

struct ModelFactor {
    Eigen::LLT<CMatrix> llt;
    double log_det = 0.0;
};

ModelFactor factor_model(const CMatrix& sigma)
{
    ModelFactor fac;
    fac.llt.compute(sigma);
    if (fac.llt.info() != Eigen::Success)
        throw NumericalError("model covariance is not positive definite");
    const CMatrix& l = fac.llt.matrixLLT();
    for (Eigen::Index i = 0; i < l.rows(); ++i)
        fac.log_det += 2.0 * std::log(l(i, i).real());
    return fac;
}

double likelihood_value(const ModelFactor& fac, const CMatrix& sample_cov_y)
{
    return fac.log_det + fac.llt.solve(sample_cov_y).trace().real();
}

void check_likelihood_args(const RVector& u, const DesignSystem& system, const CMatrix& sample_cov_y, double n0)
{
    if (u.size() != system.size())
        throw std::invalid_argument("neg_log_likelihood: coefficient length mismatch");
    if (sample_cov_y.rows() != system.m || sample_cov_y.cols() != system.m)
        throw std::invalid_argument("neg_log_likelihood: covariance size mismatch");
    if ((u.array() < 0.0).any())
        throw std::invalid_argument("neg_log_likelihood: coefficients must be non-negative");
    if (!(n0 >= 0.0))
        throw std::invalid_argument("neg_log_likelihood: noise power must be non-negative");
}

CMatrix model_covariance(const RVector& u, const DesignSystem& system, double n0)
{
    CMatrix sigma = reconstruct_covariance(system, u, system.nu);
    sigma.diagonal().array() += n0;
    return sigma;
}

} // namespace

double neg_log_likelihood(const RVector& u, const DesignSystem& system, const CMatrix& sample_cov_y, double n0)
{
    check_likelihood_args(u, system, sample_cov_y, n0);
    return likelihood_value(factor_model(model_covariance(u, system, n0)), sample_cov_y);
}

RVector neg_log_likelihood_gradient(const RVector& u, const DesignSystem& system, const CMatrix& sample_cov_y,
                                    double n0)
{
    check_likelihood_args(u, system, sample_cov_y, n0);
    const ModelFactor fac = factor_model(model_covariance(u, system, n0));
    const CMatrix inv = fac.llt.solve(CMatrix::Identity(system.m, system.m));
    const CMatrix g = inv - inv * sample_cov_y * inv;
    RVector grad(system.size());
    for (int i = 0; i < system.size(); ++i)
        grad[i] = toeplitz_trace_product(g, system.moments.col(i)).real();
    return grad;
}

EstimatorReport em_estimate(const CMatrix& sample_cov_y, int n, double n0, const DesignSystem& system,
                            const RVector& u0, const EmOptions& opt)
{
    if (!system.all_dirac())
        throw std::invalid_argument("em_estimate: all atoms must be Dirac (rank-one)");
    if (u0.size() != system.size())
        throw std::invalid_argument("em_estimate: initial coefficient length mismatch");
    if ((u0.array() < 0.0).any() || !u0.allFinite())
        throw std::invalid_argument("em_estimate: initial coefficients must be non-negative");
    if (!(n0 > 0.0))
        throw std::invalid_argument("em_estimate: noise power must be positive");
    if (n < 1)
        throw std::invalid_argument("em_estimate: need at least one snapshot");
    if (sample_cov_y.rows() != system.m || sample_cov_y.cols() != system.m)
        throw std::invalid_argument("em_estimate: covariance size mismatch");

    const auto start = std::chrono::steady_clock::now();
    const double epsilon = opt.epsilon > 0.0 ? opt.epsilon : 1e-4 * system.m;
    const CMatrix sy = hermitian_part(sample_cov_y);
    const CMatrix& d = system.moments;
    const Eigen::Index g = system.size();

    EstimatorReport rep;
    rep.method = "em";
    RVector u = u0;
    std::vector<Eigen::Index> active;
    for (Eigen::Index i = 0; i < g; ++i)
        active.push_back(i);
    std::vector<int> small_count(static_cast<std::size_t>(g), 0);

    auto factor_active = [&](CMatrix& da) {
        da.resize(system.m, static_cast<Eigen::Index>(active.size()));
        for (std::size_t k = 0; k < active.size(); ++k)
            da.col(static_cast<Eigen::Index>(k)) = d.col(active[k]);
        CMatrix sigma = CMatrix::Zero(system.m, system.m);
        for (std::size_t k = 0; k < active.size(); ++k) {
            const auto col = da.col(static_cast<Eigen::Index>(k));
            sigma.noalias() += u[active[k]] * (col * col.adjoint());
        }
        sigma.diagonal().array() += n0;
        return factor_model(sigma);
    };

    CMatrix da;
    ModelFactor fac = factor_active(da);
    double f_cur = likelihood_value(fac, sy);
    rep.objective.push_back(f_cur);

    for (int it = 1; it <= opt.max_iter; ++it) {
        // E-step statistics through X = Sy_model^{-1} D
        const CMatrix x = fac.llt.solve(da);
        const CMatrix sx = sy * x;
        RVector u_new = u;
        for (std::size_t k = 0; k < active.size(); ++k) {
            const Eigen::Index kk = static_cast<Eigen::Index>(k);
            const Eigen::Index i = active[k];
            const double ui = u[i];
            const double d1 = x.col(kk).dot(da.col(kk)).real();  // a^H Sy_model^{-1} a
            const double d2 = x.col(kk).dot(sx.col(kk)).real();  // a^H Sy_model^{-1} Sy Sy_model^{-1} a
            const double posterior_var = std::max(ui - ui * ui * d1, 0.0);
            u_new[i] = posterior_var + ui * ui * d2;
        }
        u = u_new;

        std::vector<Eigen::Index> kept;
        for (Eigen::Index i : active) {
            auto& cnt = small_count[static_cast<std::size_t>(i)];
            cnt = u[i] <= opt.prune_threshold ? cnt + 1 : 0;
            if (cnt >= opt.prune_patience)
                u[i] = 0.0;
            else
                kept.push_back(i);
        }
        active.swap(kept);

        fac = factor_active(da);
        const double f_new = likelihood_value(fac, sy);
        rep.objective.push_back(f_new);
        rep.iterations = it;
        const bool stop = f_cur - f_new <= epsilon;
        f_cur = f_new;
        if (stop) {
            rep.converged = true;
            break;
        }
    }
    rep.u = u;
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

EstimatorReport em_estimate(const SampleBatch& batch, const DesignSystem& system, const RVector& u0,
                            const EmOptions& options)
{
    return em_estimate(sample_covariance_y(batch), batch.size(), batch.noise_power, system, u0, options);
}

} // namespace asfcov
