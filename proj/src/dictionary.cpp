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

#include "asfcov/dictionary.hpp"

#include "asfcov/channel.hpp"
#include "asfcov/linalg.hpp"
#include "asfcov/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace asfcov {

namespace {

double gauss_kernel(double x, double sigma)
{
    const double z = x / sigma;
    return std::exp(-0.5 * z * z);
}

std::pair<double, double> clipped_support(const TruncGaussAtom& a)
{
    return {std::max(-1.0, a.center - a.half_width), std::min(1.0, a.center + a.half_width)};
}

// xi = -cos(theta) maps [0, pi] onto [-1, 1]; J(xi) dxi = dtheta.
double theta_of(double xi)
{
    return std::acos(std::clamp(-xi, -1.0, 1.0));
}

double unnormalized_mass(const TruncGaussAtom& a)
{
    const auto [lo, hi] = clipped_support(a);
    if (a.skewed)
        return integrate([&](double t) { return gauss_kernel(-std::cos(t) - a.center, a.sigma); }, theta_of(lo),
                         theta_of(hi));
    return integrate([&](double x) { return gauss_kernel(x - a.center, a.sigma); }, lo, hi);
}

CVector gauss_moment_column(const TruncGaussAtom& a, int m, double nu)
{
    const auto [lo, hi] = clipped_support(a);
    if (a.skewed) {
        const LagIntegrand integrand = [&](double t) {
            const double xi = -std::cos(t);
            return std::pair<double, double>{xi, a.normalizer * gauss_kernel(xi - a.center, a.sigma)};
        };
        const LagQuadratureResult res = lag_quadrature(integrand, theta_of(lo), theta_of(hi), m, nu);
        if (!res.converged)
            throw NumericalError("atom_moment_column: quadrature did not converge");
        return res.lags;
    }
    return density_lags([&](double x) { return a.normalizer * gauss_kernel(x - a.center, a.sigma); }, lo, hi, m, nu);
}

using CacheKey = std::tuple<double, double, double, bool, int, double>;

std::mutex& cache_mutex()
{
    static std::mutex mutex;
    return mutex;
}

std::map<CacheKey, CVector>& moment_cache()
{
    static std::map<CacheKey, CVector> cache;
    return cache;
}

} // namespace

TruncGaussAtom make_trunc_gauss_atom(double center, double sigma, double half_width, bool skewed)
{
    if (!(sigma > 0.0) || !(half_width > 0.0) || !std::isfinite(center))
        throw std::invalid_argument("make_trunc_gauss_atom: sigma and half_width must be positive");
    TruncGaussAtom a{center, sigma, half_width, skewed, 1.0};
    const auto [lo, hi] = clipped_support(a);
    if (!(hi > lo))
        throw std::invalid_argument("make_trunc_gauss_atom: support does not meet [-1, 1]");
    const double mass = unnormalized_mass(a);
    if (!(mass > 0.0))
        throw std::invalid_argument("make_trunc_gauss_atom: zero mass");
    a.normalizer = 1.0 / mass;
    return a;
}

bool is_dirac(const Atom& atom)
{
    return std::holds_alternative<DiracAtom>(atom);
}

std::string atom_kind(const Atom& atom)
{
    if (std::holds_alternative<DiracAtom>(atom))
        return "dirac";
    if (std::holds_alternative<TruncGaussAtom>(atom))
        return "gauss";
    return "rect";
}

std::pair<double, double> atom_support(const Atom& atom)
{
    if (const auto* d = std::get_if<DiracAtom>(&atom))
        return {d->location, d->location};
    if (const auto* g = std::get_if<TruncGaussAtom>(&atom))
        return clipped_support(*g);
    const auto& r = std::get<RectAtom>(atom);
    return {r.alpha, r.beta};
}

double atom_density(const Atom& atom, double xi)
{
    if (is_dirac(atom))
        throw std::invalid_argument("atom_density: Dirac atoms have no density");
    if (const auto* r = std::get_if<RectAtom>(&atom))
        return (xi >= r->alpha && xi <= r->beta) ? 1.0 / (r->beta - r->alpha) : 0.0;
    const auto& g = std::get<TruncGaussAtom>(atom);
    const auto [lo, hi] = clipped_support(g);
    if (xi < lo || xi > hi)
        return 0.0;
    double value = g.normalizer * gauss_kernel(xi - g.center, g.sigma);
    if (g.skewed)
        value /= std::sqrt(std::max(0.0, 1.0 - xi * xi));
    return value;
}

double atom_mass(const Atom& atom)
{
    if (const auto* g = std::get_if<TruncGaussAtom>(&atom))
        return g->normalizer * unnormalized_mass(*g);
    return 1.0;
}

CVector atom_moment_column(const Atom& atom, int m, double nu)
{
    if (m < 1)
        throw std::invalid_argument("atom_moment_column: M must be positive");
    if (const auto* d = std::get_if<DiracAtom>(&atom))
        return array_response(m, d->location, nu);
    if (const auto* r = std::get_if<RectAtom>(&atom)) {
        if (!(r->beta > r->alpha))
            throw std::invalid_argument("atom_moment_column: empty rect");
        CVector col(m);
        const double inv_width = 1.0 / (r->beta - r->alpha);
        for (int k = 0; k < m; ++k)
            col[k] = rect_lag(r->alpha, r->beta, k, nu) * inv_width;
        return col;
    }
    const auto& g = std::get<TruncGaussAtom>(atom);
    const CacheKey key{g.center, g.sigma, g.half_width, g.skewed, m, nu};
    {
        std::lock_guard<std::mutex> lock(cache_mutex());
        const auto it = moment_cache().find(key);
        if (it != moment_cache().end())
            return it->second;
    }
    CVector col = gauss_moment_column(g, m, nu);
    std::lock_guard<std::mutex> lock(cache_mutex());
    moment_cache().emplace(key, col);
    return col;
}

std::vector<Atom> dirac_grid(int g)
{
    if (g < 1)
        throw std::invalid_argument("dirac_grid: G must be positive");
    std::vector<Atom> atoms;
    atoms.reserve(static_cast<std::size_t>(g));
    for (int i = 0; i < g; ++i)
        atoms.emplace_back(DiracAtom{-1.0 + (2.0 * i + 1.0) / g});
    return atoms;
}

std::vector<Atom> gaussian_family(int g)
{
    if (g < 1)
        throw std::invalid_argument("gaussian_family: G must be positive");
    const double denom = g + 3.0;
    const double sigma = 4.0 / (3.0 * denom);
    const double half_width = 4.0 / denom;
    std::vector<Atom> atoms;
    atoms.reserve(static_cast<std::size_t>(g));
    for (int i = 1; i <= g; ++i)
        atoms.emplace_back(make_trunc_gauss_atom(-1.0 + 2.0 * (i + 1) / denom, sigma, half_width, true));
    return atoms;
}

std::vector<Atom> make_dictionary(const std::string& kind, int g)
{
    if (kind == "dirac")
        return dirac_grid(g);
    if (kind == "gauss")
        return gaussian_family(g);
    throw std::invalid_argument("unknown dictionary kind '" + kind + "'");
}

bool DesignSystem::all_dirac() const
{
    for (const Atom& a : atoms)
        if (!is_dirac(a))
            return false;
    return true;
}

RVector design_weights(int m)
{
    RVector w(m);
    w[0] = std::sqrt(static_cast<double>(m));
    for (int k = 1; k < m; ++k)
        w[k] = std::sqrt(2.0 * (m - k));
    return w;
}

DesignSystem assemble_design(const std::vector<Atom>& continuous_atoms, const std::vector<double>& spike_locations,
                             const CMatrix& sample_cov_h, double nu)
{
    if (sample_cov_h.rows() != sample_cov_h.cols() || sample_cov_h.rows() < 1)
        throw std::invalid_argument("assemble_design: covariance must be square");
    if (!(nu > 0.0))
        throw std::invalid_argument("assemble_design: nu must be positive");
    for (double phi : spike_locations)
        if (!(phi >= -1.0 && phi < 1.0))
            throw std::invalid_argument("assemble_design: spike location outside [-1, 1)");

    DesignSystem sys;
    sys.m = static_cast<int>(sample_cov_h.rows());
    sys.nu = nu;
    sys.atoms = continuous_atoms;
    sys.continuous_count = static_cast<int>(continuous_atoms.size());
    for (double phi : spike_locations)
        sys.atoms.emplace_back(DiracAtom{phi});
    if (sys.atoms.empty())
        throw std::invalid_argument("assemble_design: no atoms");

    sys.moments.resize(sys.m, sys.size());
    for (int i = 0; i < sys.size(); ++i)
        sys.moments.col(i) = atom_moment_column(sys.atoms[static_cast<std::size_t>(i)], sys.m, nu);
    sys.weights = design_weights(sys.m);
    sys.target = toeplitz_project(sample_cov_h).first_column;
    return sys;
}

CVector reconstruct_lags(const DesignSystem& system, const RVector& u, double nu_out)
{
    if (u.size() != system.size())
        throw std::invalid_argument("reconstruct_covariance: coefficient length mismatch");
    if (nu_out == system.nu)
        return system.moments * u.cast<cdouble>();
    CVector lags = CVector::Zero(system.m);
    for (int i = 0; i < system.size(); ++i)
        if (u[i] != 0.0)
            lags += u[i] * atom_moment_column(system.atoms[static_cast<std::size_t>(i)], system.m, nu_out);
    return lags;
}

CMatrix reconstruct_covariance(const DesignSystem& system, const RVector& u, double nu_out)
{
    return toeplitz_from_first_column(reconstruct_lags(system, u, nu_out));
}

RMatrix density_matrix(const std::vector<Atom>& atoms, int grid_size)
{
    if (grid_size < 1)
        throw std::invalid_argument("density_matrix: empty grid");
    RMatrix psi = RMatrix::Zero(grid_size, static_cast<Eigen::Index>(atoms.size()));
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (is_dirac(atoms[i]))
            continue;
        const auto [lo, hi] = atom_support(atoms[i]);
        for (int j = 0; j < grid_size; ++j) {
            const double xi = -1.0 + (2.0 * j + 1.0) / grid_size;
            if (xi >= lo && xi <= hi)
                psi(j, static_cast<Eigen::Index>(i)) = atom_density(atoms[i], xi);
        }
    }
    return psi;
}

} // namespace asfcov
