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

#include "asfcov/quadrature.hpp"

#include <cmath>

namespace asfcov {

namespace {

constexpr int kNodesPerPanel = 64;
constexpr int kMaxPanels = 4096;
constexpr double kRelTol = 1e-10;

const GaussLegendreRule& default_rule()
{
    static const GaussLegendreRule rule = gauss_legendre(kNodesPerPanel);
    return rule;
}

CVector accumulate_panels(const LagIntegrand& integrand, double t0, double t1, int panels, int m, double nu)
{
    const GaussLegendreRule& rule = default_rule();
    CVector lags = CVector::Zero(m);
    const double width = (t1 - t0) / panels;
    for (int p = 0; p < panels; ++p) {
        const double a = t0 + p * width;
        const double half = 0.5 * width;
        const double mid = a + half;
        for (std::size_t n = 0; n < rule.nodes.size(); ++n) {
            const double t = mid + half * rule.nodes[n];
            const auto [xi, g] = integrand(t);
            const double w = half * rule.weights[n] * g;
            if (w == 0.0)
                continue;
            const double phase = kPi * nu * xi;
            const cdouble step = std::polar(1.0, phase);
            cdouble z = 1.0;
            for (int k = 0; k < m; ++k) {
                // resynchronise the recurrence to keep rounding error bounded
                if (k % 32 == 0)
                    z = std::polar(1.0, phase * k);
                lags[k] += w * z;
                z *= step;
            }
        }
    }
    return lags;
}

} // namespace

GaussLegendreRule gauss_legendre(int n)
{
    if (n < 1)
        throw std::invalid_argument("gauss_legendre: n must be positive");
    if (n == 1)
        return {{0.0}, {2.0}};

    // Legendre P_n(x) and its derivative by the three-term recurrence.
    const auto legendre = [n](double x) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        return std::pair<double, double>{p1, n * (x * p1 - p0) / (x * x - 1.0)};
    };

    GaussLegendreRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            const auto [p, dp] = legendre(x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        const double dp = legendre(x).second;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[static_cast<std::size_t>(i)] = -x;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    if (n % 2 == 1)
        rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return rule;
}

LagQuadratureResult lag_quadrature(const LagIntegrand& integrand, double t0, double t1, int m, double nu)
{
    if (m < 1)
        throw std::invalid_argument("lag_quadrature: m must be positive");
    LagQuadratureResult out;
    if (!(t1 > t0)) {
        out.lags = CVector::Zero(m);
        out.converged = true;
        return out;
    }
    int panels = 1;
    CVector prev = accumulate_panels(integrand, t0, t1, panels, m, nu);
    while (panels < kMaxPanels) {
        panels *= 2;
        CVector next = accumulate_panels(integrand, t0, t1, panels, m, nu);
        const double scale = std::max(next.cwiseAbs().maxCoeff(), 1e-300);
        const double diff = (next - prev).cwiseAbs().maxCoeff();
        prev = std::move(next);
        if (diff <= kRelTol * scale) {
            out.converged = true;
            break;
        }
    }
    out.lags = std::move(prev);
    out.panels = panels;
    return out;
}

CVector density_lags(const std::function<double(double)>& density, double lo, double hi, int m, double nu)
{
    return lag_quadrature([&](double t) { return std::pair<double, double>{t, density(t)}; }, lo, hi, m, nu).lags;
}

double integrate(const std::function<double(double)>& f, double lo, double hi)
{
    return density_lags(f, lo, hi, 1, 1.0)[0].real();
}

} // namespace asfcov
