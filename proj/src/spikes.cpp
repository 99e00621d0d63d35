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

#include "asfcov/spikes.hpp"

#include "asfcov/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace asfcov {

namespace {

// Columns are a(xi_g) for every grid point.
CMatrix steering_matrix(int m, const RVector& grid)
{
    CMatrix a(m, grid.size());
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
        const double phase = kPi * grid[g];
        const cdouble step = std::polar(1.0, phase);
        cdouble z = 1.0;
        for (int k = 0; k < m; ++k) {
            if (k % 32 == 0)
                z = std::polar(1.0, phase * k);
            a(k, g) = z;
            z *= step;
        }
    }
    return a;
}

RVector projected_energy(const CMatrix& basis, const CMatrix& steering)
{
    const CMatrix proj = basis.adjoint() * steering;
    return proj.colwise().squaredNorm().transpose();
}

} // namespace

RVector mdl_metric(const RVector& eigenvalues, int n)
{
    const Eigen::Index m = eigenvalues.size();
    if (m < 2)
        throw std::invalid_argument("mdl_order: need at least two eigenvalues");
    if (n < 2)
        throw std::invalid_argument("mdl_order: need at least two snapshots");
    for (Eigen::Index i = 1; i < m; ++i)
        if (eigenvalues[i] > eigenvalues[i - 1])
            throw std::invalid_argument("mdl_order: eigenvalues must be sorted in descending order");

    const RVector lambda = eigenvalues.cwiseMax(kEigenvalueFloor);
    const double log_n = std::log(static_cast<double>(n));

    // suffix sums give the mean of the M-k smallest eigenvalues
    RVector tail(m + 1);
    tail[m] = 0.0;
    for (Eigen::Index i = m - 1; i >= 0; --i)
        tail[i] = tail[i + 1] + lambda[i];

    RVector metric(m);
    double log_head = 0.0; // sum_{i<k} log lambda_i
    for (Eigen::Index k = 0; k < m; ++k) {
        const double rest = static_cast<double>(m - k);
        const double log_a = std::log(tail[k] / rest);
        // b(k) = (prod_{i<k} lambda_i)^{-1/(M-k)}, b(0) = 1
        const double log_b = -log_head / rest;
        const double likelihood = static_cast<double>(n) * rest * (log_a - log_b);
        const double penalty = 0.5 * static_cast<double>(k) * static_cast<double>(2 * m - k) * log_n;
        metric[k] = likelihood + penalty;
        log_head += std::log(lambda[k]);
    }
    return metric;
}

int mdl_order(const RVector& eigenvalues, int n)
{
    const RVector metric = mdl_metric(eigenvalues, n);
    if (eigenvalues.maxCoeff() <= kEigenvalueFloor)
        return 0;
    int best = 0;
    for (Eigen::Index k = 1; k < metric.size(); ++k)
        if (metric[k] < metric[best])
            best = static_cast<int>(k);
    return best;
}

RVector music_grid(int size)
{
    if (size < 3)
        throw std::invalid_argument("music_grid: need at least three points");
    RVector grid(size);
    for (int g = 0; g < size; ++g)
        grid[g] = -1.0 + 2.0 * g / static_cast<double>(size);
    return grid;
}

RVector music_pseudospectrum(const CMatrix& noise_basis, const RVector& grid)
{
    if (grid.size() == 0)
        throw std::invalid_argument("music_pseudospectrum: empty grid");
    if (noise_basis.cols() == 0 || noise_basis.cols() > noise_basis.rows())
        throw std::invalid_argument("music_pseudospectrum: noise subspace must have 1..M columns");
    const int m = static_cast<int>(noise_basis.rows());
    return projected_energy(noise_basis, steering_matrix(m, grid)).cwiseMax(0.0).cwiseMin(m);
}

SpikeEstimate detect_spikes(const CMatrix& sample_cov_y, int n, const SpikeDetectorOptions& options)
{
    const HermitianEig eig = hermitian_eig(sample_cov_y);
    const int m = static_cast<int>(eig.values.size());

    SpikeEstimate est;
    est.mdl_order = mdl_order(eig.values, n);
    const int order = est.mdl_order;

    const RVector grid = music_grid(options.grid_size);
    const CMatrix steering = steering_matrix(m, grid);
    RVector spectrum;
    if (order < m - order) {
        // cheaper through the signal subspace: ||a||^2 = M
        const RVector signal =
            order == 0 ? RVector::Zero(grid.size()) : projected_energy(eig.vectors.leftCols(order), steering);
        spectrum = (static_cast<double>(m) - signal.array()).matrix();
    } else {
        spectrum = projected_energy(eig.vectors.rightCols(m - order), steering);
    }
    spectrum = spectrum.cwiseMax(0.0).cwiseMin(static_cast<double>(m));

    if (order > 0) {
        std::vector<Eigen::Index> minima;
        for (Eigen::Index g = 1; g + 1 < spectrum.size(); ++g)
            if (spectrum[g] < spectrum[g - 1] && spectrum[g] < spectrum[g + 1])
                minima.push_back(g);
        std::stable_sort(minima.begin(), minima.end(),
                         [&](Eigen::Index i, Eigen::Index j) { return spectrum[i] < spectrum[j]; });
        if (static_cast<int>(minima.size()) > order)
            minima.resize(static_cast<std::size_t>(order));

        const double step = 2.0 / static_cast<double>(options.grid_size);
        for (Eigen::Index g : minima) {
            double xi = grid[g];
            if (options.refine) {
                const double left = spectrum[g - 1];
                const double mid = spectrum[g];
                const double right = spectrum[g + 1];
                const double curvature = left - 2.0 * mid + right;
                if (curvature > 0.0) {
                    const double offset = 0.5 * (left - right) / curvature;
                    xi += std::clamp(offset, -0.5, 0.5) * step;
                }
            }
            xi = std::clamp(xi, -1.0, std::nextafter(1.0, -1.0));
            est.locations.push_back(xi);
        }
        std::sort(est.locations.begin(), est.locations.end());
        est.locations.erase(std::unique(est.locations.begin(), est.locations.end()), est.locations.end());
    }
    est.order = static_cast<int>(est.locations.size());
    if (options.keep_spectrum)
        est.spectrum = PseudoSpectrum{grid, spectrum};
    return est;
}

} // namespace asfcov
