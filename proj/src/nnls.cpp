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

#include <Eigen/QR>

#include <algorithm>
#include <vector>

namespace asfcov {

namespace {

// Least squares on the columns listed in `passive`.
RVector passive_solve(const RMatrix& a, const RVector& f, const std::vector<Eigen::Index>& passive)
{
    RMatrix sub(a.rows(), static_cast<Eigen::Index>(passive.size()));
    for (std::size_t i = 0; i < passive.size(); ++i)
        sub.col(static_cast<Eigen::Index>(i)) = a.col(passive[i]);
    return sub.colPivHouseholderQr().solve(f);
}

} // namespace

NnlsResult nnls(const RMatrix& a, const RVector& f, double tol, int max_outer)
{
    const Eigen::Index n = a.cols();
    if (n < 1)
        throw std::invalid_argument("nnls: A needs at least one column");
    if (a.rows() != f.size())
        throw std::invalid_argument("nnls: dimension mismatch");
    if (max_outer <= 0)
        max_outer = static_cast<int>(3 * n);

    NnlsResult res;
    res.x = RVector::Zero(n);
    const double scale = (a.transpose() * f).cwiseAbs().maxCoeff();
    if (!(scale > 0.0)) {
        res.converged = true;
        return res;
    }
    const double threshold = tol * scale;

    std::vector<bool> in_passive(static_cast<std::size_t>(n), false);
    std::vector<bool> blocked(static_cast<std::size_t>(n), false);
    RVector& x = res.x;

    while (true) {
        const RVector w = a.transpose() * (f - a * x);
        Eigen::Index t = -1;
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            if (in_passive[ju] || blocked[ju] || w[j] <= threshold)
                continue;
            if (t < 0 || w[j] > w[t])
                t = j;
        }
        if (t < 0) {
            res.converged = true;
            break;
        }
        if (res.iterations >= max_outer)
            break;
        ++res.iterations;
        in_passive[static_cast<std::size_t>(t)] = true;

        bool first = true;
        while (true) {
            std::vector<Eigen::Index> passive;
            for (Eigen::Index j = 0; j < n; ++j)
                if (in_passive[static_cast<std::size_t>(j)])
                    passive.push_back(j);
            const RVector z = passive_solve(a, f, passive);

            if (first) {
                first = false;
                // a column that cannot enter with a positive weight is a
                // round-off artefact of w; skip it until x moves again
                const auto pos = std::find(passive.begin(), passive.end(), t) - passive.begin();
                if (z[pos] <= 0.0) {
                    in_passive[static_cast<std::size_t>(t)] = false;
                    blocked[static_cast<std::size_t>(t)] = true;
                    break;
                }
            }

            double step = 1.0;
            std::size_t limiting = passive.size();
            for (std::size_t i = 0; i < passive.size(); ++i) {
                const double zi = z[static_cast<Eigen::Index>(i)];
                if (zi <= 0.0) {
                    const double xi = x[passive[i]];
                    const double s = xi > 0.0 ? xi / (xi - zi) : 0.0;
                    if (limiting == passive.size() || s < step) {
                        step = s;
                        limiting = i;
                    }
                }
            }
            if (limiting == passive.size()) {
                for (std::size_t i = 0; i < passive.size(); ++i)
                    x[passive[i]] = z[static_cast<Eigen::Index>(i)];
                std::fill(blocked.begin(), blocked.end(), false);
                break;
            }
            for (std::size_t i = 0; i < passive.size(); ++i) {
                const Eigen::Index j = passive[i];
                x[j] += step * (z[static_cast<Eigen::Index>(i)] - x[j]);
                if (i == limiting || x[j] <= 0.0) {
                    x[j] = 0.0;
                    in_passive[static_cast<std::size_t>(j)] = false;
                }
            }
            std::fill(blocked.begin(), blocked.end(), false);
            if (std::none_of(in_passive.begin(), in_passive.end(), [](bool b) { return b; }))
                break;
        }
    }
    return res;
}

} // namespace asfcov
