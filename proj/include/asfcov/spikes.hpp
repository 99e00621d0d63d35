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

#ifndef ASFCOV_SPIKES_HPP
#define ASFCOV_SPIKES_HPP

#include "asfcov/types.hpp"

#include <optional>
#include <vector>

namespace asfcov {

/// Eigenvalues below this floor are lifted to it inside the MDL products.
inline constexpr double kEigenvalueFloor = 1e-12;

/// Number of dominant eigenvalues (spikes) by minimum description length.
/// `eigenvalues` must be sorted in descending order; N >= 2.
int mdl_order(const RVector& eigenvalues, int n);

/// The MDL objective for every candidate order k = 0..M-1.
RVector mdl_metric(const RVector& eigenvalues, int n);

/// ||U_noise^H a(xi)||^2 at every grid point.
RVector music_pseudospectrum(const CMatrix& noise_basis, const RVector& grid);

struct PseudoSpectrum {
    RVector grid;
    RVector values;
};

struct SpikeEstimate {
    int order = 0;                   // number of accepted spikes
    int mdl_order = 0;               // order proposed by MDL before any shrinking
    std::vector<double> locations;   // ascending, in [-1, 1)
    std::optional<PseudoSpectrum> spectrum;
};

struct SpikeDetectorOptions {
    int grid_size = 4096;
    bool refine = true;
    bool keep_spectrum = false;
};

/// Uniform grid of `size` points on [-1, 1): -1 + 2 g / size.
RVector music_grid(int size);

/// MDL order selection followed by MUSIC on a uniform grid. The `order`
/// smallest strict interior local minima of the pseudo-spectrum are the
/// spike locations, optionally refined by a parabola through each minimum
/// and its two neighbours. If the spectrum has fewer local minima than the
/// MDL order, the order is reduced to the number found.
SpikeEstimate detect_spikes(const CMatrix& sample_cov_y, int n, const SpikeDetectorOptions& options = {});

} // namespace asfcov

#endif
