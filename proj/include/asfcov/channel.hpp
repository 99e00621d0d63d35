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

#ifndef ASFCOV_CHANNEL_HPP
#define ASFCOV_CHANNEL_HPP

#include "asfcov/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <filesystem>
#include <variant>
#include <vector>

namespace asfcov {

// ----- Angular scattering function ------------------------------------------

/// Discrete (specular) path: Dirac of weight `weight` at normalised angle `location`.
struct Spike {
    double location = 0.0;
    double weight = 0.0;
};

/// Constant density `height` on [alpha, beta].
struct RectPiece {
    double alpha = -1.0;
    double beta = 1.0;
    double height = 0.0;
};

/// Gaussian bump truncated to center +- half_width (and to [-1, 1]),
/// scaled to carry `mass`.
struct TruncatedGaussianPiece {
    double center = 0.0;
    double sigma = 0.1;
    double half_width = 0.3;
    double mass = 0.0;
};

/// Histogram density: values[i] on the i-th of n equal cells of [-1, 1].
struct GridDensityPiece {
    std::vector<double> values;
};

using AsfPiece = std::variant<RectPiece, TruncatedGaussianPiece, GridDensityPiece>;

/// Mixed angular scattering function: spikes plus a continuous part.
struct Asf {
    std::vector<Spike> spikes;
    std::vector<AsfPiece> pieces;

    double spike_mass() const;
    double continuous_mass() const;
    double total_mass() const { return spike_mass() + continuous_mass(); }

    /// Continuous-part density at xi (spikes excluded).
    double density(double xi) const;

    /// Throws std::invalid_argument when the invariants do not hold.
    void validate() const;
};

double piece_mass(const AsfPiece& piece);
double piece_density(const AsfPiece& piece, double xi);

/// Two unit-height rects on [-0.7,-0.4] and [0,0.6] plus spikes of weight 0.5
/// at -0.2 and 0.4 (total mass 1.9). Reference scene for the spike detector.
Asf reference_scene();

// ----- Array response and covariance synthesis ------------------------------

/// ULA response: element m = exp(j pi nu m xi), m = 0..M-1.
CVector array_response(int m, double xi, double nu = 1.0);

/// Lags k = 0..M-1 of int gamma(xi) exp(j pi nu k xi) dxi, i.e. the first
/// column of the covariance at wavelength scale nu.
CVector piece_lags(const AsfPiece& piece, int m, double nu);
CVector asf_lags(const Asf& asf, int m, double nu = 1.0);

/// Closed-form lag integral of a unit-height rect on [alpha, beta].
cdouble rect_lag(double alpha, double beta, int k, double nu);

/// Hermitian Toeplitz channel covariance of `asf` for an M-element ULA.
CMatrix asf_covariance(const Asf& asf, int m, double nu = 1.0);

/// Noise power giving the per-antenna SNR `snr_db` for a channel of power `signal_power`.
double noise_power_for_snr(double signal_power, double snr_db);

// ----- Snapshots ------------------------------------------------------------

/// N noisy pilot observations y[s] = h[s] + z[s] stored column-wise (M x N).
struct SampleBatch {
    CMatrix snapshots;
    double noise_power = 0.0;
    std::uint64_t seed = 0;

    int antennas() const { return static_cast<int>(snapshots.rows()); }
    int size() const { return static_cast<int>(snapshots.cols()); }
};

/// Draws N snapshots with channel covariance `cov_h` and white noise of
/// power n0. Deterministic in (seed, stream).
SampleBatch draw_samples(const CMatrix& cov_h, double n0, int n, std::uint64_t seed, std::uint64_t stream = 0);

/// (1/N) sum_s y[s] y[s]^H
CMatrix sample_covariance_y(const SampleBatch& batch);

/// sample_covariance_y(batch) - N0 I; may be indefinite.
CMatrix sample_covariance_h(const SampleBatch& batch);

// ----- Random scenes --------------------------------------------------------

struct RandomAsfParams {
    int min_spikes = 0;
    int max_spikes = 3;
    int min_clusters = 1;
    int max_clusters = 3;
    double spike_fraction = 0.5; // share of total power in spikes when both kinds are present
    double min_width = 0.05;
    double max_width = 0.4;
    std::uint64_t seed = 0;
};

/// Random unit-mass scene: uniform spike locations on [-1, 1) and rect
/// clusters of random width and position.
Asf random_mixed_asf(const RandomAsfParams& params);

// ----- Serialisation --------------------------------------------------------

void write_asf(std::ostream& out, const Asf& asf);
Asf read_asf(std::istream& in);
void write_asf(const std::filesystem::path& path, const Asf& asf);
Asf read_asf(const std::filesystem::path& path);

/// CMX1 matrix (M x N) with a "# N0=<v> seed=<s>" metadata line.
void write_batch(const std::filesystem::path& path, const SampleBatch& batch);
SampleBatch read_batch(const std::filesystem::path& path);
SampleBatch read_batch(std::istream& in);

} // namespace asfcov

#endif
