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

#include "asfcov/channel.hpp"

#include "asfcov/cmx.hpp"
#include "asfcov/kvtext.hpp"
#include "asfcov/linalg.hpp"
#include "asfcov/quadrature.hpp"
#include "asfcov/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace asfcov {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::pair<double, double> gaussian_support(const TruncatedGaussianPiece& g)
{
    return {std::max(-1.0, g.center - g.half_width), std::min(1.0, g.center + g.half_width)};
}

// Integral of exp(-(x-c)^2 / 2 s^2) over [lo, hi].
double gaussian_integral(double c, double s, double lo, double hi)
{
    const double k = s * std::sqrt(kPi / 2.0);
    return k * (std::erf((hi - c) / (s * std::sqrt(2.0))) - std::erf((lo - c) / (s * std::sqrt(2.0))));
}

} // namespace

// ----- Asf ------------------------------------------------------------------

double piece_mass(const AsfPiece& piece)
{
    return std::visit(overloaded{
                          [](const RectPiece& r) { return r.height * (r.beta - r.alpha); },
                          [](const TruncatedGaussianPiece& g) { return g.mass; },
                          [](const GridDensityPiece& d) {
                              double sum = 0.0;
                              for (double v : d.values)
                                  sum += v;
                              return d.values.empty() ? 0.0 : sum * 2.0 / static_cast<double>(d.values.size());
                          },
                      },
                      piece);
}

double piece_density(const AsfPiece& piece, double xi)
{
    return std::visit(overloaded{
                          [xi](const RectPiece& r) { return (xi >= r.alpha && xi <= r.beta) ? r.height : 0.0; },
                          [xi](const TruncatedGaussianPiece& g) {
                              const auto [lo, hi] = gaussian_support(g);
                              if (xi < lo || xi > hi)
                                  return 0.0;
                              const double z = (xi - g.center) / g.sigma;
                              return g.mass * std::exp(-0.5 * z * z) / gaussian_integral(g.center, g.sigma, lo, hi);
                          },
                          [xi](const GridDensityPiece& d) {
                              if (d.values.empty() || xi < -1.0 || xi > 1.0)
                                  return 0.0;
                              const auto n = d.values.size();
                              auto cell = static_cast<std::size_t>((xi + 1.0) / 2.0 * static_cast<double>(n));
                              return d.values[std::min(cell, n - 1)];
                          },
                      },
                      piece);
}

double Asf::spike_mass() const
{
    double sum = 0.0;
    for (const auto& s : spikes)
        sum += s.weight;
    return sum;
}

double Asf::continuous_mass() const
{
    double sum = 0.0;
    for (const auto& p : pieces)
        sum += piece_mass(p);
    return sum;
}

double Asf::density(double xi) const
{
    double sum = 0.0;
    for (const auto& p : pieces)
        sum += piece_density(p, xi);
    return sum;
}

void Asf::validate() const
{
    if (spikes.empty() && pieces.empty())
        throw std::invalid_argument("Asf: no components");
    for (std::size_t i = 0; i < spikes.size(); ++i) {
        const auto& s = spikes[i];
        if (!(s.location >= -1.0 && s.location < 1.0))
            throw std::invalid_argument("Asf: spike location outside [-1, 1)");
        if (!(s.weight > 0.0) || !std::isfinite(s.weight))
            throw std::invalid_argument("Asf: spike weight must be positive");
        for (std::size_t j = 0; j < i; ++j)
            if (spikes[j].location == s.location)
                throw std::invalid_argument("Asf: duplicate spike location");
    }
    for (const auto& p : pieces) {
        std::visit(overloaded{
                       [](const RectPiece& r) {
                           if (!(r.alpha >= -1.0 && r.alpha < r.beta && r.beta <= 1.0))
                               throw std::invalid_argument("Asf: rect needs -1 <= alpha < beta <= 1");
                           if (!(r.height >= 0.0) || !std::isfinite(r.height))
                               throw std::invalid_argument("Asf: rect height must be non-negative");
                       },
                       [](const TruncatedGaussianPiece& g) {
                           if (!(g.sigma > 0.0) || !(g.half_width > 0.0) || !(g.mass >= 0.0))
                               throw std::invalid_argument("Asf: bad truncated Gaussian parameters");
                           const auto [lo, hi] = gaussian_support(g);
                           if (!(hi > lo))
                               throw std::invalid_argument("Asf: truncated Gaussian outside [-1, 1]");
                       },
                       [](const GridDensityPiece& d) {
                           if (d.values.empty())
                               throw std::invalid_argument("Asf: empty grid density");
                           for (double v : d.values)
                               if (!(v >= 0.0) || !std::isfinite(v))
                                   throw std::invalid_argument("Asf: grid density values must be non-negative");
                       },
                   },
                   p);
    }
    const double mass = total_mass();
    if (!(mass > 0.0) || !std::isfinite(mass))
        throw std::invalid_argument("Asf: total mass must be positive and finite");
}

Asf reference_scene()
{
    Asf asf;
    asf.pieces.push_back(RectPiece{-0.7, -0.4, 1.0});
    asf.pieces.push_back(RectPiece{0.0, 0.6, 1.0});
    asf.spikes.push_back(Spike{-0.2, 0.5});
    asf.spikes.push_back(Spike{0.4, 0.5});
    return asf;
}

// ----- Covariance synthesis -------------------------------------------------

CVector array_response(int m, double xi, double nu)
{
    if (m < 1)
        throw std::invalid_argument("array_response: M must be positive");
    CVector a(m);
    for (int k = 0; k < m; ++k)
        a[k] = std::polar(1.0, kPi * nu * k * xi);
    return a;
}

cdouble rect_lag(double alpha, double beta, int k, double nu)
{
    const double width = beta - alpha;
    if (k == 0)
        return width;
    // (e^{jw beta} - e^{jw alpha}) / (jw), written with sinc to stay accurate for small w*width
    const double w = kPi * nu * k;
    const double x = 0.5 * w * width;
    const double sinc = (std::abs(x) < 1e-8) ? 1.0 - x * x / 6.0 : std::sin(x) / x;
    return width * sinc * std::polar(1.0, 0.5 * w * (alpha + beta));
}

CVector piece_lags(const AsfPiece& piece, int m, double nu)
{
    return std::visit(
        overloaded{
            [m, nu](const RectPiece& r) {
                CVector lags(m);
                for (int k = 0; k < m; ++k)
                    lags[k] = r.height * rect_lag(r.alpha, r.beta, k, nu);
                return lags;
            },
            [m, nu](const TruncatedGaussianPiece& g) {
                const auto [lo, hi] = gaussian_support(g);
                const double scale = g.mass / gaussian_integral(g.center, g.sigma, lo, hi);
                const auto density = [&](double xi) {
                    const double z = (xi - g.center) / g.sigma;
                    return scale * std::exp(-0.5 * z * z);
                };
                return density_lags(density, lo, hi, m, nu);
            },
            [m, nu](const GridDensityPiece& d) {
                CVector lags = CVector::Zero(m);
                const double cell = 2.0 / static_cast<double>(d.values.size());
                for (std::size_t i = 0; i < d.values.size(); ++i) {
                    if (d.values[i] == 0.0)
                        continue;
                    const double a = -1.0 + cell * static_cast<double>(i);
                    for (int k = 0; k < m; ++k)
                        lags[k] += d.values[i] * rect_lag(a, a + cell, k, nu);
                }
                return lags;
            },
        },
        piece);
}

CVector asf_lags(const Asf& asf, int m, double nu)
{
    asf.validate();
    if (!(nu > 0.0))
        throw std::invalid_argument("asf_lags: nu must be positive");
    CVector lags = CVector::Zero(m);
    for (const auto& s : asf.spikes)
        for (int k = 0; k < m; ++k)
            lags[k] += s.weight * std::polar(1.0, kPi * nu * k * s.location);
    for (const auto& p : asf.pieces)
        lags += piece_lags(p, m, nu);
    lags[0] = lags[0].real();
    return lags;
}

CMatrix asf_covariance(const Asf& asf, int m, double nu)
{
    return toeplitz_from_first_column(asf_lags(asf, m, nu));
}

double noise_power_for_snr(double signal_power, double snr_db)
{
    return signal_power * std::pow(10.0, -snr_db / 10.0);
}

// ----- Snapshots ------------------------------------------------------------

SampleBatch draw_samples(const CMatrix& cov_h, double n0, int n, std::uint64_t seed, std::uint64_t stream)
{
    if (n < 1)
        throw std::invalid_argument("draw_samples: N must be at least 1");
    if (!(n0 >= 0.0))
        throw std::invalid_argument("draw_samples: noise power must be non-negative");
    const CMatrix root = psd_sqrt(cov_h);
    const Eigen::Index m = cov_h.rows();

    Rng rng = make_rng(seed, stream);
    ComplexNormal normal;
    CMatrix g(m, n);
    CMatrix z(m, n);
    for (int s = 0; s < n; ++s) {
        for (Eigen::Index i = 0; i < m; ++i)
            g(i, s) = normal(rng);
        for (Eigen::Index i = 0; i < m; ++i)
            z(i, s) = normal(rng);
    }
    SampleBatch batch;
    batch.snapshots = root * g + std::sqrt(n0) * z;
    batch.noise_power = n0;
    batch.seed = seed;
    return batch;
}

CMatrix sample_covariance_y(const SampleBatch& batch)
{
    if (batch.size() < 1)
        throw std::invalid_argument("sample_covariance_y: empty batch");
    CMatrix r = batch.snapshots * batch.snapshots.adjoint() / static_cast<double>(batch.size());
    r = 0.5 * (r + r.adjoint());
    return r;
}

CMatrix sample_covariance_h(const SampleBatch& batch)
{
    CMatrix r = sample_covariance_y(batch);
    r.diagonal().array() -= batch.noise_power;
    return r;
}

// ----- Random scenes --------------------------------------------------------

Asf random_mixed_asf(const RandomAsfParams& p)
{
    if (p.min_spikes < 0 || p.min_clusters < 0 || p.max_spikes < p.min_spikes || p.max_clusters < p.min_clusters)
        throw std::invalid_argument("random_mixed_asf: inconsistent component counts");
    if (p.max_spikes + p.max_clusters == 0)
        throw std::invalid_argument("random_mixed_asf: zero components requested");
    if (!(p.spike_fraction > 0.0 && p.spike_fraction < 1.0))
        throw std::invalid_argument("random_mixed_asf: spike_fraction must lie in (0, 1)");
    if (!(p.min_width > 0.0 && p.min_width <= p.max_width && p.max_width <= 2.0))
        throw std::invalid_argument("random_mixed_asf: bad cluster widths");

    Rng rng = make_rng(p.seed, 0x415346);
    std::uniform_int_distribution<int> spike_count(p.min_spikes, p.max_spikes);
    std::uniform_int_distribution<int> cluster_count(p.min_clusters, p.max_clusters);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    int n_spikes = spike_count(rng);
    int n_clusters = cluster_count(rng);
    if (n_spikes == 0 && n_clusters == 0) {
        if (p.max_clusters > 0)
            n_clusters = 1;
        else
            n_spikes = 1;
    }
    const double spike_share = n_spikes == 0 ? 0.0 : (n_clusters == 0 ? 1.0 : p.spike_fraction);

    Asf asf;
    std::vector<double> weights;
    for (int i = 0; i < n_spikes; ++i) {
        double loc = -1.0 + 2.0 * unit(rng);
        while (loc >= 1.0 || std::any_of(asf.spikes.begin(), asf.spikes.end(),
                                         [loc](const Spike& s) { return s.location == loc; }))
            loc = -1.0 + 2.0 * unit(rng);
        asf.spikes.push_back(Spike{loc, 0.0});
        weights.push_back(0.2 + 0.8 * unit(rng));
    }
    double total = 0.0;
    for (double w : weights)
        total += w;
    for (std::size_t i = 0; i < weights.size(); ++i)
        asf.spikes[i].weight = spike_share * weights[i] / total;

    weights.clear();
    std::vector<std::pair<double, double>> spans;
    for (int i = 0; i < n_clusters; ++i) {
        const double width = p.min_width + (p.max_width - p.min_width) * unit(rng);
        const double center = -1.0 + width / 2.0 + (2.0 - width) * unit(rng);
        spans.emplace_back(std::max(-1.0, center - width / 2.0), std::min(1.0, center + width / 2.0));
        weights.push_back(0.2 + 0.8 * unit(rng));
    }
    total = 0.0;
    for (double w : weights)
        total += w;
    for (std::size_t i = 0; i < spans.size(); ++i) {
        const auto [a, b] = spans[i];
        const double mass = (1.0 - spike_share) * weights[i] / total;
        asf.pieces.push_back(RectPiece{a, b, mass / (b - a)});
    }
    asf.validate();
    return asf;
}

// ----- Serialisation --------------------------------------------------------

void write_asf(std::ostream& out, const Asf& asf)
{
    KvDocument doc = KvDocument::object();
    KvDocument spikes = KvDocument::array();
    for (const auto& s : asf.spikes)
        spikes.push_back({s.location, s.weight});
    KvDocument pieces = KvDocument::array();
    for (const auto& piece : asf.pieces) {
        pieces.push_back(std::visit(
            overloaded{
                [](const RectPiece& r) {
                    return KvDocument{{"kind", "rect"}, {"alpha", r.alpha}, {"beta", r.beta}, {"height", r.height}};
                },
                [](const TruncatedGaussianPiece& g) {
                    return KvDocument{{"kind", "gauss"},
                                      {"center", g.center},
                                      {"sigma", g.sigma},
                                      {"half_width", g.half_width},
                                      {"mass", g.mass}};
                },
                [](const GridDensityPiece& d) { return KvDocument{{"kind", "grid"}, {"values", d.values}}; },
            },
            piece));
    }
    doc["spikes"] = spikes;
    doc["pieces"] = pieces;
    write_kv(out, doc);
}

Asf read_asf(std::istream& in)
{
    const KvDocument doc = parse_kv(in);
    Asf asf;
    for (const auto& [key, value] : doc.items()) {
        if (key == "spikes") {
            for (const auto& s : value) {
                if (!s.is_array() || s.size() != 2)
                    throw std::invalid_argument("Asf file: spikes must be [[phi, c], ...]");
                asf.spikes.push_back(Spike{s[0].get<double>(), s[1].get<double>()});
            }
        } else if (key == "pieces") {
            for (const auto& p : value) {
                const std::string kind = p.at("kind").get<std::string>();
                if (kind == "rect")
                    asf.pieces.push_back(
                        RectPiece{p.at("alpha").get<double>(), p.at("beta").get<double>(), p.at("height").get<double>()});
                else if (kind == "gauss")
                    asf.pieces.push_back(TruncatedGaussianPiece{p.at("center").get<double>(),
                                                                p.at("sigma").get<double>(),
                                                                p.at("half_width").get<double>(),
                                                                p.at("mass").get<double>()});
                else if (kind == "grid")
                    asf.pieces.push_back(GridDensityPiece{p.at("values").get<std::vector<double>>()});
                else
                    throw std::invalid_argument("Asf file: unknown piece kind '" + kind + "'");
            }
        } else {
            throw std::invalid_argument("Asf file: unknown key '" + key + "'");
        }
    }
    asf.validate();
    return asf;
}

void write_asf(const std::filesystem::path& path, const Asf& asf)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_asf(out, asf);
}

Asf read_asf(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    return read_asf(in);
}

void write_batch(const std::filesystem::path& path, const SampleBatch& batch)
{
    write_cmx(path, batch.snapshots,
              {"N0=" + format_double(batch.noise_power) + " seed=" + std::to_string(batch.seed)});
}

SampleBatch read_batch(std::istream& in)
{
    CmxFile file = read_cmx(in);
    SampleBatch batch;
    batch.snapshots = std::move(file.matrix);
    bool have_n0 = false;
    for (const auto& line : file.metadata) {
        std::istringstream fields(line);
        std::string tok;
        while (fields >> tok) {
            if (tok.rfind("N0=", 0) == 0) {
                batch.noise_power = parse_double(tok.substr(3));
                have_n0 = true;
            } else if (tok.rfind("seed=", 0) == 0) {
                batch.seed = std::stoull(tok.substr(5));
            }
        }
    }
    if (!have_n0)
        throw std::invalid_argument("sample batch: missing 'N0=' metadata");
    if (batch.size() < 1)
        throw std::invalid_argument("sample batch: no snapshots");
    return batch;
}

SampleBatch read_batch(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    return read_batch(in);
}

} // namespace asfcov
