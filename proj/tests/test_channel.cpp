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

#include <catch2/catch_amalgamated.hpp>

#include "asfcov/channel.hpp"
#include "asfcov/quadrature.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <filesystem>
#include <sstream>

using namespace asfcov;
using namespace testutil;

TEST_CASE("array_response - examples")
{
    const CVector a0 = array_response(4, 0.0);
    CHECK((a0 - CVector::Ones(4)).norm() < 1e-15);

    const CVector a1 = array_response(4, 1.0);
    CVector alt(4);
    alt << 1.0, -1.0, 1.0, -1.0;
    CHECK((a1 - alt).norm() < 1e-14);

    const CVector ah = array_response(3, 0.5);
    CHECK(std::abs(ah[0] - cdouble(1, 0)) < 1e-15);
    CHECK(std::abs(ah[1] - cdouble(0, 1)) < 1e-15);
    CHECK(std::abs(ah[2] - cdouble(-1, 0)) < 1e-15);

    CHECK(std::abs(array_response(3, 0.25, 2.0)[1] - cdouble(0, 1)) < 1e-15);
}

TEST_CASE("asf_covariance - spike at broadside gives all ones")
{
    Asf asf;
    asf.spikes.push_back({0.0, 1.0});
    for (int m : {1, 5, 33})
        CHECK((asf_covariance(asf, m) - CMatrix::Ones(m, m)).norm() < 1e-13);
}

TEST_CASE("asf_covariance - full-width rect gives 2I")
{
    Asf asf;
    asf.pieces.push_back(RectPiece{-1.0, 1.0, 1.0});
    for (int m : {2, 16, 100})
        CHECK((asf_covariance(asf, m) - 2.0 * CMatrix::Identity(m, m)).norm() < 1e-12);
}

TEST_CASE("asf_covariance - reference scene lags")
{
    const Asf asf = reference_scene();
    CHECK(std::abs(asf.total_mass() - 1.9) < 1e-14);
    const int m = 25;
    const CMatrix s = asf_covariance(asf, m);
    for (int i = 0; i < m; ++i)
        CHECK(std::abs(s(i, i) - 1.9) < 1e-13);

    // continuous part by trapezoid quadrature of the density, spikes added in closed form
    const CVector trap = oracle::trapezoid_lags([&](double x) { return asf.density(x); }, -1.0, 1.0, m, 1.0, 200001);
    for (int k = 1; k < m; ++k) {
        auto rect = [k](double a, double b) {
            return (std::polar(1.0, kPi * k * b) - std::polar(1.0, kPi * k * a)) / cdouble(0.0, kPi * k);
        };
        const cdouble closed = rect(-0.7, -0.4) + rect(0.0, 0.6) + 0.5 * std::polar(1.0, -kPi * k * 0.2) +
                               0.5 * std::polar(1.0, kPi * k * 0.4);
        CHECK(std::abs(s(k, 0) - closed) < 1e-12);
        const cdouble spikes = 0.5 * std::polar(1.0, -kPi * k * 0.2) + 0.5 * std::polar(1.0, kPi * k * 0.4);
        CHECK(std::abs(s(k, 0) - (trap[k] + spikes)) < 1e-4);
    }
}

TEST_CASE("asf_covariance - Hermitian Toeplitz PSD with diagonal equal to mass")
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RandomAsfParams p;
        p.seed = seed;
        const Asf asf = random_mixed_asf(p);
        const CMatrix s = asf_covariance(asf, 24, seed % 2 ? 1.0 : 2.1 / 1.9);
        CHECK((s - s.adjoint()).norm() < 1e-14);
        CHECK((toeplitz_project(s).matrix - s).norm() < 1e-12);
        CHECK(std::abs(s(3, 3).real() - asf.total_mass()) < 1e-12);
        CHECK(hermitian_eig(s).values.minCoeff() >= -1e-8 * s.trace().real());
    }
}

TEST_CASE("asf_covariance - linear in the ASF")
{
    RandomAsfParams p1, p2;
    p1.seed = 5;
    p2.seed = 6;
    const Asf a = random_mixed_asf(p1), b = random_mixed_asf(p2);
    Asf sum = a;
    sum.spikes.insert(sum.spikes.end(), b.spikes.begin(), b.spikes.end());
    sum.pieces.insert(sum.pieces.end(), b.pieces.begin(), b.pieces.end());
    sum.pieces.push_back(TruncatedGaussianPiece{0.1, 0.05, 0.2, 0.3});
    Asf g;
    g.pieces.push_back(TruncatedGaussianPiece{0.1, 0.05, 0.2, 0.3});
    const CMatrix lhs = asf_covariance(sum, 20);
    const CMatrix rhs = asf_covariance(a, 20) + asf_covariance(b, 20) + asf_covariance(g, 20);
    CHECK((lhs - rhs).norm() < 1e-10);
}

TEST_CASE("quadrature - rect by Gauss-Legendre matches closed form")
{
    for (int m : {8, 64, 256}) {
        for (double nu : {1.0, 2.1 / 1.9}) {
            const CVector q = density_lags([](double) { return 1.0; }, -0.3, 0.55, m, nu);
            for (int k = 0; k < m; ++k)
                CHECK(std::abs(q[k] - rect_lag(-0.3, 0.55, k, nu)) < 1e-10);
        }
    }
}

TEST_CASE("quadrature - Gauss-Legendre rule integrates polynomials exactly")
{
    const GaussLegendreRule r = gauss_legendre(64);
    double s0 = 0.0, s126 = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        s0 += r.weights[i];
        s126 += r.weights[i] * std::pow(r.nodes[i], 126);
    }
    CHECK(std::abs(s0 - 2.0) < 1e-14);
    CHECK(std::abs(s126 - 2.0 / 127.0) < 1e-14);
    CHECK(std::abs(integrate([](double x) { return std::exp(x); }, 0.0, 1.0) - (std::exp(1.0) - 1.0)) < 1e-13);
}

TEST_CASE("piece_lags - truncated Gaussian and grid density against trapezoid")
{
    const TruncatedGaussianPiece g{0.35, 0.07, 0.25, 0.8};
    const AsfPiece pg = g;
    CHECK(std::abs(piece_mass(pg) - 0.8) < 1e-15);
    const CVector lg = piece_lags(pg, 40, 1.1);
    const CVector tg = oracle::trapezoid_lags([&](double x) { return piece_density(pg, x); }, 0.1, 0.6, 40, 1.1, 400001);
    CHECK((lg - tg).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(std::abs(lg[0] - 0.8) < 1e-12);

    const AsfPiece pd = GridDensityPiece{{0.0, 1.0, 3.0, 0.5}};
    CHECK(std::abs(piece_mass(pd) - 2.25) < 1e-15);
    const CVector ld = piece_lags(pd, 12, 1.0);
    const CVector td = oracle::trapezoid_lags([&](double x) { return piece_density(pd, x); }, -1.0, 1.0, 12, 1.0, 400001);
    CHECK((ld - td).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("Asf - validation")
{
    Asf empty;
    CHECK_THROWS_AS(asf_covariance(empty, 4), std::invalid_argument);
    Asf dup;
    dup.spikes = {{0.1, 1.0}, {0.1, 0.5}};
    CHECK_THROWS_AS(dup.validate(), std::invalid_argument);
    Asf out;
    out.spikes = {{1.0, 1.0}};
    CHECK_THROWS_AS(out.validate(), std::invalid_argument);
    Asf bad_rect;
    bad_rect.pieces.push_back(RectPiece{0.5, 0.2, 1.0});
    CHECK_THROWS_AS(bad_rect.validate(), std::invalid_argument);
}

TEST_CASE("noise_power_for_snr - unit-mass convention")
{
    CHECK(std::abs(noise_power_for_snr(1.0, 10.0) - 0.1) < 1e-15);
    CHECK(std::abs(noise_power_for_snr(1.9, 20.0) - 0.019) < 1e-15);
    RandomAsfParams p;
    p.seed = 3;
    const CMatrix s = asf_covariance(random_mixed_asf(p), 16);
    CHECK(std::abs(s.trace().real() - 16.0) < 1e-12);
}

TEST_CASE("draw_samples - zero covariance and zero noise gives zeros")
{
    const SampleBatch b = draw_samples(CMatrix::Zero(3, 3), 0.0, 5, 1);
    CHECK(b.snapshots.norm() == 0.0);
    CHECK(b.antennas() == 3);
    CHECK(b.size() == 5);
}

TEST_CASE("draw_samples - per-antenna variance")
{
    const SampleBatch b = draw_samples(CMatrix::Identity(4, 4), 0.0, 100000, 7);
    for (int i = 0; i < 4; ++i) {
        const double var = b.snapshots.row(i).squaredNorm() / 100000.0;
        CHECK(std::abs(var - 1.0) < 0.02);
    }
}

TEST_CASE("draw_samples - deterministic per seed and stream")
{
    const Asf asf = reference_scene();
    const CMatrix s = asf_covariance(asf, 8);
    const SampleBatch a = draw_samples(s, 0.1, 6, 42, 3);
    const SampleBatch b = draw_samples(s, 0.1, 6, 42, 3);
    const SampleBatch c = draw_samples(s, 0.1, 6, 42, 4);
    CHECK(a.snapshots == b.snapshots);
    CHECK(a.snapshots != c.snapshots);
    CHECK_THROWS_AS(draw_samples(-CMatrix::Identity(2, 2), 0.0, 3, 1), std::invalid_argument);
}

TEST_CASE("sample_covariance - small examples")
{
    SampleBatch b;
    b.snapshots = CMatrix::Zero(2, 1);
    b.snapshots(0, 0) = 1.0;
    CMatrix e = CMatrix::Zero(2, 2);
    e(0, 0) = 1.0;
    CHECK((sample_covariance_y(b) - e).norm() < 1e-15);

    b.snapshots = CMatrix::Identity(2, 2);
    CHECK((sample_covariance_y(b) - 0.5 * CMatrix::Identity(2, 2)).norm() < 1e-15);

    b.noise_power = 0.0;
    CHECK(sample_covariance_h(b) == sample_covariance_y(b));

    SampleBatch c;
    c.snapshots = std::sqrt(2.0) * CMatrix::Identity(3, 3) * std::sqrt(3.0);
    c.noise_power = 1.0;
    // sample covariance 2I, minus N0 I
    CHECK((sample_covariance_h(c) - CMatrix::Identity(3, 3)).norm() < 1e-14);
}

TEST_CASE("sample_covariance_y - large-N error")
{
    const int m = 9, n = 4000;
    const SampleBatch b = draw_samples(CMatrix::Identity(m, m), 1.0, n, 8);
    const CMatrix two = 2.0 * CMatrix::Identity(m, m);
    // E||S - 2I||_F^2 = tr(2I)^2 / N, i.e. relative rms sqrt(M/N) = 3/sqrt(N) for M = 9
    CHECK((sample_covariance_y(b) - two).norm() / two.norm() <= 3.0 / std::sqrt(double(n)) * 1.2);
}

TEST_CASE("sample_covariance_h - unbiased")
{
    const CMatrix s = asf_covariance(reference_scene(), 4);
    const double n0 = 0.2;
    const int trials = 4000, n = 4;
    CMatrix mean = CMatrix::Zero(4, 4);
    for (int t = 0; t < trials; ++t)
        mean += sample_covariance_h(draw_samples(s, n0, n, 9, static_cast<std::uint64_t>(t)));
    mean /= static_cast<double>(trials);
    const double tr_y = s.trace().real() + 4 * n0;
    const double mc_std = tr_y / std::sqrt(double(n) * trials);
    CHECK((mean - s).norm() <= 4.0 * mc_std);
}

TEST_CASE("random_mixed_asf - normalisation and determinism")
{
    RandomAsfParams p;
    p.max_spikes = 0;
    p.min_clusters = 1;
    p.max_clusters = 1;
    p.seed = 77;
    const Asf diffuse = random_mixed_asf(p);
    CHECK(diffuse.spikes.empty());
    CHECK(diffuse.pieces.size() == 1);
    CHECK(std::abs(diffuse.total_mass() - 1.0) < 1e-12);

    RandomAsfParams q;
    q.seed = 123;
    const Asf a = random_mixed_asf(q), b = random_mixed_asf(q);
    std::stringstream sa, sb;
    write_asf(sa, a);
    write_asf(sb, b);
    CHECK(sa.str() == sb.str());
    CHECK(std::abs(a.total_mass() - 1.0) < 1e-12);

    RandomAsfParams none;
    none.max_spikes = 0;
    none.min_clusters = 0;
    none.max_clusters = 0;
    CHECK_THROWS_AS(random_mixed_asf(none), std::invalid_argument);
}

TEST_CASE("random_mixed_asf - spike locations are uniform")
{
    std::vector<int> bins(10, 0);
    int total = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        RandomAsfParams p;
        p.seed = seed;
        for (const Spike& s : random_mixed_asf(p).spikes) {
            ++bins[static_cast<std::size_t>(std::min(9, static_cast<int>((s.location + 1.0) * 5.0)))];
            ++total;
        }
    }
    REQUIRE(total > 500);
    const double expected = total / 10.0;
    double chi2 = 0.0;
    for (int c : bins)
        chi2 += (c - expected) * (c - expected) / expected;
    CHECK(chi2 < 21.666); // chi-square, 9 degrees of freedom, 1% level
}

TEST_CASE("Asf and batch files - round trip")
{
    Asf asf = reference_scene();
    asf.pieces.push_back(TruncatedGaussianPiece{0.8, 0.05, 0.15, 0.2});
    asf.pieces.push_back(GridDensityPiece{{0.0, 0.25, 0.5}});
    std::stringstream ss;
    write_asf(ss, asf);
    const Asf back = read_asf(ss);
    CHECK((asf_covariance(back, 12) - asf_covariance(asf, 12)).norm() == 0.0);

    std::stringstream bad("spikes = [[0.1, 1.0]]\ncolour = 3\n");
    CHECK_THROWS_AS(read_asf(bad), std::invalid_argument);

    const auto dir = std::filesystem::temp_directory_path() / "asfcov_test_channel";
    std::filesystem::create_directories(dir);
    const SampleBatch b = draw_samples(asf_covariance(asf, 5), 0.3, 7, 99);
    write_batch(dir / "b.cmx", b);
    const SampleBatch r = read_batch(dir / "b.cmx");
    CHECK(r.snapshots == b.snapshots);
    CHECK(r.noise_power == b.noise_power);
    CHECK(r.seed == b.seed);
    std::filesystem::remove_all(dir);
}
