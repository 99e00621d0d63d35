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

#include "asfcov/benchmarks.hpp"
#include "asfcov/channel.hpp"
#include "asfcov/dictionary.hpp"
#include "asfcov/linalg.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace asfcov;
using namespace testutil;

namespace {

CMatrix steering_matrix(int m, const std::vector<double>& locations)
{
    CMatrix d(m, static_cast<Eigen::Index>(locations.size()));
    for (std::size_t j = 0; j < locations.size(); ++j)
        d.col(static_cast<Eigen::Index>(j)) = array_response(m, locations[j]);
    return d;
}

std::vector<double> locations_of(const std::vector<Atom>& atoms)
{
    std::vector<double> xs;
    for (const Atom& a : atoms)
        xs.push_back(std::get<DiracAtom>(a).location);
    return xs;
}

double min_eig(const CMatrix& a) { return Eigen::SelfAdjointEigenSolver<CMatrix>(a).eigenvalues().minCoeff(); }

} // namespace

TEST_CASE("toeplitz_psd - Toeplitz PSD input is a fixed point")
{
    const CMatrix s = asf_covariance(reference_scene(), 12);
    const BenchmarkReport rep = toeplitz_psd(s);
    CHECK((rep.covariance - s).norm() < 1e-9);
    CHECK(rep.converged);
}

TEST_CASE("toeplitz_psd - 2x2 instances against a brute-force search")
{
    CMatrix d = CMatrix::Zero(2, 2);
    d.diagonal() << 1.0, -1.0;
    const BenchmarkReport rep = toeplitz_psd(d);
    const CMatrix ref = oracle::toeplitz_psd_2x2(d);
    CHECK((rep.covariance - ref).norm() < 1e-6);

    // for 2x2 the PSD projection of a Toeplitz matrix stays Toeplitz, so the
    // alternating projections reach the nearest point of the intersection
    Rng rng = make_rng(51);
    for (int trial = 0; trial < 20; ++trial) {
        const CMatrix a = random_hermitian(2, rng);
        const BenchmarkReport r = toeplitz_psd(a);
        const CMatrix best = oracle::toeplitz_psd_2x2(a);
        CHECK((r.covariance - best).norm() < 1e-6);
        CHECK(min_eig(r.covariance) >= -1e-8 * std::max(1.0, std::abs(r.covariance.trace())));
        CHECK((toeplitz_project(r.covariance).matrix - r.covariance).norm() < 1e-8);
    }
}

TEST_CASE("toeplitz_psd - indefinite input gives a Toeplitz PSD output")
{
    Rng rng = make_rng(52);
    for (int trial = 0; trial < 10; ++trial) {
        const CMatrix t = random_toeplitz(10, rng) - 1.5 * CMatrix::Identity(10, 10);
        REQUIRE(min_eig(t) < 0.0);
        const BenchmarkReport rep = toeplitz_psd(t);
        const double tr = std::abs(rep.covariance.trace().real());
        CHECK(min_eig(rep.covariance) >= -1e-8 * std::max(tr, 1e-12));
        CHECK((toeplitz_project(rep.covariance).matrix - rep.covariance).norm() <= 1e-8 * std::max(1.0, tr));
        CHECK((rep.covariance - rep.covariance.adjoint()).norm() < 1e-12);
        for (std::size_t k = 1; k < rep.trace.size(); ++k)
            CHECK(rep.trace[k] <= rep.trace[k - 1] * (1.0 + 1e-12) + 1e-15);
        CHECK_THROWS_AS(benchmark_covariance(rep, 10, 1.0), std::invalid_argument);
    }
}

TEST_CASE("spice - exactly representable covariance")
{
    const int m = 8;
    const std::vector<double> xs = locations_of(dirac_grid(16));
    const CMatrix d = steering_matrix(m, xs);
    const double eps = 1e-8 / (1.0 - 1e-8);
    for (bool large : {false, true}) {
        CMatrix r = d.col(5) * d.col(5).adjoint() + d.col(11) * d.col(11).adjoint() * 0.5;
        r.diagonal().array() += (large ? 0.05 : eps * (1.0 + 0.5));
        const BenchmarkReport rep = spice(r, d, xs, large ? 2 * m : m / 2);
        CHECK_FALSE(rep.fallback);
        if (!large) {
            RVector expect = RVector::Zero(16);
            expect[5] = 1.0;
            expect[11] = 0.5;
            CHECK((rep.weights - expect).norm() < 1e-3);
        }
        const double f = spice_objective(r, d, rep.weights, large);
        CHECK(std::abs(f - oracle::spice_objective_direct(r, d, rep.weights, large)) <= 1e-8 * std::max(1.0, f));
        // stationarity on the non-negative orthant, by one-sided differences
        const auto obj = [&](const RVector& u) { return oracle::spice_objective_direct(r, d, u, large); };
        for (Eigen::Index i = 0; i < 16; ++i) {
            const double h = 1e-6;
            RVector up = rep.weights;
            up[i] += h;
            const double slope = (obj(up) - f) / h;
            if (rep.weights[i] > 1e-3)
                CHECK(std::abs(oracle::central_difference(obj, rep.weights, i, h)) <= 1e-4 * std::max(1.0, f));
            else
                CHECK(slope >= -1e-4 * std::max(1.0, f));
        }
        CHECK(min_eig(rep.covariance) >= -1e-10);
    }
}

TEST_CASE("spice - homogeneous in the sample covariance")
{
    Rng rng = make_rng(53);
    const int m = 4;
    const std::vector<double> xs = locations_of(dirac_grid(4));
    const CMatrix d = steering_matrix(m, xs);
    for (int trial = 0; trial < 5; ++trial) {
        const CMatrix r = random_psd(m, rng) + 0.1 * CMatrix::Identity(m, m);
        const double alpha = uniform(rng, 0.1, 10.0);
        const BenchmarkReport a = spice(r, d, xs, 2);
        const BenchmarkReport b = spice(alpha * r, d, xs, 2);
        CHECK((b.weights - alpha * a.weights).norm() <= 1e-4 * alpha * std::max(1.0, a.weights.norm()));
    }
}

TEST_CASE("spice - M = 3, G = 4 against coordinate descent")
{
    Rng rng = make_rng(54);
    const int m = 3;
    const std::vector<double> xs = locations_of(dirac_grid(4));
    const CMatrix d = steering_matrix(m, xs);
    for (int trial = 0; trial < 5; ++trial) {
        const CMatrix r = random_psd(m, rng) + 0.2 * CMatrix::Identity(m, m);
        for (bool large : {false, true}) {
            const auto obj = [&](const RVector& u) { return oracle::spice_objective_direct(r, d, u, large); };
            const RVector ref = oracle::coordinate_descent(obj, RVector::Constant(4, 0.1), 4.0 * r.trace().real(), 2000);
            const BenchmarkReport rep = spice(r, d, xs, large ? 5 : 2);
            CHECK(std::abs(obj(rep.weights) - obj(ref)) <= 1e-4 * std::max(1.0, obj(ref)));
        }
    }
}

TEST_CASE("spice - singular sample covariance falls back in the large-sample branch")
{
    const int m = 4;
    const std::vector<double> xs = locations_of(dirac_grid(8));
    const CMatrix d = steering_matrix(m, xs);
    const CVector a = array_response(m, 0.3);
    const BenchmarkReport rep = spice(a * a.adjoint(), d, xs, 10);
    CHECK(rep.fallback);
    CHECK(rep.weights.minCoeff() >= 0.0);
    for (std::size_t k = 1; k < rep.trace.size(); ++k)
        CHECK(rep.trace[k] <= rep.trace[k - 1] * (1.0 + 1e-12));
}

TEST_CASE("convex_projection - wide rect recovers its mass on the support")
{
    Asf asf;
    asf.pieces.push_back(RectPiece{-0.5, 0.3, 1.25});
    const int m = 32;
    const CMatrix s = asf_covariance(asf, m);
    const BenchmarkReport rep = convex_projection(s);
    double inside = 0.0;
    for (std::size_t j = 0; j < rep.locations.size(); ++j)
        if (rep.locations[j] >= -0.5 && rep.locations[j] <= 0.3)
            inside += rep.weights[static_cast<Eigen::Index>(j)];
    CHECK(std::abs(inside - 1.0) <= 0.01);
    CHECK(rep.weights.minCoeff() >= 0.0);
    CHECK((rep.covariance - rep.covariance.adjoint()).norm() < 1e-12);
    CHECK((toeplitz_project(rep.covariance).matrix - rep.covariance).norm() < 1e-12);
    CHECK(min_eig(rep.covariance) >= -1e-9 * m);
    for (std::size_t k = 1; k < rep.trace.size(); ++k)
        CHECK(rep.trace[k] <= rep.trace[k - 1] * (1.0 + 1e-9) + 1e-15);
}

TEST_CASE("convex_projection - representable density is a fixed point")
{
    const int m = 10, ng = 2001;
    Rng rng = make_rng(55);
    RVector gamma(ng);
    for (int j = 0; j < ng; ++j)
        gamma[j] = std::max(0.0, std::sin(3.0 * j / ng * kPi)) + (uniform(rng, 0.0, 1.0) < 0.01 ? 2.0 : 0.0);
    // lags by the trapezoid rule on the same grid, assembled independently
    CVector lags = CVector::Zero(m);
    const double h = 2.0 / (ng - 1);
    for (int j = 0; j < ng; ++j) {
        const double xi = -1.0 + h * j;
        const double w = (j == 0 || j == ng - 1) ? 0.5 * h : h;
        for (int k = 0; k < m; ++k)
            lags[k] += w * gamma[j] * std::polar(1.0, kPi * k * xi);
    }
    ProjectionOptions opt;
    opt.grid_size = ng;
    const BenchmarkReport rep = convex_projection(toeplitz_from_first_column(lags), opt, gamma);
    CHECK(rep.converged);
    CHECK(rep.iterations == 1);
    RVector expect(ng);
    for (int j = 0; j < ng; ++j)
        expect[j] = ((j == 0 || j == ng - 1) ? 0.5 * h : h) * gamma[j];
    CHECK((rep.weights - expect).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("convex_projection - noisy targets stop at the iteration cap")
{
    const int m = 12;
    const SampleBatch b = draw_samples(asf_covariance(reference_scene(), m), 0.1, 6, 3);
    ProjectionOptions opt;
    opt.max_iter = 50;
    const BenchmarkReport rep = convex_projection(sample_covariance_h(b), opt);
    CHECK(rep.iterations <= 50);
    CHECK(rep.trace.size() == static_cast<std::size_t>(rep.iterations));
    for (std::size_t k = 1; k < rep.trace.size(); ++k)
        CHECK(rep.trace[k] <= rep.trace[k - 1] * (1.0 + 1e-9) + 1e-15);
    CHECK(min_eig(rep.covariance) >= -1e-9 * m);
    CHECK_THROWS_AS(convex_projection(sample_covariance_h(b), opt, RVector::Ones(3)), std::invalid_argument);
}

TEST_CASE("projection grid and weights")
{
    const auto g = projection_grid(5);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == -1.0);
    CHECK(g.back() == 1.0);
    const RVector w = trapezoid_weights(5);
    CHECK(std::abs(w.sum() - 2.0) < 1e-15);
    CHECK(w[0] == 0.25);
    CHECK(w[2] == 0.5);
}
