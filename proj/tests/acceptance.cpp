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

// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Each criterion also has a wall-clock budget.

#include "asfcov/benchmarks.hpp"
#include "asfcov/channel.hpp"
#include "asfcov/dictionary.hpp"
#include "asfcov/estimators.hpp"
#include "asfcov/harness.hpp"
#include "asfcov/linalg.hpp"
#include "asfcov/metrics.hpp"
#include "asfcov/spikes.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>

using namespace asfcov;
using namespace testutil;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int g_failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<Outcome()>& body)
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out.pass = false;
        out.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < budget_s;
    const bool ok = out.pass && in_time;
    if (!ok)
        ++g_failures;
    std::printf("%s criterion %2d: %s | %s | %.1f s (budget %.0f s%s)\n", ok ? "PASS" : "FAIL", id, title,
                out.detail.c_str(), secs, budget_s, in_time ? "" : ", exceeded");
    std::fflush(stdout);
}

std::string fmt(const char* f, double a)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double nearest_error(const std::vector<double>& estimates, double truth)
{
    double best = 2.0;
    for (double x : estimates)
        best = std::min(best, std::abs(x - truth));
    return best;
}

// ---------------------------------------------------------------------------

Outcome sample_error_law()
{
    const int m = 16;
    const CMatrix s = asf_covariance(reference_scene(), m);
    const double tr2 = std::pow(s.trace().real(), 2);
    Outcome out{true, ""};
    for (int n : {8, 32, 128}) {
        double mean = 0.0;
        const int batches = 2000;
        for (int b = 0; b < batches; ++b) {
            const SampleBatch batch = draw_samples(s, 0.0, n, static_cast<std::uint64_t>(b), 1);
            mean += (sample_covariance_h(batch) - s).squaredNorm() / batches;
        }
        const double rel = std::abs(mean - tr2 / n) / (tr2 / n);
        out.pass = out.pass && rel <= 0.05;
        out.detail += "N=" + std::to_string(n) + " rel.dev " + fmt("%.4f", rel) + "; ";
    }
    return out;
}

Outcome eigenvalue_escape()
{
    const Asf scene = reference_scene();
    std::vector<double> medians;
    Outcome out{true, "median gap ratio"};
    for (int m : {25, 50, 100}) {
        const CMatrix s = asf_covariance(scene, m);
        const double n0 = noise_power_for_snr(scene.total_mass(), 20.0);
        std::vector<double> ratios;
        for (int seed = 0; seed < 50; ++seed) {
            const SampleBatch b = draw_samples(s, n0, 2 * m, static_cast<std::uint64_t>(seed), 2);
            const RVector ev = hermitian_eig(sample_covariance_y(b)).values;
            ratios.push_back(ev[1] / ev[2]);
        }
        medians.push_back(median(ratios));
        out.detail += " M=" + std::to_string(m) + ":" + fmt("%.3f", medians.back());
    }
    for (std::size_t i = 1; i < medians.size(); ++i)
        out.pass = out.pass && medians[i] > medians[i - 1];
    return out;
}

Outcome music_localisation()
{
    const int m = 25, n = 50;
    const Asf scene = reference_scene();
    const CMatrix s = asf_covariance(scene, m);
    const double n0 = noise_power_for_snr(scene.total_mass(), 20.0);
    int hits = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        const SampleBatch b = draw_samples(s, n0, n, static_cast<std::uint64_t>(t), 3);
        const SpikeEstimate est = detect_spikes(sample_covariance_y(b), n);
        if (nearest_error(est.locations, -0.2) <= 0.02 && nearest_error(est.locations, 0.4) <= 0.02)
            ++hits;
    }
    return {hits >= 180, std::to_string(hits) + "/200 trials with both spikes within 0.02"};
}

Outcome music_consistency()
{
    const Asf scene = reference_scene();
    std::vector<double> medians;
    Outcome out{true, "median |error|"};
    for (int m : {25, 50, 100}) {
        const CMatrix s = asf_covariance(scene, m);
        const double n0 = noise_power_for_snr(scene.total_mass(), 20.0);
        std::vector<double> errors;
        for (int t = 0; t < 100; ++t) {
            const SampleBatch b = draw_samples(s, n0, 2 * m, static_cast<std::uint64_t>(t), 4);
            const SpikeEstimate est = detect_spikes(sample_covariance_y(b), 2 * m);
            errors.push_back(nearest_error(est.locations, -0.2));
            errors.push_back(nearest_error(est.locations, 0.4));
        }
        medians.push_back(median(errors));
        out.detail += " M=" + std::to_string(m) + ":" + fmt("%.2e", medians.back());
    }
    for (std::size_t i = 1; i < medians.size(); ++i)
        out.pass = out.pass && medians[i] <= medians[i - 1];
    return out;
}

Outcome lemma_reduced_equals_full()
{
    Rng rng = make_rng(501);
    const int m = 8, g = 10;
    const auto grid = dirac_grid(g);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const CMatrix sh = random_hermitian(m, rng) + 2.0 * random_psd(m, rng, 3);
        RMatrix a(2 * m * m, g);
        RVector f(2 * m * m);
        for (int i = 0; i < g; ++i) {
            const CMatrix si = toeplitz_from_first_column(atom_moment_column(grid[static_cast<std::size_t>(i)], m));
            for (int r = 0; r < m; ++r)
                for (int c = 0; c < m; ++c) {
                    a(r * m + c, i) = si(r, c).real();
                    a(m * m + r * m + c, i) = si(r, c).imag();
                }
        }
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) {
                f[r * m + c] = sh(r, c).real();
                f[m * m + r * m + c] = sh(r, c).imag();
            }
        const RVector full = oracle::nnls_enumerate(a, f);
        const RVector reduced = estimate_nnls(assemble_design(grid, {}, sh)).u;
        worst = std::max(worst, (full - reduced).norm());
    }
    return {worst <= 1e-6, "max ||du|| = " + fmt("%.2e", worst) + " over 50 instances"};
}

Outcome em_monotone_and_stationary()
{
    Rng rng = make_rng(601);
    double worst_rise = -std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 50; ++trial) {
        const int m = 6 + trial % 7;
        RandomAsfParams p;
        p.seed = static_cast<std::uint64_t>(1000 + trial);
        p.min_spikes = 1;
        const Asf asf = random_mixed_asf(p);
        const CMatrix truth = asf_covariance(asf, m);
        const double n0 = noise_power_for_snr(asf.total_mass(), 10.0);
        const SampleBatch batch = draw_samples(truth, n0, 2 * m, static_cast<std::uint64_t>(trial), 6);
        const DesignSystem sys = assemble_design(dirac_grid(2 * m), {}, sample_covariance_h(batch));
        RVector u0(2 * m);
        for (int i = 0; i < 2 * m; ++i)
            u0[i] = uniform(rng, 0.0, 0.3);
        EmOptions opt;
        opt.epsilon = 1e-12;
        const EstimatorReport rep = em_estimate(batch, sys, u0, opt);
        for (std::size_t k = 1; k < rep.objective.size(); ++k)
            worst_rise = std::max(worst_rise, rep.objective[k] - rep.objective[k - 1]);
    }

    const int m = 10;
    const DesignSystem sys = assemble_design(dirac_grid(20), {}, CMatrix::Identity(m, m));
    RVector u = RVector::Zero(20);
    u[3] = 1.0;
    u[4] = 0.3;
    u[15] = 0.6;
    const double n0 = 0.05;
    CMatrix sy = reconstruct_covariance(sys, u, 1.0);
    sy.diagonal().array() += n0;
    EmOptions one;
    one.max_iter = 1;
    const double drift = (em_estimate(sy, 1000, n0, sys, u, one).u - u).norm() / u.norm();
    return {worst_rise <= 1e-9 && drift <= 1e-3,
            "largest objective step " + fmt("%.2e", worst_rise) + ", fixed-point drift " + fmt("%.2e", drift)};
}

Outcome gradient_check()
{
    Rng rng = make_rng(701);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int m = 4 + trial % 6;
        const std::vector<Atom> atoms =
            trial % 2 ? dirac_grid(2 * m) : gaussian_family(m);
        const DesignSystem sys = assemble_design(atoms, {uniform(rng, -0.9, 0.9)}, CMatrix::Identity(m, m));
        const CMatrix sy = random_psd(m, rng) + uniform(rng, 0.1, 1.0) * CMatrix::Identity(m, m);
        const double n0 = uniform(rng, 0.05, 0.5);
        RVector u(sys.size());
        for (int i = 0; i < sys.size(); ++i)
            u[i] = uniform(rng, 0.1, 1.0);
        const RVector g = neg_log_likelihood_gradient(u, sys, sy, n0);
        const auto f = [&](const RVector& v) { return neg_log_likelihood(v, sys, sy, n0); };
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            const double fd = oracle::central_difference(f, u, i, 1e-5);
            worst = std::max(worst, std::abs(g[i] - fd) / std::max(std::abs(fd), 1e-3));
        }
    }
    return {worst <= 1e-4, "max relative error " + fmt("%.2e", worst)};
}

Outcome projection_optimality()
{
    Rng rng = make_rng(801);
    long beaten = 0;
    double worst_inner = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int m = 3 + trial % 6;
        const CMatrix a = random_hermitian(m, rng);
        const CMatrix t = toeplitz_project(a).matrix;
        const double best = (t - a).norm();
        for (int p = 0; p < 10000; ++p) {
            const CMatrix x = t + uniform(rng, 1e-6, 1.0) * random_toeplitz(m, rng);
            if ((x - a).norm() < best)
                ++beaten;
        }
        for (int p = 0; p < 50; ++p) {
            const CMatrix x = random_toeplitz(m, rng);
            worst_inner = std::max(worst_inner, std::abs(frobenius_inner(a - t, x)));
        }
    }
    return {beaten == 0 && worst_inner <= 1e-9,
            std::to_string(beaten) + " of 200000 perturbations closer; max |<A-T,X>| " + fmt("%.2e", worst_inner)};
}

struct SweepTotals {
    std::map<std::string, double> nf, nmse;
    int count = 0;
};

Outcome method_ordering(int& floor_violations, int& floor_checked)
{
    const ExperimentConfig cfg = parse_config(parse_kv_string("M = 32\n"
                                                              "N_over_M = [0.125, 0.5]\n"
                                                              "SNR_dB = 10\n"
                                                              "G_over_M = [2]\n"
                                                              "methods = [\"sample\", \"nnls\", \"em\", \"nnls-no-music\"]\n"
                                                              "trials_asf = 20\n"
                                                              "trials_realization = 20\n"
                                                              "seed = 2024\n"
                                                              "scene = {\"min_spikes\": 1, \"max_spikes\": 3}\n"));
    const auto rows = run_experiment(cfg);
    if (!all_ok(rows))
        return {false, "some trials failed"};

    // MMSE floor per (asf, N): the estimate built from the true covariance
    std::map<std::pair<std::uint64_t, double>, double> floors;
    auto floor_for = [&](std::uint64_t asf_seed, double nu) {
        const auto key = std::make_pair(asf_seed, nu);
        auto it = floors.find(key);
        if (it != floors.end())
            return it->second;
        RandomAsfParams p = cfg.scene;
        p.seed = asf_seed;
        const Asf asf = random_mixed_asf(p);
        const CMatrix truth = asf_covariance(asf, cfg.m, nu);
        const double n0 = noise_power_for_snr(asf.total_mass(), cfg.snr_db);
        return floors[key] = err_nmse(truth, truth, n0);
    };

    std::map<int, SweepTotals> by_n;
    floor_violations = 0;
    floor_checked = 0;
    for (const ResultRow& r : rows) {
        if (!r.value)
            continue;
        if (r.metric == "nmse") {
            ++floor_checked;
            if (*r.value < floor_for(r.asf_seed, r.nu))
                ++floor_violations;
        }
        if (r.nu != 1.0)
            continue;
        SweepTotals& t = by_n[r.n];
        if (r.metric == "nf")
            t.nf[r.method] += *r.value / 400.0;
        else if (r.metric == "nmse")
            t.nmse[r.method] += *r.value / 400.0;
    }

    Outcome out{true, ""};
    for (auto& [n, t] : by_n) {
        for (auto* table : {&t.nf, &t.nmse}) {
            const auto& v = *table;
            const bool ok = v.at("em") <= v.at("nnls") && v.at("nnls") < v.at("sample") &&
                            v.at("nnls") < v.at("nnls-no-music");
            out.pass = out.pass && ok;
            out.detail += "N=" + std::to_string(n) + (table == &t.nf ? " E_NF" : " E_NMSE") + " em " +
                          fmt("%.4f", v.at("em")) + " nnls " + fmt("%.4f", v.at("nnls")) + " sample " +
                          fmt("%.4f", v.at("sample")) + " no-music " + fmt("%.4f", v.at("nnls-no-music")) +
                          (ok ? "" : " [order violated]") + "; ";
        }
    }
    return out;
}

Outcome uplink_downlink()
{
    const int m = 24;
    // nu = 1 downlink equals the uplink bitwise through the whole pipeline
    const CMatrix truth = asf_covariance(reference_scene(), m);
    const SampleBatch b = draw_samples(truth, 0.02, 48, 11);
    PipelineSettings s;
    s.atoms = 2 * m;
    s.nu = 1.0;
    bool bitwise = true;
    for (const char* method : {"nnls", "em", "qp", "spice", "projection"}) {
        PipelineSettings t = s;
        if (std::string(method) == "qp") {
            t.dictionary = "gauss";
            t.qp.grid_size = 2000;
        }
        const PipelineResult r = run_pipeline(b, t, method);
        bitwise = bitwise && r.downlink && *r.downlink == r.uplink;
    }

    // exact-model coefficients on an on-grid Dirac scene, extrapolated to nu
    const double nu = 2.1 / 1.9;
    Asf exact;
    const auto grid = dirac_grid(2 * m);
    for (auto [i, w] : {std::pair{7, 0.8}, std::pair{8, 0.4}, std::pair{30, 0.5}, std::pair{41, 0.2}})
        exact.spikes.push_back({std::get<DiracAtom>(grid[static_cast<std::size_t>(i)]).location, w});
    const DesignSystem sys = assemble_design(grid, {}, asf_covariance(exact, m));
    const RVector u = estimate_nnls(sys).u;
    const double err = err_frobenius(asf_covariance(exact, m, nu), reconstruct_covariance(sys, u, nu));
    return {bitwise && err <= 1e-6,
            std::string("nu=1 bitwise ") + (bitwise ? "yes" : "no") + ", DL E_NF " + fmt("%.2e", err)};
}

Outcome brute_force_oracles()
{
    Rng rng = make_rng(1201);
    double nnls_gap = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        RMatrix a(6, 3);
        RVector f(6);
        for (int i = 0; i < 6; ++i) {
            f[i] = uniform(rng, -1.0, 1.0);
            for (int j = 0; j < 3; ++j)
                a(i, j) = uniform(rng, -1.0, 1.0);
        }
        nnls_gap = std::max(nnls_gap, (nnls(a, f).x - oracle::nnls_enumerate(a, f)).norm());
    }

    double spice_gap = 0.0;
    const int m = 3;
    std::vector<double> xs;
    for (const Atom& at : dirac_grid(4))
        xs.push_back(std::get<DiracAtom>(at).location);
    CMatrix d(m, 4);
    for (int j = 0; j < 4; ++j)
        d.col(j) = array_response(m, xs[static_cast<std::size_t>(j)]);
    for (int trial = 0; trial < 10; ++trial) {
        const CMatrix r = random_psd(m, rng) + 0.2 * CMatrix::Identity(m, m);
        for (bool large : {false, true}) {
            const auto obj = [&](const RVector& u) { return oracle::spice_objective_direct(r, d, u, large); };
            const RVector ref = oracle::coordinate_descent(obj, RVector::Constant(4, 0.1), 4.0 * r.trace().real(), 2000);
            const BenchmarkReport rep = spice(r, d, xs, large ? 5 : 2);
            spice_gap = std::max(spice_gap, (obj(rep.weights) - obj(ref)) / std::max(1.0, obj(ref)));
        }
    }

    double tpsd_gap = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const CMatrix a = random_hermitian(2, rng);
        tpsd_gap = std::max(tpsd_gap, (toeplitz_psd(a).covariance - oracle::toeplitz_psd_2x2(a)).norm());
    }
    return {nnls_gap <= 1e-9 && spice_gap <= 1e-4 && tpsd_gap <= 1e-6,
            "NNLS " + fmt("%.1e", nnls_gap) + ", SPICE objective gap " + fmt("%.1e", spice_gap) +
                ", Toeplitz-PSD " + fmt("%.1e", tpsd_gap)};
}

} // namespace

int main()
{
    criterion(1, "sample covariance error law", 60, sample_error_law);
    criterion(2, "eigenvalue escape", 120, eigenvalue_escape);
    criterion(3, "MUSIC localisation", 60, music_localisation);
    criterion(4, "MUSIC consistency", 180, music_consistency);
    criterion(5, "reduced fit equals full-matrix fit", 30, lemma_reduced_equals_full);
    criterion(6, "EM monotonicity and fixed point", 60, em_monotone_and_stationary);
    criterion(7, "likelihood gradient", 30, gradient_check);
    criterion(8, "Toeplitz projection optimality", 30, projection_optimality);

    int floor_violations = -1, floor_checked = 0;
    criterion(9, "method ordering", 600, [&] { return method_ordering(floor_violations, floor_checked); });
    criterion(10, "MMSE floor", 1, [&] {
        return Outcome{floor_violations == 0 && floor_checked > 0,
                       std::to_string(floor_violations) + " violations in " + std::to_string(floor_checked) +
                           " E_NMSE values"};
    });

    criterion(11, "uplink to downlink", 60, uplink_downlink);
    criterion(12, "brute-force oracles", 120, brute_force_oracles);

    std::printf("%s: %d criteria failed\n", g_failures ? "FAIL" : "PASS", g_failures);
    return g_failures ? 1 : 0;
}
