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

#include "asfcov/benchmarks.hpp"
#include "asfcov/channel.hpp"
#include "asfcov/cmx.hpp"
#include "asfcov/dictionary.hpp"
#include "asfcov/estimators.hpp"
#include "asfcov/harness.hpp"
#include "asfcov/kvtext.hpp"
#include "asfcov/metrics.hpp"
#include "asfcov/spikes.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace asfcov;

namespace {

std::vector<double> to_std(const RVector& v)
{
    return {v.data(), v.data() + v.size()};
}

void write_report(const std::string& path, const KvDocument& doc)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write '" + path + "'");
    write_kv(out, doc);
}

void write_covariances(const std::string& prefix, const PipelineResult& res, double nu)
{
    write_cmx(prefix + "_ul.cmx", res.uplink, {"nu=1"});
    if (res.downlink)
        write_cmx(prefix + "_dl.cmx", *res.downlink, {"nu=" + format_double(nu)});
}

KvDocument spike_section(const SpikeEstimate& s)
{
    return KvDocument{{"order", s.order}, {"mdl_order", s.mdl_order}, {"locations", s.locations}};
}

int cmd_run(const std::string& config_path, const std::string& output)
{
    ExperimentConfig config = load_config(config_path);
    if (!output.empty())
        config.output = output;
    const std::vector<ResultRow> rows = run_experiment(config);
    if (config.output.empty()) {
        write_csv(std::cout, rows);
    } else {
        std::ofstream out(config.output);
        if (!out)
            throw std::runtime_error("cannot write '" + config.output + "'");
        write_csv(out, rows);
    }
    return all_ok(rows) ? 0 : 1;
}

int cmd_spikes(const std::string& path, int n, int grid_size, bool no_refine, const std::string& dump)
{
    const CMatrix sy = read_cmx(std::filesystem::path(path)).matrix;
    SpikeDetectorOptions opt;
    opt.grid_size = grid_size;
    opt.refine = !no_refine;
    opt.keep_spectrum = !dump.empty();
    const SpikeEstimate est = detect_spikes(sy, n, opt);
    std::cout << "# order=" << est.order << " mdl_order=" << est.mdl_order << "\n";
    std::cout << "index,location\n";
    for (std::size_t i = 0; i < est.locations.size(); ++i)
        std::cout << i << ',' << format_double(est.locations[i]) << '\n';
    if (!dump.empty()) {
        std::ofstream out(dump);
        if (!out)
            throw std::runtime_error("cannot write '" + dump + "'");
        out << "xi,eta\n";
        for (Eigen::Index g = 0; g < est.spectrum->grid.size(); ++g)
            out << format_double(est.spectrum->grid[g]) << ',' << format_double(est.spectrum->values[g]) << '\n';
    }
    return 0;
}

struct FitArgs {
    std::string batch;
    std::string method;
    std::string dictionary = "dirac";
    int atoms = 0;
    bool no_music = false;
    double nu = 2.1 / 1.9;
    int qp_grid = 10000;
    std::string out = "asfcov";
};

int cmd_fit(const FitArgs& a)
{
    const SampleBatch batch = read_batch(std::filesystem::path(a.batch));
    PipelineSettings s;
    s.dictionary = a.dictionary;
    s.atoms = a.atoms > 0 ? a.atoms : 2 * batch.antennas();
    s.nu = a.nu;
    s.qp.grid_size = a.qp_grid;
    std::string method = a.method;
    if (a.no_music) {
        if (method == "qp")
            throw std::invalid_argument("--no-music applies to nnls and em");
        if (method == "nnls" || method == "em")
            method += "-no-music";
    }
    const PipelineResult res = run_pipeline(batch, s, method);

    KvDocument doc = KvDocument::object();
    doc["method"] = method;
    doc["M"] = batch.antennas();
    doc["N"] = batch.size();
    doc["nu_dl"] = a.nu;
    if (res.estimator) {
        const EstimatorReport& r = *res.estimator;
        doc["dictionary"] = KvDocument{{"kind", a.dictionary}, {"G", s.atoms}};
        doc["spikes"] = spike_section(r.spikes);
        doc["u"] = to_std(r.u);
        doc["iterations"] = r.iterations;
        doc["converged"] = r.converged;
        doc["objective"] = r.objective;
        doc["wall_time"] = r.wall_time;
    }
    if (res.benchmark) {
        const BenchmarkReport& r = *res.benchmark;
        doc["iterations"] = r.iterations;
        doc["converged"] = r.converged;
        doc["residual"] = r.residual;
        doc["fallback"] = r.fallback;
    }
    write_report(a.out + "_report.txt", doc);
    write_covariances(a.out, res, a.nu);
    return 0;
}

int cmd_metrics(const std::string& truth_path, const std::string& est_path, std::optional<double> n0, int p)
{
    const CMatrix truth = read_cmx(std::filesystem::path(truth_path)).matrix;
    const CMatrix est = read_cmx(std::filesystem::path(est_path)).matrix;
    std::cout << "metric,value\n";
    std::cout << "nf," << format_double(err_frobenius(truth, est)) << '\n';
    if (n0)
        std::cout << "nmse," << format_double(err_nmse(truth, est, *n0)) << '\n';
    std::cout << "pe," << format_double(power_efficiency(truth, est, p)) << '\n';
    return 0;
}

struct SimulateArgs {
    std::string scene;
    std::uint64_t scene_seed = 0;
    int m = 32;
    int n = 16;
    double snr_db = 10.0;
    std::uint64_t seed = 1;
    double nu = 2.1 / 1.9;
    std::string out = "asfcov";
};

int cmd_simulate(const SimulateArgs& a)
{
    Asf asf;
    if (a.scene == "reference") {
        asf = reference_scene();
    } else if (!a.scene.empty()) {
        asf = read_asf(std::filesystem::path(a.scene));
    } else {
        RandomAsfParams p;
        p.seed = a.scene_seed;
        asf = random_mixed_asf(p);
    }
    const CMatrix truth_ul = asf_covariance(asf, a.m, 1.0);
    const double n0 = noise_power_for_snr(asf.total_mass(), a.snr_db);
    const SampleBatch batch = draw_samples(truth_ul, n0, a.n, a.seed);
    write_batch(a.out + "_batch.cmx", batch);
    write_cmx(a.out + "_sy.cmx", sample_covariance_y(batch));
    write_cmx(a.out + "_truth_ul.cmx", truth_ul, {"nu=1"});
    write_cmx(a.out + "_truth_dl.cmx", asf_covariance(asf, a.m, a.nu), {"nu=" + format_double(a.nu)});
    write_asf(std::filesystem::path(a.out + "_scene.txt"), asf);
    std::cout << "N0=" << format_double(n0) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"asfcov: parametric channel covariance estimation for uniform linear arrays"};
    app.require_subcommand(1);

    std::string config_path, run_output;
    auto* run = app.add_subcommand("run", "Run a Monte Carlo experiment and write CSV rows");
    run->add_option("config", config_path, "Key-value experiment config")->required()->check(CLI::ExistingFile);
    run->add_option("-o,--output", run_output, "CSV path (overrides the config)");

    std::string cov_path, dump;
    int spikes_n = 0, grid_size = 4096;
    bool no_refine = false;
    auto* spk = app.add_subcommand("spikes", "MDL order and MUSIC spike locations from a CMX1 sample covariance");
    spk->add_option("covariance", cov_path, "CMX1 sample covariance of y")->required()->check(CLI::ExistingFile);
    spk->add_option("-N,--snapshots", spikes_n, "Number of snapshots behind the covariance")->required();
    spk->add_option("--grid-size", grid_size, "MUSIC grid size")->check(CLI::Range(3, 1 << 24));
    spk->add_flag("--no-refine", no_refine, "Disable parabolic refinement");
    spk->add_option("--dump-spectrum", dump, "Write (xi, eta) pairs to this CSV");

    FitArgs est_args;
    auto* est = app.add_subcommand("estimate", "Fit dictionary coefficients to a CMX1 sample batch");
    est->add_option("batch", est_args.batch, "CMX1 batch (M x N) with N0 metadata")->required()->check(CLI::ExistingFile);
    est->add_option("--method", est_args.method)->required()->check(CLI::IsMember({"nnls", "qp", "em"}));
    est->add_option("--dict", est_args.dictionary)->check(CLI::IsMember({"dirac", "gauss"}));
    est->add_option("--G", est_args.atoms, "Dictionary size (default 2M)");
    est->add_flag("--no-music", est_args.no_music, "Skip spike detection");
    est->add_option("--nu", est_args.nu, "Downlink/uplink carrier ratio");
    est->add_option("--qp-grid", est_args.qp_grid, "Constraint grid size for qp");
    est->add_option("-o,--out", est_args.out, "Output prefix");

    FitArgs bench_args;
    auto* bench = app.add_subcommand("benchmark", "Run a competitor estimator on a CMX1 sample batch");
    bench->add_option("batch", bench_args.batch)->required()->check(CLI::ExistingFile);
    bench->add_option("--method", bench_args.method)->required()->check(
        CLI::IsMember({"toeplitz-psd", "spice", "projection"}));
    bench->add_option("--G", bench_args.atoms, "SPICE grid size (default 2M)");
    bench->add_option("--nu", bench_args.nu, "Downlink/uplink carrier ratio");
    bench->add_option("-o,--out", bench_args.out, "Output prefix");

    std::string truth_path, est_path;
    std::optional<double> n0;
    int pe_p = 4;
    auto* met = app.add_subcommand("metrics", "Compare two CMX1 covariances");
    met->add_option("truth", truth_path)->required()->check(CLI::ExistingFile);
    met->add_option("estimate", est_path)->required()->check(CLI::ExistingFile);
    met->add_option("--N0", n0, "Noise power (enables nmse)");
    met->add_option("-p", pe_p, "Subspace dimension for pe");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Draw a sample batch from a scene");
    simulate->add_option("--scene", sim.scene, "Scene file, or 'reference'; default is a random scene");
    simulate->add_option("--scene-seed", sim.scene_seed, "Seed of the random scene");
    simulate->add_option("-M", sim.m)->check(CLI::PositiveNumber);
    simulate->add_option("-N", sim.n)->check(CLI::PositiveNumber);
    simulate->add_option("--snr", sim.snr_db, "Per-antenna SNR in dB");
    simulate->add_option("--seed", sim.seed);
    simulate->add_option("--nu", sim.nu);
    simulate->add_option("-o,--out", sim.out, "Output prefix");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run)
            return cmd_run(config_path, run_output);
        if (*spk)
            return cmd_spikes(cov_path, spikes_n, grid_size, no_refine, dump);
        if (*est)
            return cmd_fit(est_args);
        if (*bench)
            return cmd_fit(bench_args);
        if (*met)
            return cmd_metrics(truth_path, est_path, n0, pe_p);
        if (*simulate)
            return cmd_simulate(sim);
    } catch (const std::exception& e) {
        std::cerr << "asfcov: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
