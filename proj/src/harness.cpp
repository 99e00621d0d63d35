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

#include "asfcov/harness.hpp"

#include "asfcov/cmx.hpp"
#include "asfcov/dictionary.hpp"
#include "asfcov/linalg.hpp"
#include "asfcov/metrics.hpp"
#include "asfcov/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>
#include <stdexcept>
#include <thread>

namespace asfcov {

const std::vector<std::string>& known_methods()
{
    static const std::vector<std::string> methods{"sample",       "nnls",        "qp",       "em",        "nnls-no-music",
                                                  "em-no-music", "toeplitz-psd", "spice", "projection"};
    return methods;
}

namespace {

bool ends_with(const std::string& s, const std::string& suffix)
{
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

PipelineResult fit_dictionary(const SampleBatch& batch, const PipelineSettings& s, const std::string& method)
{
    const bool use_music = !ends_with(method, "-no-music");
    const std::string base = use_music ? method : method.substr(0, method.size() - std::string("-no-music").size());
    const CMatrix sy = sample_covariance_y(batch);
    const CMatrix sh = sample_covariance_h(batch);

    SpikeEstimate spikes;
    if (use_music)
        spikes = detect_spikes(sy, batch.size(), s.music);
    const DesignSystem system = assemble_design(make_dictionary(s.dictionary, s.atoms), spikes.locations, sh, 1.0);

    EstimatorReport rep;
    if (base == "nnls") {
        rep = estimate_nnls(system);
    } else if (base == "qp") {
        rep = estimate_qp(system, s.qp);
    } else {
        if (!system.all_dirac())
            throw std::invalid_argument("em needs the Dirac dictionary");
        const EstimatorReport init = estimate_nnls(system);
        rep = em_estimate(sy, batch.size(), batch.noise_power, system, init.u, s.em);
    }
    rep.method = method;
    rep.spikes = spikes;

    PipelineResult out;
    out.method = method;
    out.uplink = reconstruct_covariance(system, rep.u, 1.0);
    out.downlink = reconstruct_covariance(system, rep.u, s.nu);
    out.estimator = rep;
    return out;
}

} // namespace

PipelineResult run_pipeline(const SampleBatch& batch, const PipelineSettings& s, const std::string& method)
{
    const auto& methods = known_methods();
    if (std::find(methods.begin(), methods.end(), method) == methods.end())
        throw std::invalid_argument("unknown method '" + method + "'");

    if (method == "nnls" || method == "qp" || method == "em" || ends_with(method, "-no-music"))
        return fit_dictionary(batch, s, method);

    PipelineResult out;
    out.method = method;
    const int m = batch.antennas();
    if (method == "sample") {
        out.uplink = sample_covariance_h(batch);
        return out;
    }
    BenchmarkReport rep;
    if (method == "toeplitz-psd") {
        rep = toeplitz_psd(sample_covariance_h(batch));
    } else if (method == "spice") {
        std::vector<double> locations;
        CMatrix steering(m, s.atoms);
        for (const Atom& a : dirac_grid(s.atoms)) {
            locations.push_back(std::get<DiracAtom>(a).location);
            steering.col(static_cast<Eigen::Index>(locations.size() - 1)) = array_response(m, locations.back(), 1.0);
        }
        rep = spice(sample_covariance_y(batch), steering, locations, batch.size(), s.spice_options);
    } else {
        rep = convex_projection(sample_covariance_h(batch), s.projection);
    }
    out.uplink = rep.covariance;
    if (!rep.locations.empty())
        out.downlink = benchmark_covariance(rep, m, s.nu);
    out.benchmark = rep;
    return out;
}

// ----- Config ---------------------------------------------------------------

std::vector<int> ExperimentConfig::snapshot_counts() const
{
    if (!snapshots.empty())
        return snapshots;
    std::vector<int> out;
    const std::vector<double> ratios = snapshot_ratios.empty() ? std::vector<double>{0.5} : snapshot_ratios;
    for (double r : ratios)
        out.push_back(std::max(1, static_cast<int>(std::lround(r * m))));
    return out;
}

std::vector<int> ExperimentConfig::atom_counts() const
{
    if (!atoms.empty())
        return atoms;
    std::vector<int> out;
    const std::vector<double> ratios = atom_ratios.empty() ? std::vector<double>{2.0} : atom_ratios;
    for (double r : ratios)
        out.push_back(std::max(1, static_cast<int>(std::lround(r * m))));
    return out;
}

void ExperimentConfig::validate() const
{
    auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
    if (m < 2)
        fail("M must be at least 2");
    for (int n : snapshot_counts())
        if (n < 1)
            fail("N must be at least 1");
    for (double r : snapshot_ratios)
        if (!(r > 0.0))
            fail("N_over_M entries must be positive");
    for (int g : atom_counts())
        if (g < 1)
            fail("G must be at least 1");
    for (double r : atom_ratios)
        if (!(r > 0.0))
            fail("G_over_M entries must be positive");
    if (!(f_ul_ghz > 0.0) || !(f_dl_ghz > 0.0))
        fail("carrier frequencies must be positive");
    if (trials_asf < 1 || trials_realization < 1)
        fail("trial counts must be at least 1");
    if (dictionary != "dirac" && dictionary != "gauss")
        fail("dictionary kind must be dirac or gauss");
    if (methods.empty())
        fail("no methods given");
    const auto& known = known_methods();
    for (const auto& meth : methods)
        if (std::find(known.begin(), known.end(), meth) == known.end())
            fail("unknown method '" + meth + "'");
    if (pe_p < 1 || pe_p > m)
        fail("pe_p must be in 1..M");
    if (music.grid_size < 3)
        fail("music grid_size must be at least 3");
    if (!std::isfinite(snr_db))
        fail("SNR_dB must be finite");
}

namespace {

template <typename T>
std::vector<T> scalar_or_list(const KvDocument& v)
{
    if (v.is_array())
        return v.get<std::vector<T>>();
    return {v.get<T>()};
}

void reject_unknown(const KvDocument& obj, const std::set<std::string>& allowed, const std::string& where)
{
    if (!obj.is_object())
        throw std::invalid_argument("config: '" + where + "' must be a table");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::invalid_argument("config: unknown key '" + (where.empty() ? "" : where + ".") + it.key() + "'");
}

} // namespace

ExperimentConfig parse_config(const KvDocument& doc)
{
    reject_unknown(doc,
                   {"M", "N", "N_over_M", "SNR_dB", "G", "G_over_M", "dictionary", "methods", "trials_asf",
                    "trials_realization", "seed", "f_ul_GHz", "f_dl_GHz", "music", "scene", "pe_p", "qp_grid", "em",
                    "output"},
                   "");
    ExperimentConfig c;
    try {
        if (doc.contains("M"))
            c.m = doc.at("M").get<int>();
        if (doc.contains("N"))
            c.snapshots = scalar_or_list<int>(doc.at("N"));
        if (doc.contains("N_over_M"))
            c.snapshot_ratios = scalar_or_list<double>(doc.at("N_over_M"));
        if (doc.contains("SNR_dB"))
            c.snr_db = doc.at("SNR_dB").get<double>();
        if (doc.contains("G"))
            c.atoms = scalar_or_list<int>(doc.at("G"));
        if (doc.contains("G_over_M"))
            c.atom_ratios = scalar_or_list<double>(doc.at("G_over_M"));
        if (doc.contains("dictionary")) {
            const KvDocument& d = doc.at("dictionary");
            if (d.is_string()) {
                c.dictionary = d.get<std::string>();
            } else {
                reject_unknown(d, {"kind", "G"}, "dictionary");
                if (d.contains("kind"))
                    c.dictionary = d.at("kind").get<std::string>();
                if (d.contains("G")) {
                    if (doc.contains("G"))
                        throw std::invalid_argument("config: G given twice");
                    c.atoms = scalar_or_list<int>(d.at("G"));
                }
            }
        }
        if (doc.contains("methods"))
            c.methods = scalar_or_list<std::string>(doc.at("methods"));
        if (doc.contains("trials_asf"))
            c.trials_asf = doc.at("trials_asf").get<int>();
        if (doc.contains("trials_realization"))
            c.trials_realization = doc.at("trials_realization").get<int>();
        if (doc.contains("seed"))
            c.seed = doc.at("seed").get<std::uint64_t>();
        if (doc.contains("f_ul_GHz"))
            c.f_ul_ghz = doc.at("f_ul_GHz").get<double>();
        if (doc.contains("f_dl_GHz"))
            c.f_dl_ghz = doc.at("f_dl_GHz").get<double>();
        if (doc.contains("music")) {
            const KvDocument& mu = doc.at("music");
            reject_unknown(mu, {"grid_size", "refine"}, "music");
            if (mu.contains("grid_size"))
                c.music.grid_size = mu.at("grid_size").get<int>();
            if (mu.contains("refine"))
                c.music.refine = mu.at("refine").get<bool>();
        }
        if (doc.contains("scene")) {
            const KvDocument& sc = doc.at("scene");
            reject_unknown(sc,
                           {"min_spikes", "max_spikes", "min_clusters", "max_clusters", "spike_fraction", "min_width",
                            "max_width"},
                           "scene");
            auto& p = c.scene;
            if (sc.contains("min_spikes"))
                p.min_spikes = sc.at("min_spikes").get<int>();
            if (sc.contains("max_spikes"))
                p.max_spikes = sc.at("max_spikes").get<int>();
            if (sc.contains("min_clusters"))
                p.min_clusters = sc.at("min_clusters").get<int>();
            if (sc.contains("max_clusters"))
                p.max_clusters = sc.at("max_clusters").get<int>();
            if (sc.contains("spike_fraction"))
                p.spike_fraction = sc.at("spike_fraction").get<double>();
            if (sc.contains("min_width"))
                p.min_width = sc.at("min_width").get<double>();
            if (sc.contains("max_width"))
                p.max_width = sc.at("max_width").get<double>();
        }
        if (doc.contains("pe_p"))
            c.pe_p = doc.at("pe_p").get<int>();
        if (doc.contains("qp_grid"))
            c.qp_grid = doc.at("qp_grid").get<int>();
        if (doc.contains("em")) {
            const KvDocument& e = doc.at("em");
            reject_unknown(e, {"epsilon", "max_iter"}, "em");
            if (e.contains("epsilon"))
                c.em.epsilon = e.at("epsilon").get<double>();
            if (e.contains("max_iter"))
                c.em.max_iter = e.at("max_iter").get<int>();
        }
        if (doc.contains("output"))
            c.output = doc.at("output").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: wrong value type: ") + e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config '" + path.string() + "'");
    return parse_config(parse_kv(in));
}

// ----- Trials ---------------------------------------------------------------

std::uint64_t asf_seed_for(const ExperimentConfig& config, int asf_index)
{
    return mix_seed(config.seed, static_cast<std::uint64_t>(asf_index));
}

std::uint64_t realization_seed_for(std::uint64_t asf_seed, int realization_index)
{
    return mix_seed(asf_seed, static_cast<std::uint64_t>(realization_index));
}

namespace {

const char* const kMetrics[] = {"nf", "nmse", "pe"};

std::string sanitize(std::string msg)
{
    for (char& ch : msg)
        if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"')
            ch = ';';
    return msg;
}

} // namespace

std::vector<ResultRow> run_trial(const ExperimentConfig& config, std::uint64_t asf_seed, std::uint64_t realization_seed,
                                 int n, int g)
{
    RandomAsfParams params = config.scene;
    params.seed = asf_seed;
    const Asf asf = random_mixed_asf(params);
    const double nu = config.nu();
    const CMatrix truth_ul = asf_covariance(asf, config.m, 1.0);
    const CMatrix truth_dl = asf_covariance(asf, config.m, nu);
    const double n0 = noise_power_for_snr(asf.total_mass(), config.snr_db);
    const SampleBatch batch = draw_samples(truth_ul, n0, n, realization_seed, static_cast<std::uint64_t>(n));

    PipelineSettings settings;
    settings.dictionary = config.dictionary;
    settings.atoms = g;
    settings.nu = nu;
    settings.music = config.music;
    settings.qp.grid_size = config.qp_grid;
    settings.em = config.em;

    std::vector<ResultRow> rows;
    for (const std::string& method : config.methods) {
        ResultRow proto;
        proto.asf_seed = asf_seed;
        proto.realization_seed = realization_seed;
        proto.method = method;
        proto.m = config.m;
        proto.n = n;
        proto.g = g;

        std::optional<PipelineResult> result;
        std::string failure;
        try {
            result = run_pipeline(batch, settings, method);
        } catch (const std::exception& e) {
            failure = "error: " + sanitize(e.what());
        }

        for (int link = 0; link < 2; ++link) {
            const bool downlink = link == 1;
            const CMatrix& truth = downlink ? truth_dl : truth_ul;
            const CMatrix* estimate = nullptr;
            if (result)
                estimate = downlink ? (result->downlink ? &*result->downlink : nullptr) : &result->uplink;
            for (const char* metric : kMetrics) {
                ResultRow row = proto;
                row.nu = downlink ? nu : 1.0;
                row.metric = metric;
                if (!result) {
                    row.status = failure;
                } else if (estimate) {
                    try {
                        const std::string name = metric;
                        if (name == "nf")
                            row.value = err_frobenius(truth, *estimate);
                        else if (name == "nmse")
                            row.value = err_nmse(truth, *estimate, n0);
                        else
                            row.value = power_efficiency(truth, *estimate, config.pe_p);
                    } catch (const std::exception& e) {
                        row.status = "error: " + sanitize(e.what());
                    }
                }
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config)
{
    config.validate();
    struct Task {
        int asf_index;
        int realization_index;
        int n;
    };
    std::vector<Task> tasks;
    const std::vector<int> ns = config.snapshot_counts();
    for (int a = 0; a < config.trials_asf; ++a)
        for (int r = 0; r < config.trials_realization; ++r)
            for (int n : ns)
                tasks.push_back({a, r, n});
    const std::vector<int> gs = config.atom_counts();

    std::vector<std::vector<ResultRow>> results(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t t = next++; t < tasks.size(); t = next++) {
            const Task& task = tasks[t];
            const std::uint64_t asf_seed = asf_seed_for(config, task.asf_index);
            const std::uint64_t real_seed = realization_seed_for(asf_seed, task.realization_index);
            for (int g : gs) {
                std::vector<ResultRow> rows = run_trial(config, asf_seed, real_seed, task.n, g);
                results[t].insert(results[t].end(), std::make_move_iterator(rows.begin()),
                                  std::make_move_iterator(rows.end()));
            }
        }
    };

    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("ASFCOV_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1)
            threads = static_cast<unsigned>(v);
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(tasks.size(), 1)));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }

    std::vector<ResultRow> rows;
    for (auto& part : results)
        rows.insert(rows.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    return rows;
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows)
{
    out << "asf_seed,realization_seed,method,M,N,G,nu,metric,value,status\n";
    for (const ResultRow& r : rows) {
        out << r.asf_seed << ',' << r.realization_seed << ',' << r.method << ',' << r.m << ',' << r.n << ',' << r.g
            << ',' << format_double(r.nu) << ',' << r.metric << ',' << (r.value ? format_double(*r.value) : "NA") << ','
            << r.status << '\n';
    }
}

bool all_ok(const std::vector<ResultRow>& rows)
{
    return std::all_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.status == "ok"; });
}

} // namespace asfcov
