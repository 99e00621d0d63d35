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

#ifndef ASFCOV_HARNESS_HPP
#define ASFCOV_HARNESS_HPP

#include "asfcov/benchmarks.hpp"
#include "asfcov/channel.hpp"
#include "asfcov/estimators.hpp"
#include "asfcov/kvtext.hpp"
#include "asfcov/spikes.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace asfcov {

/// Methods understood by run_pipeline.
const std::vector<std::string>& known_methods();

/// Knobs shared by every method of one pipeline run.
struct PipelineSettings {
    std::string dictionary = "dirac"; // "dirac" or "gauss"
    int atoms = 64;                   // G
    double nu = 2.1 / 1.9;            // downlink / uplink carrier ratio
    SpikeDetectorOptions music;
    QpOptions qp;
    EmOptions em;
    SpiceOptions spice_options;
    ProjectionOptions projection;
};

struct PipelineResult {
    std::string method;
    CMatrix uplink;
    std::optional<CMatrix> downlink; // absent for methods without an angular model
    std::optional<EstimatorReport> estimator;
    std::optional<BenchmarkReport> benchmark;
};

/// Detect spikes (unless the method is a *-no-music variant), fit, and
/// reconstruct the uplink and downlink covariances. EM starts from the NNLS fit.
PipelineResult run_pipeline(const SampleBatch& batch, const PipelineSettings& settings, const std::string& method);

// ----- Experiments ----------------------------------------------------------

struct ExperimentConfig {
    int m = 32;
    std::vector<int> snapshots;          // N values; or
    std::vector<double> snapshot_ratios; // N/M values
    double snr_db = 10.0;
    std::vector<int> atoms;              // G values; or
    std::vector<double> atom_ratios;     // G/M values (default 2)
    std::string dictionary = "dirac";
    std::vector<std::string> methods{"sample", "nnls"};
    int trials_asf = 1;
    int trials_realization = 1;
    std::uint64_t seed = 1;
    double f_ul_ghz = 1.9;
    double f_dl_ghz = 2.1;
    SpikeDetectorOptions music;
    RandomAsfParams scene;               // its seed is replaced per trial
    int pe_p = 4;
    int qp_grid = 10000;
    EmOptions em;
    std::string output;                  // CSV path; empty writes to stdout

    double nu() const { return f_dl_ghz / f_ul_ghz; }
    std::vector<int> snapshot_counts() const;
    std::vector<int> atom_counts() const;
    void validate() const;
};

/// Reads the key-value config; unknown keys are an error.
ExperimentConfig parse_config(const KvDocument& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

struct ResultRow {
    std::uint64_t asf_seed = 0;
    std::uint64_t realization_seed = 0;
    std::string method;
    int m = 0;
    int n = 0;
    int g = 0;
    double nu = 1.0;
    std::string metric; // nf, nmse or pe
    std::optional<double> value;
    std::string status = "ok";
};

/// Seeds of trial (a, r): asf_seed = mix(seed, a), realization_seed = mix(asf_seed, r).
std::uint64_t asf_seed_for(const ExperimentConfig& config, int asf_index);
std::uint64_t realization_seed_for(std::uint64_t asf_seed, int realization_index);

/// One trial: every method at one (N, G), scored on UL and DL. Depends only
/// on its arguments, so any row of a run can be reproduced from its seeds.
std::vector<ResultRow> run_trial(const ExperimentConfig& config, std::uint64_t asf_seed, std::uint64_t realization_seed,
                                 int n, int g);

/// All trials, fanned out over ASFCOV_THREADS workers (default: hardware
/// concurrency), returned in a fixed order.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config);

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);

bool all_ok(const std::vector<ResultRow>& rows);

} // namespace asfcov

#endif
