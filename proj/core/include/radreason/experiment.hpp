#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radreason/ckg.hpp"
#include "radreason/eval.hpp"
#include "radreason/extractor_sim.hpp"
#include "radreason/reasoner.hpp"
#include "radreason/synth.hpp"

namespace radreason {

struct CkgSourceConfig {
    /// Graph file; when absent a synthetic graph is generated from `synthetic`.
    std::optional<std::filesystem::path> path;
    SynthParams synthetic;
    /// Synthetic graphs follow the experiment seed unless the section pins one.
    bool synthetic_seed_pinned = false;
};

struct SplitConfig {
    SplitProtocol protocol = SplitProtocol::seen;
    /// zero-shot: categories taken from the graph as the test set
    std::size_t n_test = 0;
    std::size_t m = 0;
    /// zero-shot: freshly composed categories inserted with add_character; they
    /// join the test set
    std::size_t add_unseen = 0;
    std::size_t add_min_radicals = 2;
    std::size_t add_max_radicals = 4;
    std::size_t samples_per_category = 5;
    /// When set, this many samples are drawn uniformly over the test categories
    /// instead of samples_per_category each.
    std::optional<std::size_t> n_samples;
};

struct OutputConfig {
    std::optional<std::filesystem::path> csv;
    std::optional<std::filesystem::path> json;
};

struct ExperimentConfig {
    CkgSourceConfig ckg;
    NoiseModel noise;
    SplitConfig split;
    ReasonerParams reasoner;
    std::vector<Strategy> strategies{Strategy::hard_top1, Strategy::hard_top1_sp, Strategy::reason_rp_only,
                                     Strategy::reason_full};
    OutputConfig output;
    std::uint64_t seed = 0;
    unsigned threads = 0;

    /// Throws Error{config}.
    void validate() const;
};

/// Sections: ckg, noise, split, reasoner, strategies, output, plus seed and
/// threads. A relative graph path resolves against `base_dir`; output paths are
/// left as given. Throws Error{config}.
ExperimentConfig experiment_config_from_json(const nlohmann::json& document,
                                             const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Resolved configuration without threads or output paths, so the echo never
/// depends on how a run was scheduled.
nlohmann::json to_json(const ExperimentConfig& config);

/// Graph and test categories an experiment runs on.
struct PreparedExperiment {
    Ckg ckg;
    SplitSpec split;
    std::vector<CharId> added;  // categories inserted for zero-shot runs
};

PreparedExperiment prepare_experiment(const ExperimentConfig& config);

struct PairwiseDelta {
    Strategy a;
    Strategy b;
    double delta = 0.0;      // Top-1(a) - Top-1(b)
    double paired_se = 0.0;  // standard error of the per-sample difference
};

struct ExperimentOutcome {
    nlohmann::json config;
    std::vector<MetricsReport> reports;
    std::vector<PairwiseDelta> deltas;
    std::size_t n_categories = 0;
    /// Product of per-position r when every test category has the same radical count.
    std::optional<double> closed_form_top1;
};

/// Simulates each sample once and scores every configured strategy on it.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

/// All four strategies on identical samples, with pairwise Top-1 deltas.
ExperimentOutcome compare_strategies(const ExperimentConfig& config);

nlohmann::json to_json(const ExperimentOutcome& outcome);

/// Writes the CSV and canonical JSON files named in `output`.
void write_outcome(const ExperimentOutcome& outcome, const OutputConfig& output);

}  // namespace radreason
