#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "radreason/ckg.hpp"
#include "radreason/reasoner.hpp"
#include "radreason/softlabel.hpp"
#include "radreason/synth.hpp"

namespace radreason {

/// Generative stand-in for the radical extractor.
///
/// Each detection draws a standard-normal score for every radical of the graph.
/// With probability r the true radical is made the argmax, otherwise a uniformly
/// chosen confuser is. Both the truth and the designated winner get `boost` added
/// and the winner is then swapped into the top score, so the argmax is correct
/// with probability exactly r while the truth keeps elevated mass when it loses.
/// Scores go through a softmax at `temperature`. The structure distribution is
/// built the same way with probability s.
struct NoiseModel {
    double r = 0.9;
    /// Optional per-position override of r (reading order); positions past the end use r.
    std::vector<double> r_per_position;
    double s = 0.9;
    double boost = 3.0;
    double temperature = 1.0;

    double r_at(std::size_t position) const;
    /// Throws Error{invalid_params}.
    void validate() const;
};

/// Boost at or above this value is effectively noiseless.
inline constexpr double kNoiselessBoost = 50.0;

struct SimulatedSample {
    CharId truth;
    PredictionSet predictions;
    std::vector<bool> radical_correct;  // per detection: the true radical won the argmax
    bool structure_correct = true;
};

/// Identifies one independent random stream.
struct SampleStream {
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
};

/// One detection per radical of `entry`; a pure function of (entry, graph, noise, stream).
SimulatedSample simulate_predictions(const CharacterEntry& entry, const Ckg& ckg, const NoiseModel& noise,
                                     SampleStream stream, const TemplateSet& templates = TemplateSet::defaults());

struct HardMatch {
    std::optional<CharId> id;
    /// Several characters matched; `id` holds the smallest.
    bool ambiguous = false;
};

/// Exact-multiset lookup of the per-detection argmax radicals, optionally also
/// requiring the argmax structure.
HardMatch hard_match_recognize(const SimulatedSample& sample, const Ckg& ckg, bool use_structure);
HardMatch hard_match_recognize(const PredictionSet& predictions, const Ckg& ckg, bool use_structure);

/// Product of per-element correctness probabilities.
double expected_hard_match_accuracy(std::span<const double> element_probs);

enum class Strategy { hard_top1, hard_top1_sp, reason_rp_only, reason_full };

std::string_view to_string(Strategy strategy);
/// Accepts hard-top1 | hard-top1-sp | reason-rp-only | reason-full. Throws Error{unknown_strategy}.
Strategy parse_strategy(std::string_view name);

/// Ranked character ids a strategy returns for one prediction set.
/// reason-rp-only runs the reasoner with theta = 1 and every structure admitted.
std::vector<CharId> recognize(Strategy strategy, const PredictionSet& predictions, const Ckg& ckg,
                              const ReasonerParams& params);

struct McEstimate {
    double accuracy = 0.0;
    double standard_error = 0.0;
    double ci95_half_width = 0.0;  // 1.96 standard errors
    std::size_t n_samples = 0;
};

struct McOptions {
    ReasonerParams reasoner;
    /// Characters to sample from; empty means the whole graph.
    std::vector<CharId> categories;
    unsigned threads = 0;
};

/// Top-1 accuracy of `strategy` on `n_samples` characters drawn uniformly.
McEstimate run_monte_carlo(const Ckg& ckg, const NoiseModel& noise, std::size_t n_samples, Strategy strategy,
                           std::uint64_t seed, const McOptions& options = {});

}  // namespace radreason
