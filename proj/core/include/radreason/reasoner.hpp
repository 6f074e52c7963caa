#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "radreason/ckg.hpp"
#include "radreason/softlabel.hpp"

namespace radreason {

struct ReasonerParams {
    double theta = 0.7;
    std::size_t top_k = 5;
    std::size_t cap = 1000;
    MatchMode match_mode = MatchMode::exact;
    std::optional<std::size_t> max_structures;  // unset: every structure candidate
    std::optional<double> min_conf;              // prune pairs that cannot reach this score
    double objectness_floor = 0.0;

    /// Throws Error{invalid_params}.
    void validate() const;
};

struct Provenance {
    std::size_t mapping = 0;         // index into the enumerated mapping list
    std::size_t structure_rank = 0;  // index into the sorted structure candidates

    friend auto operator<=>(const Provenance&, const Provenance&) = default;
    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct CharacterCandidate {
    CharId id;
    double p_c = 0.0;
    Provenance provenance;
    /// Another candidate shares this one's radical multiset and structure.
    bool ambiguous = false;

    friend bool operator==(const CharacterCandidate&, const CharacterCandidate&) = default;
};

struct ReasoningMetadata {
    std::size_t mappings_considered = 0;
    std::size_t structures_considered = 0;
    std::uint64_t pairs_evaluated = 0;
    bool truncated = false;

    friend bool operator==(const ReasoningMetadata&, const ReasoningMetadata&) = default;
};

struct RankedPredictions {
    std::vector<CharacterCandidate> candidates;  // p_c descending, then CharId ascending
    ReasoningMetadata metadata;

    friend bool operator==(const RankedPredictions&, const RankedPredictions&) = default;
};

/// theta * mapping confidence + (1 - theta) * structure confidence.
double fuse_confidence(double mapping_conf, double structure_conf, double theta);

/// Weight-fusion reasoning over the knowledge graph. Throws Error{unknown_id|invalid_params}.
RankedPredictions char_reason(const Ckg& ckg, const PredictionSet& predictions, const ReasonerParams& params = {});

/// Largest instance the exhaustive oracle accepts, counted in mappings.
inline constexpr std::uint64_t kBruteForceLimit = 1'000'000;

/// Exhaustive reference: scores every mapping of the full product against every
/// structure candidate by literal set intersection. Throws Error{instance_too_large|unknown_id}.
RankedPredictions brute_force_reason(const Ckg& ckg, const PredictionSet& predictions, double theta,
                                     MatchMode match_mode = MatchMode::exact);

/// Flags candidates that share their radical multiset and structure with
/// another candidate in the list.
void mark_ambiguity(const Ckg& ckg, std::vector<CharacterCandidate>& candidates);

nlohmann::json to_json(const RankedPredictions& ranked);

}  // namespace radreason
