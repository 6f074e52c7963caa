#include "radreason/reasoner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "radreason/error.hpp"

namespace radreason {

using nlohmann::json;

void ReasonerParams::validate() const {
    if (!(theta >= 0.0 && theta <= 1.0)) throw Error(ErrorKind::invalid_params, "theta must lie in [0, 1]");
    if (top_k < 1) throw Error(ErrorKind::invalid_params, "top_k must be >= 1");
    if (cap < 1) throw Error(ErrorKind::invalid_params, "beam cap must be >= 1");
    if (max_structures && *max_structures < 1) throw Error(ErrorKind::invalid_params, "max_structures must be >= 1");
    if (min_conf && !(*min_conf >= 0.0 && *min_conf <= 1.0)) {
        throw Error(ErrorKind::invalid_params, "min_conf must lie in [0, 1]");
    }
    if (!(objectness_floor >= 0.0 && objectness_floor <= 1.0)) {
        throw Error(ErrorKind::invalid_params, "objectness floor must lie in [0, 1]");
    }
}

double fuse_confidence(double mapping_conf, double structure_conf, double theta) {
    return theta * mapping_conf + (1.0 - theta) * structure_conf;
}

namespace {

void check_known_ids(const Ckg& ckg, const PredictionSet& predictions) {
    for (const auto& d : predictions.detections) {
        for (const auto& c : d.categories) {
            if (!ckg.radical_index(c.id)) {
                throw Error(ErrorKind::unknown_id, "prediction cites unknown radical '" + c.id.str() + "'");
            }
        }
    }
    for (const auto& s : predictions.structure.entries) {
        if (!ckg.structure_index(s.id)) {
            throw Error(ErrorKind::unknown_id, "prediction cites unknown structure '" + s.id.str() + "'");
        }
    }
}

struct StructureCandidate {
    StructureId id;
    double p = 0.0;
    std::size_t rank = 0;
};

// maxSort(SP), truncated, with zero-probability candidates dropped.
std::vector<StructureCandidate> structure_candidates(const StructurePrediction& sp,
                                                     std::optional<std::size_t> max_structures) {
    std::vector<StructureScore> sorted = sp.entries;
    std::sort(sorted.begin(), sorted.end(), canonical_before<StructureId>);
    if (max_structures && sorted.size() > *max_structures) sorted.resize(*max_structures);
    std::vector<StructureCandidate> out;
    for (std::size_t j = 0; j < sorted.size(); ++j) {
        if (sorted[j].p > 0.0) out.push_back({sorted[j].id, sorted[j].p, j});
    }
    return out;
}

bool candidate_before(const CharacterCandidate& a, const CharacterCandidate& b) {
    if (a.p_c != b.p_c) return a.p_c > b.p_c;
    return a.id < b.id;
}

}  // namespace

void mark_ambiguity(const Ckg& ckg, std::vector<CharacterCandidate>& candidates) {
    std::map<std::pair<MultisetKey, StructureIndex>, std::size_t> group_size;
    std::vector<std::pair<MultisetKey, StructureIndex>> keys;
    keys.reserve(candidates.size());
    for (const auto& c : candidates) {
        const CharIndex idx = *ckg.char_index(c.id);
        keys.emplace_back(ckg.character_key(idx), ckg.character_structure(idx));
        ++group_size[keys.back()];
    }
    for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i].ambiguous = group_size[keys[i]] > 1;
}

RankedPredictions char_reason(const Ckg& ckg, const PredictionSet& predictions, const ReasonerParams& params) {
    params.validate();
    check_known_ids(ckg, predictions);

    RankedPredictions result;
    std::vector<RadicalDetection> filtered;
    std::span<const RadicalDetection> detections = predictions.detections;
    if (params.objectness_floor > 0.0) {
        filtered = filter_by_objectness(predictions.detections, params.objectness_floor);
        detections = filtered;
    }
    if (detections.empty()) return result;

    const std::vector<StructureCandidate> structures = structure_candidates(predictions.structure, params.max_structures);
    result.metadata.structures_considered = structures.size();
    if (structures.empty()) return result;

    // Structure index -> position in `structures`, or -1 when not a candidate.
    std::vector<int> structure_slot(ckg.num_structures(), -1);
    for (std::size_t j = 0; j < structures.size(); ++j) {
        structure_slot[*ckg.structure_index(structures[j].id)] = static_cast<int>(j);
    }
    const double best_structure_p = structures.front().p;

    const RankEnumeration enumeration = enumerate_rank_tuples(detections, params.top_k, params.cap);
    result.metadata.truncated = enumeration.truncated;

    // Dense radical index for every (detection, rank) reachable by the beam.
    std::vector<std::vector<RadicalIndex>> dense(detections.size());
    for (std::size_t d = 0; d < detections.size(); ++d) {
        const std::size_t k = std::min(params.top_k, detections[d].categories.size());
        for (std::size_t r = 0; r < k; ++r) dense[d].push_back(*ckg.radical_index(detections[d].categories[r].id));
    }

    constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> best_slot(ckg.num_characters(), kUnset);
    std::vector<CharacterCandidate> candidates;
    std::unordered_map<MultisetKey, std::vector<CharIndex>, MultisetKeyHash> subset_cache;

    MultisetKey key(detections.size());
    for (std::size_t i = 0; i < enumeration.tuples.size(); ++i) {
        const RankTuple& tuple = enumeration.tuples[i];
        // Mappings arrive in descending confidence; fusion is monotone in both inputs.
        if (params.min_conf && fuse_confidence(tuple.conf, best_structure_p, params.theta) < *params.min_conf) break;
        ++result.metadata.mappings_considered;
        result.metadata.pairs_evaluated += structures.size();

        for (std::size_t d = 0; d < detections.size(); ++d) key[d] = dense[d][tuple.ranks[d]];
        std::sort(key.begin(), key.end());

        std::span<const CharIndex> matches;
        if (params.match_mode == MatchMode::exact) {
            matches = ckg.chars_with_multiset(key);
        } else {
            auto it = subset_cache.find(key);
            if (it == subset_cache.end()) it = subset_cache.emplace(key, ckg.chars_containing(key)).first;
            matches = it->second;
        }

        for (CharIndex c : matches) {
            const int slot = structure_slot[ckg.character_structure(c)];
            if (slot < 0) continue;
            const auto& sp = structures[static_cast<std::size_t>(slot)];
            const double p_c = fuse_confidence(tuple.conf, sp.p, params.theta);
            if (params.min_conf && p_c < *params.min_conf) continue;
            // Visiting pairs in (mapping, structure) order means the first maximum
            // seen also carries the smallest provenance.
            if (best_slot[c] == kUnset) {
                best_slot[c] = candidates.size();
                candidates.push_back({ckg.characters()[c].id, p_c, {i, sp.rank}, false});
            } else if (p_c > candidates[best_slot[c]].p_c) {
                candidates[best_slot[c]].p_c = p_c;
                candidates[best_slot[c]].provenance = {i, sp.rank};
            }
        }
    }

    std::sort(candidates.begin(), candidates.end(), candidate_before);
    mark_ambiguity(ckg, candidates);
    result.candidates = std::move(candidates);
    return result;
}

RankedPredictions brute_force_reason(const Ckg& ckg, const PredictionSet& predictions, double theta,
                                     MatchMode match_mode) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw Error(ErrorKind::invalid_params, "theta must lie in [0, 1]");
    check_known_ids(ckg, predictions);

    RankedPredictions result;
    const auto& detections = predictions.detections;
    if (detections.empty()) return result;

    std::uint64_t product = 1;
    for (const auto& d : detections) {
        product *= d.categories.size();
        if (product > kBruteForceLimit) {
            throw Error(ErrorKind::instance_too_large, "full mapping product exceeds " +
                                                           std::to_string(kBruteForceLimit) + " mappings");
        }
    }
    if (product == 0) return result;

    const std::vector<StructureCandidate> structures = structure_candidates(predictions.structure, std::nullopt);
    if (structures.empty()) return result;

    // Materialize the whole product with an odometer.
    std::vector<RadicalMapping> mappings;
    mappings.reserve(static_cast<std::size_t>(product));
    std::vector<std::uint32_t> ranks(detections.size(), 0);
    for (std::uint64_t n = 0; n < product; ++n) {
        RadicalMapping m;
        for (std::size_t d = 0; d < detections.size(); ++d) {
            const auto& cat = detections[d].categories[ranks[d]];
            m.choices.push_back({d, ranks[d], cat.id, cat.p});
        }
        m.conf = mapping_confidence(m);
        mappings.push_back(std::move(m));
        for (std::size_t d = detections.size(); d-- > 0;) {
            if (++ranks[d] < detections[d].categories.size()) break;
            ranks[d] = 0;
        }
    }
    auto rank_vector = [](const RadicalMapping& m) {
        std::vector<std::uint32_t> r;
        for (const auto& c : m.choices) r.push_back(c.rank);
        return r;
    };
    std::sort(mappings.begin(), mappings.end(), [&](const RadicalMapping& a, const RadicalMapping& b) {
        if (a.conf != b.conf) return a.conf > b.conf;
        return rank_vector(a) < rank_vector(b);
    });

    result.metadata.mappings_considered = mappings.size();
    result.metadata.structures_considered = structures.size();
    result.metadata.pairs_evaluated = static_cast<std::uint64_t>(mappings.size()) * structures.size();

    std::map<CharId, CharacterCandidate> best;
    for (std::size_t i = 0; i < mappings.size(); ++i) {
        std::vector<RadicalId> ids;
        for (const auto& c : mappings[i].choices) ids.push_back(c.radical);
        const std::vector<CharId> by_radicals = search_rad(ckg, ids, match_mode);
        for (const auto& sp : structures) {
            const std::vector<CharId> by_structure = search_str(ckg, sp.id);
            std::vector<CharId> both;
            std::set_intersection(by_radicals.begin(), by_radicals.end(), by_structure.begin(), by_structure.end(),
                                  std::back_inserter(both));
            const double p_c = fuse_confidence(mappings[i].conf, sp.p, theta);
            for (const auto& id : both) {
                auto [it, inserted] = best.try_emplace(id, CharacterCandidate{id, p_c, {i, sp.rank}, false});
                if (!inserted && p_c > it->second.p_c) {
                    it->second.p_c = p_c;
                    it->second.provenance = {i, sp.rank};
                }
            }
        }
    }

    for (auto& [id, cand] : best) result.candidates.push_back(cand);
    std::stable_sort(result.candidates.begin(), result.candidates.end(),
                     [](const CharacterCandidate& a, const CharacterCandidate& b) { return a.p_c > b.p_c; });
    mark_ambiguity(ckg, result.candidates);
    return result;
}

json to_json(const RankedPredictions& ranked) {
    json candidates = json::array();
    for (const auto& c : ranked.candidates) {
        json o{{"char", c.id.str()},
               {"p", c.p_c},
               {"mapping", c.provenance.mapping},
               {"structure_rank", c.provenance.structure_rank}};
        if (c.ambiguous) o["ambiguous"] = true;
        candidates.push_back(std::move(o));
    }
    const auto& m = ranked.metadata;
    return json{{"candidates", std::move(candidates)},
                {"metadata",
                 {{"mappings_considered", m.mappings_considered},
                  {"structures_considered", m.structures_considered},
                  {"pairs_evaluated", m.pairs_evaluated},
                  {"truncated", m.truncated}}}};
}

}  // namespace radreason
