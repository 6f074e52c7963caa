#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radreason/ids.hpp"

namespace radreason {

/// Box in fractions of the image side.
struct BoundingBox {
    double x = 0.0;
    double y = 0.0;
    double w = 1.0;
    double h = 1.0;

    bool valid() const;

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

template <class IdT>
struct Scored {
    IdT id;
    double p = 0.0;

    friend bool operator==(const Scored&, const Scored&) = default;
};

using RadicalScore = Scored<RadicalId>;
using StructureScore = Scored<StructureId>;

/// Canonical soft-label order: probability descending, then id ascending.
template <class IdT>
bool canonical_before(const Scored<IdT>& a, const Scored<IdT>& b) {
    if (a.p != b.p) return a.p > b.p;
    return a.id < b.id;
}

struct RadicalDetection {
    BoundingBox bbox;
    double objectness = 1.0;
    std::vector<RadicalScore> categories;  // canonical order

    friend bool operator==(const RadicalDetection&, const RadicalDetection&) = default;
};

struct StructurePrediction {
    std::vector<StructureScore> entries;  // canonical order

    friend bool operator==(const StructurePrediction&, const StructurePrediction&) = default;
};

struct PredictionSet {
    std::vector<RadicalDetection> detections;
    StructurePrediction structure;

    friend bool operator==(const PredictionSet&, const PredictionSet&) = default;
};

struct RadicalChoice {
    std::size_t detection = 0;
    std::uint32_t rank = 0;  // position in the detection's canonical category list
    RadicalId radical;
    double p = 0.0;

    friend bool operator==(const RadicalChoice&, const RadicalChoice&) = default;
};

struct RadicalMapping {
    std::vector<RadicalChoice> choices;  // one per detection, in detection order
    double conf = 0.0;

    friend bool operator==(const RadicalMapping&, const RadicalMapping&) = default;
};

/// Sorts categories canonically and clamps probabilities into [0, 1].
/// Returns the number of clamped values.
std::size_t canonicalize(RadicalDetection& detection);
std::size_t canonicalize(StructurePrediction& prediction);

/// Builds a PredictionSet from a prediction document. Clamping events are
/// reported through `warnings` when given. Throws Error{schema}.
PredictionSet normalize_predictions(const nlohmann::json& document, std::vector<std::string>* warnings = nullptr);

nlohmann::json to_json(const PredictionSet& predictions);

/// Detections whose objectness is at least `floor`.
std::vector<RadicalDetection> filter_by_objectness(std::span<const RadicalDetection> detections, double floor);

/// Mean of the chosen category probabilities, summed in detection order.
double mapping_confidence(std::span<const RadicalChoice> choices);
double mapping_confidence(const RadicalMapping& mapping);

/// A mapping in rank form: ranks[d] indexes detection d's category list.
struct RankTuple {
    std::vector<std::uint32_t> ranks;
    double conf = 0.0;
};

/// Total order on enumerated mappings: conf descending, then rank tuple ascending.
bool mapping_before(const RankTuple& a, const RankTuple& b);

struct RankEnumeration {
    std::vector<RankTuple> tuples;  // in mapping_before order
    std::uint64_t product_size = 0;  // saturates at UINT64_MAX
    bool truncated = false;
};

/// Best-first walk over the Cartesian product of each detection's top-k
/// categories. Yields at most `cap` tuples, highest confidence first.
RankEnumeration enumerate_rank_tuples(std::span<const RadicalDetection> detections, std::size_t top_k,
                                      std::size_t cap);

struct MappingEnumeration {
    std::vector<RadicalMapping> mappings;
    std::uint64_t product_size = 0;
    bool truncated = false;
};

MappingEnumeration enumerate_mappings(std::span<const RadicalDetection> detections, std::size_t top_k,
                                      std::size_t cap);

}  // namespace radreason
