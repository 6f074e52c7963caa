#include "radreason/softlabel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>

#include "radreason/error.hpp"

namespace radreason {

using nlohmann::json;

bool BoundingBox::valid() const {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    return unit(x) && unit(y) && w > 0.0 && w <= 1.0 && h > 0.0 && h <= 1.0;
}

namespace {

template <class IdT>
std::size_t canonicalize_scores(std::vector<Scored<IdT>>& scores) {
    std::size_t clamped = 0;
    for (auto& s : scores) {
        const double c = std::clamp(s.p, 0.0, 1.0);
        if (c != s.p) {
            s.p = c;
            ++clamped;
        }
    }
    std::sort(scores.begin(), scores.end(), canonical_before<IdT>);
    return clamped;
}

double read_probability(const json& v, const std::string& where) {
    if (!v.is_number()) throw Error(ErrorKind::schema, where + ": probability must be a number");
    const double p = v.get<double>();
    if (!std::isfinite(p)) throw Error(ErrorKind::schema, where + ": probability must be finite");
    return p;
}

template <class IdT>
std::vector<Scored<IdT>> read_scores(const json& arr, const char* id_key, const std::string& where) {
    if (!arr.is_array() || arr.empty()) {
        throw Error(ErrorKind::schema, where + ": expected a non-empty array");
    }
    std::vector<Scored<IdT>> out;
    std::set<std::string> seen;
    for (const auto& e : arr) {
        if (!e.is_object()) throw Error(ErrorKind::schema, where + ": entries must be objects");
        auto id_it = e.find(id_key);
        auto p_it = e.find("p");
        if (id_it == e.end() || !id_it->is_string()) {
            throw Error(ErrorKind::schema, where + ": entry needs string \"" + id_key + "\"");
        }
        if (p_it == e.end()) throw Error(ErrorKind::schema, where + ": entry needs \"p\"");
        std::string id = id_it->get<std::string>();
        if (!is_valid_identifier(id)) throw Error(ErrorKind::schema, where + ": invalid id '" + id + "'");
        if (!seen.insert(id).second) throw Error(ErrorKind::schema, where + ": duplicate id '" + id + "'");
        out.push_back({IdT(std::move(id)), read_probability(*p_it, where)});
    }
    return out;
}

}  // namespace

std::size_t canonicalize(RadicalDetection& detection) { return canonicalize_scores(detection.categories); }

std::size_t canonicalize(StructurePrediction& prediction) { return canonicalize_scores(prediction.entries); }

PredictionSet normalize_predictions(const json& document, std::vector<std::string>* warnings) {
    if (!document.is_object()) throw Error(ErrorKind::schema, "predictions: document must be a JSON object");
    auto det_it = document.find("detections");
    if (det_it == document.end() || !det_it->is_array()) {
        throw Error(ErrorKind::schema, "predictions: missing \"detections\" array");
    }
    if (det_it->empty()) throw Error(ErrorKind::schema, "predictions: zero detections");

    PredictionSet set;
    std::size_t clamped = 0;
    for (std::size_t d = 0; d < det_it->size(); ++d) {
        const json& jd = (*det_it)[d];
        const std::string where = "detection " + std::to_string(d);
        if (!jd.is_object()) throw Error(ErrorKind::schema, where + ": must be an object");

        RadicalDetection det;
        auto bbox_it = jd.find("bbox");
        if (bbox_it != jd.end()) {
            if (!bbox_it->is_array() || bbox_it->size() != 4) {
                throw Error(ErrorKind::schema, where + ": bbox must be [x, y, w, h]");
            }
            for (const auto& v : *bbox_it) {
                if (!v.is_number()) throw Error(ErrorKind::schema, where + ": bbox values must be numbers");
            }
            det.bbox = {(*bbox_it)[0].get<double>(), (*bbox_it)[1].get<double>(), (*bbox_it)[2].get<double>(),
                        (*bbox_it)[3].get<double>()};
            if (!det.bbox.valid()) throw Error(ErrorKind::schema, where + ": bbox outside the unit square");
        }
        if (auto it = jd.find("objectness"); it != jd.end()) {
            const double raw = read_probability(*it, where);
            det.objectness = std::clamp(raw, 0.0, 1.0);
            if (det.objectness != raw) ++clamped;
        }
        auto cat_it = jd.find("categories");
        if (cat_it == jd.end()) throw Error(ErrorKind::schema, where + ": missing \"categories\"");
        det.categories = read_scores<RadicalId>(*cat_it, "radical", where);
        clamped += canonicalize(det);
        set.detections.push_back(std::move(det));
    }

    auto st_it = document.find("structure");
    if (st_it == document.end()) throw Error(ErrorKind::schema, "predictions: missing \"structure\"");
    set.structure.entries = read_scores<StructureId>(*st_it, "structure", "structure");
    clamped += canonicalize(set.structure);

    if (clamped > 0 && warnings) {
        warnings->push_back(std::to_string(clamped) + " probabilit" + (clamped == 1 ? "y" : "ies") +
                            " clamped into [0, 1]");
    }
    return set;
}

json to_json(const PredictionSet& predictions) {
    json detections = json::array();
    for (const auto& d : predictions.detections) {
        json cats = json::array();
        for (const auto& c : d.categories) cats.push_back({{"radical", c.id.str()}, {"p", c.p}});
        detections.push_back({{"bbox", {d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h}},
                              {"objectness", d.objectness},
                              {"categories", std::move(cats)}});
    }
    json structure = json::array();
    for (const auto& s : predictions.structure.entries) structure.push_back({{"structure", s.id.str()}, {"p", s.p}});
    return json{{"detections", std::move(detections)}, {"structure", std::move(structure)}};
}

std::vector<RadicalDetection> filter_by_objectness(std::span<const RadicalDetection> detections, double floor) {
    std::vector<RadicalDetection> out;
    for (const auto& d : detections) {
        if (d.objectness >= floor) out.push_back(d);
    }
    return out;
}

double mapping_confidence(std::span<const RadicalChoice> choices) {
    if (choices.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& c : choices) sum += c.p;
    return sum / static_cast<double>(choices.size());
}

double mapping_confidence(const RadicalMapping& mapping) { return mapping_confidence(mapping.choices); }

bool mapping_before(const RankTuple& a, const RankTuple& b) {
    if (a.conf != b.conf) return a.conf > b.conf;
    return a.ranks < b.ranks;
}

namespace {

struct Node {
    RankTuple tuple;
    std::size_t pivot = 0;  // lowest coordinate a child may increment
};

struct NodeAfter {
    bool operator()(const Node& a, const Node& b) const { return mapping_before(b.tuple, a.tuple); }
};

double tuple_confidence(std::span<const RadicalDetection> detections, const std::vector<std::uint32_t>& ranks) {
    double sum = 0.0;
    for (std::size_t d = 0; d < ranks.size(); ++d) sum += detections[d].categories[ranks[d]].p;
    return sum / static_cast<double>(ranks.size());
}

}  // namespace

RankEnumeration enumerate_rank_tuples(std::span<const RadicalDetection> detections, std::size_t top_k,
                                      std::size_t cap) {
    if (top_k < 1 || cap < 1) throw Error(ErrorKind::invalid_params, "top_k and cap must be >= 1");

    RankEnumeration out;
    if (detections.empty()) return out;

    std::vector<std::uint32_t> limits(detections.size());
    std::uint64_t product = 1;
    for (std::size_t d = 0; d < detections.size(); ++d) {
        limits[d] = static_cast<std::uint32_t>(std::min(top_k, detections[d].categories.size()));
        if (limits[d] == 0) return out;
        if (product > std::numeric_limits<std::uint64_t>::max() / limits[d]) {
            product = std::numeric_limits<std::uint64_t>::max();
        } else {
            product *= limits[d];
        }
    }
    out.product_size = product;
    out.truncated = product > cap;

    // Each tuple has exactly one parent (decrement its last non-zero rank), so the
    // walk is a tree and needs no visited set. A child never precedes its parent
    // under mapping_before, hence pops arrive in sorted order.
    std::priority_queue<Node, std::vector<Node>, NodeAfter> frontier;
    Node root;
    root.tuple.ranks.assign(detections.size(), 0);
    root.tuple.conf = tuple_confidence(detections, root.tuple.ranks);
    frontier.push(std::move(root));

    const std::size_t want = static_cast<std::size_t>(std::min<std::uint64_t>(cap, product));
    out.tuples.reserve(want);
    while (!frontier.empty() && out.tuples.size() < want) {
        Node node = frontier.top();
        frontier.pop();
        for (std::size_t i = node.pivot; i < node.tuple.ranks.size(); ++i) {
            if (node.tuple.ranks[i] + 1 >= limits[i]) continue;
            Node child;
            child.tuple.ranks = node.tuple.ranks;
            ++child.tuple.ranks[i];
            child.tuple.conf = tuple_confidence(detections, child.tuple.ranks);
            child.pivot = i;
            frontier.push(std::move(child));
        }
        out.tuples.push_back(std::move(node.tuple));
    }
    return out;
}

MappingEnumeration enumerate_mappings(std::span<const RadicalDetection> detections, std::size_t top_k,
                                      std::size_t cap) {
    RankEnumeration ranks = enumerate_rank_tuples(detections, top_k, cap);
    MappingEnumeration out;
    out.product_size = ranks.product_size;
    out.truncated = ranks.truncated;
    out.mappings.reserve(ranks.tuples.size());
    for (const auto& t : ranks.tuples) {
        RadicalMapping m;
        m.choices.reserve(t.ranks.size());
        for (std::size_t d = 0; d < t.ranks.size(); ++d) {
            const auto& cat = detections[d].categories[t.ranks[d]];
            m.choices.push_back({d, t.ranks[d], cat.id, cat.p});
        }
        m.conf = mapping_confidence(m);
        out.mappings.push_back(std::move(m));
    }
    return out;
}

}  // namespace radreason
