#include "radreason/extractor_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "radreason/error.hpp"
#include "radreason/parallel.hpp"
#include "radreason/rng.hpp"

namespace radreason {

double NoiseModel::r_at(std::size_t position) const {
    return position < r_per_position.size() ? r_per_position[position] : r;
}

void NoiseModel::validate() const {
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(r) || !prob(s)) throw Error(ErrorKind::invalid_params, "noise r and s must lie in [0, 1]");
    for (double p : r_per_position) {
        if (!prob(p)) throw Error(ErrorKind::invalid_params, "per-position r must lie in [0, 1]");
    }
    if (!(boost > 0.0)) throw Error(ErrorKind::invalid_params, "noise boost must be positive");
    if (!(temperature > 0.0)) throw Error(ErrorKind::invalid_params, "noise temperature must be positive");
}

namespace {

struct Draw {
    std::vector<double> probs;
    bool correct = true;
};

// Scores over `n` categories where `truth` wins with probability `p_correct`.
Draw draw_distribution(std::size_t n, std::size_t truth, double p_correct, const NoiseModel& noise, StreamRng rng) {
    Draw out;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    out.correct = n <= 1 || unit(rng) < p_correct;
    std::size_t winner = truth;
    if (!out.correct) {
        std::uniform_int_distribution<std::size_t> other(0, n - 2);
        winner = other(rng);
        if (winner >= truth) ++winner;
    }

    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> scores(n);
    for (auto& z : scores) z = gauss(rng);
    scores[truth] += noise.boost;
    if (winner != truth) scores[winner] += noise.boost;
    const auto top = static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
    if (top != winner) std::swap(scores[top], scores[winner]);

    const double peak = scores[winner];
    double total = 0.0;
    out.probs.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.probs[k] = std::exp((scores[k] - peak) / noise.temperature);
        total += out.probs[k];
    }
    for (auto& p : out.probs) p /= total;
    return out;
}

}  // namespace

SimulatedSample simulate_predictions(const CharacterEntry& entry, const Ckg& ckg, const NoiseModel& noise,
                                     SampleStream stream, const TemplateSet& templates) {
    noise.validate();
    if (!ckg.find_character(entry.id)) {
        throw Error(ErrorKind::unknown_id, "character '" + entry.id.str() + "' is not in the graph");
    }

    SimulatedSample sample;
    sample.truth = entry.id;

    StreamRng layout_rng(stream.seed, stream.index, kLayoutSubstream);
    const std::vector<Rect> boxes =
        layout_for_count(templates, entry.structure, entry.radicals.size(), kDefaultJitter, layout_rng);

    const std::size_t n_radicals = ckg.num_radicals();
    for (std::size_t d = 0; d < entry.radicals.size(); ++d) {
        const RadicalIndex truth = *ckg.radical_index(entry.radicals[d]);
        const Draw draw =
            draw_distribution(n_radicals, truth, noise.r_at(d), noise, StreamRng(stream.seed, stream.index, d));
        RadicalDetection det;
        det.bbox = {boxes[d].x, boxes[d].y, boxes[d].w, boxes[d].h};
        det.objectness = 1.0;
        det.categories.reserve(n_radicals);
        for (RadicalIndex k = 0; k < n_radicals; ++k) det.categories.push_back({ckg.radicals()[k].id, draw.probs[k]});
        canonicalize(det);
        sample.predictions.detections.push_back(std::move(det));
        sample.radical_correct.push_back(draw.correct);
    }

    const StructureIndex truth_structure = *ckg.structure_index(entry.structure);
    const Draw draw = draw_distribution(ckg.num_structures(), truth_structure, noise.s, noise,
                                        StreamRng(stream.seed, stream.index, kStructureSubstream));
    for (StructureIndex k = 0; k < ckg.num_structures(); ++k) {
        sample.predictions.structure.entries.push_back({ckg.structures()[k].id, draw.probs[k]});
    }
    canonicalize(sample.predictions.structure);
    sample.structure_correct = draw.correct;
    return sample;
}

HardMatch hard_match_recognize(const PredictionSet& predictions, const Ckg& ckg, bool use_structure) {
    HardMatch out;
    std::vector<RadicalId> argmax;
    for (const auto& d : predictions.detections) {
        if (d.categories.empty()) return out;
        argmax.push_back(d.categories.front().id);
    }
    if (argmax.empty()) return out;

    std::optional<StructureIndex> structure;
    if (use_structure) {
        if (predictions.structure.entries.empty()) return out;
        structure = ckg.structure_index(predictions.structure.entries.front().id);
        if (!structure) return out;
    }

    MultisetKey key;
    try {
        key = ckg.make_key(argmax);
    } catch (const Error&) {
        return out;
    }
    std::vector<CharId> matches;
    for (CharIndex c : ckg.chars_with_multiset(key)) {
        if (structure && ckg.character_structure(c) != *structure) continue;
        matches.push_back(ckg.characters()[c].id);
    }
    if (matches.empty()) return out;
    out.id = *std::min_element(matches.begin(), matches.end());
    out.ambiguous = matches.size() > 1;
    return out;
}

HardMatch hard_match_recognize(const SimulatedSample& sample, const Ckg& ckg, bool use_structure) {
    return hard_match_recognize(sample.predictions, ckg, use_structure);
}

double expected_hard_match_accuracy(std::span<const double> element_probs) {
    double p = 1.0;
    for (double r : element_probs) p *= r;
    return p;
}

std::string_view to_string(Strategy strategy) {
    switch (strategy) {
        case Strategy::hard_top1: return "hard-top1";
        case Strategy::hard_top1_sp: return "hard-top1-sp";
        case Strategy::reason_rp_only: return "reason-rp-only";
        case Strategy::reason_full: return "reason-full";
    }
    return "unknown";
}

Strategy parse_strategy(std::string_view name) {
    for (Strategy s : {Strategy::hard_top1, Strategy::hard_top1_sp, Strategy::reason_rp_only, Strategy::reason_full}) {
        if (to_string(s) == name) return s;
    }
    throw Error(ErrorKind::unknown_strategy, "unknown strategy '" + std::string(name) + "'");
}

std::vector<CharId> recognize(Strategy strategy, const PredictionSet& predictions, const Ckg& ckg,
                              const ReasonerParams& params) {
    std::vector<CharId> ranked;
    switch (strategy) {
        case Strategy::hard_top1:
        case Strategy::hard_top1_sp: {
            const HardMatch m = hard_match_recognize(predictions, ckg, strategy == Strategy::hard_top1_sp);
            if (m.id) ranked.push_back(*m.id);
            return ranked;
        }
        case Strategy::reason_rp_only: {
            PredictionSet radicals_only;
            radicals_only.detections = predictions.detections;
            for (const auto& s : ckg.structures()) radicals_only.structure.entries.push_back({s.id, 1.0});
            ReasonerParams p = params;
            p.theta = 1.0;
            p.max_structures.reset();
            for (const auto& c : char_reason(ckg, radicals_only, p).candidates) ranked.push_back(c.id);
            return ranked;
        }
        case Strategy::reason_full:
            for (const auto& c : char_reason(ckg, predictions, params).candidates) ranked.push_back(c.id);
            return ranked;
    }
    return ranked;
}

McEstimate run_monte_carlo(const Ckg& ckg, const NoiseModel& noise, std::size_t n_samples, Strategy strategy,
                           std::uint64_t seed, const McOptions& options) {
    if (n_samples < 1) throw Error(ErrorKind::invalid_params, "n_samples must be >= 1");
    noise.validate();
    options.reasoner.validate();

    std::vector<CharIndex> pool;
    if (options.categories.empty()) {
        for (CharIndex c = 0; c < ckg.num_characters(); ++c) pool.push_back(c);
    } else {
        for (const auto& id : options.categories) {
            auto c = ckg.char_index(id);
            if (!c) throw Error(ErrorKind::unknown_id, "unknown character '" + id.str() + "'");
            pool.push_back(*c);
        }
    }
    if (pool.empty()) throw Error(ErrorKind::invalid_params, "no characters to sample");

    std::vector<std::uint8_t> hit(n_samples, 0);
    parallel_for(n_samples, options.threads, [&](std::size_t i) {
        StreamRng pick_rng(seed, i, kPickSubstream);
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        const CharacterEntry& entry = ckg.characters()[pool[pick(pick_rng)]];
        const SimulatedSample sample = simulate_predictions(entry, ckg, noise, {seed, i});
        const std::vector<CharId> ranked = recognize(strategy, sample.predictions, ckg, options.reasoner);
        hit[i] = !ranked.empty() && ranked.front() == entry.id;
    });

    std::size_t correct = 0;
    for (auto h : hit) correct += h;
    McEstimate est;
    est.n_samples = n_samples;
    est.accuracy = static_cast<double>(correct) / static_cast<double>(n_samples);
    est.standard_error = std::sqrt(est.accuracy * (1.0 - est.accuracy) / static_cast<double>(n_samples));
    est.ci95_half_width = 1.96 * est.standard_error;
    return est;
}

}  // namespace radreason
