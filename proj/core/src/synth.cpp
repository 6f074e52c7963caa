#include "radreason/synth.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "radreason/error.hpp"

namespace radreason {

bool Rect::within_unit_square(double tol) const {
    return x >= -tol && y >= -tol && w > 0.0 && h > 0.0 && x + w <= 1.0 + tol && y + h <= 1.0 + tol;
}

double overlap_area(const Rect& a, const Rect& b) {
    const double ox = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
    const double oy = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
    return (ox > 0.0 && oy > 0.0) ? ox * oy : 0.0;
}

bool template_is_valid(const LayoutTemplate& layout, double max_overlap) {
    if (layout.slots.empty()) return false;
    for (const auto& s : layout.slots) {
        if (!s.within_unit_square()) return false;
    }
    if (layout.nested) return true;
    for (std::size_t i = 0; i < layout.slots.size(); ++i) {
        for (std::size_t j = i + 1; j < layout.slots.size(); ++j) {
            const double smaller = std::min(layout.slots[i].area(), layout.slots[j].area());
            if (overlap_area(layout.slots[i], layout.slots[j]) > max_overlap * smaller + 1e-12) return false;
        }
    }
    return true;
}

TemplateSet TemplateSet::defaults() {
    constexpr double third = 1.0 / 3.0;
    TemplateSet set;
    auto add = [&](const char* id, std::vector<Rect> slots, bool nested = false) {
        set.set(LayoutTemplate{StructureId(id), std::move(slots), nested});
    };
    add("left-right", {{0, 0, 0.5, 1}, {0.5, 0, 0.5, 1}});
    add("top-bottom", {{0, 0, 1, 0.5}, {0, 0.5, 1, 0.5}});
    add("single", {{0, 0, 1, 1}});
    add("left-middle-right", {{0, 0, third, 1}, {third, 0, third, 1}, {2 * third, 0, third, 1}});
    add("top-middle-bottom", {{0, 0, 1, third}, {0, third, 1, third}, {0, 2 * third, 1, third}});
    add("full-enclosure", {{0, 0, 1, 1}, {0.25, 0.25, 0.5, 0.5}}, true);
    add("enclosure-open-bottom", {{0, 0, 1, 1}, {0.25, 0.25, 0.5, 0.75}}, true);
    add("enclosure-open-top", {{0, 0, 1, 1}, {0.25, 0, 0.5, 0.75}}, true);
    add("enclosure-open-right", {{0, 0, 1, 1}, {0.25, 0.25, 0.75, 0.5}}, true);
    add("enclosure-open-left", {{0, 0, 1, 1}, {0, 0.25, 0.75, 0.5}}, true);
    add("surround-upper-left", {{0, 0, 1, 1}, {0.3, 0.3, 0.7, 0.7}}, true);
    add("surround-upper-right", {{0, 0, 1, 1}, {0, 0.3, 0.7, 0.7}}, true);
    add("surround-lower-left", {{0, 0, 1, 1}, {0.3, 0, 0.7, 0.7}}, true);
    add("overlay", {{0, 0, 1, 1}, {0.1, 0.1, 0.8, 0.8}}, true);
    return set;
}

TemplateSet TemplateSet::from_json(const nlohmann::json& document) {
    TemplateSet set = defaults();
    auto it = document.find("templates");
    if (it == document.end() || !it->is_array()) throw Error(ErrorKind::schema, "templates: missing array");
    for (const auto& t : *it) {
        if (!t.is_object() || !t.contains("structure") || !t["structure"].is_string() || !t.contains("slots") ||
            !t["slots"].is_array()) {
            throw Error(ErrorKind::schema, "templates: entries need \"structure\" and \"slots\"");
        }
        LayoutTemplate layout;
        layout.structure = StructureId(t["structure"].get<std::string>());
        layout.nested = t.value("nested", false);
        for (const auto& s : t["slots"]) {
            if (!s.is_array() || s.size() != 4) throw Error(ErrorKind::schema, "templates: slots are [x, y, w, h]");
            layout.slots.push_back({s[0].get<double>(), s[1].get<double>(), s[2].get<double>(), s[3].get<double>()});
        }
        if (!template_is_valid(layout)) {
            throw Error(ErrorKind::schema, "templates: invalid layout for '" + layout.structure.str() + "'");
        }
        set.set(std::move(layout));
    }
    return set;
}

const LayoutTemplate* TemplateSet::find(const StructureId& id) const {
    auto it = templates_.find(id);
    return it == templates_.end() ? nullptr : &it->second;
}

void TemplateSet::set(LayoutTemplate layout) {
    if (!templates_.count(layout.structure)) order_.push_back(layout.structure);
    StructureId key = layout.structure;
    templates_.insert_or_assign(std::move(key), std::move(layout));
}

bool arity_compatible(int arity, std::size_t count) {
    if (arity < 1 || count < 1) return false;
    const auto a = static_cast<std::size_t>(arity);
    return count == a || (a >= 2 && count > a);
}

namespace {

Rect jittered(Rect r, double jitter, StreamRng& rng) {
    if (jitter <= 0.0) return r;
    std::uniform_real_distribution<double> u(-jitter, jitter);
    r.x *= 1.0 + u(rng);
    r.y *= 1.0 + u(rng);
    r.w *= 1.0 + u(rng);
    r.h *= 1.0 + u(rng);
    r.x = std::clamp(r.x, 0.0, 1.0 - 1e-6);
    r.y = std::clamp(r.y, 0.0, 1.0 - 1e-6);
    r.w = std::clamp(r.w, 1e-6, 1.0 - r.x);
    r.h = std::clamp(r.h, 1e-6, 1.0 - r.y);
    return r;
}

std::vector<Rect> split(const Rect& r, std::size_t parts) {
    std::vector<Rect> out;
    for (std::size_t i = 0; i < parts; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(parts);
        const double g = 1.0 / static_cast<double>(parts);
        if (r.w >= r.h) {
            out.push_back({r.x + f * r.w, r.y, g * r.w, r.h});
        } else {
            out.push_back({r.x, r.y + f * r.h, r.w, g * r.h});
        }
    }
    return out;
}

}  // namespace

std::vector<Rect> layout_for_structure(const TemplateSet& templates, const StructureId& structure, int arity,
                                       double jitter, StreamRng& rng) {
    const LayoutTemplate* layout = templates.find(structure);
    if (!layout) throw Error(ErrorKind::unknown_id, "no layout template for structure '" + structure.str() + "'");
    if (layout->arity() != arity) {
        throw Error(ErrorKind::invalid_params, "structure '" + structure.str() + "' has arity " +
                                                   std::to_string(layout->arity()) + ", not " + std::to_string(arity));
    }
    std::vector<Rect> out;
    out.reserve(layout->slots.size());
    for (const auto& slot : layout->slots) out.push_back(jittered(slot, jitter, rng));
    return out;
}

std::vector<Rect> layout_for_count(const TemplateSet& templates, const StructureId& structure, std::size_t count,
                                   double jitter, StreamRng& rng) {
    if (count == 0) return {};
    const LayoutTemplate* layout = templates.find(structure);
    if (!layout || !arity_compatible(layout->arity(), count)) {
        std::vector<Rect> strips = split(Rect{0, 0, 1, 1}, count);
        for (auto& r : strips) r = jittered(r, jitter, rng);
        return strips;
    }
    std::vector<Rect> slots = layout_for_structure(templates, structure, layout->arity(), jitter, rng);
    if (count > slots.size()) {
        const Rect last = slots.back();
        slots.pop_back();
        for (const auto& part : split(last, count - slots.size())) slots.push_back(part);
    }
    return slots;
}

std::vector<GlyphBox> layout_character(const TemplateSet& templates, const CharacterEntry& entry, double jitter,
                                       StreamRng& rng) {
    const std::vector<Rect> rects = layout_for_count(templates, entry.structure, entry.radicals.size(), jitter, rng);
    std::vector<GlyphBox> out;
    for (std::size_t i = 0; i < rects.size(); ++i) out.push_back({entry.radicals[i], rects[i]});
    return out;
}

void SynthParams::validate() const {
    if (n_characters < 1 || n_radicals < 1 || n_structures < 1) {
        throw Error(ErrorKind::invalid_params, "synthetic counts must be >= 1");
    }
    if (min_radicals < 1 || min_radicals > max_radicals) {
        throw Error(ErrorKind::invalid_params, "radical count range must satisfy 1 <= min <= max");
    }
}

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
    if (a == 0 || b == 0) return 0;
    return a > kSaturated / b ? kSaturated : a * b;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) { return a > kSaturated - b ? kSaturated : a + b; }

// Multisets of size k over n symbols: C(n + k - 1, k).
std::uint64_t multiset_count(std::uint64_t n, std::uint64_t k) {
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        // result * (n + i - 1) / i stays integral at every step.
        const std::uint64_t num = n + i - 1;
        if (result > kSaturated / num) return kSaturated;
        result = result * num / i;
    }
    return result;
}

struct StructureSlot {
    StructureId id;
    int arity = 0;  // 0: unknown, accepts any count
};

bool accepts(const StructureSlot& s, std::size_t count) { return s.arity == 0 || arity_compatible(s.arity, count); }

using Key = std::vector<std::uint32_t>;

struct Composition {
    std::vector<std::uint32_t> ordered;  // reading order
    std::uint32_t structure = 0;
};

// Draws radical compositions that are unique per (multiset, structure), or per
// multiset when `unique_multisets` is set.
class CompositionSampler {
public:
    CompositionSampler(std::size_t n_radicals, std::vector<StructureSlot> structures, std::size_t min_count,
                       std::size_t max_count, bool unique_multisets, std::uint64_t seed)
        : n_radicals_(n_radicals),
          structures_(std::move(structures)),
          min_count_(min_count),
          unique_multisets_(unique_multisets),
          rng_(seed, 0x5e7'7e5e),
          per_count_(max_count - min_count + 1) {
        for (std::size_t c = min_count; c <= max_count; ++c) {
            auto& pc = per_count_[c - min_count];
            for (std::uint32_t s = 0; s < structures_.size(); ++s) {
                if (accepts(structures_[s], c)) pc.structures.push_back(s);
            }
            const std::uint64_t multisets = multiset_count(n_radicals, c);
            pc.capacity = pc.structures.empty() ? 0
                          : unique_multisets_   ? multisets
                                                : sat_mul(multisets, pc.structures.size());
        }
    }

    void mark_existing(const Key& key, std::uint32_t structure) {
        used_multisets_.insert(key);
        const bool fresh_combo = used_combos_.emplace(key, structure).second;
        if (key.size() < min_count_ || key.size() - min_count_ >= per_count_.size()) return;
        auto& pc = per_count_[key.size() - min_count_];
        if (unique_multisets_) {
            pc.used = count_multisets_of_size(key.size());
        } else if (fresh_combo && accepts(structures_[structure], key.size())) {
            ++pc.used;
        }
    }

    std::uint64_t remaining() const {
        std::uint64_t total = 0;
        for (const auto& pc : per_count_) total = sat_add(total, pc.capacity - std::min(pc.capacity, pc.used));
        return total;
    }

    Composition next() {
        std::vector<std::size_t> open;
        for (std::size_t i = 0; i < per_count_.size(); ++i) {
            if (per_count_[i].used < per_count_[i].capacity) open.push_back(i);
        }
        if (open.empty()) throw Error(ErrorKind::infeasible, "composition space exhausted");
        const std::size_t slot = open[std::uniform_int_distribution<std::size_t>(0, open.size() - 1)(rng_)];
        auto& pc = per_count_[slot];
        const std::size_t count = slot + min_count_;

        Composition comp;
        if (!pc.materialized && pc.used * 2 < pc.capacity) {
            for (int attempt = 0; attempt < 10000; ++attempt) {
                if (draw(count, pc, comp)) {
                    ++pc.used;
                    return comp;
                }
            }
        }
        if (!pc.materialized) materialize(count, pc);
        if (pc.pool.empty()) throw Error(ErrorKind::infeasible, "composition space exhausted");
        const auto [key, structure] = pc.pool.back();
        pc.pool.pop_back();
        record(key, structure);
        ++pc.used;
        comp.ordered = key;
        std::shuffle(comp.ordered.begin(), comp.ordered.end(), rng_);
        comp.structure = structure;
        return comp;
    }

private:
    struct PerCount {
        std::vector<std::uint32_t> structures;
        std::uint64_t capacity = 0;
        std::uint64_t used = 0;
        bool materialized = false;
        std::vector<std::pair<Key, std::uint32_t>> pool;
    };

    std::uint64_t count_multisets_of_size(std::size_t size) const {
        return static_cast<std::uint64_t>(std::count_if(used_multisets_.begin(), used_multisets_.end(),
                                                        [&](const Key& k) { return k.size() == size; }));
    }

    bool taken(const Key& key, std::uint32_t structure) const {
        return unique_multisets_ ? used_multisets_.count(key) > 0 : used_combos_.count({key, structure}) > 0;
    }

    void record(const Key& key, std::uint32_t structure) {
        used_multisets_.insert(key);
        used_combos_.emplace(key, structure);
    }

    bool draw(std::size_t count, const PerCount& pc, Composition& comp) {
        std::uniform_int_distribution<std::uint32_t> radical(0, static_cast<std::uint32_t>(n_radicals_ - 1));
        std::uniform_int_distribution<std::size_t> pick(0, pc.structures.size() - 1);
        comp.ordered.resize(count);
        for (auto& r : comp.ordered) r = radical(rng_);
        comp.structure = pc.structures[pick(rng_)];
        Key key = comp.ordered;
        std::sort(key.begin(), key.end());
        if (taken(key, comp.structure)) return false;
        record(key, comp.structure);
        return true;
    }

    void materialize(std::size_t count, PerCount& pc) {
        if (pc.capacity > 4'000'000) throw Error(ErrorKind::infeasible, "composition space too large to enumerate");
        pc.materialized = true;
        Key key(count, 0);
        while (true) {
            if (unique_multisets_) {
                if (!used_multisets_.count(key)) {
                    std::uniform_int_distribution<std::size_t> pick(0, pc.structures.size() - 1);
                    pc.pool.emplace_back(key, pc.structures[pick(rng_)]);
                }
            } else {
                for (std::uint32_t s : pc.structures) {
                    if (!used_combos_.count({key, s})) pc.pool.emplace_back(key, s);
                }
            }
            // Next non-decreasing sequence.
            std::size_t i = count;
            while (i > 0 && key[i - 1] + 1 >= n_radicals_) --i;
            if (i == 0) break;
            ++key[i - 1];
            for (std::size_t j = i; j < count; ++j) key[j] = key[i - 1];
        }
        std::shuffle(pc.pool.begin(), pc.pool.end(), rng_);
    }

    std::size_t n_radicals_;
    std::vector<StructureSlot> structures_;
    std::size_t min_count_;
    bool unique_multisets_;
    StreamRng rng_;
    std::vector<PerCount> per_count_;
    std::set<Key> used_multisets_;
    std::set<std::pair<Key, std::uint32_t>> used_combos_;
};

std::string padded(const std::string& prefix, std::size_t value, std::size_t width) {
    std::ostringstream os;
    os << prefix << std::setw(static_cast<int>(width)) << std::setfill('0') << value;
    return os.str();
}

std::size_t digits(std::size_t n) {
    std::size_t d = 1;
    while (n >= 10) {
        n /= 10;
        ++d;
    }
    return d;
}

std::vector<StructureInfo> synthetic_structures(std::size_t n) {
    const TemplateSet templates = TemplateSet::defaults();
    std::vector<StructureInfo> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (i < templates.order().size()) {
            const auto& id = templates.order()[i];
            out.push_back({id, id.str(), templates.find(id)->arity()});
        } else {
            const std::string id = "extra-" + std::to_string(i + 1);
            out.push_back({StructureId(id), id, 2});
        }
    }
    return out;
}

std::vector<StructureSlot> slots_of(const std::vector<StructureInfo>& structures) {
    std::vector<StructureSlot> out;
    for (const auto& s : structures) out.push_back({s.id, s.arity.value_or(0)});
    return out;
}

}  // namespace

std::uint64_t combination_capacity(const SynthParams& params) {
    params.validate();
    const auto structures = slots_of(synthetic_structures(params.n_structures));
    std::uint64_t total = 0;
    for (std::size_t c = params.min_radicals; c <= params.max_radicals; ++c) {
        const auto hosts = static_cast<std::uint64_t>(
            std::count_if(structures.begin(), structures.end(), [&](const auto& s) { return accepts(s, c); }));
        if (hosts == 0) continue;
        const std::uint64_t multisets = multiset_count(params.n_radicals, c);
        total = sat_add(total, params.unique_multisets ? multisets : sat_mul(multisets, hosts));
    }
    return total;
}

Ckg generate_synthetic_ckg(const SynthParams& params) {
    params.validate();
    const std::uint64_t capacity = combination_capacity(params);
    if (params.n_characters > capacity) {
        throw Error(ErrorKind::infeasible, "requested " + std::to_string(params.n_characters) +
                                               " characters but only " + std::to_string(capacity) +
                                               " distinct compositions exist");
    }

    CkgDocument doc;
    const std::size_t rad_width = std::max<std::size_t>(3, digits(params.n_radicals - 1));
    for (std::size_t r = 0; r < params.n_radicals; ++r) {
        doc.radicals.push_back({RadicalId(padded("r", r, rad_width)), std::nullopt});
    }
    doc.structures = synthetic_structures(params.n_structures);

    CompositionSampler sampler(params.n_radicals, slots_of(doc.structures), params.min_radicals, params.max_radicals,
                               params.unique_multisets, params.seed);
    const std::size_t char_width = std::max<std::size_t>(4, digits(params.n_characters - 1));
    for (std::size_t i = 0; i < params.n_characters; ++i) {
        const Composition comp = sampler.next();
        CharacterEntry entry;
        entry.id = CharId(padded("c", i, char_width));
        for (std::uint32_t r : comp.ordered) entry.radicals.push_back(doc.radicals[r].id);
        entry.structure = doc.structures[comp.structure].id;
        entry.source = "synthetic";
        doc.characters.push_back(std::move(entry));
    }
    return Ckg::build(std::move(doc));
}

std::vector<CharacterEntry> generate_additional_characters(const Ckg& ckg, std::size_t count,
                                                           std::size_t min_radicals, std::size_t max_radicals,
                                                           bool unique_multisets, std::uint64_t seed,
                                                           const std::string& id_prefix) {
    if (min_radicals < 1 || min_radicals > max_radicals) {
        throw Error(ErrorKind::invalid_params, "radical count range must satisfy 1 <= min <= max");
    }
    if (ckg.num_radicals() == 0 || ckg.num_structures() == 0) {
        throw Error(ErrorKind::infeasible, "graph has no radicals or structures to compose");
    }
    CompositionSampler sampler(ckg.num_radicals(), slots_of(ckg.structures()), min_radicals, max_radicals,
                               unique_multisets, seed);
    for (CharIndex c = 0; c < ckg.num_characters(); ++c) {
        sampler.mark_existing(ckg.character_key(c), ckg.character_structure(c));
    }
    if (count > sampler.remaining()) {
        throw Error(ErrorKind::infeasible, "not enough unused compositions for " + std::to_string(count) +
                                               " new characters");
    }

    std::vector<CharacterEntry> out;
    const std::size_t width = std::max<std::size_t>(4, digits(count));
    std::size_t serial = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const Composition comp = sampler.next();
        CharacterEntry entry;
        do {
            entry.id = CharId(padded(id_prefix, serial++, width));
        } while (ckg.find_character(entry.id));
        for (std::uint32_t r : comp.ordered) entry.radicals.push_back(ckg.radicals()[r].id);
        entry.structure = ckg.structures()[comp.structure].id;
        entry.source = "synthetic-additional";
        out.push_back(std::move(entry));
    }
    return out;
}

}  // namespace radreason
