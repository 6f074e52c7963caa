#include "radreason/ckg.hpp"

#include <algorithm>
#include <set>

namespace radreason {

std::size_t MultisetKeyHash::operator()(const MultisetKey& key) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (RadicalIndex r : key) {
        h ^= static_cast<std::size_t>(r) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
}

std::string_view to_string(MatchMode mode) {
    return mode == MatchMode::exact ? "exact" : "subset";
}

MatchMode parse_match_mode(std::string_view text) {
    if (text == "exact") return MatchMode::exact;
    if (text == "subset") return MatchMode::subset;
    throw Error(ErrorKind::invalid_params, "unknown match mode '" + std::string(text) + "'");
}

namespace {

// True when sorted multiset `needle` is contained in sorted multiset `hay`.
bool multiset_includes(const MultisetKey& hay, const MultisetKey& needle) {
    return std::includes(hay.begin(), hay.end(), needle.begin(), needle.end());
}

}  // namespace

Ckg CharacterKnowledgeGraph::build(CkgDocument document) {
    const ValidationReport report = validate_ckg(document);
    for (const auto& issue : report.issues) {
        if (issue.severity == Severity::error) throw Error(issue.category, issue.message);
    }

    Ckg g;
    g.radicals_ = std::move(document.radicals);
    g.structures_ = std::move(document.structures);
    g.characters_ = std::move(document.characters);

    for (RadicalIndex i = 0; i < g.radicals_.size(); ++i) g.radical_lookup_.emplace(g.radicals_[i].id, i);
    for (StructureIndex i = 0; i < g.structures_.size(); ++i) g.structure_lookup_.emplace(g.structures_[i].id, i);

    g.char_keys_.reserve(g.characters_.size());
    g.char_structures_.reserve(g.characters_.size());
    for (CharIndex c = 0; c < g.characters_.size(); ++c) {
        const auto& entry = g.characters_[c];
        g.char_lookup_.emplace(entry.id, c);
        g.char_keys_.push_back(g.make_key(entry.radicals));
        g.char_structures_.push_back(g.structure_lookup_.at(entry.structure));
    }
    g.indexes_ = g.rebuild_indexes();
    return g;
}

CharacterKnowledgeGraph::Indexes CharacterKnowledgeGraph::rebuild_indexes() const {
    Indexes idx;
    idx.by_structure.resize(structures_.size());
    idx.by_radical.resize(radicals_.size());
    for (CharIndex c = 0; c < characters_.size(); ++c) {
        idx.by_multiset[char_keys_[c]].push_back(c);
        idx.by_structure[char_structures_[c]].push_back(c);
        const auto& key = char_keys_[c];
        for (std::size_t i = 0; i < key.size(); ++i) {
            if (i == 0 || key[i] != key[i - 1]) idx.by_radical[key[i]].push_back(c);
        }
    }
    return idx;
}

std::optional<RadicalIndex> CharacterKnowledgeGraph::radical_index(const RadicalId& id) const {
    auto it = radical_lookup_.find(id);
    if (it == radical_lookup_.end()) return std::nullopt;
    return it->second;
}

std::optional<StructureIndex> CharacterKnowledgeGraph::structure_index(const StructureId& id) const {
    auto it = structure_lookup_.find(id);
    if (it == structure_lookup_.end()) return std::nullopt;
    return it->second;
}

std::optional<CharIndex> CharacterKnowledgeGraph::char_index(const CharId& id) const {
    auto it = char_lookup_.find(id);
    if (it == char_lookup_.end()) return std::nullopt;
    return it->second;
}

const CharacterEntry* CharacterKnowledgeGraph::find_character(const CharId& id) const {
    auto c = char_index(id);
    return c ? &characters_[*c] : nullptr;
}

MultisetKey CharacterKnowledgeGraph::make_key(std::span<const RadicalId> radicals) const {
    MultisetKey key;
    key.reserve(radicals.size());
    for (const auto& r : radicals) {
        auto idx = radical_index(r);
        if (!idx) throw Error(ErrorKind::unknown_id, "unknown radical '" + r.str() + "'");
        key.push_back(*idx);
    }
    std::sort(key.begin(), key.end());
    return key;
}

std::span<const CharIndex> CharacterKnowledgeGraph::chars_with_multiset(const MultisetKey& key) const {
    auto it = indexes_.by_multiset.find(key);
    if (it == indexes_.by_multiset.end()) return {};
    return it->second;
}

std::vector<CharIndex> CharacterKnowledgeGraph::chars_containing(const MultisetKey& key) const {
    std::vector<CharIndex> out;
    if (key.empty()) {
        out.resize(characters_.size());
        for (CharIndex c = 0; c < out.size(); ++c) out[c] = c;
        return out;
    }
    // Scan the shortest posting list among the query radicals.
    const std::vector<CharIndex>* shortest = nullptr;
    for (RadicalIndex r : key) {
        const auto& postings = indexes_.by_radical.at(r);
        if (!shortest || postings.size() < shortest->size()) shortest = &postings;
    }
    for (CharIndex c : *shortest) {
        if (multiset_includes(char_keys_[c], key)) out.push_back(c);
    }
    return out;
}

std::span<const CharIndex> CharacterKnowledgeGraph::chars_with_structure(StructureIndex s) const {
    return indexes_.by_structure.at(s);
}

bool CharacterKnowledgeGraph::indexes_consistent() const {
    for (CharIndex c = 0; c < characters_.size(); ++c) {
        if (char_keys_[c] != make_key(characters_[c].radicals)) return false;
        if (structures_[char_structures_[c]].id != characters_[c].structure) return false;
    }
    return rebuild_indexes() == indexes_;
}

CkgDocument CharacterKnowledgeGraph::to_document() const {
    return CkgDocument{radicals_, structures_, characters_};
}

bool operator==(const CharacterKnowledgeGraph& a, const CharacterKnowledgeGraph& b) {
    auto sorted = [](auto items) {
        std::sort(items.begin(), items.end(), [](const auto& x, const auto& y) { return x.id < y.id; });
        return items;
    };
    return sorted(a.radicals_) == sorted(b.radicals_) && sorted(a.structures_) == sorted(b.structures_) &&
           sorted(a.characters_) == sorted(b.characters_);
}

namespace {

std::vector<CharId> to_sorted_ids(const Ckg& ckg, std::span<const CharIndex> chars) {
    std::vector<CharId> ids;
    ids.reserve(chars.size());
    for (CharIndex c : chars) ids.push_back(ckg.characters()[c].id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

}  // namespace

std::vector<CharId> search_rad(const Ckg& ckg, std::span<const RadicalId> mapping, MatchMode mode) {
    const MultisetKey key = ckg.make_key(mapping);
    if (mode == MatchMode::exact) return to_sorted_ids(ckg, ckg.chars_with_multiset(key));
    return to_sorted_ids(ckg, ckg.chars_containing(key));
}

std::vector<CharId> search_str(const Ckg& ckg, const StructureId& structure) {
    auto s = ckg.structure_index(structure);
    if (!s) throw Error(ErrorKind::unknown_id, "unknown structure '" + structure.str() + "'");
    return to_sorted_ids(ckg, ckg.chars_with_structure(*s));
}

Ckg add_character(const Ckg& ckg, CharacterEntry entry) {
    if (ckg.find_character(entry.id)) {
        throw Error(ErrorKind::duplicate, "duplicate character id '" + entry.id.str() + "'");
    }
    CkgDocument doc = ckg.to_document();
    doc.characters.push_back(std::move(entry));
    return Ckg::build(std::move(doc));
}

std::size_t ValidationReport::error_count() const {
    return static_cast<std::size_t>(std::count_if(issues.begin(), issues.end(),
                                                  [](const auto& i) { return i.severity == Severity::error; }));
}

std::size_t ValidationReport::warning_count() const { return issues.size() - error_count(); }

ValidationReport validate_ckg(const CkgDocument& document) {
    ValidationReport report;
    auto add = [&](Severity sev, ErrorKind cat, const std::string& entity, std::string message) {
        report.issues.push_back({sev, cat, entity, std::move(message)});
        if (sev == Severity::error) report.ok = false;
    };

    auto check_ids = [&](const auto& items, const char* what) {
        std::set<std::string> seen;
        for (const auto& item : items) {
            const std::string& id = item.id.str();
            if (!is_valid_identifier(id)) {
                add(Severity::error, ErrorKind::schema, id, std::string("invalid ") + what + " id '" + id + "'");
            }
            if (!seen.insert(id).second) {
                add(Severity::error, ErrorKind::duplicate, id, std::string("duplicate ") + what + " id '" + id + "'");
            }
        }
        return seen;
    };
    const auto radical_ids = check_ids(document.radicals, "radical");
    const auto structure_ids = check_ids(document.structures, "structure");
    check_ids(document.characters, "character");

    for (const auto& s : document.structures) {
        if (s.arity && *s.arity < 1) {
            add(Severity::error, ErrorKind::schema, s.id.str(), "structure '" + s.id.str() + "' has arity < 1");
        }
    }

    std::set<std::string> used_radicals;
    std::set<std::string> used_structures;
    for (const auto& c : document.characters) {
        const std::string& cid = c.id.str();
        if (c.radicals.empty()) {
            add(Severity::error, ErrorKind::schema, cid, "character '" + cid + "' has an empty radical list");
        }
        for (const auto& r : c.radicals) {
            if (!radical_ids.count(r.str())) {
                add(Severity::error, ErrorKind::reference, cid,
                    "character '" + cid + "' cites unknown radical '" + r.str() + "'");
            }
            used_radicals.insert(r.str());
        }
        if (!structure_ids.count(c.structure.str())) {
            add(Severity::error, ErrorKind::reference, cid,
                "character '" + cid + "' cites unknown structure '" + c.structure.str() + "'");
        }
        used_structures.insert(c.structure.str());
    }

    for (const auto& r : document.radicals) {
        if (!used_radicals.count(r.id.str())) {
            add(Severity::warning, ErrorKind::reference, r.id.str(),
                "radical '" + r.id.str() + "' is not used by any character");
        }
    }
    for (const auto& s : document.structures) {
        if (!used_structures.count(s.id.str())) {
            add(Severity::warning, ErrorKind::reference, s.id.str(),
                "structure '" + s.id.str() + "' is not used by any character");
        }
    }
    return report;
}

ValidationReport validate_ckg(const Ckg& ckg) {
    ValidationReport report = validate_ckg(ckg.to_document());
    if (!ckg.indexes_consistent()) {
        report.issues.push_back({Severity::error, ErrorKind::schema, "", "indexes disagree with character entries"});
        report.ok = false;
    }
    return report;
}

CkgStats ckg_stats(const Ckg& ckg) {
    CkgStats stats;
    stats.n_characters = ckg.num_characters();
    stats.n_radicals = ckg.num_radicals();
    stats.n_structures = ckg.num_structures();

    std::vector<std::size_t> usage(ckg.num_radicals(), 0);
    std::vector<bool> structure_used(ckg.num_structures(), false);
    for (CharIndex c = 0; c < ckg.num_characters(); ++c) {
        const auto& key = ckg.character_key(c);
        for (std::size_t i = 0; i < key.size(); ++i) {
            if (i == 0 || key[i] != key[i - 1]) ++usage[key[i]];
        }
        structure_used[ckg.character_structure(c)] = true;
        ++stats.radical_count_histogram[key.size()];
    }
    for (RadicalIndex r = 0; r < usage.size(); ++r) {
        stats.radical_usage[ckg.radicals()[r].id.str()] = usage[r];
        if (usage[r] > 0) ++stats.n_radicals_used;
    }
    stats.n_structures_used = static_cast<std::size_t>(std::count(structure_used.begin(), structure_used.end(), true));
    return stats;
}

}  // namespace radreason
