#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "radreason/error.hpp"
#include "radreason/ids.hpp"

namespace radreason {

// Dense indices assigned in document (insertion) order.
using RadicalIndex = std::uint32_t;
using StructureIndex = std::uint32_t;
using CharIndex = std::uint32_t;

/// Canonical radical multiset: dense radical indices sorted ascending, with multiplicity.
using MultisetKey = std::vector<RadicalIndex>;

struct MultisetKeyHash {
    std::size_t operator()(const MultisetKey& key) const noexcept;
};

struct RadicalInfo {
    RadicalId id;
    std::optional<std::string> name;

    friend bool operator==(const RadicalInfo&, const RadicalInfo&) = default;
};

struct StructureInfo {
    StructureId id;
    std::optional<std::string> name;
    std::optional<int> arity;

    friend bool operator==(const StructureInfo&, const StructureInfo&) = default;
};

struct CharacterEntry {
    CharId id;
    std::vector<RadicalId> radicals;  // reading order
    StructureId structure;
    std::optional<std::string> source;

    friend bool operator==(const CharacterEntry&, const CharacterEntry&) = default;
};

enum class MatchMode { exact, subset };

std::string_view to_string(MatchMode mode);
MatchMode parse_match_mode(std::string_view text);

/// Unchecked entity lists as they appear in a CKG document.
struct CkgDocument {
    std::vector<RadicalInfo> radicals;
    std::vector<StructureInfo> structures;
    std::vector<CharacterEntry> characters;
};

/// Immutable character knowledge graph: radicals, structures and characters
/// linked by *contain* (character -> radicals) and *compose* (structure -> character),
/// with inverted indexes by radical multiset and by structure.
class CharacterKnowledgeGraph {
public:
    CharacterKnowledgeGraph() = default;

    /// Builds the graph and its indexes. Throws Error{duplicate|reference|schema}
    /// on the first offending entity.
    static CharacterKnowledgeGraph build(CkgDocument document);

    const std::vector<RadicalInfo>& radicals() const noexcept { return radicals_; }
    const std::vector<StructureInfo>& structures() const noexcept { return structures_; }
    const std::vector<CharacterEntry>& characters() const noexcept { return characters_; }

    std::size_t num_radicals() const noexcept { return radicals_.size(); }
    std::size_t num_structures() const noexcept { return structures_.size(); }
    std::size_t num_characters() const noexcept { return characters_.size(); }

    std::optional<RadicalIndex> radical_index(const RadicalId& id) const;
    std::optional<StructureIndex> structure_index(const StructureId& id) const;
    std::optional<CharIndex> char_index(const CharId& id) const;

    const CharacterEntry* find_character(const CharId& id) const;

    const MultisetKey& character_key(CharIndex c) const { return char_keys_[c]; }
    StructureIndex character_structure(CharIndex c) const { return char_structures_[c]; }

    /// Canonical key for a list of radical ids. Throws Error{unknown_id}.
    MultisetKey make_key(std::span<const RadicalId> radicals) const;

    /// Characters whose multiset equals `key`, ascending by CharIndex.
    std::span<const CharIndex> chars_with_multiset(const MultisetKey& key) const;
    /// Characters whose multiset contains `key`, ascending by CharIndex.
    std::vector<CharIndex> chars_containing(const MultisetKey& key) const;
    std::span<const CharIndex> chars_with_structure(StructureIndex s) const;

    /// Rebuilds every index from the entries and compares with the stored ones.
    bool indexes_consistent() const;

    CkgDocument to_document() const;

    /// Entity-set equality; document order is irrelevant.
    friend bool operator==(const CharacterKnowledgeGraph& a, const CharacterKnowledgeGraph& b);

private:
    struct Indexes {
        std::unordered_map<MultisetKey, std::vector<CharIndex>, MultisetKeyHash> by_multiset;
        std::vector<std::vector<CharIndex>> by_structure;
        std::vector<std::vector<CharIndex>> by_radical;  // distinct characters containing a radical

        friend bool operator==(const Indexes&, const Indexes&) = default;
    };

    Indexes rebuild_indexes() const;

    std::vector<RadicalInfo> radicals_;
    std::vector<StructureInfo> structures_;
    std::vector<CharacterEntry> characters_;

    std::unordered_map<RadicalId, RadicalIndex> radical_lookup_;
    std::unordered_map<StructureId, StructureIndex> structure_lookup_;
    std::unordered_map<CharId, CharIndex> char_lookup_;

    std::vector<MultisetKey> char_keys_;
    std::vector<StructureIndex> char_structures_;
    Indexes indexes_;
};

using Ckg = CharacterKnowledgeGraph;

// Id-level queries used by tools and the brute-force oracle. Results are
// sorted by CharId and free of duplicates.
std::vector<CharId> search_rad(const Ckg& ckg, std::span<const RadicalId> mapping,
                               MatchMode mode = MatchMode::exact);
std::vector<CharId> search_str(const Ckg& ckg, const StructureId& structure);

/// Returns a new graph with `entry` added. Throws Error{duplicate|reference|schema};
/// the input graph is never modified.
Ckg add_character(const Ckg& ckg, CharacterEntry entry);

enum class Severity { warning, error };

struct ValidationIssue {
    Severity severity;
    ErrorKind category;
    std::string entity;
    std::string message;
};

struct ValidationReport {
    bool ok = true;
    std::vector<ValidationIssue> issues;

    std::size_t error_count() const;
    std::size_t warning_count() const;
};

ValidationReport validate_ckg(const CkgDocument& document);
ValidationReport validate_ckg(const Ckg& ckg);

struct CkgStats {
    std::size_t n_characters = 0;
    std::size_t n_radicals = 0;
    std::size_t n_structures = 0;
    std::size_t n_radicals_used = 0;
    std::size_t n_structures_used = 0;
    /// radical id -> number of characters containing it
    std::map<std::string, std::size_t> radical_usage;
    /// radical count -> number of characters with that many radicals
    std::map<std::size_t, std::size_t> radical_count_histogram;
};

CkgStats ckg_stats(const Ckg& ckg);

}  // namespace radreason
