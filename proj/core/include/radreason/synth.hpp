#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radreason/ckg.hpp"
#include "radreason/rng.hpp"

namespace radreason {

/// Rectangle in fractions of the canvas side.
struct Rect {
    double x = 0.0;
    double y = 0.0;
    double w = 1.0;
    double h = 1.0;

    double area() const { return w * h; }
    bool within_unit_square(double tol = 1e-12) const;

    friend bool operator==(const Rect&, const Rect&) = default;
};

double overlap_area(const Rect& a, const Rect& b);

struct LayoutTemplate {
    StructureId structure;
    std::vector<Rect> slots;
    /// Slots deliberately contain one another (enclosures, surrounds, overlay);
    /// such templates are exempt from the overlap bound.
    bool nested = false;

    int arity() const { return static_cast<int>(slots.size()); }
};

inline constexpr double kDefaultMaxOverlap = 0.15;
inline constexpr double kDefaultJitter = 0.05;

/// Checks slot count, unit-square containment and, for non-nested templates,
/// pairwise overlap <= max_overlap * (smaller slot area).
bool template_is_valid(const LayoutTemplate& layout, double max_overlap = kDefaultMaxOverlap);

class TemplateSet {
public:
    /// The fourteen canonical structural relations.
    static TemplateSet defaults();
    /// Defaults overridden by a `{"templates":[{"structure":..,"slots":[[x,y,w,h],..],"nested":..}]}` document.
    static TemplateSet from_json(const nlohmann::json& document);

    const LayoutTemplate* find(const StructureId& id) const;
    void set(LayoutTemplate layout);

    /// Canonical structure ids in generation order.
    const std::vector<StructureId>& order() const { return order_; }

private:
    std::map<StructureId, LayoutTemplate> templates_;
    std::vector<StructureId> order_;
};

/// A structure of `arity` slots can host `count` radicals when the counts agree,
/// or when it has at least two slots and extra radicals share the last slot.
bool arity_compatible(int arity, std::size_t count);

/// Template slots with multiplicative jitter in [1 - jitter, 1 + jitter] on every
/// coordinate, clipped to the unit square. Throws Error{unknown_id} for an unknown
/// structure and Error{invalid_params} on arity mismatch.
std::vector<Rect> layout_for_structure(const TemplateSet& templates, const StructureId& structure, int arity,
                                       double jitter, StreamRng& rng);

/// Layout for a character with `count` radicals: extra radicals split the last slot.
/// Structures without a template fall back to equal vertical strips.
std::vector<Rect> layout_for_count(const TemplateSet& templates, const StructureId& structure, std::size_t count,
                                   double jitter, StreamRng& rng);

struct GlyphBox {
    RadicalId radical;
    Rect rect;
};

std::vector<GlyphBox> layout_character(const TemplateSet& templates, const CharacterEntry& entry, double jitter,
                                       StreamRng& rng);

struct SynthParams {
    std::size_t n_characters = 1000;
    std::size_t n_radicals = 200;
    std::size_t n_structures = 14;
    std::size_t min_radicals = 1;
    std::size_t max_radicals = 4;
    /// Require every character to have a distinct radical multiset.
    bool unique_multisets = false;
    std::uint64_t seed = 0;

    /// Throws Error{invalid_params}.
    void validate() const;
};

/// Number of distinct compositions the parameters allow (saturating).
std::uint64_t combination_capacity(const SynthParams& params);

/// Synthetic graph with exactly the requested entity counts; compositions are
/// unique per (radical multiset, structure). Throws Error{infeasible|invalid_params}.
Ckg generate_synthetic_ckg(const SynthParams& params);

/// New characters over `ckg`'s radicals and structures whose compositions collide
/// with no existing character. Ids are `<prefix><n>`. Throws Error{infeasible}.
std::vector<CharacterEntry> generate_additional_characters(const Ckg& ckg, std::size_t count,
                                                           std::size_t min_radicals, std::size_t max_radicals,
                                                           bool unique_multisets, std::uint64_t seed,
                                                           const std::string& id_prefix = "z");

}  // namespace radreason
