#pragma once

#include <compare>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>

namespace radreason {

/// Checks the identifier contract shared by all entity ids: non-empty,
/// at most 64 bytes, no ASCII control characters.
bool is_valid_identifier(std::string_view text);

/// Opaque string identifier, tagged so radical, structure and character ids
/// cannot be mixed up.
template <class Tag>
class Id {
public:
    Id() = default;
    explicit Id(std::string value) : value_(std::move(value)) {}

    const std::string& str() const noexcept { return value_; }
    bool empty() const noexcept { return value_.empty(); }

    friend bool operator==(const Id&, const Id&) = default;
    friend auto operator<=>(const Id&, const Id&) = default;

    friend std::ostream& operator<<(std::ostream& os, const Id& id) { return os << id.value_; }

private:
    std::string value_;
};

struct RadicalTag {};
struct StructureTag {};
struct CharTag {};

using RadicalId = Id<RadicalTag>;
using StructureId = Id<StructureTag>;
using CharId = Id<CharTag>;

}  // namespace radreason

template <class Tag>
struct std::hash<radreason::Id<Tag>> {
    std::size_t operator()(const radreason::Id<Tag>& id) const noexcept {
        return std::hash<std::string>{}(id.str());
    }
};
