#pragma once

#include <cstdint>
#include <limits>

namespace radreason {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based generator keyed by (seed, stream, substream). Every key owns an
/// independent sequence, so draws never depend on how other streams were consumed.
/// Satisfies UniformRandomBitGenerator for use with <random> distributions.
class StreamRng {
public:
    using result_type = std::uint64_t;

    StreamRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0)
        : state_(mix64(mix64(seed ^ 0x6a09e667f3bcc909ULL) ^ mix64(stream + 0xbb67ae8584caa73bULL) ^
                       mix64(substream + 0x3c6ef372fe94f82bULL))) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

private:
    std::uint64_t state_;
};

// Substream tags reserved for per-sample draws that are not tied to one detection.
inline constexpr std::uint64_t kStructureSubstream = 0xffff'0001ULL;
inline constexpr std::uint64_t kLayoutSubstream = 0xffff'0002ULL;
inline constexpr std::uint64_t kPickSubstream = 0xffff'0003ULL;

}  // namespace radreason
