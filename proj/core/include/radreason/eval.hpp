#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radreason/ckg.hpp"

namespace radreason {

enum class SplitProtocol { seen, zero_shot };

std::string_view to_string(SplitProtocol protocol);
/// Accepts "seen" or "zero-shot". Throws Error{config}.
SplitProtocol parse_split_protocol(std::string_view name);

struct SplitSpec {
    std::set<CharId> train_categories;
    std::set<CharId> test_categories;
    SplitProtocol protocol = SplitProtocol::seen;
    std::size_t m = 0;
    std::uint64_t seed = 0;
};

/// Every category is both trained and tested; samples, not categories, are split.
SplitSpec split_seen(const Ckg& ckg, std::uint64_t seed);

/// Test categories are drawn first from one seeded permutation, so they stay
/// fixed as m varies, and the m train categories follow them. Train sets for
/// growing m are nested. Throws Error{infeasible} when n_test + m exceeds the graph.
SplitSpec split_zero_shot(const Ckg& ckg, std::size_t n_test, std::size_t m, std::uint64_t seed);

struct RecognitionResult {
    CharId truth;
    std::vector<CharId> ranked;
    std::optional<std::size_t> correct_at;  // 1-based rank of the truth
};

RecognitionResult make_result(CharId truth, std::vector<CharId> ranked);

/// Fraction of results with the truth within the first n. Throws Error{invalid_params}.
double top_n_accuracy(std::span<const RecognitionResult> results, std::size_t n);

/// Top-1 accuracy per truth category, averaged with equal category weight.
double cat_avg(std::span<const RecognitionResult> results);

struct CategoryMetrics {
    CharId id;
    std::size_t n_samples = 0;
    std::size_t n_correct = 0;
    double accuracy = 0.0;
};

std::vector<CategoryMetrics> per_category(std::span<const RecognitionResult> results);

struct MetricsReport {
    std::string strategy;
    std::map<std::size_t, double> top_n;  // n in {1, 3, 5}
    double cat_avg = 0.0;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    std::vector<CategoryMetrics> categories;
};

inline constexpr std::size_t kReportedTopN[] = {1, 3, 5};

MetricsReport build_report(std::span<const RecognitionResult> results, std::string strategy, std::uint64_t seed);

nlohmann::json to_json(const MetricsReport& report);

/// Header plus one row per report: strategy,top1,top3,top5,cat_avg,n_samples,seed
std::string reports_to_csv(std::span<const MetricsReport> reports);

}  // namespace radreason
