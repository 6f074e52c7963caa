#include "radreason/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <sstream>

#include "radreason/error.hpp"
#include "radreason/rng.hpp"

namespace radreason {

namespace {

constexpr std::uint64_t kSplitSubstream = 0x5b117;

std::vector<CharId> sorted_ids(const Ckg& ckg) {
    std::vector<CharId> ids;
    ids.reserve(ckg.num_characters());
    for (const auto& c : ckg.characters()) ids.push_back(c.id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

void require_results(std::span<const RecognitionResult> results) {
    if (results.empty()) throw Error(ErrorKind::invalid_params, "no recognition results to score");
}

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

std::string_view to_string(SplitProtocol protocol) {
    return protocol == SplitProtocol::seen ? "seen" : "zero-shot";
}

SplitProtocol parse_split_protocol(std::string_view name) {
    if (name == "seen") return SplitProtocol::seen;
    if (name == "zero-shot") return SplitProtocol::zero_shot;
    throw Error(ErrorKind::config, "unknown split protocol '" + std::string(name) + "'");
}

SplitSpec split_seen(const Ckg& ckg, std::uint64_t seed) {
    SplitSpec split;
    split.protocol = SplitProtocol::seen;
    split.seed = seed;
    for (const auto& c : ckg.characters()) {
        split.train_categories.insert(c.id);
        split.test_categories.insert(c.id);
    }
    split.m = split.train_categories.size();
    return split;
}

SplitSpec split_zero_shot(const Ckg& ckg, std::size_t n_test, std::size_t m, std::uint64_t seed) {
    if (n_test + m > ckg.num_characters()) {
        throw Error(ErrorKind::infeasible, "split needs " + std::to_string(n_test + m) + " categories but the graph has " +
                                               std::to_string(ckg.num_characters()));
    }
    std::vector<CharId> ids = sorted_ids(ckg);
    StreamRng rng(seed, 0, kSplitSubstream);
    std::shuffle(ids.begin(), ids.end(), rng);

    SplitSpec split;
    split.protocol = SplitProtocol::zero_shot;
    split.m = m;
    split.seed = seed;
    split.test_categories.insert(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train_categories.insert(ids.begin() + static_cast<std::ptrdiff_t>(n_test),
                                  ids.begin() + static_cast<std::ptrdiff_t>(n_test + m));
    return split;
}

RecognitionResult make_result(CharId truth, std::vector<CharId> ranked) {
    RecognitionResult r;
    r.truth = std::move(truth);
    r.ranked = std::move(ranked);
    auto it = std::find(r.ranked.begin(), r.ranked.end(), r.truth);
    if (it != r.ranked.end()) r.correct_at = static_cast<std::size_t>(it - r.ranked.begin()) + 1;
    return r;
}

double top_n_accuracy(std::span<const RecognitionResult> results, std::size_t n) {
    if (n < 1) throw Error(ErrorKind::invalid_params, "top-n needs n >= 1");
    require_results(results);
    const auto hits = std::count_if(results.begin(), results.end(),
                                    [n](const RecognitionResult& r) { return r.correct_at && *r.correct_at <= n; });
    return static_cast<double>(hits) / static_cast<double>(results.size());
}

std::vector<CategoryMetrics> per_category(std::span<const RecognitionResult> results) {
    std::map<CharId, CategoryMetrics> table;
    for (const auto& r : results) {
        auto& row = table[r.truth];
        row.id = r.truth;
        ++row.n_samples;
        if (r.correct_at == 1u) ++row.n_correct;
    }
    std::vector<CategoryMetrics> out;
    out.reserve(table.size());
    for (auto& [id, row] : table) {
        row.accuracy = static_cast<double>(row.n_correct) / static_cast<double>(row.n_samples);
        out.push_back(row);
    }
    return out;
}

double cat_avg(std::span<const RecognitionResult> results) {
    require_results(results);
    const auto table = per_category(results);
    double sum = 0.0;
    for (const auto& row : table) sum += row.accuracy;
    return sum / static_cast<double>(table.size());
}

MetricsReport build_report(std::span<const RecognitionResult> results, std::string strategy, std::uint64_t seed) {
    require_results(results);
    MetricsReport report;
    report.strategy = std::move(strategy);
    for (std::size_t n : kReportedTopN) report.top_n[n] = top_n_accuracy(results, n);
    report.categories = per_category(results);
    double sum = 0.0;
    for (const auto& row : report.categories) sum += row.accuracy;
    report.cat_avg = sum / static_cast<double>(report.categories.size());
    report.n_samples = results.size();
    report.seed = seed;
    return report;
}

nlohmann::json to_json(const MetricsReport& report) {
    nlohmann::json top = nlohmann::json::object();
    for (const auto& [n, acc] : report.top_n) top["top" + std::to_string(n)] = acc;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& c : report.categories) {
        rows.push_back({{"char", c.id.str()}, {"n_samples", c.n_samples}, {"n_correct", c.n_correct},
                        {"accuracy", c.accuracy}});
    }
    return {{"strategy", report.strategy}, {"top_n", std::move(top)},   {"cat_avg", report.cat_avg},
            {"n_samples", report.n_samples}, {"seed", report.seed}, {"per_category", std::move(rows)}};
}

std::string reports_to_csv(std::span<const MetricsReport> reports) {
    std::ostringstream os;
    os << "strategy,top1,top3,top5,cat_avg,n_samples,seed\n";
    for (const auto& r : reports) {
        auto at = [&](std::size_t n) {
            auto it = r.top_n.find(n);
            return it == r.top_n.end() ? 0.0 : it->second;
        };
        os << r.strategy << ',' << fixed6(at(1)) << ',' << fixed6(at(3)) << ',' << fixed6(at(5)) << ','
           << fixed6(r.cat_avg) << ',' << r.n_samples << ',' << r.seed << '\n';
    }
    return os.str();
}

}  // namespace radreason
