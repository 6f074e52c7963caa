#include "radreason/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "radreason/ckg_io.hpp"
#include "radreason/error.hpp"
#include "radreason/parallel.hpp"
#include "radreason/rng.hpp"

namespace radreason {

using nlohmann::json;

namespace {

constexpr std::uint64_t kAddedCharSalt = 0xadd5'eed5ULL;
constexpr std::size_t kKeptRanks = 5;

// Reads one JSON object section, rejecting keys it was never asked about.
class Section {
public:
    Section(const json& doc, std::string name) : name_(std::move(name)) {
        if (doc.is_null()) return;
        if (!doc.is_object()) throw Error(ErrorKind::config, name_ + ": expected an object");
        doc_ = &doc;
    }

    template <class T>
    void read(const char* key, T& out) {
        seen_.insert(key);
        if (!doc_) return;
        auto it = doc_->find(key);
        if (it == doc_->end() || it->is_null()) return;
        try {
            out = it->get<T>();
        } catch (const json::exception&) {
            throw Error(ErrorKind::config, name_ + "." + key + ": wrong type");
        }
    }

    template <class T>
    void read(const char* key, std::optional<T>& out) {
        seen_.insert(key);
        if (!doc_) return;
        auto it = doc_->find(key);
        if (it == doc_->end() || it->is_null()) return;
        T value{};
        read(key, value);
        out = value;
    }

    bool has(const char* key) const { return doc_ && doc_->contains(key); }

    void finish() const {
        if (!doc_) return;
        for (const auto& [key, value] : doc_->items()) {
            if (!seen_.count(key)) throw Error(ErrorKind::config, name_ + ": unknown key '" + key + "'");
        }
    }

private:
    std::string name_;
    const json* doc_ = nullptr;
    std::set<std::string> seen_;
};

const json& child(const json& doc, const char* key) {
    static const json null_value;
    auto it = doc.find(key);
    return it == doc.end() ? null_value : *it;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base.empty() ? base / path : path;
}

// Domain errors inside a config surface as config errors.
template <class F>
void as_config(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::config) throw;
        throw Error(ErrorKind::config, e.what());
    }
}

}  // namespace

void ExperimentConfig::validate() const {
    as_config([&] {
        noise.validate();
        reasoner.validate();
        if (!ckg.path) ckg.synthetic.validate();
    });
    if (strategies.empty()) throw Error(ErrorKind::config, "strategies: at least one is required");
    if (split.n_samples && *split.n_samples == 0) throw Error(ErrorKind::config, "split.n_samples must be >= 1");
    if (!split.n_samples && split.samples_per_category == 0) {
        throw Error(ErrorKind::config, "split.samples_per_category must be >= 1");
    }
    if (split.protocol == SplitProtocol::zero_shot && split.n_test == 0 && split.add_unseen == 0) {
        throw Error(ErrorKind::config, "split: zero-shot needs n_test or add_unseen");
    }
    if (split.add_min_radicals < 1 || split.add_min_radicals > split.add_max_radicals) {
        throw Error(ErrorKind::config, "split: add_min_radicals..add_max_radicals is empty");
    }
}

ExperimentConfig experiment_config_from_json(const json& document, const std::filesystem::path& base_dir) {
    if (!document.is_object()) throw Error(ErrorKind::config, "experiment config must be a JSON object");
    ExperimentConfig cfg;

    Section top(document, "config");
    for (const char* key : {"ckg", "noise", "split", "reasoner", "strategies", "output"}) {
        json ignored;
        top.read(key, ignored);
    }
    top.read("seed", cfg.seed);
    top.read("threads", cfg.threads);
    top.finish();

    Section ckg(child(document, "ckg"), "ckg");
    std::optional<std::string> ckg_path;
    ckg.read("path", ckg_path);
    if (ckg_path) cfg.ckg.path = resolve(base_dir, *ckg_path);
    json synthetic;
    ckg.read("synthetic", synthetic);
    ckg.finish();
    Section syn(synthetic, "ckg.synthetic");
    syn.read("n_characters", cfg.ckg.synthetic.n_characters);
    syn.read("n_radicals", cfg.ckg.synthetic.n_radicals);
    syn.read("n_structures", cfg.ckg.synthetic.n_structures);
    syn.read("min_radicals", cfg.ckg.synthetic.min_radicals);
    syn.read("max_radicals", cfg.ckg.synthetic.max_radicals);
    syn.read("unique_multisets", cfg.ckg.synthetic.unique_multisets);
    cfg.ckg.synthetic_seed_pinned = syn.has("seed");
    syn.read("seed", cfg.ckg.synthetic.seed);
    syn.finish();

    Section noise(child(document, "noise"), "noise");
    noise.read("r", cfg.noise.r);
    noise.read("r_per_position", cfg.noise.r_per_position);
    noise.read("s", cfg.noise.s);
    noise.read("boost", cfg.noise.boost);
    noise.read("temperature", cfg.noise.temperature);
    noise.finish();

    Section split(child(document, "split"), "split");
    std::string protocol = "seen";
    split.read("protocol", protocol);
    cfg.split.protocol = parse_split_protocol(protocol);
    split.read("n_test", cfg.split.n_test);
    split.read("m", cfg.split.m);
    split.read("add_unseen", cfg.split.add_unseen);
    split.read("add_min_radicals", cfg.split.add_min_radicals);
    split.read("add_max_radicals", cfg.split.add_max_radicals);
    split.read("samples_per_category", cfg.split.samples_per_category);
    split.read("n_samples", cfg.split.n_samples);
    split.finish();

    Section reasoner(child(document, "reasoner"), "reasoner");
    reasoner.read("theta", cfg.reasoner.theta);
    reasoner.read("top_k", cfg.reasoner.top_k);
    reasoner.read("beam_cap", cfg.reasoner.cap);
    std::string match(to_string(cfg.reasoner.match_mode));
    reasoner.read("match", match);
    as_config([&] { cfg.reasoner.match_mode = parse_match_mode(match); });
    reasoner.read("max_structures", cfg.reasoner.max_structures);
    reasoner.read("min_conf", cfg.reasoner.min_conf);
    reasoner.read("objectness_floor", cfg.reasoner.objectness_floor);
    reasoner.finish();

    if (const json& list = child(document, "strategies"); !list.is_null()) {
        if (!list.is_array()) throw Error(ErrorKind::config, "strategies: expected an array of names");
        cfg.strategies.clear();
        for (const auto& name : list) {
            if (!name.is_string()) throw Error(ErrorKind::config, "strategies: expected strings");
            as_config([&] { cfg.strategies.push_back(parse_strategy(name.get<std::string>())); });
        }
    }

    Section output(child(document, "output"), "output");
    std::optional<std::string> csv, json_out;
    output.read("csv", csv);
    output.read("json", json_out);
    output.finish();
    if (csv) cfg.output.csv = *csv;
    if (json_out) cfg.output.json = *json_out;

    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    json document;
    try {
        document = read_json_file(path);
    } catch (const Error& e) {
        throw Error(ErrorKind::config, e.what());
    }
    return experiment_config_from_json(document, path.parent_path());
}

json to_json(const ExperimentConfig& config) {
    json ckg = json::object();
    if (config.ckg.path) {
        ckg["path"] = config.ckg.path->generic_string();
    } else {
        const auto& s = config.ckg.synthetic;
        ckg["synthetic"] = {{"n_characters", s.n_characters}, {"n_radicals", s.n_radicals},
                            {"n_structures", s.n_structures}, {"min_radicals", s.min_radicals},
                            {"max_radicals", s.max_radicals}, {"unique_multisets", s.unique_multisets},
                            {"seed", config.ckg.synthetic_seed_pinned ? s.seed : config.seed}};
    }
    json noise = {{"r", config.noise.r},
                  {"r_per_position", config.noise.r_per_position},
                  {"s", config.noise.s},
                  {"boost", config.noise.boost},
                  {"temperature", config.noise.temperature}};
    json split = {{"protocol", to_string(config.split.protocol)},
                  {"n_test", config.split.n_test},
                  {"m", config.split.m},
                  {"add_unseen", config.split.add_unseen},
                  {"add_min_radicals", config.split.add_min_radicals},
                  {"add_max_radicals", config.split.add_max_radicals},
                  {"samples_per_category", config.split.samples_per_category}};
    if (config.split.n_samples) split["n_samples"] = *config.split.n_samples;
    json reasoner = {{"theta", config.reasoner.theta},
                     {"top_k", config.reasoner.top_k},
                     {"beam_cap", config.reasoner.cap},
                     {"match", to_string(config.reasoner.match_mode)},
                     {"objectness_floor", config.reasoner.objectness_floor}};
    if (config.reasoner.max_structures) reasoner["max_structures"] = *config.reasoner.max_structures;
    if (config.reasoner.min_conf) reasoner["min_conf"] = *config.reasoner.min_conf;
    json strategies = json::array();
    for (Strategy s : config.strategies) strategies.push_back(to_string(s));
    return {{"ckg", std::move(ckg)},           {"noise", std::move(noise)},
            {"split", std::move(split)},       {"reasoner", std::move(reasoner)},
            {"strategies", std::move(strategies)}, {"seed", config.seed}};
}

PreparedExperiment prepare_experiment(const ExperimentConfig& config) {
    config.validate();
    std::optional<Ckg> graph;
    if (config.ckg.path) {
        graph = load_ckg_file(*config.ckg.path);
    } else {
        SynthParams params = config.ckg.synthetic;
        if (!config.ckg.synthetic_seed_pinned) params.seed = config.seed;
        graph = generate_synthetic_ckg(params);
    }

    PreparedExperiment prepared{std::move(*graph), {}, {}};
    const auto& split = config.split;
    if (split.protocol == SplitProtocol::seen) {
        prepared.split = split_seen(prepared.ckg, config.seed);
        return prepared;
    }

    prepared.split = split_zero_shot(prepared.ckg, split.n_test, split.m, config.seed);
    if (split.add_unseen > 0) {
        auto fresh = generate_additional_characters(prepared.ckg, split.add_unseen, split.add_min_radicals,
                                                    split.add_max_radicals, false, mix64(config.seed ^ kAddedCharSalt));
        for (auto& entry : fresh) {
            prepared.added.push_back(entry.id);
            prepared.split.test_categories.insert(entry.id);
            prepared.ckg = add_character(prepared.ckg, std::move(entry));
        }
    }
    return prepared;
}

namespace {

std::vector<CharIndex> sample_plan(const PreparedExperiment& prepared, const ExperimentConfig& config) {
    std::vector<CharIndex> test;
    for (const auto& id : prepared.split.test_categories) test.push_back(*prepared.ckg.char_index(id));
    if (test.empty()) throw Error(ErrorKind::config, "split selects no test categories");

    std::vector<CharIndex> plan;
    if (config.split.n_samples) {
        plan.resize(*config.split.n_samples);
        std::uniform_int_distribution<std::size_t> pick(0, test.size() - 1);
        for (std::size_t i = 0; i < plan.size(); ++i) {
            StreamRng rng(config.seed, i, kPickSubstream);
            plan[i] = test[pick(rng)];
        }
    } else {
        for (CharIndex c : test) plan.insert(plan.end(), config.split.samples_per_category, c);
    }
    return plan;
}

double paired_se(const std::vector<RecognitionResult>& a, const std::vector<RecognitionResult>& b) {
    const std::size_t n = a.size();
    if (n < 2) return 0.0;
    std::vector<double> d(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = static_cast<double>(a[i].correct_at == 1u) - static_cast<double>(b[i].correct_at == 1u);
        mean += d[i];
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : d) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

ExperimentOutcome run_strategies(const ExperimentConfig& config, const std::vector<Strategy>& strategies,
                                 bool with_deltas) {
    const PreparedExperiment prepared = prepare_experiment(config);
    const Ckg& ckg = prepared.ckg;
    const std::vector<CharIndex> plan = sample_plan(prepared, config);

    std::vector<std::vector<RecognitionResult>> results(strategies.size(),
                                                        std::vector<RecognitionResult>(plan.size()));
    parallel_for(plan.size(), config.threads, [&](std::size_t i) {
        const CharacterEntry& entry = ckg.characters()[plan[i]];
        const SimulatedSample sample = simulate_predictions(entry, ckg, config.noise, {config.seed, i});
        for (std::size_t s = 0; s < strategies.size(); ++s) {
            RecognitionResult r = make_result(entry.id, recognize(strategies[s], sample.predictions, ckg,
                                                                  config.reasoner));
            if (r.ranked.size() > kKeptRanks) r.ranked.resize(kKeptRanks);
            results[s][i] = std::move(r);
        }
    });

    ExperimentOutcome outcome;
    outcome.config = to_json(config);
    outcome.n_categories = prepared.split.test_categories.size();
    for (std::size_t s = 0; s < strategies.size(); ++s) {
        outcome.reports.push_back(build_report(results[s], std::string(to_string(strategies[s])), config.seed));
    }
    if (with_deltas) {
        for (std::size_t a = 0; a < strategies.size(); ++a) {
            for (std::size_t b = a + 1; b < strategies.size(); ++b) {
                outcome.deltas.push_back({strategies[a], strategies[b],
                                          outcome.reports[a].top_n.at(1) - outcome.reports[b].top_n.at(1),
                                          paired_se(results[a], results[b])});
            }
        }
    }

    std::set<std::size_t> lengths;
    for (const auto& id : prepared.split.test_categories) lengths.insert(ckg.find_character(id)->radicals.size());
    if (lengths.size() == 1) {
        std::vector<double> r;
        for (std::size_t d = 0; d < *lengths.begin(); ++d) r.push_back(config.noise.r_at(d));
        outcome.closed_form_top1 = expected_hard_match_accuracy(r);
    }
    return outcome;
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
    return run_strategies(config, config.strategies, false);
}

ExperimentOutcome compare_strategies(const ExperimentConfig& config) {
    return run_strategies(config,
                          {Strategy::hard_top1, Strategy::hard_top1_sp, Strategy::reason_rp_only, Strategy::reason_full},
                          true);
}

json to_json(const ExperimentOutcome& outcome) {
    json reports = json::array();
    for (const auto& r : outcome.reports) reports.push_back(to_json(r));
    json doc = {{"config", outcome.config}, {"reports", std::move(reports)}, {"n_categories", outcome.n_categories}};
    if (!outcome.deltas.empty()) {
        json deltas = json::array();
        for (const auto& d : outcome.deltas) {
            deltas.push_back({{"a", to_string(d.a)}, {"b", to_string(d.b)}, {"delta", d.delta}, {"paired_se", d.paired_se}});
        }
        doc["deltas"] = std::move(deltas);
    }
    if (outcome.closed_form_top1) doc["closed_form_top1"] = *outcome.closed_form_top1;
    return doc;
}

void write_outcome(const ExperimentOutcome& outcome, const OutputConfig& output) {
    if (output.csv) write_text_file(*output.csv, reports_to_csv(outcome.reports));
    if (output.json) write_text_file(*output.json, canonical_dump(to_json(outcome)));
}

}  // namespace radreason
