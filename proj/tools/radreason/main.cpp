// radreason: command-line front end for the character reasoning library.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "radreason/ckg.hpp"
#include "radreason/ckg_io.hpp"
#include "radreason/error.hpp"
#include "radreason/experiment.hpp"
#include "radreason/raster.hpp"
#include "radreason/reasoner.hpp"
#include "radreason/rie_losses.hpp"
#include "radreason/softlabel.hpp"
#include "radreason/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace radreason;

namespace {

std::string fixed(double v, int digits = 6) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

std::optional<std::uint64_t> env_seed() {
    const char* raw = std::getenv("RZ_SEED");
    if (!raw || !*raw) return std::nullopt;
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(raw, &used);
        if (used != std::string(raw).size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::config, std::string("RZ_SEED is not an unsigned integer: '") + raw + "'");
    }
}

void print_issue(const ValidationIssue& issue) {
    std::cerr << (issue.severity == Severity::error ? "error:" : "warning:") << to_string(issue.category) << ": ";
    if (!issue.entity.empty()) std::cerr << issue.entity << ": ";
    std::cerr << issue.message << '\n';
}

// ---- ckg ----

struct CkgArgs {
    std::string file;
    bool json = false;
};

int cmd_ckg_validate(const CkgArgs& args) {
    const CkgDocument doc = parse_ckg_document(read_json_file(args.file));
    ValidationReport report = validate_ckg(doc);
    if (report.ok) report = validate_ckg(Ckg::build(doc));
    if (args.json) {
        std::cout << canonical_dump(to_json(report));
    } else if (report.ok) {
        std::cout << "ok: " << doc.characters.size() << " characters, " << doc.radicals.size() << " radicals, "
                  << doc.structures.size() << " structures";
        if (report.warning_count() > 0) std::cout << " (" << report.warning_count() << " warnings)";
        std::cout << '\n';
    }
    for (const auto& issue : report.issues) print_issue(issue);
    return report.ok ? 0 : 1;
}

int cmd_ckg_stats(const CkgArgs& args) {
    const Ckg ckg = load_ckg_file(args.file);
    const CkgStats stats = ckg_stats(ckg);
    if (args.json) {
        std::cout << canonical_dump(to_json(stats));
        return 0;
    }
    auto row = [](const std::string& label, std::size_t value) {
        std::cout << std::left << std::setw(20) << label << std::right << std::setw(8) << value << '\n';
    };
    row("characters", stats.n_characters);
    row("radicals", stats.n_radicals);
    row("structures", stats.n_structures);
    row("radicals used", stats.n_radicals_used);
    row("structures used", stats.n_structures_used);
    for (const auto& [count, n] : stats.radical_count_histogram) {
        row("with " + std::to_string(count) + " radical" + (count == 1 ? "" : "s"), n);
    }
    return 0;
}

// ---- reason ----

struct ReasonArgs {
    std::string ckg;
    std::string pred;
    double theta = 0.7;
    std::size_t top_k = 5;
    std::size_t cap = 1000;
    std::string match = "exact";
    std::optional<std::size_t> max_structures;
    std::optional<double> min_conf;
    double objectness_floor = 0.0;
    bool oracle = false;
    std::size_t limit = 10;
    std::string out;
    bool json = false;
};

int cmd_reason(const ReasonArgs& args) {
    const Ckg ckg = load_ckg_file(args.ckg);
    std::vector<std::string> warnings;
    const PredictionSet preds = normalize_predictions(read_json_file(args.pred), &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';

    ReasonerParams params;
    params.theta = args.theta;
    params.top_k = args.top_k;
    params.cap = args.cap;
    params.match_mode = parse_match_mode(args.match);
    params.max_structures = args.max_structures;
    params.min_conf = args.min_conf;
    params.objectness_floor = args.objectness_floor;
    params.validate();

    const RankedPredictions ranked =
        args.oracle ? brute_force_reason(ckg, preds, params.theta, params.match_mode) : char_reason(ckg, preds, params);

    if (!args.out.empty()) write_text_file(args.out, canonical_dump(to_json(ranked)));
    if (args.json) {
        std::cout << canonical_dump(to_json(ranked));
        return 0;
    }
    if (ranked.candidates.empty()) std::cout << "(no candidates)\n";
    for (std::size_t i = 0; i < ranked.candidates.size() && i < args.limit; ++i) {
        const auto& c = ranked.candidates[i];
        std::cout << c.id << ' ' << fixed(c.p_c) << (c.ambiguous ? " ambiguous" : "") << '\n';
    }
    if (ranked.metadata.truncated) std::cerr << "warning: mapping enumeration truncated at the beam cap\n";
    return 0;
}

// ---- simulate / compare ----

struct ExperimentArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::size_t> samples;
    std::optional<double> r;
    std::optional<double> s;
    std::optional<double> theta;
    std::optional<std::size_t> top_k;
    std::optional<std::size_t> cap;
    std::vector<std::string> strategies;
    std::string csv;
    std::string json_out;
};

ExperimentConfig resolve_config(const ExperimentArgs& args) {
    json doc;
    try {
        doc = read_json_file(args.config);
    } catch (const Error& e) {
        throw Error(ErrorKind::config, e.what());
    }
    if (!doc.is_object()) throw Error(ErrorKind::config, "experiment config must be a JSON object");
    if (args.seed) {
        doc["seed"] = *args.seed;
    } else if (!doc.contains("seed")) {
        if (auto s = env_seed()) doc["seed"] = *s;
    }
    if (args.threads) doc["threads"] = *args.threads;
    if (args.samples) doc["split"]["n_samples"] = *args.samples;
    if (args.r) doc["noise"]["r"] = *args.r;
    if (args.s) doc["noise"]["s"] = *args.s;
    if (args.theta) doc["reasoner"]["theta"] = *args.theta;
    if (args.top_k) doc["reasoner"]["top_k"] = *args.top_k;
    if (args.cap) doc["reasoner"]["beam_cap"] = *args.cap;
    if (!args.strategies.empty()) doc["strategies"] = args.strategies;
    if (!args.csv.empty()) doc["output"]["csv"] = args.csv;
    if (!args.json_out.empty()) doc["output"]["json"] = args.json_out;
    return experiment_config_from_json(doc, fs::path(args.config).parent_path());
}

void print_outcome(const ExperimentOutcome& outcome) {
    std::cout << std::left << std::setw(16) << "strategy" << std::right << std::setw(10) << "top1" << std::setw(10)
              << "top3" << std::setw(10) << "top5" << std::setw(10) << "cat_avg" << std::setw(11) << "n_samples"
              << '\n';
    for (const auto& r : outcome.reports) {
        std::cout << std::left << std::setw(16) << r.strategy << std::right << std::setw(10) << fixed(r.top_n.at(1))
                  << std::setw(10) << fixed(r.top_n.at(3)) << std::setw(10) << fixed(r.top_n.at(5)) << std::setw(10)
                  << fixed(r.cat_avg) << std::setw(11) << r.n_samples << '\n';
    }
    for (const auto& d : outcome.deltas) {
        std::cout << "delta " << to_string(d.a) << " - " << to_string(d.b) << ": " << (d.delta >= 0 ? "+" : "")
                  << fixed(d.delta) << " (paired se " << fixed(d.paired_se) << ")\n";
    }
    if (outcome.closed_form_top1) {
        std::cout << "closed-form hard-match top1: " << fixed(*outcome.closed_form_top1) << '\n';
    }
}

int cmd_experiment(const ExperimentArgs& args, bool compare) {
    const ExperimentConfig config = resolve_config(args);
    const ExperimentOutcome outcome = compare ? compare_strategies(config) : run_experiment(config);
    write_outcome(outcome, config.output);
    print_outcome(outcome);
    return 0;
}

// ---- synth ----

struct SynthCkgArgs {
    SynthParams params;
    std::optional<std::uint64_t> seed;
    std::string out;
};

int cmd_synth_ckg(SynthCkgArgs args) {
    if (args.seed) {
        args.params.seed = *args.seed;
    } else if (auto s = env_seed()) {
        args.params.seed = *s;
    }
    const std::string text = canonical_dump(to_json(generate_synthetic_ckg(args.params)));
    if (args.out.empty()) {
        std::cout << text;
    } else {
        write_text_file(args.out, text);
    }
    return 0;
}

struct SynthRasterArgs {
    std::string ckg;
    std::string character;
    std::string glyph_dir;
    std::string templates;
    int canvas = 416;
    double jitter = kDefaultJitter;
    std::optional<std::uint64_t> seed;
    std::string out;
};

int cmd_synth_raster(const SynthRasterArgs& args) {
    const Ckg ckg = load_ckg_file(args.ckg);
    const TemplateSet templates =
        args.templates.empty() ? TemplateSet::defaults() : TemplateSet::from_json(read_json_file(args.templates));
    const std::uint64_t seed = args.seed ? *args.seed : env_seed().value_or(0);

    std::map<RadicalId, Bitmap> glyphs;
    auto render = [&](CharIndex c, const fs::path& out) {
        const CharacterEntry& entry = ckg.characters()[c];
        for (const auto& r : entry.radicals) {
            if (glyphs.count(r)) continue;
            const fs::path file = fs::path(args.glyph_dir) / (r.str() + ".pgm");
            if (!fs::exists(file)) throw Error(ErrorKind::reference, "no glyph image for radical '" + r.str() + "'");
            glyphs.emplace(r, read_pgm(file));
        }
        StreamRng rng(seed, c, kLayoutSubstream);
        write_pgm(out, splice_raster(glyphs, layout_character(templates, entry, args.jitter, rng), args.canvas));
    };

    if (!args.character.empty()) {
        auto c = ckg.char_index(CharId(args.character));
        if (!c) throw Error(ErrorKind::unknown_id, "character '" + args.character + "' is not in the graph");
        render(*c, args.out);
        return 0;
    }
    // Without --char every character is rendered into the --out directory.
    fs::create_directories(args.out);
    for (CharIndex c = 0; c < ckg.num_characters(); ++c) {
        render(c, fs::path(args.out) / (ckg.characters()[c].id.str() + ".pgm"));
    }
    return 0;
}

// ---- loss ----

struct LossArgs {
    std::string target;
    std::string pred;
    double lambda = kDefaultAbsenceWeight;
    double lambda_s = kDefaultStructureWeight;
    bool json = false;
};

int cmd_loss_eval(const LossArgs& args) {
    const json target_doc = read_json_file(args.target);
    const json pred_doc = read_json_file(args.pred);
    const GridShape shape = grid_shape_from_json(target_doc);
    if (pred_doc.contains("shape") && !(grid_shape_from_json(pred_doc) == shape)) {
        throw Error(ErrorKind::shape_mismatch, "target and prediction grids have different shapes");
    }
    const LossBreakdown losses = loss_total(grid_target_from_json(target_doc, shape),
                                            grid_prediction_from_json(pred_doc, shape), shape, args.lambda,
                                            args.lambda_s);
    if (args.json) {
        std::cout << canonical_dump(to_json(losses));
        return 0;
    }
    std::cout << "l_r    " << fixed(losses.l_r, 9) << '\n'
              << "l_coo  " << fixed(losses.l_coo, 9) << '\n'
              << "l_isR  " << fixed(losses.l_isR, 9) << '\n'
              << "l_s    " << fixed(losses.l_s, 9) << '\n'
              << "total  " << fixed(losses.total, 9) << '\n';
    return 0;
}

int exit_code_for(ErrorKind kind) {
    return kind == ErrorKind::config || kind == ErrorKind::usage ? 2 : 1;
}

void add_experiment_flags(CLI::App* cmd, ExperimentArgs& a, bool with_strategies) {
    cmd->add_option("--config", a.config, "experiment config JSON")->required();
    cmd->add_option("--seed", a.seed, "overrides seed");
    cmd->add_option("--threads", a.threads, "worker threads (0: all cores)");
    cmd->add_option("--samples", a.samples, "overrides split.n_samples");
    cmd->add_option("--r", a.r, "overrides noise.r")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--s", a.s, "overrides noise.s")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--theta", a.theta, "overrides reasoner.theta")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--top-k", a.top_k, "overrides reasoner.top_k");
    cmd->add_option("--beam-cap", a.cap, "overrides reasoner.beam_cap");
    if (with_strategies) cmd->add_option("--strategy", a.strategies, "overrides strategies");
    cmd->add_option("--csv", a.csv, "overrides output.csv");
    cmd->add_option("--json-out", a.json_out, "overrides output.json");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"radreason: knowledge-graph reasoning over radical predictions"};
    app.require_subcommand(1);
    std::function<int()> run;

    auto* ckg = app.add_subcommand("ckg", "validate or summarize a knowledge graph");
    ckg->require_subcommand(1);
    CkgArgs ckg_args;
    for (const char* name : {"validate", "stats"}) {
        auto* sub = ckg->add_subcommand(name, std::string(name) + " a graph file");
        sub->add_option("file", ckg_args.file, "graph JSON")->required();
        sub->add_flag("--json", ckg_args.json, "machine-readable output");
        const bool validate = std::string(name) == "validate";
        sub->callback([&, validate] {
            run = [&, validate] { return validate ? cmd_ckg_validate(ckg_args) : cmd_ckg_stats(ckg_args); };
        });
    }

    ReasonArgs reason_args;
    auto* reason = app.add_subcommand("reason", "rank characters for one prediction set");
    reason->add_option("--ckg", reason_args.ckg, "graph JSON")->required();
    reason->add_option("--pred", reason_args.pred, "predictions JSON")->required();
    reason->add_option("--theta", reason_args.theta, "fusion weight of the mapping confidence")
        ->check(CLI::Range(0.0, 1.0));
    reason->add_option("--top-k", reason_args.top_k, "categories kept per detection");
    reason->add_option("--beam-cap", reason_args.cap, "maximum mappings enumerated");
    reason->add_option("--match", reason_args.match, "exact or subset");
    reason->add_option("--max-structures", reason_args.max_structures, "structure candidates kept");
    reason->add_option("--min-conf", reason_args.min_conf, "drop candidates below this score");
    reason->add_option("--objectness-floor", reason_args.objectness_floor, "drop weaker detections");
    reason->add_flag("--oracle", reason_args.oracle, "use the exhaustive reference reasoner");
    reason->add_option("--limit", reason_args.limit, "candidates printed");
    reason->add_option("--out", reason_args.out, "write ranked predictions JSON");
    reason->add_flag("--json", reason_args.json, "print ranked predictions JSON");
    reason->callback([&] { run = [&] { return cmd_reason(reason_args); }; });

    ExperimentArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "run a simulated recognition experiment");
    add_experiment_flags(simulate, sim_args, true);
    simulate->callback([&] { run = [&] { return cmd_experiment(sim_args, false); }; });

    ExperimentArgs cmp_args;
    auto* compare = app.add_subcommand("compare", "compare the four strategies on paired samples");
    add_experiment_flags(compare, cmp_args, false);
    compare->callback([&] { run = [&] { return cmd_experiment(cmp_args, true); }; });

    auto* synth = app.add_subcommand("synth", "synthetic graphs and glyph rasters");
    synth->require_subcommand(1);
    SynthCkgArgs sckg;
    auto* synth_ckg = synth->add_subcommand("ckg", "generate a synthetic knowledge graph");
    synth_ckg->add_option("--chars", sckg.params.n_characters, "characters");
    synth_ckg->add_option("--radicals", sckg.params.n_radicals, "radicals");
    synth_ckg->add_option("--structures", sckg.params.n_structures, "structures");
    synth_ckg->add_option("--min-radicals", sckg.params.min_radicals, "fewest radicals per character");
    synth_ckg->add_option("--max-radicals", sckg.params.max_radicals, "most radicals per character");
    synth_ckg->add_flag("--unique-multisets", sckg.params.unique_multisets, "one character per radical multiset");
    synth_ckg->add_option("--seed", sckg.seed, "generator seed (default RZ_SEED or 0)");
    synth_ckg->add_option("--out", sckg.out, "output file (default stdout)");
    synth_ckg->callback([&] { run = [&] { return cmd_synth_ckg(sckg); }; });

    SynthRasterArgs sras;
    auto* synth_raster = synth->add_subcommand("raster", "splice radical glyphs into a character image");
    synth_raster->add_option("--ckg", sras.ckg, "graph JSON")->required();
    synth_raster->add_option("--char", sras.character, "render only this character (--out is then a file)");
    synth_raster->add_option("--glyphs", sras.glyph_dir, "directory of <radical>.pgm images")->required();
    synth_raster->add_option("--templates", sras.templates, "layout template overrides JSON");
    synth_raster->add_option("--size,--canvas", sras.canvas, "output side length in pixels");
    synth_raster->add_option("--jitter", sras.jitter, "relative layout jitter");
    synth_raster->add_option("--seed", sras.seed, "layout seed (default RZ_SEED or 0)");
    synth_raster->add_option("--out", sras.out, "output directory, or PGM file with --char")->required();
    synth_raster->callback([&] { run = [&] { return cmd_synth_raster(sras); }; });

    auto* loss = app.add_subcommand("loss", "detection loss reference");
    loss->require_subcommand(1);
    LossArgs loss_args;
    auto* loss_eval = loss->add_subcommand("eval", "evaluate all loss terms on a grid pair");
    loss_eval->add_option("--target", loss_args.target, "target grid JSON")->required();
    loss_eval->add_option("--pred", loss_args.pred, "predicted grid JSON")->required();
    loss_eval->add_option("--lambda", loss_args.lambda, "weight of anchors without a radical");
    loss_eval->add_option("--lambda-s", loss_args.lambda_s, "structure loss weight");
    loss_eval->add_flag("--json", loss_args.json, "print JSON");
    loss_eval->callback([&] { run = [&] { return cmd_loss_eval(loss_args); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error:usage: " << e.what() << '\n';
        return 2;
    }

    try {
        return run ? run() : 2;
    } catch (const Error& e) {
        std::cerr << "error:" << to_string(e.kind()) << ": " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error:internal: " << e.what() << '\n';
        return 1;
    }
}
