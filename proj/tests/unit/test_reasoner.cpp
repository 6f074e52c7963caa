#include <algorithm>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "radreason/ckg_io.hpp"
#include "radreason/reasoner.hpp"

using namespace radreason;
using namespace testing_support;

namespace {

PredictionSet fixture_preds() {
    PredictionSet p;
    p.detections = {detection({{"r1", 0.9}}), detection({{"r2", 0.7}})};
    p.structure = structures({{"s1", 0.6}, {"s2", 0.4}});
    return p;
}

std::vector<std::string> order(const RankedPredictions& r) {
    std::vector<std::string> out;
    for (const auto& c : r.candidates) out.push_back(c.id.str());
    return out;
}

ReasonerParams full_coverage(const PredictionSet& p, double theta, MatchMode mode = MatchMode::exact) {
    ReasonerParams params;
    params.theta = theta;
    params.match_mode = mode;
    params.top_k = 1;
    params.cap = 1;
    for (const auto& d : p.detections) {
        params.top_k = std::max(params.top_k, d.categories.size());
        params.cap *= d.categories.size();
    }
    return params;
}

}  // namespace

TEST(Fuse, WorkedValues) {
    EXPECT_NEAR(fuse_confidence(0.8, 0.6, 0.7), 0.74, 1e-12);
    EXPECT_EQ(fuse_confidence(0.8, 0.6, 1.0), 0.8);
    for (double theta : {0.0, 0.3, 0.7, 1.0}) EXPECT_NEAR(fuse_confidence(0.42, 0.42, theta), 0.42, 1e-15);
}

TEST(CharReason, FixtureExample) {
    ReasonerParams params;
    params.top_k = 1;
    const auto r = char_reason(three_char_graph(), fixture_preds(), params);
    ASSERT_EQ(r.candidates.size(), 2u);
    const double m = (0.9 + 0.7) / 2.0;
    EXPECT_EQ(r.candidates[0].id, CharId("A"));
    EXPECT_NEAR(r.candidates[0].p_c, 0.7 * m + 0.3 * 0.6, 1e-12);
    EXPECT_EQ(r.candidates[1].id, CharId("B"));
    EXPECT_NEAR(r.candidates[1].p_c, 0.7 * m + 0.3 * 0.4, 1e-12);
    EXPECT_EQ(r, brute_force_reason(three_char_graph(), fixture_preds(), 0.7));
}

TEST(CharReason, FixtureFilesThroughJson) {
    const Ckg g = load_ckg_file(fixture("ckg3.json"));
    const auto preds = normalize_predictions(read_json_file(fixture("pred3.json")));
    const auto r = char_reason(g, preds);
    EXPECT_EQ(order(r), (std::vector<std::string>{"A", "B", "C"}));
    EXPECT_NEAR(r.candidates[0].p_c, 0.74, 1e-12);
    EXPECT_NEAR(r.candidates[1].p_c, 0.68, 1e-12);
    EXPECT_NEAR(r.candidates[2].p_c, 0.7 * 0.6 + 0.3 * 0.6, 1e-12);
}

TEST(CharReason, PerfectOneHot) {
    PredictionSet p;
    p.detections = {detection({{"r1", 1.0}}), detection({{"r2", 1.0}})};
    p.structure = structures({{"s1", 1.0}});
    const auto r = char_reason(three_char_graph(), p);
    ASSERT_EQ(r.candidates.size(), 1u);
    EXPECT_EQ(r.candidates[0].id, CharId("A"));
    EXPECT_EQ(r.candidates[0].p_c, 1.0);
}

TEST(CharReason, NoMatchIsEmpty) {
    PredictionSet p;
    p.detections = {detection({{"r2", 0.9}}), detection({{"r3", 0.8}})};
    p.structure = structures({{"s1", 1.0}});
    EXPECT_TRUE(char_reason(three_char_graph(), p).candidates.empty());
}

TEST(CharReason, Errors) {
    PredictionSet p = fixture_preds();
    p.detections[1] = detection({{"r42", 0.8}});
    try {
        char_reason(three_char_graph(), p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::unknown_id);
        EXPECT_NE(std::string(e.what()).find("r42"), std::string::npos);
    }
    ReasonerParams bad;
    bad.theta = 1.5;
    EXPECT_THROW(char_reason(three_char_graph(), fixture_preds(), bad), Error);
    bad = {};
    bad.top_k = 0;
    EXPECT_THROW(char_reason(three_char_graph(), fixture_preds(), bad), Error);
}

TEST(CharReason, ThetaBoundaryRanks) {
    PredictionSet p;
    p.detections = {detection({{"r1", 0.9}}), detection({{"r2", 0.6}, {"r3", 0.4}})};
    p.structure = structures({{"s2", 0.9}, {"s1", 0.1}});
    ReasonerParams params;
    params.theta = 1.0;
    EXPECT_EQ(order(char_reason(three_char_graph(), p, params)), (std::vector<std::string>{"A", "B", "C"}));
    params.theta = 0.0;
    EXPECT_EQ(order(char_reason(three_char_graph(), p, params)), (std::vector<std::string>{"B", "A", "C"}));
    params.theta = 0.7;
    EXPECT_EQ(order(char_reason(three_char_graph(), p, params)), (std::vector<std::string>{"B", "A", "C"}));
}

TEST(CharReason, SubsetModeAndMaxStructures) {
    PredictionSet p;
    p.detections = {detection({{"r1", 0.9}})};
    p.structure = structures({{"s1", 0.6}, {"s2", 0.4}});
    ReasonerParams params;
    params.match_mode = MatchMode::subset;
    EXPECT_EQ(order(char_reason(three_char_graph(), p, params)), (std::vector<std::string>{"A", "C", "B"}));
    params.max_structures = 1;
    EXPECT_EQ(order(char_reason(three_char_graph(), p, params)), (std::vector<std::string>{"A", "C"}));
    params.match_mode = MatchMode::exact;
    EXPECT_TRUE(char_reason(three_char_graph(), p, params).candidates.empty());
}

TEST(CharReason, ZeroProbabilityStructureIsSkipped) {
    PredictionSet p = fixture_preds();
    p.structure = structures({{"s1", 1.0}, {"s2", 0.0}});
    EXPECT_EQ(order(char_reason(three_char_graph(), p)), (std::vector<std::string>{"A"}));
}

TEST(CharReason, ObjectnessFloorDropsDetections) {
    PredictionSet p;
    p.detections = {detection({{"r1", 0.9}}), detection({{"r2", 0.8}}), detection({{"r3", 0.9}})};
    p.detections[2].objectness = 0.1;
    p.structure = structures({{"s1", 1.0}});
    EXPECT_TRUE(char_reason(three_char_graph(), p).candidates.empty());
    ReasonerParams params;
    params.objectness_floor = 0.5;
    EXPECT_EQ(order(char_reason(three_char_graph(), p, params)), (std::vector<std::string>{"A"}));
}

TEST(CharReason, AmbiguityGroupsAreFlagged) {
    auto doc = three_char_document();
    doc.characters.push_back({CharId("A2"), {RadicalId("r2"), RadicalId("r1")}, StructureId("s1"), {}});
    const Ckg g = Ckg::build(doc);
    const auto r = char_reason(g, fixture_preds());
    ASSERT_GE(r.candidates.size(), 2u);
    EXPECT_EQ(r.candidates[0].id, CharId("A"));
    EXPECT_EQ(r.candidates[1].id, CharId("A2"));
    EXPECT_EQ(r.candidates[0].p_c, r.candidates[1].p_c);
    EXPECT_TRUE(r.candidates[0].ambiguous && r.candidates[1].ambiguous);
    EXPECT_FALSE(r.candidates[2].ambiguous);
}

TEST(CharReason, SerializationIsDeterministic) {
    const auto a = to_json(char_reason(three_char_graph(), fixture_preds())).dump();
    const auto b = to_json(char_reason(three_char_graph(), fixture_preds())).dump();
    EXPECT_EQ(a, b);
}

TEST(BruteForce, GuardAndSingleDetection) {
    CkgDocument doc;
    for (int r = 0; r < 32; ++r) doc.radicals.push_back({RadicalId("r" + std::to_string(r)), {}});
    doc.structures = {{StructureId("s"), {}, {}}};
    doc.characters = {{CharId("x"), {RadicalId("r0")}, StructureId("s"), {}},
                      {CharId("y"), {RadicalId("r0"), RadicalId("r1")}, StructureId("s"), {}}};
    const Ckg g = Ckg::build(doc);
    PredictionSet p;
    std::vector<std::pair<std::string, double>> cats;
    for (int r = 0; r < 32; ++r) cats.push_back({"r" + std::to_string(r), 1.0 / 32});
    for (int d = 0; d < 4; ++d) p.detections.push_back(detection(cats));
    p.structure = structures({{"s", 1.0}});
    try {
        brute_force_reason(g, p, 0.7);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::instance_too_large);
    }
    p.detections = {detection({{"r0", 0.8}})};
    EXPECT_EQ(order(brute_force_reason(g, p, 0.7)), (std::vector<std::string>{"x"}));
}

// ---- properties over random instances ----

TEST(ReasonerProperty, OracleEquivalence) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        SCOPED_TRACE(trial);
        const auto inst = random_instance(rng);
        const Ckg g = Ckg::build(inst.doc);
        const double theta = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        for (MatchMode mode : {MatchMode::exact, MatchMode::subset}) {
            EXPECT_EQ(char_reason(g, inst.preds, full_coverage(inst.preds, theta, mode)),
                      brute_force_reason(g, inst.preds, theta, mode));
        }
    }
}

TEST(ReasonerProperty, ScoreBoundsAndProvenance) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        SCOPED_TRACE(trial);
        const auto inst = random_instance(rng);
        const Ckg g = Ckg::build(inst.doc);
        ReasonerParams params;
        params.top_k = 3;
        params.cap = 20;
        const auto r = char_reason(g, inst.preds, params);
        const auto maps = enumerate_mappings(inst.preds.detections, params.top_k, params.cap);
        for (const auto& c : r.candidates) {
            const double m = maps.mappings.at(c.provenance.mapping).conf;
            const double s = inst.preds.structure.entries.at(c.provenance.structure_rank).p;
            EXPECT_GE(c.p_c, std::min(m, s) - 1e-12);
            EXPECT_LE(c.p_c, std::max(m, s) + 1e-12);
            EXPECT_NEAR(c.p_c, fuse_confidence(m, s, params.theta), 1e-15);
        }
        for (std::size_t i = 1; i < r.candidates.size(); ++i) {
            const auto& a = r.candidates[i - 1];
            const auto& b = r.candidates[i];
            EXPECT_TRUE(a.p_c > b.p_c || (a.p_c == b.p_c && a.id < b.id));
        }
    }
}

TEST(ReasonerProperty, BeamMonotonicity) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        SCOPED_TRACE(trial);
        const auto inst = random_instance(rng);
        const Ckg g = Ckg::build(inst.doc);
        ReasonerParams small;
        small.top_k = 2;
        small.cap = 5;
        small.max_structures = 1;
        ReasonerParams big;
        big.top_k = 4;
        big.cap = 1000;
        std::map<CharId, double> grown;
        for (const auto& c : char_reason(g, inst.preds, big).candidates) grown[c.id] = c.p_c;
        for (const auto& c : char_reason(g, inst.preds, small).candidates) {
            ASSERT_TRUE(grown.count(c.id)) << c.id;
            EXPECT_GE(grown[c.id], c.p_c);
        }
    }
}

TEST(ReasonerProperty, MinConfOnlyPrunes) {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        SCOPED_TRACE(trial);
        const auto inst = random_instance(rng);
        const Ckg g = Ckg::build(inst.doc);
        ReasonerParams params = full_coverage(inst.preds, 0.7);
        const auto all = char_reason(g, inst.preds, params);
        params.min_conf = 0.45;
        const auto pruned = char_reason(g, inst.preds, params);
        std::vector<CharacterCandidate> expect;
        for (const auto& c : all.candidates) {
            if (c.p_c >= 0.45) expect.push_back(c);
        }
        ASSERT_EQ(pruned.candidates.size(), expect.size());
        for (std::size_t i = 0; i < expect.size(); ++i) {
            EXPECT_EQ(pruned.candidates[i].id, expect[i].id);
            EXPECT_EQ(pruned.candidates[i].p_c, expect[i].p_c);
        }
    }
}

// theta = 1 ignores structure confidence, theta = 0 ignores mapping confidence.
TEST(ReasonerProperty, ThetaBoundaryIgnoresOneSide) {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        SCOPED_TRACE(trial);
        const auto inst = random_instance(rng);
        const Ckg g = Ckg::build(inst.doc);
        auto scores = [](const RankedPredictions& r) {
            std::vector<std::pair<std::string, double>> out;
            for (const auto& c : r.candidates) out.emplace_back(c.id.str(), c.p_c);
            return out;
        };
        auto positive = [](PredictionSet p) {
            for (auto& s : p.structure.entries) s.p = std::max(s.p, 0.01);
            for (auto& d : p.detections) {
                for (auto& c : d.categories) c.p = std::max(c.p, 0.01);
                canonicalize(d);
            }
            canonicalize(p.structure);
            return p;
        };
        const PredictionSet base = positive(inst.preds);

        PredictionSet sp_changed = base;
        for (auto& s : sp_changed.structure.entries) s.p = u(rng);
        canonicalize(sp_changed.structure);
        EXPECT_EQ(scores(char_reason(g, base, full_coverage(base, 1.0))),
                  scores(char_reason(g, sp_changed, full_coverage(sp_changed, 1.0))));

        PredictionSet rp_changed = base;
        for (auto& d : rp_changed.detections) {
            for (auto& c : d.categories) c.p = u(rng);
            canonicalize(d);
        }
        EXPECT_EQ(scores(char_reason(g, base, full_coverage(base, 0.0))),
                  scores(char_reason(g, rp_changed, full_coverage(rp_changed, 0.0))));
    }
}
