#include <algorithm>
#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "radreason/ckg.hpp"
#include "radreason/ckg_io.hpp"
#include "radreason/synth.hpp"

using namespace radreason;
using namespace testing_support;

namespace {

std::vector<CharId> ids(std::initializer_list<const char*> names) {
    std::vector<CharId> out;
    for (const char* n : names) out.emplace_back(n);
    return out;
}

std::vector<RadicalId> rads(std::initializer_list<const char*> names) {
    std::vector<RadicalId> out;
    for (const char* n : names) out.emplace_back(n);
    return out;
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorKind::usage;
}

}  // namespace

TEST(CkgLoad, TwoRadicalGraphIndexesMultiset) {
    CkgDocument doc;
    doc.radicals = {{RadicalId("r1"), {}}, {RadicalId("r2"), {}}};
    doc.structures = {{StructureId("s1"), {}, {}}};
    doc.characters = {{CharId("c1"), rads({"r1", "r2"}), StructureId("s1"), {}}};
    const Ckg g = Ckg::build(doc);
    const auto hits = g.chars_with_multiset(g.make_key(rads({"r2", "r1"})));
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(g.characters()[hits[0]].id, CharId("c1"));
}

TEST(CkgLoad, UnknownRadicalIsReferenceErrorNamingBoth) {
    try {
        load_ckg_file(fixture("bad.json"));
        FAIL() << "expected reference error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::reference);
        const std::string msg = e.what();
        EXPECT_NE(msg.find("D"), std::string::npos);
        EXPECT_NE(msg.find("r9"), std::string::npos);
    }
}

TEST(CkgLoad, MalformedDocumentsAreRejected) {
    EXPECT_EQ(kind_of([] { load_ckg(nlohmann::json::parse("[1,2]")); }), ErrorKind::schema);
    EXPECT_EQ(kind_of([] { read_json_file(fixture("glyphs/g1.pgm")); }), ErrorKind::parse);
}

TEST(CkgLoad, DuplicateIdIsError) {
    auto doc = three_char_document();
    doc.characters.push_back(doc.characters[0]);
    EXPECT_EQ(kind_of([&] { Ckg::build(doc); }), ErrorKind::duplicate);
}

TEST(CkgLoad, EntryOrderDoesNotMatter) {
    auto doc = three_char_document();
    const Ckg a = Ckg::build(doc);
    std::reverse(doc.characters.begin(), doc.characters.end());
    std::reverse(doc.radicals.begin(), doc.radicals.end());
    const Ckg b = Ckg::build(doc);
    EXPECT_TRUE(a == b);
    EXPECT_EQ(search_rad(a, rads({"r1", "r2"})), search_rad(b, rads({"r1", "r2"})));
}

TEST(CkgLoad, SyntheticGraphRoundTrips) {
    SynthParams p;
    p.n_characters = 300;
    p.n_radicals = 60;
    p.seed = 11;
    const Ckg g = generate_synthetic_ckg(p);
    const std::string text = serialize_ckg(g);
    const Ckg back = load_ckg(nlohmann::json::parse(text));
    EXPECT_TRUE(back == g);
    EXPECT_EQ(serialize_ckg(back), text);
}

TEST(CkgValidate, WellFormedHasNoIssues) {
    const auto report = validate_ckg(three_char_graph());
    EXPECT_TRUE(report.ok);
    EXPECT_TRUE(report.issues.empty());
}

TEST(CkgValidate, UnusedRadicalIsSingleWarning) {
    auto doc = three_char_document();
    doc.radicals.push_back({RadicalId("r4"), {}});
    const auto report = validate_ckg(doc);
    EXPECT_TRUE(report.ok);
    ASSERT_EQ(report.issues.size(), 1u);
    EXPECT_EQ(report.issues[0].severity, Severity::warning);
    EXPECT_EQ(report.warning_count(), 1u);
}

TEST(CkgValidate, DuplicateCharIdIsSingleError) {
    auto doc = three_char_document();
    doc.characters.push_back({CharId("A"), rads({"r2", "r3"}), StructureId("s2"), {}});
    const auto report = validate_ckg(doc);
    EXPECT_FALSE(report.ok);
    EXPECT_EQ(report.error_count(), 1u);
    EXPECT_EQ(report.issues[0].category, ErrorKind::duplicate);
}

TEST(CkgValidate, EmptyRadicalListAndBadIdsAreErrors) {
    auto doc = three_char_document();
    doc.characters.push_back({CharId("E"), {}, StructureId("s1"), {}});
    doc.characters.push_back({CharId(std::string(65, 'x')), rads({"r1"}), StructureId("s1"), {}});
    doc.characters.push_back({CharId("bad\tid"), rads({"r1"}), StructureId("s1"), {}});
    const auto report = validate_ckg(doc);
    EXPECT_FALSE(report.ok);
    EXPECT_EQ(report.error_count(), 3u);
}

TEST(CkgSearch, ExactAndSubsetOnFixture) {
    const Ckg g = three_char_graph();
    EXPECT_EQ(search_rad(g, rads({"r1", "r2"}), MatchMode::exact), ids({"A", "B"}));
    EXPECT_EQ(search_rad(g, rads({"r1"}), MatchMode::subset), ids({"A", "B", "C"}));
    EXPECT_TRUE(search_rad(g, rads({"r1"}), MatchMode::exact).empty());
}

TEST(CkgSearch, MultisetSensitivity) {
    auto doc = three_char_document();
    doc.characters.push_back({CharId("D"), rads({"r1", "r1"}), StructureId("s1"), {}});
    const Ckg g = Ckg::build(doc);
    EXPECT_EQ(search_rad(g, rads({"r1", "r1"}), MatchMode::exact), ids({"D"}));
    EXPECT_EQ(search_rad(g, rads({"r1", "r1"}), MatchMode::subset), ids({"D"}));
}

TEST(CkgSearch, UnknownRadicalIsError) {
    const Ckg g = three_char_graph();
    EXPECT_EQ(kind_of([&] { search_rad(g, rads({"r1", "zz"})); }), ErrorKind::unknown_id);
    EXPECT_EQ(kind_of([&] { search_str(g, StructureId("zz")); }), ErrorKind::unknown_id);
}

TEST(CkgSearch, ByStructure) {
    auto doc = three_char_document();
    doc.structures.push_back({StructureId("s3"), {}, {}});
    const Ckg g = Ckg::build(doc);
    EXPECT_EQ(search_str(g, StructureId("s1")), ids({"A", "C"}));
    EXPECT_EQ(search_str(g, StructureId("s2")), ids({"B"}));
    EXPECT_TRUE(search_str(g, StructureId("s3")).empty());
}

TEST(CkgAdd, NewCharacterJoinsIndexes) {
    const Ckg g = three_char_graph();
    const Ckg h = add_character(g, {CharId("E"), rads({"r1", "r2"}), StructureId("s1"), {}});
    EXPECT_EQ(search_rad(h, rads({"r1", "r2"})), ids({"A", "B", "E"}));
    EXPECT_EQ(search_str(h, StructureId("s2")), ids({"B"}));
    EXPECT_EQ(search_rad(g, rads({"r1", "r2"})), ids({"A", "B"}));
    EXPECT_TRUE(h.indexes_consistent());
}

TEST(CkgAdd, DuplicateOrDanglingLeavesGraphUnchanged) {
    const Ckg g = three_char_graph();
    const std::string before = serialize_ckg(g);
    EXPECT_EQ(kind_of([&] { add_character(g, {CharId("A"), rads({"r3"}), StructureId("s1"), {}}); }),
              ErrorKind::duplicate);
    EXPECT_EQ(kind_of([&] { add_character(g, {CharId("F"), rads({"r9"}), StructureId("s1"), {}}); }),
              ErrorKind::reference);
    EXPECT_EQ(serialize_ckg(g), before);
}

TEST(CkgStatsTest, FixtureCounts) {
    const auto s = ckg_stats(three_char_graph());
    EXPECT_EQ(s.n_characters, 3u);
    EXPECT_EQ(s.n_radicals, 3u);
    EXPECT_EQ(s.n_structures, 2u);
    EXPECT_EQ(s.radical_usage.at("r1"), 3u);
    EXPECT_EQ(s.radical_count_histogram.at(2), 3u);
}

TEST(CkgStatsTest, EmptyGraphIsAllZero) {
    const auto s = ckg_stats(Ckg::build({}));
    EXPECT_EQ(s.n_characters + s.n_radicals + s.n_structures + s.n_radicals_used + s.n_structures_used, 0u);
    EXPECT_TRUE(s.radical_usage.empty());
}

TEST(CkgStatsTest, SyntheticEchoesGenerator) {
    SynthParams p;
    p.seed = 7;
    const auto s = ckg_stats(generate_synthetic_ckg(p));
    EXPECT_EQ(s.n_characters, 1000u);
    EXPECT_EQ(s.n_radicals, 200u);
    EXPECT_EQ(s.n_structures, 14u);
    EXPECT_LE(s.n_radicals_used, 200u);
    EXPECT_LE(s.n_structures_used, 14u);
}

// Random graphs and queries compared with a direct scan over entries.
TEST(CkgProperty, QueriesMatchLinearScan) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        SCOPED_TRACE(trial);
        const auto inst = random_instance(rng);
        const Ckg g = Ckg::build(inst.doc);
        ASSERT_TRUE(g.indexes_consistent());

        std::uniform_int_distribution<std::size_t> pick(0, inst.doc.radicals.size() - 1);
        std::vector<RadicalId> q(std::uniform_int_distribution<int>(1, 3)(rng));
        for (auto& r : q) r = inst.doc.radicals[pick(rng)].id;
        auto sorted = [](std::vector<RadicalId> v) {
            std::sort(v.begin(), v.end());
            return v;
        };
        const auto qs = sorted(q);
        std::vector<CharId> exact, subset;
        for (const auto& c : inst.doc.characters) {
            const auto cs = sorted(c.radicals);
            if (cs == qs) exact.push_back(c.id);
            if (std::includes(cs.begin(), cs.end(), qs.begin(), qs.end())) subset.push_back(c.id);
        }
        std::sort(exact.begin(), exact.end());
        std::sort(subset.begin(), subset.end());
        EXPECT_EQ(search_rad(g, q, MatchMode::exact), exact);
        EXPECT_EQ(search_rad(g, q, MatchMode::subset), subset);

        std::shuffle(q.begin(), q.end(), rng);
        EXPECT_EQ(search_rad(g, q, MatchMode::exact), exact);

        // Monotone under add_character.
        CharacterEntry extra{CharId("zz"), q, inst.doc.structures[0].id, {}};
        const Ckg h = add_character(g, extra);
        auto after = search_rad(h, q, MatchMode::exact);
        auto expect = exact;
        expect.push_back(CharId("zz"));
        std::sort(expect.begin(), expect.end());
        EXPECT_EQ(after, expect);
    }
}
