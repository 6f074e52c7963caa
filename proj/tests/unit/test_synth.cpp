#include <filesystem>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "radreason/ckg_io.hpp"
#include "radreason/raster.hpp"
#include "radreason/synth.hpp"

using namespace radreason;
using namespace testing_support;

namespace {

std::vector<Rect> canonical(const char* structure, int arity) {
    StreamRng rng(1, 1);
    return layout_for_structure(TemplateSet::defaults(), StructureId(structure), arity, 0.0, rng);
}

Bitmap random_glyph(std::mt19937_64& rng, int w, int h) {
    Bitmap b(w, h);
    std::uniform_int_distribution<int> v(0, 255);
    for (auto& p : b.pixels) p = static_cast<std::uint8_t>(v(rng));
    return b;
}

}  // namespace

TEST(Layout, CanonicalTemplatesAtZeroJitter) {
    EXPECT_EQ(canonical("left-right", 2), (std::vector<Rect>{{0, 0, 0.5, 1}, {0.5, 0, 0.5, 1}}));
    EXPECT_EQ(canonical("top-bottom", 2), (std::vector<Rect>{{0, 0, 1, 0.5}, {0, 0.5, 1, 0.5}}));
    EXPECT_EQ(canonical("full-enclosure", 2), (std::vector<Rect>{{0, 0, 1, 1}, {0.25, 0.25, 0.5, 0.5}}));
    EXPECT_EQ(canonical("single", 1), (std::vector<Rect>{{0, 0, 1, 1}}));
}

TEST(Layout, FourteenValidTemplates) {
    const auto set = TemplateSet::defaults();
    ASSERT_EQ(set.order().size(), 14u);
    for (const auto& id : set.order()) {
        const auto* t = set.find(id);
        ASSERT_NE(t, nullptr);
        EXPECT_TRUE(template_is_valid(*t)) << id;
        StreamRng rng(0, 0);
        EXPECT_EQ(layout_for_structure(set, id, t->arity(), 0.0, rng), t->slots);
    }
    LayoutTemplate clash{StructureId("x"), {{0, 0, 0.6, 1}, {0.4, 0, 0.6, 1}}, false};
    EXPECT_FALSE(template_is_valid(clash));
    clash.nested = true;
    EXPECT_TRUE(template_is_valid(clash));
}

TEST(Layout, JitterStaysBoundedAndDeterministic) {
    const auto set = TemplateSet::defaults();
    for (std::uint64_t s = 0; s < 200; ++s) {
        for (const auto& id : set.order()) {
            const auto* t = set.find(id);
            StreamRng a(s, 3), b(s, 3);
            const auto got = layout_for_structure(set, id, t->arity(), 0.05, a);
            EXPECT_EQ(got, layout_for_structure(set, id, t->arity(), 0.05, b));
            for (std::size_t i = 0; i < got.size(); ++i) {
                const Rect& base = t->slots[i];
                EXPECT_TRUE(got[i].within_unit_square(1e-9));
                EXPECT_GE(got[i].x, base.x * 0.95 - 1e-12);
                EXPECT_LE(got[i].x, base.x * 1.05 + 1e-12);
                EXPECT_GE(got[i].y, base.y * 0.95 - 1e-12);
                EXPECT_LE(got[i].y, base.y * 1.05 + 1e-12);
                EXPECT_LE(got[i].w, base.w * 1.05 + 1e-12);
                EXPECT_LE(got[i].h, base.h * 1.05 + 1e-12);
            }
        }
    }
}

TEST(Layout, Errors) {
    StreamRng rng(1, 1);
    try {
        layout_for_structure(TemplateSet::defaults(), StructureId("spiral"), 2, 0.0, rng);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::unknown_id);
    }
    try {
        layout_for_structure(TemplateSet::defaults(), StructureId("left-right"), 3, 0.0, rng);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::invalid_params);
    }
}

TEST(Layout, ExtraRadicalsShareLastSlot) {
    StreamRng rng(1, 1);
    const auto r = layout_for_count(TemplateSet::defaults(), StructureId("left-right"), 3, 0.0, rng);
    ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(r[0], (Rect{0, 0, 0.5, 1}));
    EXPECT_NEAR(r[1].area() + r[2].area(), 0.5, 1e-12);
    EXPECT_TRUE(arity_compatible(2, 3));
    EXPECT_FALSE(arity_compatible(2, 1));
    EXPECT_FALSE(arity_compatible(1, 2));
}

TEST(Templates, JsonOverride) {
    const auto doc = nlohmann::json::parse(R"({"templates":[{"structure":"left-right","slots":[[0,0,0.4,1],[0.4,0,0.6,1]]}]})");
    const auto set = TemplateSet::from_json(doc);
    EXPECT_EQ(set.find(StructureId("left-right"))->slots[0], (Rect{0, 0, 0.4, 1}));
    EXPECT_NE(set.find(StructureId("overlay")), nullptr);
    EXPECT_THROW(TemplateSet::from_json(nlohmann::json::parse(R"({"templates":[{"slots":[]}]})")), Error);
}

TEST(Generator, DeterministicAndValid) {
    SynthParams p;
    p.n_characters = 500;
    p.n_radicals = 40;
    p.seed = 5;
    const Ckg a = generate_synthetic_ckg(p);
    EXPECT_EQ(serialize_ckg(a), serialize_ckg(generate_synthetic_ckg(p)));
    p.seed = 6;
    EXPECT_NE(serialize_ckg(a), serialize_ckg(generate_synthetic_ckg(p)));

    const auto report = validate_ckg(a);
    EXPECT_EQ(report.error_count(), 0u);
    std::set<std::pair<MultisetKey, StructureIndex>> seen;
    for (CharIndex c = 0; c < a.num_characters(); ++c) {
        EXPECT_TRUE(seen.insert({a.character_key(c), a.character_structure(c)}).second);
        const auto& entry = a.characters()[c];
        EXPECT_GE(entry.radicals.size(), 1u);
        EXPECT_LE(entry.radicals.size(), 4u);
        const auto arity = a.structures()[a.character_structure(c)].arity;
        ASSERT_TRUE(arity);
        EXPECT_TRUE(arity_compatible(*arity, entry.radicals.size())) << entry.id;
    }
}

TEST(Generator, UniqueMultisetsAndExtras) {
    SynthParams p;
    p.n_characters = 300;
    p.n_radicals = 30;
    p.n_structures = 16;
    p.min_radicals = 2;
    p.max_radicals = 3;
    p.unique_multisets = true;
    p.seed = 2;
    const Ckg g = generate_synthetic_ckg(p);
    EXPECT_EQ(g.num_structures(), 16u);
    std::set<MultisetKey> keys;
    for (CharIndex c = 0; c < g.num_characters(); ++c) EXPECT_TRUE(keys.insert(g.character_key(c)).second);
}

TEST(Generator, InfeasibleAndInvalid) {
    SynthParams p;
    p.n_characters = 7;
    p.n_radicals = 3;
    p.min_radicals = p.max_radicals = 2;
    p.unique_multisets = true;
    EXPECT_EQ(combination_capacity(p), 6u);
    try {
        generate_synthetic_ckg(p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::infeasible);
    }
    p.n_characters = 6;
    EXPECT_EQ(generate_synthetic_ckg(p).num_characters(), 6u);
    p.min_radicals = 3;
    p.max_radicals = 2;
    EXPECT_THROW(generate_synthetic_ckg(p), Error);
}

TEST(Generator, AdditionalCharactersAvoidExisting) {
    SynthParams p;
    p.n_characters = 200;
    p.n_radicals = 20;
    p.min_radicals = 2;
    p.max_radicals = 3;
    p.unique_multisets = true;
    p.seed = 9;
    Ckg g = generate_synthetic_ckg(p);
    const auto extra = generate_additional_characters(g, 50, 2, 3, true, 77, "u");
    ASSERT_EQ(extra.size(), 50u);
    for (const auto& e : extra) {
        EXPECT_EQ(e.id.str().rfind("u", 0), 0u);
        EXPECT_TRUE(search_rad(g, e.radicals, MatchMode::exact).empty()) << e.id;
        g = add_character(g, e);
    }
    EXPECT_EQ(g.num_characters(), 250u);
    EXPECT_THROW(generate_additional_characters(g, 1u << 20, 2, 2, true, 1), Error);
}

TEST(Raster, FullSquareIsScaledGlyph) {
    const Bitmap glyph = read_pgm(fixture("glyphs/g1.pgm"));
    ASSERT_EQ(glyph.width, 4);
    EXPECT_EQ(glyph.at(3, 3), 128);
    const Bitmap out = splice_raster({{RadicalId("g1"), glyph}}, {{RadicalId("g1"), {0, 0, 1, 1}}}, 16);
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) EXPECT_EQ(out.at(x, y), glyph.at(x / 4, y / 4));
    }
    EXPECT_EQ(out, read_pgm(fixture("golden_x16.pgm")));
}

TEST(Raster, DisjointRectanglesLeaveBackground) {
    const Bitmap ink(3, 3, 0);
    const Bitmap out = splice_raster({{RadicalId("a"), ink}},
                                     {{RadicalId("a"), {0, 0, 0.25, 0.25}}, {RadicalId("a"), {0.5, 0.5, 0.25, 0.25}}},
                                     32);
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
            const bool in_a = x < 8 && y < 8;
            const bool in_b = x >= 16 && x < 24 && y >= 16 && y < 24;
            EXPECT_EQ(out.at(x, y), (in_a || in_b) ? 0 : 255);
        }
    }
}

TEST(Raster, OverlapTakesDarkerAndOrderDoesNotMatter) {
    std::mt19937_64 rng(3);
    const std::map<RadicalId, Bitmap> glyphs = {{RadicalId("a"), Bitmap(5, 5, 100)}, {RadicalId("b"), Bitmap(7, 3, 50)}};
    std::vector<GlyphBox> layout = {{RadicalId("a"), {0, 0, 0.75, 0.75}}, {RadicalId("b"), {0.25, 0.25, 0.75, 0.75}}};
    const Bitmap out = splice_raster(glyphs, layout, 40);
    EXPECT_EQ(out.at(20, 20), 50);
    EXPECT_EQ(out.at(2, 2), 100);
    EXPECT_EQ(out.at(38, 38), 50);
    EXPECT_EQ(out.at(38, 2), 255);

    for (int trial = 0; trial < 20; ++trial) {
        std::map<RadicalId, Bitmap> g;
        std::vector<GlyphBox> boxes;
        std::uniform_real_distribution<double> u(0.0, 0.5);
        for (int k = 0; k < 4; ++k) {
            const RadicalId id("g" + std::to_string(k));
            g[id] = random_glyph(rng, 3 + k, 5 - k);
            boxes.push_back({id, {u(rng), u(rng), 0.5, 0.5}});
        }
        const Bitmap fwd = splice_raster(g, boxes, 24);
        std::reverse(boxes.begin(), boxes.end());
        EXPECT_EQ(splice_raster(g, boxes, 24), fwd);
    }
}

TEST(Raster, Errors) {
    try {
        splice_raster({}, {{RadicalId("a"), {0, 0, 1, 1}}}, 16);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::reference);
    }
    EXPECT_THROW(splice_raster({}, {}, 8), Error);
    EXPECT_THROW(decode_pgm("P7\n1 1\n255\n"), Error);
}

TEST(Raster, PgmRoundTrip) {
    std::mt19937_64 rng(4);
    const Bitmap img = random_glyph(rng, 9, 5);
    EXPECT_EQ(decode_pgm(encode_pgm(img)), img);
    const auto path = std::filesystem::temp_directory_path() / "radreason_roundtrip.pgm";
    write_pgm(path, img);
    EXPECT_EQ(read_pgm(path), img);
    std::filesystem::remove(path);
}
