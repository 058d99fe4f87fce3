#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <random>

#include "obbgen/error.hpp"
#include "obbgen/formats.hpp"
#include "obbgen/text.hpp"

using namespace obbgen;

namespace {

ClassProbabilityMap random_cpm(std::mt19937_64& rng, std::uint32_t c, std::uint32_t h, std::uint32_t w) {
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    ClassProbabilityMap m(c, h, w, 4);
    for (float& v : m.values) v = u(rng);
    return m;
}

std::vector<std::uint8_t> bytes_of(std::string_view s) { return {s.begin(), s.end()}; }

}  // namespace

TEST(ParseDota, SkipsHeaders) {
    const auto v = parse_dota("imagesource:GoogleEarth\ngsd:0.1\n10 10 20 10 20 20 10 20 plane 0\n");
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].category, "plane");
    EXPECT_EQ(v[0].difficulty, 0);
    EXPECT_EQ(v[0].corners[2], (Vec2{20, 20}));
}

TEST(ParseDota, BlankLinesCrlfAndOrder) {
    const auto v = parse_dota("\r\n1 2 3 4 5 6 7 8 ship 1\r\n\n  9 9 9 9 9 9 9 9 harbor 0  \n");
    ASSERT_EQ(v.size(), 2u);
    EXPECT_EQ(v[0].category, "ship");
    EXPECT_EQ(v[0].difficulty, 1);
    EXPECT_EQ(v[1].category, "harbor");
}

TEST(ParseDota, ErrorsCarryLineNumbers) {
    auto line_of = [](std::string_view text) -> std::size_t {
        try {
            parse_dota(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    EXPECT_EQ(line_of("gsd:1\n1 2 3 4 5 6 7 8 plane\n"), 2u);                // 9 fields
    EXPECT_EQ(line_of("1 2 3 4 5 6 7 8 plane 0 extra\n"), 1u);               // 11 fields
    EXPECT_EQ(line_of("1 2 3 4 5 6 7 8 plane 0\n1 2 3 x 5 6 7 8 plane 0\n"), 2u);
    EXPECT_EQ(line_of("1 2 3 4 5 6 7 8 plane 2\n"), 1u);                     // difficulty
    EXPECT_EQ(line_of("1 2 3 4 5 6 7 nan plane 0\n"), 1u);
    EXPECT_EQ(line_of("1 2 3 4 5 6 7 1e999 plane 0\n"), 1u);
    EXPECT_EQ(line_of("1,5 2 3 4 5 6 7 8 plane 0\n"), 1u);                   // decimal comma
}

TEST(WriteDota, EmptyAndFormatting) {
    EXPECT_EQ(write_dota({}), "");
    const std::vector<DotaInstance> one{{{Vec2{1.5, 2}, Vec2{3.25, 4}, Vec2{-5, 6e-7}, Vec2{123456789, 8}}, "plane", 0}};
    EXPECT_EQ(write_dota(one), "1.5 2 3.25 4 -5 6e-07 1.23457e+08 8 plane 0\n");
}

TEST(WriteDota, RejectsUnwritableRecords) {
    std::vector<DotaInstance> v{{{}, "small vehicle", 0}};
    EXPECT_THROW(write_dota(v), InvalidArgument);
    v[0].category = "plane";
    v[0].difficulty = 3;
    EXPECT_THROW(write_dota(v), InvalidArgument);
}

TEST(WriteDota, RoundTripAtSixDigits) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2000, 2000);
    std::vector<DotaInstance> v;
    for (int i = 0; i < 200; ++i) {
        DotaInstance d;
        for (auto& c : d.corners) c = {u(rng), u(rng)};
        d.category = i % 2 ? "ship" : "small-vehicle";
        d.difficulty = i % 3 == 0;
        v.push_back(d);
    }
    const std::string once = write_dota(v);
    const auto parsed = parse_dota(once);
    EXPECT_EQ(write_dota(parsed), once);
    EXPECT_EQ(parse_dota(write_dota(parsed)), parsed);
    for (std::size_t i = 0; i < v.size(); ++i) {
        for (int k = 0; k < 4; ++k) {
            EXPECT_NEAR(parsed[i].corners[k].x, v[i].corners[k].x, 1e-5 * std::abs(v[i].corners[k].x) + 1e-9);
        }
    }
}

TEST(ClassTableTest, ParseSerializeLookup) {
    const ClassTable t = ClassTable::parse("plane\n\nship\r\nharbor\n");
    EXPECT_EQ(t.size(), 3u);
    EXPECT_EQ(t.id("ship"), 1);
    EXPECT_EQ(t.name(2), "harbor");
    EXPECT_EQ(ClassTable::parse(t.serialize()).names(), t.names());
    EXPECT_THROW(t.id("blimp"), LookupError);
    EXPECT_THROW(t.name(3), LookupError);
    EXPECT_THROW(ClassTable::parse("plane\nplane\n"), ParseError);
    EXPECT_THROW(ClassTable::parse("small vehicle\n"), ParseError);
}

TEST(ClassTableTest, DotaDefault) {
    const ClassTable t = ClassTable::dota_default(17);
    EXPECT_EQ(t.name(0), "plane");
    EXPECT_EQ(t.name(14), "helicopter");
    EXPECT_EQ(t.name(16), "class16");
}

TEST(DerivePoints, VertexCentroid) {
    const ClassTable t({"plane", "ship"});
    const std::vector<DotaInstance> v{{{Vec2{0, 0}, Vec2{2, 0}, Vec2{2, 2}, Vec2{0, 2}}, "ship", 0}};
    const auto p = derive_points(v, t);
    ASSERT_EQ(p.size(), 1u);
    EXPECT_EQ(p[0], (PointAnnotation{1, 1, 1}));

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-100, 100);
    for (int i = 0; i < 500; ++i) {
        const OrientedBox b{u(rng), u(rng), 1 + std::abs(u(rng)), 1 + std::abs(u(rng)), u(rng)};
        const std::vector<DotaInstance> one{to_dota(b, "plane")};
        const auto q = derive_points(one, t)[0];
        EXPECT_NEAR(q.x, b.cx, 1e-9);
        EXPECT_NEAR(q.y, b.cy, 1e-9);
    }
    const std::vector<DotaInstance> blimp{{{}, "blimp", 0}};
    EXPECT_THROW(derive_points(blimp, t), LookupError);
}

TEST(PointsFile, RoundTripIsExact) {
    const ClassTable t({"plane", "ship"});
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0, 1024);
    std::vector<PointAnnotation> pts;
    for (int i = 0; i < 300; ++i) pts.push_back({u(rng), u(rng), i % 2});
    EXPECT_EQ(parse_points(write_points(pts, t), t), pts);
}

TEST(PointsFile, Errors) {
    const ClassTable t({"plane"});
    try {
        parse_points("1 2 plane\n3 4\n", t);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    EXPECT_THROW(parse_points("1 2 blimp\n", t), ParseError);
    EXPECT_THROW(parse_points("1 inf plane\n", t), ParseError);
    EXPECT_TRUE(parse_points("\n\n", t).empty());
}

TEST(CpmBinary, LayoutAndSize) {
    ClassProbabilityMap m(1, 2, 2, 4);
    m.values = {0.0f, 0.25f, 0.5f, 1.0f};
    const auto bytes = write_cpm(m);
    ASSERT_EQ(bytes.size(), 20u + 16u);
    EXPECT_EQ(std::memcmp(bytes.data(), "CPM1", 4), 0);
    EXPECT_EQ(bytes[4], 1);   // n_class, little-endian
    EXPECT_EQ(bytes[8], 2);   // height
    EXPECT_EQ(bytes[12], 2);  // width
    EXPECT_EQ(bytes[16], 4);  // stride
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= std::uint32_t(bytes[20 + 4 + i]) << (8 * i);
    EXPECT_EQ(std::bit_cast<float>(bits), 0.25f);
}

TEST(CpmBinary, RoundTripBitIdentical) {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 20; ++i) {
        const auto m = random_cpm(rng, 1 + i % 4, 3 + i, 5 + 2 * i);
        const auto bytes = write_cpm(m);
        const auto back = read_cpm(bytes);
        EXPECT_EQ(back, m);
        EXPECT_EQ(write_cpm(back), bytes);
    }
}

TEST(CpmBinary, Rejections) {
    std::mt19937_64 rng(19);
    const auto good = write_cpm(random_cpm(rng, 2, 3, 4));

    auto offset_of = [](std::span<const std::uint8_t> b) -> long {
        try {
            read_cpm(b);
        } catch (const FormatError& e) {
            return static_cast<long>(e.offset());
        }
        return -1;
    };
    auto bad = good;
    bad[3] = '2';  // CPM2
    EXPECT_EQ(offset_of(bad), 0);
    EXPECT_NE(offset_of(std::span(good).first(good.size() - 1)), -1);
    EXPECT_NE(offset_of(std::span(good).first(10)), -1);
    bad = good;
    bad.push_back(0);
    EXPECT_NE(offset_of(bad), -1);

    ClassProbabilityMap over(1, 1, 2, 1);
    over.values = {0.5f, 1.5f};
    EXPECT_EQ(offset_of(write_cpm(over)), 24);
    over.values = {0.5f, 1.0f + 5e-7f};  // inside tolerance
    EXPECT_NO_THROW(read_cpm(write_cpm(over)));
    over.values = {-0.01f, 0.0f};
    EXPECT_EQ(offset_of(write_cpm(over)), 20);
    over.values = {std::nanf(""), 0.0f};
    EXPECT_EQ(offset_of(write_cpm(over)), 20);

    // dimensions that would overflow a size computation
    bad = good;
    for (int i = 4; i < 16; ++i) bad[i] = 0xff;
    EXPECT_NE(offset_of(bad), -1);
    bad = good;
    bad[16] = bad[17] = bad[18] = bad[19] = 0;  // stride 0
    EXPECT_NE(offset_of(bad), -1);
}

TEST(TargetMapBinary, RoundTrip) {
    TargetMap m;
    m.width = 3;
    m.height = 2;
    m.labels = {0, 255, 1, 3, 0, 2};
    const auto bytes = write_target_map(m, 3, 8);
    ASSERT_EQ(bytes.size(), 20u + 6u);
    EXPECT_EQ(std::memcmp(bytes.data(), "CPM1", 4), 0);
    const auto f = read_target_map(bytes);
    EXPECT_EQ(f.n_class, 3u);
    EXPECT_EQ(f.stride, 8u);
    EXPECT_EQ(f.map.width, 3);
    EXPECT_EQ(f.map.height, 2);
    EXPECT_EQ(f.map.labels, m.labels);
    EXPECT_EQ(write_target_map(f.map, f.n_class, f.stride), bytes);
}

TEST(TargetMapBinary, RejectsLabelsBeyondClassCount) {
    TargetMap m;
    m.width = 2;
    m.height = 1;
    m.labels = {0, 4};
    EXPECT_THROW(read_target_map(write_target_map(m, 3, 1)), FormatError);
    EXPECT_THROW(read_target_map(bytes_of("CPM1")), FormatError);
}

TEST(Text, LocaleFreeNumbers) {
    EXPECT_EQ(parse_double("1.5"), 1.5);
    EXPECT_EQ(parse_double("+2"), 2.0);
    EXPECT_FALSE(parse_double("1,5"));
    EXPECT_FALSE(parse_double(""));
    EXPECT_FALSE(parse_double("1.5x"));
    EXPECT_EQ(parse_int<int>("-3"), -3);
    EXPECT_FALSE(parse_int<int>("3.0"));
    EXPECT_EQ(format_double(0.1 + 0.2), "0.3");
    EXPECT_EQ(parse_double(format_exact(0.1 + 0.2)), 0.1 + 0.2);
    EXPECT_EQ(format_double(2.5, 3, false), "2.500");
}
