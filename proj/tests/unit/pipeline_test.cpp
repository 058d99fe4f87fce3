#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "obbgen/error.hpp"
#include "obbgen/parallel.hpp"
#include "obbgen/pipeline.hpp"
#include "obbgen/seed.hpp"
#include "obbgen/synth.hpp"

using namespace obbgen;

namespace {

struct Fixture {
    Scene scene;
    ClassProbabilityMap cpm;
};

Fixture make(std::uint64_t seed, DensityMode mode = DensityMode::kScattered) {
    SceneParams p;
    p.seed = seed;
    p.density = mode;
    Fixture f{generate_scene(p), {}};
    f.cpm = corrupt_cpm(render_cpm(f.scene, 8), 0.05, 1, seed);
    return f;
}

std::vector<double> flat_points(const Scene& s) {
    std::vector<double> xy;
    for (const auto& a : s.annotations) xy.insert(xy.end(), {a.x, a.y});
    return xy;
}

std::vector<std::int32_t> flat_classes(const Scene& s) {
    std::vector<std::int32_t> c;
    for (const auto& a : s.annotations) c.push_back(a.class_id);
    return c;
}

}  // namespace

TEST(CpmView, ShapeChecksAndOffMapReads) {
    const std::vector<float> v{0.1f, 0.2f, 0.3f, 0.4f, 0.5f, 0.6f};
    EXPECT_THROW(CpmView(v, 1, 2, 2, 4), InvalidArgument);
    EXPECT_THROW(CpmView(v, 1, 2, 3, 0), InvalidArgument);
    const CpmView m(v, 1, 2, 3, 4);
    EXPECT_EQ(m.at(0, 1, 2), 0.6f);
    EXPECT_EQ(m.at_or_zero(0, -1, 0), 0.0f);
    EXPECT_EQ(m.at_or_zero(0, 0, 3), 0.0f);
    EXPECT_NEAR(m.bilinear(0, {0.5, 0.5}), (0.1 + 0.2 + 0.4 + 0.5) / 4, 1e-7);
    EXPECT_NEAR(m.bilinear(0, {2.0, 1.0}), 0.6, 1e-7);
    EXPECT_NEAR(m.bilinear(0, {2.5, 1.0}), 0.3, 1e-7);  // half toward an off-map cell
    EXPECT_EQ(m.bilinear(0, {-5, 0}), 0.0);
    EXPECT_EQ(m.bilinear(0, {0, 1e9}), 0.0);
}

TEST(CpmView, ValidateValues) {
    std::vector<float> v{0.0f, 1.0f, 0.5f, 1.0000001f};
    CpmView(v, 1, 2, 2, 1).validate_values();
    v[2] = 1.1f;
    EXPECT_THROW(CpmView(v, 1, 2, 2, 1).validate_values(), InvalidArgument);
    v[2] = std::numeric_limits<float>::quiet_NaN();
    EXPECT_THROW(CpmView(v, 1, 2, 2, 1).validate_values(), InvalidArgument);
    v[2] = -0.01f;
    EXPECT_THROW(CpmView(v, 1, 2, 2, 1).validate_values(), InvalidArgument);
}

TEST(DeriveSeed, DependsOnEveryInput) {
    const auto base = derive_seed(1, "img", 0);
    EXPECT_EQ(base, derive_seed(1, "img", 0));
    EXPECT_NE(base, derive_seed(2, "img", 0));
    EXPECT_NE(base, derive_seed(1, "img2", 0));
    EXPECT_NE(base, derive_seed(1, "img", 1));
    static_assert(fnv1a64("") == 0xcbf29ce484222325ULL);
    static_assert(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST(ParallelFor, VisitsEachIndexOnceAndPropagatesErrors) {
    for (unsigned workers : {1u, 2u, 4u, 16u}) {
        std::vector<std::atomic<int>> hits(1000);
        parallel_for(hits.size(), workers, [&](std::size_t i) { hits[i].fetch_add(1); });
        for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
        EXPECT_THROW(parallel_for(100, workers,
                                  [](std::size_t i) {
                                      if (i == 37) throw std::runtime_error("boom");
                                  }),
                     std::runtime_error);
    }
    parallel_for(0, 4, [](std::size_t) { FAIL(); });
}

TEST(ExtractImage, WorkerCountDoesNotChangeResults) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto f = make(seed, seed % 2 ? DensityMode::kParallelRows : DensityMode::kScattered);
        for (SampleMode mode : {SampleMode::kWeighted, SampleMode::kProbabilistic}) {
            ExtractParams p;
            p.sample_mode = mode;
            ExtractStats s1, s4;
            const auto one = extract_image(f.cpm.view(), f.scene.annotations, p, 7, "img", 1, &s1);
            const auto four = extract_image(f.cpm.view(), f.scene.annotations, p, 7, "img", 4, &s4);
            EXPECT_EQ(one, four);
            EXPECT_EQ(s1.instances, f.scene.annotations.size());
            EXPECT_EQ(s1.fallback, s4.fallback);
            EXPECT_EQ(s1.degenerate, s4.degenerate);
        }
    }
}

TEST(ExtractImage, ProbabilisticSeedsByStemAndRun) {
    const auto f = make(11);
    ExtractParams p;
    p.sample_mode = SampleMode::kProbabilistic;
    const auto a = extract_image(f.cpm.view(), f.scene.annotations, p, 7, "img", 1);
    EXPECT_EQ(a, extract_image(f.cpm.view(), f.scene.annotations, p, 7, "img", 1));
    EXPECT_NE(a, extract_image(f.cpm.view(), f.scene.annotations, p, 8, "img", 1));
    EXPECT_NE(a, extract_image(f.cpm.view(), f.scene.annotations, p, 7, "other", 1));
}

TEST(ExtractImage, EmptyAnnotations) {
    const auto f = make(1);
    ExtractStats s;
    EXPECT_TRUE(extract_image(f.cpm.view(), {}, ExtractParams{}, 0, "x", 4, &s).empty());
    EXPECT_EQ(s.instances, 0u);
}

TEST(ExtractBatch, MatchesExtractImage) {
    const auto f = make(5);
    const ExtractParams p;
    const auto boxes = extract_image(f.cpm.view(), f.scene.annotations, p, 3, "s");
    const auto flat = extract_batch(f.cpm.view(), flat_points(f.scene), flat_classes(f.scene), p, 3, "s");
    ASSERT_EQ(flat.size(), 5 * boxes.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        EXPECT_EQ(flat[5 * i + 0], boxes[i].cx);
        EXPECT_EQ(flat[5 * i + 1], boxes[i].cy);
        EXPECT_EQ(flat[5 * i + 2], boxes[i].w);
        EXPECT_EQ(flat[5 * i + 3], boxes[i].h);
        EXPECT_EQ(flat[5 * i + 4], boxes[i].angle);
    }
    EXPECT_TRUE(extract_batch(f.cpm.view(), {}, {}, p).empty());
}

TEST(ExtractBatch, RejectsBadInput) {
    const auto f = make(5);
    const ExtractParams p;
    const std::vector<double> xy{10, 10};
    const std::vector<std::int32_t> cls{0};
    const std::vector<std::int32_t> two{0, 0};
    EXPECT_THROW(extract_batch(f.cpm.view(), xy, two, p), InvalidArgument);
    const std::vector<std::int32_t> big{99};
    EXPECT_THROW(extract_batch(f.cpm.view(), xy, big, p), InvalidArgument);
    const std::vector<std::int32_t> neg{-1};
    EXPECT_THROW(extract_batch(f.cpm.view(), xy, neg, p), InvalidArgument);
    const std::vector<double> inf{std::numeric_limits<double>::infinity(), 1};
    EXPECT_THROW(extract_batch(f.cpm.view(), inf, cls, p), InvalidArgument);
    auto bad = f.cpm;
    bad.values[3] = 2.0f;
    EXPECT_THROW(extract_batch(bad.view(), xy, cls, p), InvalidArgument);
}

TEST(AssignBatch, MatchesAssignImage) {
    const auto f = make(6);
    const AssignParams p;
    const int w = static_cast<int>(f.cpm.width);
    const int h = static_cast<int>(f.cpm.height);
    const TargetMap m = assign_image(f.scene.annotations, 8, w, h, p);
    const auto flat = assign_batch(flat_points(f.scene), flat_classes(f.scene), 8, h, w, p);
    EXPECT_EQ(flat, m.labels);
    EXPECT_THROW(assign_batch({}, {}, 8, h, w, p), InvalidArgument);
    EXPECT_THROW(assign_image(f.scene.annotations, 0, w, h, p), InvalidArgument);
}

TEST(AssignImage, DividesByStride) {
    const std::vector<PointAnnotation> pts{{80, 40, 1}};
    const TargetMap m = assign_image(pts, 8, 20, 20, AssignParams{});
    EXPECT_EQ(m.positive_class(10, 5), 1);
}
