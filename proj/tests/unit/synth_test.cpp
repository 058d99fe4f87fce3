#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "obbgen/error.hpp"
#include "obbgen/synth.hpp"

using namespace obbgen;
using std::numbers::pi;

namespace {

Scene one_box(const OrientedBox& b, int w = 200, int h = 200) {
    Scene s;
    s.image_width = w;
    s.image_height = h;
    s.n_class = 1;
    s.instances = {{b, 0}};
    s.annotations = {{b.cx, b.cy, 0}};
    return s;
}

}  // namespace

TEST(GenerateScene, SingleInstance) {
    SceneParams p;
    p.min_instances = p.max_instances = 1;
    const Scene s = generate_scene(p);
    ASSERT_EQ(s.instances.size(), 1u);
    ASSERT_EQ(s.annotations.size(), 1u);
    EXPECT_EQ(s.annotations[0].x, s.instances[0].box.cx);
    EXPECT_EQ(s.annotations[0].y, s.instances[0].box.cy);
    EXPECT_EQ(s.annotations[0].class_id, s.instances[0].class_id);
}

TEST(GenerateScene, ScatteredRespectsRanges) {
    SceneParams p;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        p.seed = seed;
        const Scene s = generate_scene(p);
        EXPECT_GE(static_cast<int>(s.instances.size()), p.min_instances);
        EXPECT_LE(static_cast<int>(s.instances.size()), p.max_instances);
        for (std::size_t i = 0; i < s.instances.size(); ++i) {
            const auto& b = s.instances[i].box;
            const double size = std::sqrt(b.w * b.h);
            EXPECT_GE(size, p.min_size - 1e-9);
            EXPECT_LE(size, p.max_size + 1e-9);
            EXPECT_GE(b.w / b.h, p.min_aspect - 1e-9);
            EXPECT_LE(b.w / b.h, p.max_aspect + 1e-9);
            EXPECT_GE(b.angle, -pi / 2);
            EXPECT_LT(b.angle, pi / 2);
            EXPECT_LT(s.instances[i].class_id, p.n_class);
            for (const Vec2& c : obb_to_corners(b)) {
                EXPECT_GE(c.x, -1e-9);
                EXPECT_LE(c.x, p.image_width + 1e-9);
                EXPECT_GE(c.y, -1e-9);
                EXPECT_LE(c.y, p.image_height + 1e-9);
            }
            for (std::size_t j = 0; j < i; ++j) EXPECT_LE(rotated_iou(b, s.instances[j].box), 0.05);
        }
    }
}

TEST(GenerateScene, ParallelRowsSpacing) {
    SceneParams p;
    p.density = DensityMode::kParallelRows;
    p.rows = 2;
    p.row_length = 5;
    p.row_gap = 16;
    p.seed = 3;
    const Scene s = generate_scene(p);
    ASSERT_EQ(s.instances.size(), 10u);
    const auto& first = s.instances[0];
    for (const auto& inst : s.instances) {
        EXPECT_EQ(inst.class_id, first.class_id);
        EXPECT_EQ(inst.box.angle, first.box.angle);
        EXPECT_EQ(inst.box.w, first.box.w);
        EXPECT_EQ(inst.box.h, first.box.h);
    }
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c + 1 < 5; ++c) {
            const auto& a = s.instances[r * 5 + c].box;
            const auto& b = s.instances[r * 5 + c + 1].box;
            EXPECT_NEAR(distance(a.center(), b.center()), a.w + 16.0, 1e-9);
            EXPECT_EQ(rotated_iou(a, b), 0.0);
        }
    }
    // boxes in a row stand side by side
    EXPECT_LE(first.box.w, first.box.h);
}

TEST(GenerateScene, Deterministic) {
    SceneParams p;
    p.seed = 77;
    EXPECT_EQ(generate_scene(p), generate_scene(p));
    p.density = DensityMode::kParallelRows;
    EXPECT_EQ(generate_scene(p), generate_scene(p));
}

TEST(GenerateScene, Errors) {
    SceneParams p;
    p.min_instances = p.max_instances = 0;
    EXPECT_THROW(generate_scene(p), InvalidArgument);
    p = {};
    p.min_size = p.max_size = 2000;  // cannot fit a 512 image
    EXPECT_THROW(generate_scene(p), PlacementExhausted);
    p = {};
    p.density = DensityMode::kParallelRows;
    p.rows = 20;
    p.row_length = 20;
    EXPECT_THROW(generate_scene(p), PlacementExhausted);
    p = {};
    p.min_aspect = 0.5;
    EXPECT_THROW(generate_scene(p), InvalidArgument);
}

TEST(RenderCpm, CenterEdgeAndHandValue) {
    const auto m = render_cpm(one_box({100, 100, 40, 16, 0}), 4, 1.0);
    EXPECT_FLOAT_EQ(m.at(0, 25, 25), 1.0f);           // center
    EXPECT_FLOAT_EQ(m.at(0, 25, 27), 0.6f);           // 8 px along +x: 1 - 8/20
    EXPECT_FLOAT_EQ(m.at(0, 25, 30), 0.0f);           // x = 120, on the w-edge
    EXPECT_FLOAT_EQ(m.at(0, 27, 25), 0.0f);           // y = 108, on the h-edge
    EXPECT_EQ(m.width, 50u);
    EXPECT_EQ(m.height, 50u);
    const auto g = render_cpm(one_box({100, 100, 40, 16, 0}), 4, 0.5);
    EXPECT_FLOAT_EQ(g.at(0, 25, 27), static_cast<float>(std::sqrt(0.6)));
}

TEST(RenderCpm, MapSizeRoundsUp) {
    const auto m = render_cpm(one_box({50, 50, 10, 10, 0}, 101, 99), 4);
    EXPECT_EQ(m.width, 26u);
    EXPECT_EQ(m.height, 25u);
}

TEST(RenderCpm, ValuesInRangeAndMaxComposed) {
    SceneParams p;
    p.density = DensityMode::kParallelRows;
    p.row_gap = 0;
    p.seed = 5;
    Scene s = generate_scene(p);
    const auto m = render_cpm(s, 4);
    for (float v : m.values) {
        EXPECT_GE(v, 0.0f);
        EXPECT_LE(v, 1.0f);
    }
    // each cell equals the best single-instance rendering
    std::vector<ClassProbabilityMap> singles;
    for (const auto& inst : s.instances) {
        Scene t = s;
        t.instances = {inst};
        singles.push_back(render_cpm(t, 4));
    }
    for (std::size_t i = 0; i < m.values.size(); ++i) {
        float best = 0.0f;
        for (const auto& one : singles) best = std::max(best, one.values[i]);
        EXPECT_EQ(m.values[i], best);
    }
}

TEST(RenderCpm, MonotoneAlongRaysAndPeakAtCenter) {
    // Center on a lattice point so integer steps trace exact rays.
    const OrientedBox b{100, 100, 70, 26, 0.6};
    const auto m = render_cpm(one_box(b), 2);
    for (int dy = -2; dy <= 2; ++dy) {
        for (int dx = -2; dx <= 2; ++dx) {
            if (dx == 0 && dy == 0) continue;
            float prev = 2.0f;
            for (int k = 0; k < 24; ++k) {
                const float v = m.at(0, static_cast<std::uint32_t>(50 + k * dy), static_cast<std::uint32_t>(50 + k * dx));
                EXPECT_LE(v, prev) << dx << "," << dy << " k=" << k;
                prev = v;
            }
        }
    }
    std::size_t arg = 0;
    for (std::size_t i = 0; i < m.values.size(); ++i) {
        if (m.values[i] > m.values[arg]) arg = i;
    }
    EXPECT_EQ(arg % m.width, 50u);
    EXPECT_EQ(arg / m.width, 50u);

    // off-lattice center: the peak stays within one cell
    const OrientedBox c{97.3, 103.1, 70, 26, 0.6};
    const auto n = render_cpm(one_box(c), 2);
    arg = 0;
    for (std::size_t i = 0; i < n.values.size(); ++i) {
        if (n.values[i] > n.values[arg]) arg = i;
    }
    EXPECT_LE(std::abs(static_cast<double>(arg % n.width) * 2 - c.cx), 2.0);
    EXPECT_LE(std::abs(static_cast<double>(arg / n.width) * 2 - c.cy), 2.0);
}

TEST(RenderCpm, QuarterTurnEquivariance) {
    const std::uint32_t stride = 4;
    const int side = 256;
    const double h1 = (side / stride - 1.0) * stride;
    Scene s;
    s.image_width = s.image_height = side;
    s.n_class = 2;
    s.instances = {{{80, 90, 60, 20, 0.3}, 0}, {{170, 150, 40, 30, -1.0}, 1}};
    Scene r = s;
    for (auto& inst : r.instances) {
        const OrientedBox b = inst.box;
        inst.box = {h1 - b.cy, b.cx, b.w, b.h, normalize_angle(b.angle + pi / 2)};
    }
    const auto a = render_cpm(s, stride);
    const auto b = render_cpm(r, stride);
    for (std::uint32_t c = 0; c < 2; ++c) {
        for (std::uint32_t y = 0; y < a.height; ++y) {
            for (std::uint32_t x = 0; x < a.width; ++x) {
                EXPECT_NEAR(b.at(c, x, a.height - 1 - y), a.at(c, y, x), 1e-5);
            }
        }
    }
}

TEST(RenderCpm, Errors) {
    EXPECT_THROW(render_cpm(one_box({10, 10, 4, 4, 0}), 0), InvalidArgument);
    EXPECT_THROW(render_cpm(one_box({10, 10, 4, 4, 0}), 4, 0.0), InvalidArgument);
    Scene s = one_box({10, 10, 4, 4, 0});
    s.instances[0].class_id = 1;
    EXPECT_THROW(render_cpm(s, 4), InvalidArgument);
}

TEST(CorruptCpm, IdentityWithoutNoiseOrBlur) {
    SceneParams p;
    const auto m = render_cpm(generate_scene(p), 4);
    EXPECT_EQ(corrupt_cpm(m, 0.0, 0, 123), m);
}

TEST(CorruptCpm, ClampedNoiseMean) {
    // Clamping N(0, s) to [0, 1] keeps only the positive half: E = s / sqrt(2 pi).
    const double sigma = 0.1;
    const double expected = sigma / std::sqrt(2 * pi);
    EXPECT_NEAR(expected, 0.04, 0.001);
    const ClassProbabilityMap zero(1, 1000, 1000, 1);
    const auto noisy = corrupt_cpm(zero, sigma, 0, 9);
    double sum = 0;
    for (float v : noisy.values) {
        ASSERT_GE(v, 0.0f);
        ASSERT_LE(v, 1.0f);
        sum += v;
    }
    EXPECT_NEAR(sum / noisy.values.size(), expected, 0.01);
    EXPECT_NEAR(sum / noisy.values.size(), expected, 0.001);
}

TEST(CorruptCpm, DeterministicAndBlurPreservesConstants) {
    const ClassProbabilityMap half(2, 30, 40, 4, 0.5f);
    EXPECT_EQ(corrupt_cpm(half, 0.2, 2, 5), corrupt_cpm(half, 0.2, 2, 5));
    EXPECT_NE(corrupt_cpm(half, 0.2, 2, 5), corrupt_cpm(half, 0.2, 2, 6));
    const auto blurred = corrupt_cpm(half, 0.0, 3, 0);
    for (float v : blurred.values) EXPECT_NEAR(v, 0.5f, 1e-6);
    EXPECT_THROW(corrupt_cpm(half, -1.0, 0, 0), InvalidArgument);
    EXPECT_THROW(corrupt_cpm(half, 0.0, -1, 0), InvalidArgument);
}

TEST(CorruptCpm, BlurSpreadsMass) {
    ClassProbabilityMap m(1, 9, 9, 1);
    m.at(0, 4, 4) = 1.0f;
    const auto b = corrupt_cpm(m, 0.0, 1, 0);
    EXPECT_NEAR(b.at(0, 4, 4), 1.0f / 9.0f, 1e-6);
    EXPECT_NEAR(b.at(0, 3, 5), 1.0f / 9.0f, 1e-6);
    EXPECT_EQ(b.at(0, 2, 4), 0.0f);
    const float total = std::accumulate(b.values.begin(), b.values.end(), 0.0f);
    EXPECT_NEAR(total, 1.0f, 1e-5);
}
