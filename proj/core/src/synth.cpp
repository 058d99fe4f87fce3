#include "obbgen/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "obbgen/error.hpp"

namespace obbgen {

namespace {

constexpr int kMaxAttempts = 1000;
constexpr double kMaxOverlapIou = 0.05;

struct Shape {
    double w;
    double h;
    double angle;
};

Shape sample_shape(const SceneParams& p, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> size(p.min_size, p.max_size);
    std::uniform_real_distribution<double> aspect(p.min_aspect, p.max_aspect);
    std::uniform_real_distribution<double> angle(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
    const double s = size(rng);
    const double ar = std::sqrt(aspect(rng));
    return {s * ar, s / ar, angle(rng)};
}

// Half extents of the axis-aligned bounding rectangle.
Vec2 half_bounds(double w, double h, double angle) {
    const double c = std::abs(std::cos(angle));
    const double s = std::abs(std::sin(angle));
    return {0.5 * (w * c + h * s), 0.5 * (w * s + h * c)};
}

bool inside_image(const OrientedBox& b, const SceneParams& p) {
    const Vec2 half = half_bounds(b.w, b.h, b.angle);
    return b.cx - half.x >= 0.0 && b.cx + half.x <= p.image_width && b.cy - half.y >= 0.0 &&
           b.cy + half.y <= p.image_height;
}

void scatter(const SceneParams& p, std::mt19937_64& rng, Scene& scene) {
    std::uniform_int_distribution<int> count(p.min_instances, p.max_instances);
    std::uniform_int_distribution<int> cls(0, p.n_class - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
            const int class_id = cls(rng);
            const Shape s = sample_shape(p, rng);
            const Vec2 half = half_bounds(s.w, s.h, s.angle);
            const double span_x = p.image_width - 2.0 * half.x;
            const double span_y = p.image_height - 2.0 * half.y;
            const double ux = unit(rng);
            const double uy = unit(rng);
            if (span_x < 0.0 || span_y < 0.0) continue;
            const OrientedBox box{half.x + ux * span_x, half.y + uy * span_y, s.w, s.h, s.angle};
            const bool clear = std::none_of(scene.instances.begin(), scene.instances.end(), [&](const Instance& o) {
                return rotated_iou(o.box, box) > kMaxOverlapIou;
            });
            if (!clear) continue;
            scene.instances.push_back({box, class_id});
            placed = true;
        }
        if (!placed) throw PlacementExhausted("could not place instance " + std::to_string(i));
    }
}

void lay_rows(const SceneParams& p, std::mt19937_64& rng, Scene& scene) {
    std::uniform_int_distribution<int> cls(0, p.n_class - 1);
    std::uniform_real_distribution<double> ux(0.0, p.image_width);
    std::uniform_real_distribution<double> uy(0.0, p.image_height);
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        const int class_id = cls(rng);
        const Shape s = sample_shape(p, rng);
        const Vec2 origin{ux(rng), uy(rng)};
        const Vec2 e1{std::cos(s.angle), std::sin(s.angle)};
        const Vec2 e2 = perp(e1);
        // Short side across the row so neighbors pack side by side.
        const double w = s.h;
        const double h = s.w;
        const double col_pitch = w + p.row_gap;
        const double row_pitch = h + p.row_gap;
        std::vector<Instance> laid;
        bool fits = true;
        for (int r = 0; r < p.rows && fits; ++r) {
            for (int c = 0; c < p.row_length && fits; ++c) {
                const double along = (c - (p.row_length - 1) / 2.0) * col_pitch;
                const double across = (r - (p.rows - 1) / 2.0) * row_pitch;
                const Vec2 ctr = origin + e1 * along + e2 * across;
                const OrientedBox box{ctr.x, ctr.y, w, h, s.angle};
                fits = inside_image(box, p);
                laid.push_back({box, class_id});
            }
        }
        if (fits) {
            scene.instances = std::move(laid);
            return;
        }
    }
    throw PlacementExhausted("parallel-row layout does not fit the image");
}

}  // namespace

void SceneParams::validate() const {
    if (image_width < 1 || image_height < 1) throw InvalidArgument("image dimensions must be positive");
    if (density == DensityMode::kScattered) {
        if (min_instances < 1 || max_instances < min_instances) {
            throw InvalidArgument("instance count range must be non-empty and positive");
        }
    } else {
        if (rows < 1 || row_length < 1) throw InvalidArgument("rows and row_length must be positive");
        if (!(row_gap >= 0.0)) throw InvalidArgument("row_gap must be non-negative");
    }
    if (!(min_aspect >= 1.0) || max_aspect < min_aspect) throw InvalidArgument("aspect range invalid");
    if (!(min_size > 0.0) || max_size < min_size) throw InvalidArgument("size range invalid");
    if (n_class < 1 || n_class > TargetMap::kMaxClasses) throw InvalidArgument("n_class out of range");
}

Scene generate_scene(const SceneParams& params) {
    params.validate();
    std::mt19937_64 rng(params.seed);
    Scene scene;
    scene.image_width = params.image_width;
    scene.image_height = params.image_height;
    scene.n_class = params.n_class;
    if (params.density == DensityMode::kScattered) {
        scatter(params, rng, scene);
    } else {
        lay_rows(params, rng, scene);
    }
    scene.annotations.reserve(scene.instances.size());
    for (const auto& inst : scene.instances) {
        scene.annotations.push_back({inst.box.cx, inst.box.cy, inst.class_id});
    }
    return scene;
}

ClassProbabilityMap render_cpm(const Scene& scene, std::uint32_t stride, double gamma) {
    if (stride == 0) throw InvalidArgument("stride must be at least 1");
    if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
    const auto cells = [stride](int pixels) {
        return static_cast<std::uint32_t>((static_cast<std::uint32_t>(pixels) + stride - 1) / stride);
    };
    ClassProbabilityMap cpm(static_cast<std::uint32_t>(scene.n_class), cells(scene.image_height),
                            cells(scene.image_width), stride);
    const double s = stride;
    for (const auto& inst : scene.instances) {
        if (inst.class_id < 0 || inst.class_id >= scene.n_class) throw InvalidArgument("instance class out of range");
        const OrientedBox& b = inst.box;
        const Vec2 half = half_bounds(b.w, b.h, b.angle);
        const long x0 = std::max(0L, static_cast<long>(std::floor((b.cx - half.x) / s)));
        const long x1 = std::min(static_cast<long>(cpm.width) - 1, static_cast<long>(std::ceil((b.cx + half.x) / s)));
        const long y0 = std::max(0L, static_cast<long>(std::floor((b.cy - half.y) / s)));
        const long y1 = std::min(static_cast<long>(cpm.height) - 1, static_cast<long>(std::ceil((b.cy + half.y) / s)));
        const Vec2 ew = b.axis_w();
        const Vec2 eh = b.axis_h();
        for (long y = y0; y <= y1; ++y) {
            for (long x = x0; x <= x1; ++x) {
                const Vec2 d = Vec2{x * s, y * s} - b.center();
                const double a = std::abs(dot(d, ew)) / (b.w / 2.0);
                const double bb = std::abs(dot(d, eh)) / (b.h / 2.0);
                const double m = std::max(a, bb);
                if (m >= 1.0) continue;
                const auto v = static_cast<float>(std::clamp(std::pow(1.0 - m, gamma), 0.0, 1.0));
                float& cell = cpm.at(static_cast<std::uint32_t>(inst.class_id), static_cast<std::uint32_t>(y),
                                     static_cast<std::uint32_t>(x));
                cell = std::max(cell, v);
            }
        }
    }
    return cpm;
}

ClassProbabilityMap corrupt_cpm(const ClassProbabilityMap& cpm, double noise_sigma, int blur_radius,
                                std::uint64_t seed) {
    if (!(noise_sigma >= 0.0)) throw InvalidArgument("noise_sigma must be non-negative");
    if (blur_radius < 0) throw InvalidArgument("blur_radius must be non-negative");
    ClassProbabilityMap out = cpm;
    if (noise_sigma > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, noise_sigma);
        for (float& v : out.values) v = static_cast<float>(std::clamp(v + noise(rng), 0.0, 1.0));
    }
    if (blur_radius == 0) return out;

    const long r = blur_radius;
    const long w = out.width;
    const long h = out.height;
    std::vector<double> row(static_cast<std::size_t>(w * h));
    for (std::uint32_t c = 0; c < out.n_class; ++c) {
        for (long y = 0; y < h; ++y) {
            for (long x = 0; x < w; ++x) {
                double sum = 0.0;
                const long lo = std::max(0L, x - r);
                const long hi = std::min(w - 1, x + r);
                for (long k = lo; k <= hi; ++k) sum += out.at(c, y, k);
                row[y * w + x] = sum / static_cast<double>(hi - lo + 1);
            }
        }
        for (long y = 0; y < h; ++y) {
            const long lo = std::max(0L, y - r);
            const long hi = std::min(h - 1, y + r);
            for (long x = 0; x < w; ++x) {
                double sum = 0.0;
                for (long k = lo; k <= hi; ++k) sum += row[k * w + x];
                out.at(c, y, x) = static_cast<float>(std::clamp(sum / static_cast<double>(hi - lo + 1), 0.0, 1.0));
            }
        }
    }
    return out;
}

}  // namespace obbgen
