#include "obbgen/extract.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "obbgen/error.hpp"

namespace obbgen {

namespace {

constexpr int kMaxResamples = 8;
constexpr double kMinExtent = 0.5;

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

void ExtractParams::validate() const {
    if (grid_size < 3 || grid_size % 2 == 0) throw InvalidArgument("grid_size must be odd and at least 3");
    if (!(boundary_kappa > 0.0 && boundary_kappa <= 1.0)) throw InvalidArgument("boundary_kappa must be in (0, 1]");
    if (!(boundary_floor >= 0.0)) throw InvalidArgument("boundary_floor must be non-negative");
    if (!(step > 0.0)) throw InvalidArgument("step must be positive");
    if (!(max_extent > 0.0)) throw InvalidArgument("max_extent must be positive");
    if (!(angle_threshold > 0.0 && angle_threshold < std::numbers::pi / 2.0)) {
        throw InvalidArgument("angle_threshold must be in (0, pi/2)");
    }
    if (!(degenerate_eps >= 0.0)) throw InvalidArgument("degenerate_eps must be non-negative");
    if (!(fallback_box > 0.0)) throw InvalidArgument("fallback_box must be positive");
    if (constraint_neighbors < 1) throw InvalidArgument("constraint_neighbors must be at least 1");
}

std::vector<WeightedOffset> grid_weights(const CpmView& cpm, std::uint32_t class_id, Vec2 center,
                                         int grid_size) {
    if (class_id >= cpm.n_class()) {
        throw InvalidArgument("class id " + std::to_string(class_id) + " outside CPM with " +
                              std::to_string(cpm.n_class()) + " classes");
    }
    if (grid_size < 1 || grid_size % 2 == 0) throw InvalidArgument("grid_size must be odd");
    if (!std::isfinite(center.x) || !std::isfinite(center.y)) throw InvalidArgument("grid center is not finite");
    const int k = (grid_size - 1) / 2;
    std::vector<WeightedOffset> out;
    out.reserve(static_cast<std::size_t>(grid_size) * grid_size);
    for (int dy = -k; dy <= k; ++dy) {
        for (int dx = -k; dx <= k; ++dx) {
            const Vec2 offset{static_cast<double>(dx), static_cast<double>(dy)};
            const double p = std::clamp(cpm.bilinear(class_id, center + offset), 0.0, 1.0);
            out.push_back({offset, p});
        }
    }
    return out;
}

Covariance2 weighted_covariance(std::span<const WeightedOffset> samples) {
    double total = 0.0;
    Vec2 mean;
    for (const auto& s : samples) {
        total += s.weight;
        mean = mean + s.offset * s.weight;
    }
    if (!(total > 0.0)) throw EmptyNeighborhood("neighborhood has no probability mass");
    mean = mean / total;
    Covariance2 c;
    for (const auto& s : samples) {
        const Vec2 d = s.offset - mean;
        c.xx += s.weight * d.x * d.x;
        c.xy += s.weight * d.x * d.y;
        c.yy += s.weight * d.y * d.y;
    }
    return c;
}

PrincipalAxes principal_axes(const Covariance2& cov, double degenerate_eps) {
    const double half_trace = 0.5 * (cov.xx + cov.yy);
    const double radius = std::hypot(0.5 * (cov.xx - cov.yy), cov.xy);
    PrincipalAxes axes;
    axes.lambda1 = half_trace + radius;
    axes.lambda2 = std::max(half_trace - radius, 0.0);

    Vec2 v;
    if (cov.xy == 0.0) {
        v = cov.xx >= cov.yy ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
    } else {
        // Two algebraically equivalent eigenvector forms; take the better conditioned one.
        const Vec2 a{axes.lambda1 - cov.yy, cov.xy};
        const Vec2 b{cov.xy, axes.lambda1 - cov.xx};
        v = norm(a) >= norm(b) ? a : b;
        v = v / norm(v);
    }
    if (v.x < 0.0 || (v.x == 0.0 && v.y < 0.0)) v = v * -1.0;
    axes.v1 = v;
    axes.v2 = perp(v);
    axes.degenerate = !(axes.lambda1 > 0.0) || (axes.lambda1 - axes.lambda2) < degenerate_eps * axes.lambda1;
    return axes;
}

PrincipalAxes weighted_pca(std::span<const WeightedOffset> samples, double degenerate_eps) {
    return principal_axes(weighted_covariance(samples), degenerate_eps);
}

Covariance2 sampled_covariance(std::span<const WeightedOffset> samples, std::mt19937_64& rng) {
    std::vector<WeightedOffset> kept;
    kept.reserve(samples.size());
    for (int attempt = 0; attempt <= kMaxResamples; ++attempt) {
        kept.clear();
        for (const auto& s : samples) {
            if (uniform01(rng) < s.weight) kept.push_back({s.offset, 1.0});
        }
        if (kept.size() >= 2) return weighted_covariance(kept);
    }
    throw EmptyNeighborhood("fewer than two grid points survived sampling");
}

PrincipalAxes sampled_pca(std::span<const WeightedOffset> samples, std::uint64_t seed, double degenerate_eps) {
    std::mt19937_64 rng(seed);
    return principal_axes(sampled_covariance(samples, rng), degenerate_eps);
}

double trace_extent(const CpmView& cpm, std::uint32_t class_id, Vec2 anchor, Vec2 direction,
                    const ExtractParams& params) {
    double core = 0.0;
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) core += cpm.bilinear(class_id, anchor + Vec2{double(dx), double(dy)});
    }
    core /= 9.0;
    const double threshold = std::max(params.boundary_kappa * core, params.boundary_floor);

    double extent = 0.0;
    for (long k = 1;; ++k) {
        const double t = static_cast<double>(k) * params.step;
        if (t > params.max_extent) break;
        if (cpm.bilinear(class_id, anchor + direction * t) < threshold) break;
        extent = t;
    }
    return extent;
}

double constrain_extent(double extent, Vec2 direction, Vec2 u, double d, double angle_threshold) {
    const double c = dot(u, direction);
    if (!(c > 0.0) || !(d > 0.0)) return extent;
    if (std::acos(std::min(c, 1.0)) >= angle_threshold) return extent;
    return std::min(extent, d / (2.0 * c));
}

ExtractResult extract_obb(const CpmView& cpm, const PointAnnotation& annotation,
                          std::span<const NeighborConstraint> neighbors, const ExtractParams& params,
                          std::uint64_t seed) {
    if (annotation.class_id < 0) throw InvalidArgument("negative class id");
    const auto cls = static_cast<std::uint32_t>(annotation.class_id);
    const double stride = cpm.stride();
    const Vec2 center{annotation.x / stride, annotation.y / stride};
    const auto samples = grid_weights(cpm, cls, center, params.grid_size);

    ExtractResult result;
    PrincipalAxes axes;
    try {
        axes = params.sample_mode == SampleMode::kWeighted ? weighted_pca(samples, params.degenerate_eps)
                                                           : sampled_pca(samples, seed, params.degenerate_eps);
    } catch (const EmptyNeighborhood&) {
        const double side = 2.0 * stride * params.fallback_box;
        result.box = OrientedBox{annotation.x, annotation.y, side, side, 0.0};
        result.fallback = true;
        return result;
    }
    if (axes.degenerate) {
        axes.v1 = {1.0, 0.0};
        axes.v2 = {0.0, 1.0};
        result.degenerate = true;
    }

    const std::array<Vec2, 4> dirs{axes.v1, axes.v1 * -1.0, axes.v2, axes.v2 * -1.0};
    std::array<double, 4> ext{};
    for (std::size_t i = 0; i < 4; ++i) {
        ext[i] = std::max(trace_extent(cpm, cls, center, dirs[i], params), kMinExtent);
        if (!params.constraint_enabled) continue;
        for (const auto& n : neighbors) ext[i] = constrain_extent(ext[i], dirs[i], n.u, n.d, params.angle_threshold);
    }

    const Vec2 shift = axes.v1 * ((ext[0] - ext[1]) / 2.0) + axes.v2 * ((ext[2] - ext[3]) / 2.0);
    const Vec2 c = (center + shift) * stride;
    result.box = OrientedBox{c.x, c.y, stride * (ext[0] + ext[1]), stride * (ext[2] + ext[3]),
                             normalize_angle(std::atan2(axes.v1.y, axes.v1.x))};
    return result;
}

ExtractResult extract_obb(const CpmView& cpm, const PointAnnotation& annotation,
                          const std::optional<NeighborConstraint>& neighbor, const ExtractParams& params,
                          std::uint64_t seed) {
    if (!neighbor) return extract_obb(cpm, annotation, std::span<const NeighborConstraint>{}, params, seed);
    return extract_obb(cpm, annotation, std::span<const NeighborConstraint>(&*neighbor, 1), params, seed);
}

std::vector<std::vector<NeighborConstraint>> neighbor_constraints(std::span<const PointAnnotation> points,
                                                                  std::uint32_t stride, int count) {
    if (stride == 0) throw InvalidArgument("stride must be at least 1");
    if (count < 1) throw InvalidArgument("neighbor count must be at least 1");
    const auto k = static_cast<std::size_t>(count);
    std::vector<std::vector<NeighborConstraint>> out(points.size());
    std::vector<std::pair<double, std::size_t>> found;
    for (std::size_t i = 0; i < points.size(); ++i) {
        found.clear();
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (i == j || points[i].class_id != points[j].class_id) continue;
            const double d = distance(points[i].position(), points[j].position());
            if (d > 0.0) found.emplace_back(d, j);
        }
        const std::size_t keep = std::min(k, found.size());
        std::partial_sort(found.begin(), found.begin() + static_cast<std::ptrdiff_t>(keep), found.end());
        for (std::size_t n = 0; n < keep; ++n) {
            const auto [d, j] = found[n];
            out[i].push_back({(points[j].position() - points[i].position()) / d, d / stride});
        }
    }
    return out;
}

}  // namespace obbgen
