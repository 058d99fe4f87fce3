#include "obbgen/pipeline.hpp"

#include <atomic>
#include <string>

#include "obbgen/error.hpp"
#include "obbgen/parallel.hpp"
#include "obbgen/seed.hpp"

namespace obbgen {

namespace {

std::vector<PointAnnotation> to_annotations(std::span<const double> points_xy, std::span<const std::int32_t> classes) {
    if (points_xy.size() != 2 * classes.size()) {
        throw InvalidArgument("points array holds " + std::to_string(points_xy.size()) + " values, expected " +
                              std::to_string(2 * classes.size()));
    }
    std::vector<PointAnnotation> out(classes.size());
    for (std::size_t i = 0; i < classes.size(); ++i) {
        out[i] = {points_xy[2 * i], points_xy[2 * i + 1], classes[i]};
        if (!std::isfinite(out[i].x) || !std::isfinite(out[i].y)) {
            throw InvalidArgument("point " + std::to_string(i) + " is not finite");
        }
    }
    return out;
}

}  // namespace

std::vector<OrientedBox> extract_image(const CpmView& cpm, std::span<const PointAnnotation> annotations,
                                       const ExtractParams& params, std::uint64_t run_seed, std::string_view stem,
                                       unsigned workers, ExtractStats* stats) {
    params.validate();
    const auto neighbors = neighbor_constraints(annotations, cpm.stride(), params.constraint_neighbors);
    std::vector<OrientedBox> boxes(annotations.size());
    std::atomic<std::size_t> fallback{0};
    std::atomic<std::size_t> degenerate{0};
    parallel_for(annotations.size(), workers, [&](std::size_t i) {
        const auto r = extract_obb(cpm, annotations[i], neighbors[i], params, derive_seed(run_seed, stem, i));
        boxes[i] = r.box;
        if (r.fallback) fallback.fetch_add(1, std::memory_order_relaxed);
        if (r.degenerate) degenerate.fetch_add(1, std::memory_order_relaxed);
    });
    if (stats) {
        stats->instances += annotations.size();
        stats->fallback += fallback.load();
        stats->degenerate += degenerate.load();
    }
    return boxes;
}

TargetMap assign_image(std::span<const PointAnnotation> annotations, std::uint32_t stride, int map_width,
                       int map_height, const AssignParams& params) {
    if (stride == 0) throw InvalidArgument("stride must be at least 1");
    std::vector<PointAnnotation> grid(annotations.begin(), annotations.end());
    for (auto& p : grid) {
        p.x /= stride;
        p.y /= stride;
    }
    return assign_labels(grid, map_width, map_height, params);
}

std::vector<double> extract_batch(const CpmView& cpm, std::span<const double> points_xy,
                                  std::span<const std::int32_t> classes, const ExtractParams& params,
                                  std::uint64_t run_seed, std::string_view stem) {
    const auto annotations = to_annotations(points_xy, classes);
    for (const auto& a : annotations) {
        if (a.class_id < 0 || static_cast<std::uint32_t>(a.class_id) >= cpm.n_class()) {
            throw InvalidArgument("class id " + std::to_string(a.class_id) + " out of range");
        }
    }
    cpm.validate_values();
    const auto boxes = extract_image(cpm, annotations, params, run_seed, stem);
    std::vector<double> out;
    out.reserve(5 * boxes.size());
    for (const auto& b : boxes) out.insert(out.end(), {b.cx, b.cy, b.w, b.h, b.angle});
    return out;
}

std::vector<std::uint8_t> assign_batch(std::span<const double> points_xy, std::span<const std::int32_t> classes,
                                       std::uint32_t stride, int map_height, int map_width,
                                       const AssignParams& params) {
    const auto annotations = to_annotations(points_xy, classes);
    return assign_image(annotations, stride, map_width, map_height, params).labels;
}

}  // namespace obbgen
