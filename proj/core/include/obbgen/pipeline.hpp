#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "obbgen/assign.hpp"
#include "obbgen/cpm.hpp"
#include "obbgen/extract.hpp"

namespace obbgen {

struct ExtractStats {
    std::size_t instances = 0;
    std::size_t fallback = 0;
    std::size_t degenerate = 0;
};

/// One pseudo box per annotation (image pixels), in annotation order.
/// Probabilistic sampling seeds each instance with
/// derive_seed(run_seed, stem, index), so results do not depend on `workers`.
std::vector<OrientedBox> extract_image(const CpmView& cpm, std::span<const PointAnnotation> annotations,
                                       const ExtractParams& params, std::uint64_t run_seed, std::string_view stem,
                                       unsigned workers = 1, ExtractStats* stats = nullptr);

/// Label assignment for annotations given in image pixels; they are divided
/// by `stride` onto the grid first.
TargetMap assign_image(std::span<const PointAnnotation> annotations, std::uint32_t stride, int map_width,
                       int map_height, const AssignParams& params);

// Flat-array entry points for foreign callers. Points are N x 2 row-major
// (x, y) in image pixels; classes has N entries.

/// N x 5 row-major (cx, cy, w, h, angle). Validates shapes, class ids and CPM
/// values before touching the buffer.
std::vector<double> extract_batch(const CpmView& cpm, std::span<const double> points_xy,
                                  std::span<const std::int32_t> classes, const ExtractParams& params,
                                  std::uint64_t run_seed = 0, std::string_view stem = {});

/// height x width labels encoded 0 / 255 / class + 1.
std::vector<std::uint8_t> assign_batch(std::span<const double> points_xy, std::span<const std::int32_t> classes,
                                       std::uint32_t stride, int map_height, int map_width,
                                       const AssignParams& params);

}  // namespace obbgen
