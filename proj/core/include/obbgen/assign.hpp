#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "obbgen/geometry.hpp"

namespace obbgen {

/// One supervision point with its category.
struct PointAnnotation {
    double x = 0.0;
    double y = 0.0;
    int class_id = 0;

    Vec2 position() const { return {x, y}; }
    bool operator==(const PointAnnotation&) const = default;
};

/// Returned by min_neighbor_distances for a point that has no neighbor.
inline constexpr double kNoNeighbor = std::numeric_limits<double>::infinity();

/// Distance from each point to its closest other point, class-agnostic.
/// A lone point gets kNoNeighbor.
std::vector<double> min_neighbor_distances(std::span<const PointAnnotation> points);

struct NeighborLink {
    std::size_t index = 0;
    double distance = 0.0;
    Vec2 direction;  // unit vector from the point toward the neighbor

    bool operator==(const NeighborLink&) const = default;
};

/// Nearest same-class neighbor of each point; ties go to the lower index.
/// Coincident pairs get direction (0, 0).
std::vector<std::optional<NeighborLink>> nearest_same_class(std::span<const PointAnnotation> points);

struct AssignParams {
    double b1 = 6.0;
    double neg_radius_scale = 1.0;
    double b2 = 4.0;
    double fallback_radius = 64.0;
    // Rule toggles for assignment ablations.
    bool positive_enabled = true;
    bool distance_negative_enabled = true;
    bool middle_negative_enabled = true;

    void validate() const;
};

/// Which rule decided a cell.
enum class AssignRule : std::uint8_t {
    kPositive,
    kMiddleNegative,
    kDistanceNegative,
    kIgnore,
};

/// Per-cell training targets on the CPM grid. Cell encoding is the
/// serialized byte: 0 negative, 255 ignore, class_id + 1 positive.
struct TargetMap {
    static constexpr std::uint8_t kNegative = 0;
    static constexpr std::uint8_t kIgnore = 255;
    static constexpr int kMaxClasses = 254;

    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> labels;
    std::vector<AssignRule> rules;

    std::uint8_t label(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
    AssignRule rule(int x, int y) const { return rules[static_cast<std::size_t>(y) * width + x]; }
    bool is_positive(int x, int y) const {
        const auto l = label(x, y);
        return l != kNegative && l != kIgnore;
    }
    /// Class of a positive cell; -1 otherwise.
    int positive_class(int x, int y) const { return is_positive(x, y) ? label(x, y) - 1 : -1; }
};

/// Assigns every cell of a width x height grid. Points are in grid units and
/// cell (x, y) is the point sample at integer coordinates (x, y).
///
/// Precedence: positive (nearest annotation closer than b1) over
/// middle-negative (inside the b2 disc at the midpoint of a same-class
/// nearest-neighbor pair) over distance-negative (farther than
/// neg_radius_scale * dist_i from every annotation i) over ignore.
TargetMap assign_labels(std::span<const PointAnnotation> points, int map_width, int map_height,
                        const AssignParams& params);

}  // namespace obbgen
