#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "obbgen/assign.hpp"
#include "obbgen/cpm.hpp"
#include "obbgen/geometry.hpp"

namespace obbgen {

struct WeightedOffset {
    Vec2 offset;
    double weight = 0.0;
};

/// Symmetric 2x2 matrix [[xx, xy], [xy, yy]].
struct Covariance2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;
};

/// Orthonormal principal directions with their variances, lambda1 >= lambda2.
/// v1 has v1.x > 0 (or v1.x == 0 and v1.y > 0); v2 is v1 turned +90 degrees.
/// `degenerate` marks an eigenvalue gap too small to trust the direction.
struct PrincipalAxes {
    Vec2 v1{1.0, 0.0};
    Vec2 v2{0.0, 1.0};
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    bool degenerate = false;
};

enum class SampleMode { kWeighted, kProbabilistic };

struct ExtractParams {
    int grid_size = 7;
    SampleMode sample_mode = SampleMode::kWeighted;
    double boundary_kappa = 0.2;
    double boundary_floor = 0.05;
    double step = 0.25;
    double max_extent = 256.0;
    double angle_threshold = std::numbers::pi / 6.0;
    bool constraint_enabled = true;
    // Same-class neighbors checked by the constraint, nearest first. 1 keeps
    // only the nearest; rows need both sides.
    int constraint_neighbors = 8;
    double degenerate_eps = 1e-6;
    double fallback_box = 8.0;

    void validate() const;
};

/// Grid offsets in [-k, k]^2 (k = (grid_size - 1) / 2, y-major order) with the
/// bilinear class probability at center + offset as weight.
std::vector<WeightedOffset> grid_weights(const CpmView& cpm, std::uint32_t class_id, Vec2 center,
                                         int grid_size);

/// Unnormalized weighted scatter about the weighted mean. Throws
/// EmptyNeighborhood when the total weight is not positive.
Covariance2 weighted_covariance(std::span<const WeightedOffset> samples);

/// Closed-form symmetric eigendecomposition.
PrincipalAxes principal_axes(const Covariance2& cov, double degenerate_eps = 1e-6);

PrincipalAxes weighted_pca(std::span<const WeightedOffset> samples, double degenerate_eps = 1e-6);

/// Keeps each offset with probability equal to its weight and returns the
/// unweighted scatter of the kept set. Draws again (up to 8 more times) while
/// fewer than two offsets survive, then throws EmptyNeighborhood.
Covariance2 sampled_covariance(std::span<const WeightedOffset> samples, std::mt19937_64& rng);

PrincipalAxes sampled_pca(std::span<const WeightedOffset> samples, std::uint64_t seed,
                          double degenerate_eps = 1e-6);

/// Distance walked from `anchor` along `direction` before the class
/// probability drops below max(kappa * core mean, floor). Grid units.
double trace_extent(const CpmView& cpm, std::uint32_t class_id, Vec2 anchor, Vec2 direction,
                    const ExtractParams& params);

/// Caps an extent so the boundary along `direction` stays on this side of the
/// perpendicular bisector toward a neighbor at distance d in direction u.
/// Applies only when the angle between u and direction is below the threshold.
double constrain_extent(double extent, Vec2 direction, Vec2 u, double d, double angle_threshold);

/// Neighbor used by the dense-scene constraint, in grid units.
struct NeighborConstraint {
    Vec2 u;
    double d = 0.0;
};

struct ExtractResult {
    OrientedBox box;  // image pixels
    bool fallback = false;
    bool degenerate = false;
};

/// Pseudo box for one annotation (image pixels). Every traced extent is capped
/// against each listed neighbor. Never throws for an empty neighborhood; emits
/// a fallback square and sets `fallback` instead.
ExtractResult extract_obb(const CpmView& cpm, const PointAnnotation& annotation,
                          std::span<const NeighborConstraint> neighbors, const ExtractParams& params,
                          std::uint64_t seed = 0);

ExtractResult extract_obb(const CpmView& cpm, const PointAnnotation& annotation,
                          const std::optional<NeighborConstraint>& neighbor, const ExtractParams& params,
                          std::uint64_t seed = 0);

/// Up to `count` nearest same-class neighbors of each annotation (ties by
/// index, coincident points skipped), in grid units of the given stride.
std::vector<std::vector<NeighborConstraint>> neighbor_constraints(std::span<const PointAnnotation> points,
                                                                  std::uint32_t stride, int count = 1);

}  // namespace obbgen
