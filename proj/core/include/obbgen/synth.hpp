#pragma once

#include <cstdint>
#include <vector>

#include "obbgen/assign.hpp"
#include "obbgen/cpm.hpp"
#include "obbgen/geometry.hpp"

namespace obbgen {

struct Instance {
    OrientedBox box;
    int class_id = 0;

    bool operator==(const Instance&) const = default;
};

struct Scene {
    int image_width = 0;
    int image_height = 0;
    int n_class = 1;
    std::vector<Instance> instances;
    std::vector<PointAnnotation> annotations;  // box centers, index-aligned with instances

    bool operator==(const Scene&) const = default;
};

enum class DensityMode { kScattered, kParallelRows };

struct SceneParams {
    int image_width = 512;
    int image_height = 512;
    int min_instances = 4;
    int max_instances = 12;
    double min_aspect = 1.5;
    double max_aspect = 6.0;
    // Object scale sqrt(w * h) in image pixels.
    double min_size = 32.0;
    double max_size = 64.0;
    DensityMode density = DensityMode::kScattered;
    // Parallel rows: `rows` rows of `row_length` boxes sharing size, angle
    // and class. Boxes in a row stand side by side (w is the short side),
    // `row_gap` pixels apart edge to edge; rows are stacked along h with the
    // same gap.
    int rows = 2;
    int row_length = 5;
    double row_gap = 16.0;
    int n_class = 3;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Seeded scene of oriented boxes whose bounding rectangles lie inside the
/// image. Throws PlacementExhausted after 1000 failed attempts for one
/// placement.
Scene generate_scene(const SceneParams& params);

/// Probability map with one plane per class. A cell maps into each box frame
/// as (a, b), normalized so |a| = 1 on the w-edges and |b| = 1 on the
/// h-edges; its value is (1 - max(|a|, |b|))^gamma inside the box and 0
/// outside, max-composed over instances of the same class.
ClassProbabilityMap render_cpm(const Scene& scene, std::uint32_t stride, double gamma = 0.5);

/// Adds seeded Gaussian noise per cell, clamps, then applies a
/// (2r+1) x (2r+1) box blur averaged over in-map cells.
ClassProbabilityMap corrupt_cpm(const ClassProbabilityMap& cpm, double noise_sigma, int blur_radius,
                                std::uint64_t seed);

}  // namespace obbgen
