#include "obbgen/assign.hpp"

#include <cmath>
#include <string>

#include "obbgen/error.hpp"

namespace obbgen {

std::vector<double> min_neighbor_distances(std::span<const PointAnnotation> points) {
    if (points.empty()) throw InvalidArgument("min_neighbor_distances needs at least one point");
    std::vector<double> out(points.size(), kNoNeighbor);
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (i == j) continue;
            out[i] = std::min(out[i], distance(points[i].position(), points[j].position()));
        }
    }
    return out;
}

std::vector<std::optional<NeighborLink>> nearest_same_class(std::span<const PointAnnotation> points) {
    std::vector<std::optional<NeighborLink>> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (i == j || points[i].class_id != points[j].class_id) continue;
            const double d = distance(points[i].position(), points[j].position());
            if (!out[i] || d < out[i]->distance) out[i] = NeighborLink{j, d, {}};
        }
        if (out[i]) {
            const Vec2 delta = points[out[i]->index].position() - points[i].position();
            out[i]->direction = out[i]->distance > 0.0 ? delta / out[i]->distance : Vec2{};
        }
    }
    return out;
}

void AssignParams::validate() const {
    if (!(b1 > 0.0)) throw InvalidArgument("b1 must be positive");
    if (!(b2 >= 0.0)) throw InvalidArgument("b2 must be non-negative");
    if (!(neg_radius_scale > 0.0)) throw InvalidArgument("neg_radius_scale must be positive");
    if (!(fallback_radius > 0.0)) throw InvalidArgument("fallback_radius must be positive");
}

TargetMap assign_labels(std::span<const PointAnnotation> points, int map_width, int map_height,
                        const AssignParams& params) {
    if (points.empty()) throw InvalidArgument("label assignment needs at least one annotation");
    if (map_width < 1 || map_height < 1) throw InvalidArgument("map dimensions must be at least 1");
    params.validate();
    for (const auto& p : points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw InvalidArgument("annotation is not finite");
        if (p.class_id < 0 || p.class_id >= TargetMap::kMaxClasses) {
            throw InvalidArgument("class id " + std::to_string(p.class_id) + " out of range");
        }
    }

    std::vector<double> neg_radius = min_neighbor_distances(points);
    for (double& r : neg_radius) {
        if (r == kNoNeighbor) r = params.fallback_radius;
        r *= params.neg_radius_scale;
    }

    std::vector<Vec2> midpoints;
    for (std::size_t i = 0; const auto& link : nearest_same_class(points)) {
        if (link) midpoints.push_back((points[i].position() + points[link->index].position()) / 2.0);
        ++i;
    }

    TargetMap map;
    map.width = map_width;
    map.height = map_height;
    const std::size_t cells = static_cast<std::size_t>(map_width) * static_cast<std::size_t>(map_height);
    map.labels.assign(cells, TargetMap::kIgnore);
    map.rules.assign(cells, AssignRule::kIgnore);

    for (int y = 0; y < map_height; ++y) {
        for (int x = 0; x < map_width; ++x) {
            const Vec2 cell{static_cast<double>(x), static_cast<double>(y)};
            const std::size_t at = static_cast<std::size_t>(y) * map_width + x;

            std::size_t nearest = 0;
            double nearest_d = kNoNeighbor;
            bool outside_all = true;
            for (std::size_t i = 0; i < points.size(); ++i) {
                const double d = distance(cell, points[i].position());
                if (d < nearest_d) {
                    nearest_d = d;
                    nearest = i;
                }
                if (!(d > neg_radius[i])) outside_all = false;
            }

            if (params.positive_enabled && nearest_d < params.b1) {
                map.labels[at] = static_cast<std::uint8_t>(points[nearest].class_id + 1);
                map.rules[at] = AssignRule::kPositive;
                continue;
            }
            if (params.middle_negative_enabled) {
                bool in_disc = false;
                for (const Vec2& m : midpoints) {
                    if (distance(cell, m) < params.b2) {
                        in_disc = true;
                        break;
                    }
                }
                if (in_disc) {
                    map.labels[at] = TargetMap::kNegative;
                    map.rules[at] = AssignRule::kMiddleNegative;
                    continue;
                }
            }
            if (params.distance_negative_enabled && outside_all) {
                map.labels[at] = TargetMap::kNegative;
                map.rules[at] = AssignRule::kDistanceNegative;
            }
        }
    }
    return map;
}

}  // namespace obbgen
