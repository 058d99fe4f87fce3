#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace obbgen {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr bool operator==(const Vec2&) const = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
/// Counter-clockwise quarter turn.
constexpr Vec2 perp(Vec2 v) { return {-v.y, v.x}; }

/// Rotated rectangle in image pixels. `w` is measured along the direction
/// given by `angle` (radians from the x-axis, counter-clockwise), `h` along
/// its perpendicular. No w >= h ordering is imposed.
struct OrientedBox {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;
    double angle = 0.0;

    Vec2 center() const { return {cx, cy}; }
    Vec2 axis_w() const { return {std::cos(angle), std::sin(angle)}; }
    Vec2 axis_h() const { return perp(axis_w()); }
    double area() const { return w * h; }

    bool operator==(const OrientedBox&) const = default;
};

/// Corners in counter-clockwise order; corner 0 is the box-frame corner
/// (+w/2, +h/2).
using Corners = std::array<Vec2, 4>;

/// Throws InvalidArgument when w or h is not positive or any field is not
/// finite.
void validate(const OrientedBox& box);

/// Maps theta into [-pi/2, pi/2) modulo pi.
double normalize_angle(double theta);

Corners obb_to_corners(const OrientedBox& box);

/// Rectangle fit to a quadrilateral: center is the vertex mean, the angle
/// follows the longer of the two mean edge directions, and the short side is
/// chosen so the fitted area matches the parallelogram area.
OrientedBox corners_to_obb(const Corners& corners);

/// Intersection-over-union of two rotated rectangles by Sutherland-Hodgman
/// clipping and the shoelace formula.
double rotated_iou(const OrientedBox& a, const OrientedBox& b);

/// Area of the intersection of two rotated rectangles.
double intersection_area(const OrientedBox& a, const OrientedBox& b);

/// True when p lies inside or on the boundary of the box.
bool contains(const OrientedBox& box, Vec2 p);

}  // namespace obbgen
