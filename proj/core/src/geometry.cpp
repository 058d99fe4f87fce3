#include "obbgen/geometry.hpp"

#include <algorithm>
#include <tuple>
#include <vector>

#include "obbgen/error.hpp"

namespace obbgen {

namespace {

constexpr double kPi = std::numbers::pi;

// Sutherland-Hodgman pass against the half-plane left of edge p->q.
void clip_half_plane(const std::vector<Vec2>& in, Vec2 p, Vec2 q, std::vector<Vec2>& out) {
    out.clear();
    if (in.empty()) return;
    const Vec2 edge = q - p;
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 s = in[i];
        const Vec2 e = in[(i + 1) % n];
        const double ds = cross(edge, s - p);
        const double de = cross(edge, e - p);
        const bool s_in = ds >= 0.0;
        const bool e_in = de >= 0.0;
        if (s_in) out.push_back(s);
        if (s_in != e_in) {
            const double t = ds / (ds - de);
            out.push_back(s + (e - s) * t);
        }
    }
}

double shoelace(const std::vector<Vec2>& poly) {
    double twice = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) twice += cross(poly[i], poly[(i + 1) % n]);
    return 0.5 * twice;
}

bool lex_less(const OrientedBox& a, const OrientedBox& b) {
    return std::tie(a.cx, a.cy, a.w, a.h, a.angle) < std::tie(b.cx, b.cy, b.w, b.h, b.angle);
}

}  // namespace

void validate(const OrientedBox& box) {
    const bool finite = std::isfinite(box.cx) && std::isfinite(box.cy) && std::isfinite(box.w) &&
                        std::isfinite(box.h) && std::isfinite(box.angle);
    if (!finite) throw InvalidArgument("oriented box has a non-finite field");
    if (!(box.w > 0.0) || !(box.h > 0.0)) throw InvalidArgument("oriented box sides must be positive");
}

double normalize_angle(double theta) {
    if (!std::isfinite(theta)) throw InvalidArgument("angle must be finite");
    double r = std::fmod(theta + kPi / 2.0, kPi);
    if (r < 0.0) r += kPi;
    r -= kPi / 2.0;
    // fmod rounding can land exactly on the open end.
    if (r >= kPi / 2.0) r -= kPi;
    return r;
}

Corners obb_to_corners(const OrientedBox& box) {
    const Vec2 c = box.center();
    const Vec2 u = box.axis_w() * (box.w / 2.0);
    const Vec2 v = box.axis_h() * (box.h / 2.0);
    return {c + u + v, c - u + v, c - u - v, c + u - v};
}

OrientedBox corners_to_obb(const Corners& c) {
    for (const Vec2& p : c) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw InvalidArgument("corner is not finite");
    }
    const Vec2 center = (c[0] + c[1] + c[2] + c[3]) / 4.0;
    const Vec2 along_w = ((c[0] - c[1]) + (c[3] - c[2])) / 2.0;
    const Vec2 along_h = ((c[0] - c[3]) + (c[1] - c[2])) / 2.0;
    const double len_w = norm(along_w);
    const double len_h = norm(along_h);
    const double area = std::abs(cross(along_w, along_h));
    if (!(area > 1e-12 * (len_w * len_w + len_h * len_h))) {
        throw DegenerateGeometry("quadrilateral has zero area");
    }
    const bool w_longer = len_w >= len_h;
    const Vec2 major = w_longer ? along_w : along_h;
    const double major_len = w_longer ? len_w : len_h;
    return OrientedBox{center.x, center.y, major_len, area / major_len,
                       normalize_angle(std::atan2(major.y, major.x))};
}

double intersection_area(const OrientedBox& a_in, const OrientedBox& b_in) {
    validate(a_in);
    validate(b_in);
    // Canonical argument order makes the result exactly symmetric.
    const bool swap = lex_less(b_in, a_in);
    OrientedBox a = swap ? b_in : a_in;
    OrientedBox b = swap ? a_in : b_in;
    // Work relative to the midpoint of the centers for conditioning.
    const double ox = (a.cx + b.cx) / 2.0;
    const double oy = (a.cy + b.cy) / 2.0;
    a.cx -= ox;
    a.cy -= oy;
    b.cx -= ox;
    b.cy -= oy;

    const Corners ca = obb_to_corners(a);
    const Corners cb = obb_to_corners(b);
    std::vector<Vec2> poly(ca.begin(), ca.end());
    std::vector<Vec2> scratch;
    poly.reserve(8);
    scratch.reserve(8);
    for (std::size_t i = 0; i < 4 && !poly.empty(); ++i) {
        clip_half_plane(poly, cb[i], cb[(i + 1) % 4], scratch);
        poly.swap(scratch);
    }
    if (poly.size() < 3) return 0.0;
    const double min_area = std::min(a.area(), b.area());
    const double inter = shoelace(poly);
    if (!(inter > 1e-12 * min_area)) return 0.0;
    return std::min(inter, min_area);
}

double rotated_iou(const OrientedBox& a, const OrientedBox& b) {
    const double inter = intersection_area(a, b);
    if (inter <= 0.0) return 0.0;
    const double uni = a.area() + b.area() - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

bool contains(const OrientedBox& box, Vec2 p) {
    const Vec2 d = p - box.center();
    const double along_w = dot(d, box.axis_w());
    const double along_h = dot(d, box.axis_h());
    return std::abs(along_w) <= box.w / 2.0 && std::abs(along_h) <= box.h / 2.0;
}

}  // namespace obbgen
