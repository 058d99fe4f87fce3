#include "obbgen/cpm.hpp"

#include <cmath>
#include <string>

#include "obbgen/error.hpp"

namespace obbgen {

CpmView::CpmView(std::span<const float> values, std::uint32_t n_class, std::uint32_t height,
                 std::uint32_t width, std::uint32_t stride)
    : values_(values), n_class_(n_class), height_(height), width_(width), stride_(stride) {
    if (stride == 0) throw InvalidArgument("CPM stride must be at least 1");
    const std::size_t expected = static_cast<std::size_t>(n_class) * height * width;
    if (values.size() != expected) {
        throw InvalidArgument("CPM buffer holds " + std::to_string(values.size()) + " values, shape needs " +
                              std::to_string(expected));
    }
}

float CpmView::at_or_zero(std::uint32_t cls, long y, long x) const {
    if (x < 0 || y < 0 || x >= static_cast<long>(width_) || y >= static_cast<long>(height_)) return 0.0f;
    return at(cls, static_cast<std::uint32_t>(y), static_cast<std::uint32_t>(x));
}

double CpmView::bilinear(std::uint32_t cls, Vec2 p) const {
    const double fx = std::floor(p.x);
    const double fy = std::floor(p.y);
    // Anything this far out cannot touch the map.
    if (fx < -1.0 || fy < -1.0 || fx > width_ || fy > height_) return 0.0;
    const long x0 = static_cast<long>(fx);
    const long y0 = static_cast<long>(fy);
    const double tx = p.x - fx;
    const double ty = p.y - fy;
    const double v00 = at_or_zero(cls, y0, x0);
    const double v01 = at_or_zero(cls, y0, x0 + 1);
    const double v10 = at_or_zero(cls, y0 + 1, x0);
    const double v11 = at_or_zero(cls, y0 + 1, x0 + 1);
    return (1.0 - ty) * ((1.0 - tx) * v00 + tx * v01) + ty * ((1.0 - tx) * v10 + tx * v11);
}

void CpmView::validate_values(double tol) const {
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const float v = values_[i];
        if (!std::isfinite(v) || v < -tol || v > 1.0 + tol) {
            throw InvalidArgument("CPM value " + std::to_string(v) + " at index " + std::to_string(i) +
                                  " is outside [0, 1]");
        }
    }
}

ClassProbabilityMap::ClassProbabilityMap(std::uint32_t n_class_, std::uint32_t height_, std::uint32_t width_,
                                         std::uint32_t stride_, float fill)
    : n_class(n_class_), height(height_), width(width_), stride(stride_),
      values(static_cast<std::size_t>(n_class_) * height_ * width_, fill) {
    if (stride_ == 0) throw InvalidArgument("CPM stride must be at least 1");
}

}  // namespace obbgen
