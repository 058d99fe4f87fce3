#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "obbgen/geometry.hpp"

namespace obbgen {

/// Non-owning, read-only view of a class probability map. Values are
/// class-major then row-major. Cell (x, y) corresponds to image point
/// (x * stride, y * stride).
class CpmView {
public:
    CpmView() = default;
    CpmView(std::span<const float> values, std::uint32_t n_class, std::uint32_t height, std::uint32_t width,
            std::uint32_t stride);

    std::uint32_t n_class() const { return n_class_; }
    std::uint32_t height() const { return height_; }
    std::uint32_t width() const { return width_; }
    std::uint32_t stride() const { return stride_; }
    std::span<const float> values() const { return values_; }

    float at(std::uint32_t cls, std::uint32_t y, std::uint32_t x) const {
        return values_[(static_cast<std::size_t>(cls) * height_ + y) * width_ + x];
    }
    /// Cell value, 0 for cells outside the map.
    float at_or_zero(std::uint32_t cls, long y, long x) const;
    /// Bilinear sample at continuous grid coordinates; off-map corners read 0.
    double bilinear(std::uint32_t cls, Vec2 p) const;

    /// Throws InvalidArgument if any value is outside [0, 1] by more than tol
    /// or is not finite.
    void validate_values(double tol = 1e-6) const;

private:
    std::span<const float> values_;
    std::uint32_t n_class_ = 0;
    std::uint32_t height_ = 0;
    std::uint32_t width_ = 0;
    std::uint32_t stride_ = 1;
};

/// Owning class probability map.
struct ClassProbabilityMap {
    std::uint32_t n_class = 0;
    std::uint32_t height = 0;
    std::uint32_t width = 0;
    std::uint32_t stride = 1;
    std::vector<float> values;

    ClassProbabilityMap() = default;
    ClassProbabilityMap(std::uint32_t n_class, std::uint32_t height, std::uint32_t width, std::uint32_t stride,
                        float fill = 0.0f);

    float& at(std::uint32_t cls, std::uint32_t y, std::uint32_t x) {
        return values[(static_cast<std::size_t>(cls) * height + y) * width + x];
    }
    float at(std::uint32_t cls, std::uint32_t y, std::uint32_t x) const {
        return values[(static_cast<std::size_t>(cls) * height + y) * width + x];
    }
    CpmView view() const { return CpmView(values, n_class, height, width, stride); }

    bool operator==(const ClassProbabilityMap&) const = default;
};

}  // namespace obbgen
