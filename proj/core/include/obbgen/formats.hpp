#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "obbgen/assign.hpp"
#include "obbgen/cpm.hpp"
#include "obbgen/geometry.hpp"

namespace obbgen {

// ---------------------------------------------------------------------------
// DOTA annotation text
// ---------------------------------------------------------------------------

struct DotaInstance {
    Corners corners;
    std::string category;
    int difficulty = 0;

    bool operator==(const DotaInstance&) const = default;
};

/// Skips blank lines and `imagesource:` / `gsd:` headers. Every other line
/// must be 8 numbers, a category token and a 0/1 difficulty.
std::vector<DotaInstance> parse_dota(std::string_view text);

/// One record per line, numbers with up to 6 significant digits.
std::string write_dota(std::span<const DotaInstance> instances);

// ---------------------------------------------------------------------------
// Class table
// ---------------------------------------------------------------------------

class ClassTable {
public:
    ClassTable() = default;
    explicit ClassTable(std::vector<std::string> names);

    /// One category name per line; blank lines are skipped.
    static ClassTable parse(std::string_view text);
    std::string serialize() const;

    /// The DOTA-v1.0 categories followed by `classN` names past the 15th.
    static ClassTable dota_default(int n_class);

    int id(std::string_view name) const;
    const std::string& name(int id) const;
    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, int> ids_;
};

/// Vertex centroid of each instance with its class id.
std::vector<PointAnnotation> derive_points(std::span<const DotaInstance> instances, const ClassTable& table);

// ---------------------------------------------------------------------------
// Points file: one `x y category` record per line
// ---------------------------------------------------------------------------

std::vector<PointAnnotation> parse_points(std::string_view text, const ClassTable& table);
std::string write_points(std::span<const PointAnnotation> points, const ClassTable& table);

// ---------------------------------------------------------------------------
// Binary CPM container
//
//   "CPM1" | u32 n_class | u32 height | u32 width | u32 stride | payload
//
// little-endian; the CPM payload is f32 x n_class*height*width, class-major
// then row-major. Target maps reuse the header with a u8 x height*width
// payload.
// ---------------------------------------------------------------------------

inline constexpr std::size_t kCpmHeaderSize = 20;

std::vector<std::uint8_t> write_cpm(const ClassProbabilityMap& cpm);
ClassProbabilityMap read_cpm(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> write_target_map(const TargetMap& map, std::uint32_t n_class, std::uint32_t stride);

struct TargetMapFile {
    std::uint32_t n_class = 0;
    std::uint32_t stride = 1;
    TargetMap map;  // rules are not stored; left empty
};
TargetMapFile read_target_map(std::span<const std::uint8_t> bytes);

// ---------------------------------------------------------------------------
// Conversions
// ---------------------------------------------------------------------------

DotaInstance to_dota(const OrientedBox& box, const std::string& category, int difficulty = 0);

}  // namespace obbgen
