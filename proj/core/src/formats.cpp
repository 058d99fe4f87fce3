#include "obbgen/formats.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "obbgen/error.hpp"
#include "obbgen/text.hpp"

namespace obbgen {

namespace {

constexpr std::array<char, 4> kMagic{'C', 'P', 'M', '1'};

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

double parse_coordinate(std::string_view token, std::size_t line, const char* what) {
    const auto v = parse_double(token);
    if (!v) throw ParseError(line, std::string("invalid ") + what + " '" + std::string(token) + "'");
    if (!std::isfinite(*v)) throw ParseError(line, std::string(what) + " is not finite");
    return *v;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[at + i]) << (8 * i);
    return v;
}

struct Header {
    std::uint32_t n_class;
    std::uint32_t height;
    std::uint32_t width;
    std::uint32_t stride;
};

void put_header(std::vector<std::uint8_t>& out, const Header& h) {
    out.insert(out.end(), kMagic.begin(), kMagic.end());
    put_u32(out, h.n_class);
    put_u32(out, h.height);
    put_u32(out, h.width);
    put_u32(out, h.stride);
}

// `per_class` selects a payload of n_class planes (CPM) or a single plane
// (target map).
Header get_header(std::span<const std::uint8_t> bytes, std::size_t element_size, bool per_class) {
    if (bytes.size() < kCpmHeaderSize) throw FormatError(bytes.size(), "truncated header");
    if (std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) throw FormatError(0, "bad magic");
    const Header h{get_u32(bytes, 4), get_u32(bytes, 8), get_u32(bytes, 12), get_u32(bytes, 16)};
    if (h.stride == 0) throw FormatError(16, "stride must be at least 1");
    // Multiply with an overflow guard: the dimensions come from untrusted bytes.
    const std::size_t room = (bytes.size() - kCpmHeaderSize) / element_size;
    std::size_t cells = per_class ? h.n_class : 1;
    for (const std::uint32_t dim : {h.height, h.width}) {
        if (dim != 0 && cells > room / dim + 1) throw FormatError(bytes.size(), "truncated payload");
        cells *= dim;
    }
    const std::size_t expected = kCpmHeaderSize + cells * element_size;
    if (bytes.size() < expected) throw FormatError(bytes.size(), "truncated payload");
    if (bytes.size() > expected) throw FormatError(expected, "trailing bytes after payload");
    return h;
}

}  // namespace

std::vector<DotaInstance> parse_dota(std::string_view text) {
    std::vector<DotaInstance> out;
    std::size_t line_no = 0;
    for (const std::string_view raw : split_lines(text)) {
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty() || starts_with(line, "imagesource:") || starts_with(line, "gsd:")) continue;
        const auto fields = split_whitespace(line);
        if (fields.size() != 10) {
            throw ParseError(line_no, "expected 10 fields, found " + std::to_string(fields.size()));
        }
        DotaInstance inst;
        for (std::size_t k = 0; k < 4; ++k) {
            inst.corners[k] = {parse_coordinate(fields[2 * k], line_no, "coordinate"),
                               parse_coordinate(fields[2 * k + 1], line_no, "coordinate")};
        }
        inst.category = std::string(fields[8]);
        const auto diff = parse_int<int>(fields[9]);
        if (!diff || (*diff != 0 && *diff != 1)) {
            throw ParseError(line_no, "difficulty must be 0 or 1, found '" + std::string(fields[9]) + "'");
        }
        inst.difficulty = *diff;
        out.push_back(std::move(inst));
    }
    return out;
}

std::string write_dota(std::span<const DotaInstance> instances) {
    std::string out;
    for (const auto& inst : instances) {
        if (inst.category.empty() || inst.category.find_first_of(" \t\r\n") != std::string::npos) {
            throw InvalidArgument("category '" + inst.category + "' is empty or contains whitespace");
        }
        if (inst.difficulty != 0 && inst.difficulty != 1) throw InvalidArgument("difficulty must be 0 or 1");
        for (const Vec2& c : inst.corners) {
            out += format_double(c.x);
            out += ' ';
            out += format_double(c.y);
            out += ' ';
        }
        out += inst.category;
        out += ' ';
        out += std::to_string(inst.difficulty);
        out += '\n';
    }
    return out;
}

ClassTable::ClassTable(std::vector<std::string> names) : names_(std::move(names)) {
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i].empty() || names_[i].find_first_of(" \t\r\n") != std::string::npos) {
            throw InvalidArgument("class name '" + names_[i] + "' is empty or contains whitespace");
        }
        if (!ids_.emplace(names_[i], static_cast<int>(i)).second) {
            throw InvalidArgument("duplicate class name '" + names_[i] + "'");
        }
    }
}

ClassTable ClassTable::parse(std::string_view text) {
    std::vector<std::string> names;
    std::size_t line_no = 0;
    for (const auto raw : split_lines(text)) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty()) continue;
        if (line.find_first_of(" \t") != std::string_view::npos) {
            throw ParseError(line_no, "class name contains whitespace");
        }
        names.emplace_back(line);
    }
    try {
        return ClassTable(std::move(names));
    } catch (const InvalidArgument& e) {
        throw ParseError(line_no, e.what());
    }
}

std::string ClassTable::serialize() const {
    std::string out;
    for (const auto& n : names_) out += n + '\n';
    return out;
}

ClassTable ClassTable::dota_default(int n_class) {
    static const std::array<const char*, 15> kDota{
        "plane",       "baseball-diamond", "bridge",       "ground-track-field", "small-vehicle",
        "large-vehicle", "ship",           "tennis-court", "basketball-court",   "storage-tank",
        "soccer-ball-field", "roundabout", "harbor",       "swimming-pool",      "helicopter"};
    std::vector<std::string> names;
    for (int i = 0; i < n_class; ++i) {
        names.push_back(static_cast<std::size_t>(i) < kDota.size() ? kDota[i] : "class" + std::to_string(i));
    }
    return ClassTable(std::move(names));
}

int ClassTable::id(std::string_view name) const {
    const auto it = ids_.find(std::string(name));
    if (it == ids_.end()) throw LookupError("unknown category '" + std::string(name) + "'");
    return it->second;
}

const std::string& ClassTable::name(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= names_.size()) {
        throw LookupError("class id " + std::to_string(id) + " not in table");
    }
    return names_[static_cast<std::size_t>(id)];
}

std::vector<PointAnnotation> derive_points(std::span<const DotaInstance> instances, const ClassTable& table) {
    std::vector<PointAnnotation> out;
    out.reserve(instances.size());
    for (const auto& inst : instances) {
        const auto& c = inst.corners;
        const Vec2 centroid = (c[0] + c[1] + c[2] + c[3]) / 4.0;
        out.push_back({centroid.x, centroid.y, table.id(inst.category)});
    }
    return out;
}

std::vector<PointAnnotation> parse_points(std::string_view text, const ClassTable& table) {
    std::vector<PointAnnotation> out;
    std::size_t line_no = 0;
    for (const auto raw : split_lines(text)) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty()) continue;
        const auto fields = split_whitespace(line);
        if (fields.size() != 3) throw ParseError(line_no, "expected 'x y category', found " +
                                                              std::to_string(fields.size()) + " fields");
        PointAnnotation p;
        p.x = parse_coordinate(fields[0], line_no, "x");
        p.y = parse_coordinate(fields[1], line_no, "y");
        try {
            p.class_id = table.id(fields[2]);
        } catch (const LookupError& e) {
            throw ParseError(line_no, e.what());
        }
        out.push_back(p);
    }
    return out;
}

std::string write_points(std::span<const PointAnnotation> points, const ClassTable& table) {
    std::string out;
    for (const auto& p : points) {
        out += format_exact(p.x) + ' ' + format_exact(p.y) + ' ' + table.name(p.class_id) + '\n';
    }
    return out;
}

std::vector<std::uint8_t> write_cpm(const ClassProbabilityMap& cpm) {
    std::vector<std::uint8_t> out;
    out.reserve(kCpmHeaderSize + 4 * cpm.values.size());
    put_header(out, {cpm.n_class, cpm.height, cpm.width, cpm.stride});
    for (const float v : cpm.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
    return out;
}

ClassProbabilityMap read_cpm(std::span<const std::uint8_t> bytes) {
    const Header h = get_header(bytes, 4, true);
    ClassProbabilityMap cpm(h.n_class, h.height, h.width, h.stride);
    for (std::size_t i = 0; i < cpm.values.size(); ++i) {
        const std::size_t at = kCpmHeaderSize + 4 * i;
        const float v = std::bit_cast<float>(get_u32(bytes, at));
        if (!std::isfinite(v) || v < -1e-6f || v > 1.0f + 1e-6f) {
            throw FormatError(at, "probability " + std::to_string(v) + " outside [0, 1]");
        }
        cpm.values[i] = v;
    }
    return cpm;
}

std::vector<std::uint8_t> write_target_map(const TargetMap& map, std::uint32_t n_class, std::uint32_t stride) {
    std::vector<std::uint8_t> out;
    out.reserve(kCpmHeaderSize + map.labels.size());
    put_header(out, {n_class, static_cast<std::uint32_t>(map.height), static_cast<std::uint32_t>(map.width), stride});
    out.insert(out.end(), map.labels.begin(), map.labels.end());
    return out;
}

TargetMapFile read_target_map(std::span<const std::uint8_t> bytes) {
    const Header h = get_header(bytes, 1, false);

    TargetMapFile file;
    file.n_class = h.n_class;
    file.stride = h.stride;
    file.map.width = static_cast<int>(h.width);
    file.map.height = static_cast<int>(h.height);
    file.map.labels.assign(bytes.begin() + kCpmHeaderSize, bytes.end());
    for (std::size_t i = 0; i < file.map.labels.size(); ++i) {
        const auto v = file.map.labels[i];
        if (v != TargetMap::kNegative && v != TargetMap::kIgnore && v > h.n_class) {
            throw FormatError(kCpmHeaderSize + i, "label " + std::to_string(v) + " exceeds class count");
        }
    }
    return file;
}

DotaInstance to_dota(const OrientedBox& box, const std::string& category, int difficulty) {
    return DotaInstance{obb_to_corners(box), category, difficulty};
}

}  // namespace obbgen
