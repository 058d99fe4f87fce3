#include "obbgen/config.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <map>

#include "obbgen/error.hpp"
#include "obbgen/seed.hpp"
#include "obbgen/text.hpp"

namespace obbgen {

namespace {

struct Field {
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

double to_double(std::string_view key, std::string_view v) {
    const auto d = parse_double(v);
    if (!d || !std::isfinite(*d)) throw ConfigError(std::string(key), "expected a number, got '" + std::string(v) + "'");
    return *d;
}

template <typename Int>
Int to_int(std::string_view key, std::string_view v) {
    const auto i = parse_int<Int>(v);
    if (!i) throw ConfigError(std::string(key), "expected an integer, got '" + std::string(v) + "'");
    return *i;
}

bool to_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "off" || v == "0" || v == "no") return false;
    throw ConfigError(std::string(key), "expected on/off, got '" + std::string(v) + "'");
}

std::string from_bool(bool b) { return b ? "on" : "off"; }

// Ordered registry; order defines to_config_text output.
const std::vector<std::pair<std::string, Field>>& registry() {
    static const auto fields = [] {
        std::vector<std::pair<std::string, Field>> f;
        auto real = [&f](const char* key, auto member) {
            f.push_back({key,
                         {[key, member](RunConfig& c, std::string_view v) { member(c) = to_double(key, v); },
                          [member](const RunConfig& c) { return format_exact(member(c)); }}});
        };
        auto integer = [&f](const char* key, auto member) {
            using T = std::remove_reference_t<decltype(member(std::declval<RunConfig&>()))>;
            f.push_back({key,
                         {[key, member](RunConfig& c, std::string_view v) { member(c) = to_int<T>(key, v); },
                          [member](const RunConfig& c) { return std::to_string(member(c)); }}});
        };
        auto flag = [&f](const char* key, auto member) {
            f.push_back({key,
                         {[key, member](RunConfig& c, std::string_view v) { member(c) = to_bool(key, v); },
                          [member](const RunConfig& c) { return from_bool(member(c)); }}});
        };
        auto text = [&f](const char* key, auto member) {
            f.push_back({key,
                         {[member](RunConfig& c, std::string_view v) { member(c) = std::string(v); },
                          [member](const RunConfig& c) { return member(c); }}});
        };

        // label assignment
        real("b1", [](auto& c) -> auto& { return c.assign.b1; });
        real("neg_radius_scale", [](auto& c) -> auto& { return c.assign.neg_radius_scale; });
        real("b2", [](auto& c) -> auto& { return c.assign.b2; });
        real("fallback_radius", [](auto& c) -> auto& { return c.assign.fallback_radius; });
        flag("assign_positive", [](auto& c) -> auto& { return c.assign.positive_enabled; });
        flag("assign_negative", [](auto& c) -> auto& { return c.assign.distance_negative_enabled; });
        flag("assign_middle_negative", [](auto& c) -> auto& { return c.assign.middle_negative_enabled; });

        // extraction
        integer("grid_size", [](auto& c) -> auto& { return c.extract.grid_size; });
        f.push_back({"sample_mode",
                     {[](RunConfig& c, std::string_view v) {
                          if (v == "weighted") {
                              c.extract.sample_mode = SampleMode::kWeighted;
                          } else if (v == "probabilistic") {
                              c.extract.sample_mode = SampleMode::kProbabilistic;
                          } else {
                              throw ConfigError("sample_mode", "expected weighted|probabilistic, got '" +
                                                                   std::string(v) + "'");
                          }
                      },
                      [](const RunConfig& c) -> std::string {
                          return c.extract.sample_mode == SampleMode::kWeighted ? "weighted" : "probabilistic";
                      }}});
        real("boundary_kappa", [](auto& c) -> auto& { return c.extract.boundary_kappa; });
        real("boundary_floor", [](auto& c) -> auto& { return c.extract.boundary_floor; });
        real("step", [](auto& c) -> auto& { return c.extract.step; });
        real("max_extent", [](auto& c) -> auto& { return c.extract.max_extent; });
        real("angle_threshold", [](auto& c) -> auto& { return c.extract.angle_threshold; });
        flag("constraint", [](auto& c) -> auto& { return c.extract.constraint_enabled; });
        integer("constraint_neighbors", [](auto& c) -> auto& { return c.extract.constraint_neighbors; });
        real("degenerate_eps", [](auto& c) -> auto& { return c.extract.degenerate_eps; });
        real("fallback_box", [](auto& c) -> auto& { return c.extract.fallback_box; });

        // scene synthesis
        integer("image_width", [](auto& c) -> auto& { return c.scene.image_width; });
        integer("image_height", [](auto& c) -> auto& { return c.scene.image_height; });
        integer("min_instances", [](auto& c) -> auto& { return c.scene.min_instances; });
        integer("max_instances", [](auto& c) -> auto& { return c.scene.max_instances; });
        real("min_aspect", [](auto& c) -> auto& { return c.scene.min_aspect; });
        real("max_aspect", [](auto& c) -> auto& { return c.scene.max_aspect; });
        real("min_size", [](auto& c) -> auto& { return c.scene.min_size; });
        real("max_size", [](auto& c) -> auto& { return c.scene.max_size; });
        f.push_back({"density",
                     {[](RunConfig& c, std::string_view v) {
                          if (v == "scattered") {
                              c.scene.density = DensityMode::kScattered;
                          } else if (v == "parallel-rows") {
                              c.scene.density = DensityMode::kParallelRows;
                          } else {
                              throw ConfigError("density", "expected scattered|parallel-rows, got '" +
                                                               std::string(v) + "'");
                          }
                      },
                      [](const RunConfig& c) -> std::string {
                          return c.scene.density == DensityMode::kScattered ? "scattered" : "parallel-rows";
                      }}});
        integer("rows", [](auto& c) -> auto& { return c.scene.rows; });
        integer("row_length", [](auto& c) -> auto& { return c.scene.row_length; });
        real("row_gap", [](auto& c) -> auto& { return c.scene.row_gap; });
        integer("n_class", [](auto& c) -> auto& { return c.scene.n_class; });

        // rendering, corruption and run control
        integer("stride", [](auto& c) -> auto& { return c.stride; });
        real("gamma", [](auto& c) -> auto& { return c.gamma; });
        real("noise_sigma", [](auto& c) -> auto& { return c.noise_sigma; });
        integer("blur_radius", [](auto& c) -> auto& { return c.blur_radius; });
        integer("scene_count", [](auto& c) -> auto& { return c.scene_count; });
        real("point_sigma", [](auto& c) -> auto& { return c.point_sigma; });
        integer("seed", [](auto& c) -> auto& { return c.seed; });
        integer("bench_instances", [](auto& c) -> auto& { return c.bench_instances; });
        integer("bench_map_cells", [](auto& c) -> auto& { return c.bench_map_cells; });

        // paths
        text("cpm_dir", [](auto& c) -> auto& { return c.cpm_dir; });
        text("points_dir", [](auto& c) -> auto& { return c.points_dir; });
        text("gt_dir", [](auto& c) -> auto& { return c.gt_dir; });
        text("classes_file", [](auto& c) -> auto& { return c.classes_file; });
        text("out_dir", [](auto& c) -> auto& { return c.out_dir; });
        return f;
    }();
    return fields;
}

const Field* find_field(std::string_view key) {
    for (const auto& [name, field] : registry()) {
        if (name == key) return &field;
    }
    return nullptr;
}

void check(bool ok, const char* key, const std::string& reason) {
    if (!ok) throw ConfigError(key, reason);
}

}  // namespace

void RunConfig::validate() const {
    check(scene.max_instances >= 1, "max_instances", "at least one instance must be requested");
    check(scene.min_instances >= 1 && scene.min_instances <= scene.max_instances, "min_instances",
          "must be in [1, max_instances]");
    check(scene.rows >= 1, "rows", "must be at least 1");
    check(scene.row_length >= 1, "row_length", "must be at least 1");
    check(stride >= 1, "stride", "must be at least 1");
    check(gamma > 0.0, "gamma", "must be positive");
    check(noise_sigma >= 0.0, "noise_sigma", "must be non-negative");
    check(blur_radius >= 0, "blur_radius", "must be non-negative");
    check(scene_count >= 1, "scene_count", "must be at least 1");
    check(point_sigma >= 0.0, "point_sigma", "must be non-negative");
    check(bench_instances >= 1, "bench_instances", "must be at least 1");
    check(bench_map_cells >= 1, "bench_map_cells", "must be at least 1");
    check(extract.grid_size >= 3 && extract.grid_size % 2 == 1, "grid_size", "must be odd and at least 3");
    check(extract.boundary_kappa > 0.0 && extract.boundary_kappa <= 1.0, "boundary_kappa", "must be in (0, 1]");
    check(extract.step > 0.0, "step", "must be positive");
    check(extract.angle_threshold > 0.0 && extract.angle_threshold < std::numbers::pi / 2.0, "angle_threshold",
          "must be in (0, pi/2)");
    check(assign.b1 > 0.0, "b1", "must be positive");
    check(assign.b2 >= 0.0, "b2", "must be non-negative");
    check(assign.neg_radius_scale > 0.0, "neg_radius_scale", "must be positive");
    check(assign.fallback_radius > 0.0, "fallback_radius", "must be positive");
    try {
        assign.validate();
        extract.validate();
        scene.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError("(resolved)", e.what());
    }
}

void set_config_value(RunConfig& config, std::string_view key, std::string_view value) {
    const Field* field = find_field(key);
    if (!field) throw ConfigError(std::string(key), "unknown key");
    field->set(config, value);
}

RunConfig load_config(std::string_view text) {
    RunConfig config;
    std::map<std::string, std::size_t, std::less<>> seen;
    std::size_t line_no = 0;
    for (const auto raw : split_lines(text)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(std::string(line), "line " + std::to_string(line_no) + " is not 'key = value'");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (const auto it = seen.find(key); it != seen.end()) {
            throw ConfigError(std::string(key), "repeated on line " + std::to_string(line_no));
        }
        seen.emplace(std::string(key), line_no);
        set_config_value(config, key, value);
    }
    config.validate();
    return config;
}

std::string to_config_text(const RunConfig& config) {
    std::string out;
    for (const auto& [name, field] : registry()) out += name + " = " + field.get(config) + '\n';
    return out;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& entry : registry()) keys.push_back(entry.first);
    return keys;
}

std::uint64_t config_hash(const RunConfig& config) { return fnv1a64(to_config_text(config)); }

}  // namespace obbgen
