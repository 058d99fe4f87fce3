#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "obbgen/assign.hpp"
#include "obbgen/extract.hpp"
#include "obbgen/synth.hpp"

namespace obbgen {

/// Every tunable of a run. Defaults are the published hyperparameters where
/// they exist (b1 = 6, neg_radius_scale = 1, b2 = 4, 7x7 grid, pi/6 gate).
struct RunConfig {
    AssignParams assign;
    ExtractParams extract;
    SceneParams scene;

    std::uint32_t stride = 8;
    double gamma = 0.5;        // CPM falloff exponent for rendering
    double noise_sigma = 0.0;  // CPM corruption
    int blur_radius = 0;
    int scene_count = 10;
    double point_sigma = 0.0;  // annotation shift relative to sqrt(w h)
    std::uint64_t seed = 0;

    int bench_instances = 20000;
    int bench_map_cells = 256;

    std::string cpm_dir;
    std::string points_dir;
    std::string gt_dir;
    std::string classes_file;
    std::string out_dir;

    /// Throws ConfigError naming the offending key.
    void validate() const;
};

/// Parses `key = value` lines; `#` starts a comment. Unknown keys and
/// unparsable values raise ConfigError. Missing keys keep their defaults.
/// The result is validated.
RunConfig load_config(std::string_view text);

/// Applies one key. Used by load_config and by callers that map parameters
/// from other sources (command-line flags, bindings).
void set_config_value(RunConfig& config, std::string_view key, std::string_view value);

/// Fully resolved parameter set in load_config syntax, one key per line in a
/// fixed order; load_config(to_config_text(c)) reproduces c.
std::string to_config_text(const RunConfig& config);

std::vector<std::string> config_keys();

/// FNV-1a of the resolved text.
std::uint64_t config_hash(const RunConfig& config);

}  // namespace obbgen
