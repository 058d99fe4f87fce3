#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace obbgen::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kInternalError = 2 };

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> overrides;  // key=value, applied after the config file
    std::optional<std::uint64_t> seed;
    unsigned workers = 0;  // 0 = hardware concurrency
    std::string out_dir;
};

struct SynthOptions {
    CommonOptions common;
};

struct AssignOptions {
    CommonOptions common;
    std::string points_dir;
    std::string classes_file;
};

struct ExtractOptions {
    CommonOptions common;
    std::string cpm_dir;
    std::string points_dir;
    std::string classes_file;
};

struct EvalOptions {
    CommonOptions common;
    std::string pred_dir;
    std::string gt_dir;
    std::string classes_file;
};

struct BenchOptions {
    CommonOptions common;
    std::vector<unsigned> worker_counts;  // multi-worker runs; empty = {4}
};

struct AblateOptions {
    CommonOptions common;
    std::vector<std::string> assign_variants;  // pos, pos+neg, pos+negm, pos+neg+negm
    std::vector<std::string> sample_modes;     // weighted, probabilistic
    std::vector<int> grid_sizes;
    std::vector<std::string> constraint;       // on, off
};

int run_synth(const SynthOptions& opts, std::ostream& log);
int run_assign(const AssignOptions& opts, std::ostream& log);
int run_extract(const ExtractOptions& opts, std::ostream& log);
int run_eval(const EvalOptions& opts, std::ostream& out, std::ostream& log);
int run_bench(const BenchOptions& opts, std::ostream& out, std::ostream& log);
int run_ablate(const AblateOptions& opts, std::ostream& out, std::ostream& log);

}  // namespace obbgen::cli
