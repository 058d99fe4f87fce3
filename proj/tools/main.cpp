#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

void add_common(CLI::App* cmd, obbgen::cli::CommonOptions& common, bool with_seed = true) {
    cmd->add_option("--config", common.config_path, "Run configuration (key = value lines)");
    cmd->add_option("--set", common.overrides, "Override a config key, KEY=VALUE (repeatable)");
    if (with_seed) cmd->add_option("--seed", common.seed, "Run seed (overrides the config)");
    cmd->add_option("--workers", common.workers, "Worker threads (default: all cores)");
    cmd->add_option("--out", common.out_dir, "Output directory");
}

}  // namespace

int main(int argc, char** argv) {
    using namespace obbgen::cli;
    CLI::App app{"Oriented pseudo-box generation from point annotations and class probability maps"};
    app.require_subcommand(1);

    SynthOptions synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic scenes, CPMs and point files");
    add_common(synth_cmd, synth.common);

    AssignOptions assign;
    auto* assign_cmd = app.add_subcommand("assign", "Write positive/negative/ignore target maps");
    add_common(assign_cmd, assign.common);
    assign_cmd->add_option("--points", assign.points_dir, "Directory of point files");
    assign_cmd->add_option("--classes", assign.classes_file, "Class table file");

    ExtractOptions extract;
    std::string sample_mode;
    std::string constraint;
    std::optional<int> grid_size;
    auto* extract_cmd = app.add_subcommand("extract", "Extract oriented pseudo boxes");
    add_common(extract_cmd, extract.common);
    extract_cmd->add_option("--cpm", extract.cpm_dir, "Directory of .cpm files");
    extract_cmd->add_option("--points", extract.points_dir, "Directory of point files");
    extract_cmd->add_option("--classes", extract.classes_file, "Class table file");
    extract_cmd->add_option("--sample-mode", sample_mode, "weighted | probabilistic")
        ->check(CLI::IsMember({"weighted", "probabilistic"}));
    extract_cmd->add_option("--constraint", constraint, "on | off")->check(CLI::IsMember({"on", "off"}));
    extract_cmd->add_option("--grid-size", grid_size, "PCA grid size (odd)");

    EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "Score pseudo boxes against ground truth (mIoU)");
    add_common(eval_cmd, eval.common, false);
    eval_cmd->add_option("--pred", eval.pred_dir, "Directory of pseudo-label DOTA files")->required();
    eval_cmd->add_option("--gt", eval.gt_dir, "Directory of ground-truth DOTA files")->required();
    eval_cmd->add_option("--classes", eval.classes_file, "Class table file")->required();

    BenchOptions bench;
    auto* bench_cmd = app.add_subcommand("bench", "Measure extraction throughput");
    add_common(bench_cmd, bench.common);
    bench_cmd->add_option("--scale-workers", bench.worker_counts, "Worker counts to compare against one worker");

    AblateOptions ablate;
    auto* ablate_cmd = app.add_subcommand("ablate", "Run the ablation grid on a synthetic dataset");
    add_common(ablate_cmd, ablate.common);
    ablate_cmd->add_option("--assign", ablate.assign_variants, "pos, pos+neg, pos+negm, pos+neg+negm")
        ->delimiter(',');
    ablate_cmd->add_option("--modes", ablate.sample_modes, "weighted, probabilistic")->delimiter(',');
    ablate_cmd->add_option("--grid-sizes", ablate.grid_sizes, "e.g. 5,7,9,11")->delimiter(',');
    ablate_cmd->add_option("--constraint", ablate.constraint, "on, off")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    if (*synth_cmd) return run_synth(synth, std::cerr);
    if (*assign_cmd) return run_assign(assign, std::cerr);
    if (*extract_cmd) {
        if (!sample_mode.empty()) extract.common.overrides.push_back("sample_mode=" + sample_mode);
        if (!constraint.empty()) extract.common.overrides.push_back("constraint=" + constraint);
        if (grid_size) extract.common.overrides.push_back("grid_size=" + std::to_string(*grid_size));
        return run_extract(extract, std::cerr);
    }
    if (*eval_cmd) return run_eval(eval, std::cout, std::cerr);
    if (*bench_cmd) return run_bench(bench, std::cout, std::cerr);
    if (*ablate_cmd) return run_ablate(ablate, std::cout, std::cerr);
    return kInputError;
}
