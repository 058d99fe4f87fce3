#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "obbgen/config.hpp"
#include "obbgen/error.hpp"
#include "obbgen/formats.hpp"
#include "obbgen/metrics.hpp"
#include "obbgen/parallel.hpp"
#include "obbgen/pipeline.hpp"
#include "obbgen/seed.hpp"
#include "obbgen/synth.hpp"
#include "obbgen/text.hpp"

namespace obbgen::cli {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

// ---------------------------------------------------------------------------
// file helpers

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, std::string_view data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw InputError("write failed for " + path.string());
}

void write_file(const fs::path& path, std::span<const std::uint8_t> data) {
    write_file(path, std::string_view(reinterpret_cast<const char*>(data.data()), data.size()));
}

/// Sorted stems of regular files with the given extension.
std::vector<std::string> list_stems(const fs::path& dir, std::string_view ext) {
    if (!fs::is_directory(dir)) throw InputError("not a directory: " + dir.string());
    std::vector<std::string> stems;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ext) stems.push_back(entry.path().stem().string());
    }
    std::sort(stems.begin(), stems.end());
    return stems;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// manifest

/// Plain-text key-value run record, written when it goes out of scope so
/// that failed runs leave one too.
class Manifest {
public:
    Manifest(fs::path dir, std::string command) : dir_(std::move(dir)) { set("command", std::move(command)); }
    Manifest(const Manifest&) = delete;
    Manifest& operator=(const Manifest&) = delete;

    ~Manifest() {
        try {
            if (dir_.empty()) return;
            fs::create_directories(dir_);
            std::string text = "status = " + status_ + '\n';
            for (const auto& [k, v] : entries_) text += k + " = " + v + '\n';
            write_file(dir_ / "manifest.txt", text);
        } catch (...) {
            // A manifest that cannot be written must not mask the run's own error.
        }
    }

    void set(std::string key, std::string value) {
        for (auto& e : entries_) {
            if (e.first == key) {
                e.second = std::move(value);
                return;
            }
        }
        entries_.emplace_back(std::move(key), std::move(value));
    }
    void set(std::string key, std::size_t value) { set(std::move(key), std::to_string(value)); }
    void timing(const std::string& stage, double seconds) {
        set("timing." + stage + "_seconds", format_double(std::max(seconds, 0.0), 6, false));
    }
    void config(const RunConfig& cfg) {
        const std::string text = to_config_text(cfg);
        for (const auto line : split_lines(text)) {
            const auto eq = line.find(" = ");
            set("config." + std::string(line.substr(0, eq)), std::string(line.substr(eq + 3)));
        }
        set("config_hash", format_hash(config_hash(cfg)));
    }
    void succeed() { status_ = "ok"; }
    void fail(const std::string& why) { status_ = "failed: " + why; }

    static std::string format_hash(std::uint64_t h) {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }

private:
    fs::path dir_;
    std::string status_ = "failed: aborted";
    std::vector<std::pair<std::string, std::string>> entries_;
};

class StageTimer {
public:
    StageTimer(Manifest& m, std::string stage) : m_(m), stage_(std::move(stage)), start_(Clock::now()) {}
    ~StageTimer() { m_.timing(stage_, std::chrono::duration<double>(Clock::now() - start_).count()); }

private:
    Manifest& m_;
    std::string stage_;
    Clock::time_point start_;
};

// ---------------------------------------------------------------------------
// shared plumbing

RunConfig resolve_config(const CommonOptions& common) {
    RunConfig cfg = common.config_path.empty() ? RunConfig{} : load_config(read_text(common.config_path));
    for (const auto& kv : common.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError(kv, "override must be key=value");
        set_config_value(cfg, trim(std::string_view(kv).substr(0, eq)), trim(std::string_view(kv).substr(eq + 1)));
    }
    if (common.seed) cfg.seed = *common.seed;
    cfg.validate();
    return cfg;
}

unsigned resolve_workers(unsigned requested) {
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

template <typename Body>
int guarded(Manifest& manifest, std::ostream& log, Body&& body) {
    try {
        const int code = body();
        if (code == kOk) manifest.succeed();
        return code;
    } catch (const InputError& e) {
        manifest.fail(e.what());
        log << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const fs::filesystem_error& e) {
        manifest.fail(e.what());
        log << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        manifest.fail(e.what());
        log << "internal error: " << e.what() << '\n';
        return kInternalError;
    }
}

ClassTable load_classes(const std::string& path) { return ClassTable::parse(read_text(path)); }

int map_cells(int pixels, std::uint32_t stride) {
    return static_cast<int>((static_cast<std::uint32_t>(pixels) + stride - 1) / stride);
}

std::string scene_stem(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "scene_%04d", index);
    return buf;
}

struct RenderedScene {
    std::string stem;
    Scene scene;
    ClassProbabilityMap cpm;
    std::vector<PointAnnotation> points;
};

/// Deterministic scene + CPM + (optionally perturbed) points for one index.
RenderedScene make_scene(const RunConfig& cfg, int index) {
    RenderedScene r;
    r.stem = scene_stem(index);
    SceneParams params = cfg.scene;
    params.seed = derive_seed(cfg.seed, r.stem, 0);
    r.scene = generate_scene(params);
    r.cpm = render_cpm(r.scene, cfg.stride, cfg.gamma);
    if (cfg.noise_sigma > 0.0 || cfg.blur_radius > 0) {
        r.cpm = corrupt_cpm(r.cpm, cfg.noise_sigma, cfg.blur_radius, derive_seed(cfg.seed, r.stem, 1));
    }
    std::vector<OrientedBox> boxes;
    for (const auto& inst : r.scene.instances) boxes.push_back(inst.box);
    r.points = perturb_points(r.scene.annotations, boxes, cfg.point_sigma, derive_seed(cfg.seed, r.stem, 2),
                              r.scene.image_width, r.scene.image_height);
    return r;
}

std::vector<Instance> read_dota_instances(const fs::path& path, const ClassTable& table) {
    std::vector<Instance> out;
    try {
        for (const auto& d : parse_dota(read_text(path))) out.push_back({corners_to_obb(d.corners), table.id(d.category)});
    } catch (const Error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    return out;
}

int report_failures(const std::vector<std::string>& failures, Manifest& manifest, std::ostream& log) {
    if (failures.empty()) return kOk;
    manifest.set("failed_stems", join(failures, ","));
    manifest.fail(std::to_string(failures.size()) + " input(s) failed");
    log << "error: " << failures.size() << " input(s) failed: " << join(failures, ", ") << '\n';
    return kInputError;
}

}  // namespace

// ---------------------------------------------------------------------------
// synth

int run_synth(const SynthOptions& opts, std::ostream& log) {
    const fs::path out = opts.common.out_dir.empty() ? fs::path(".") : fs::path(opts.common.out_dir);
    Manifest manifest(out, "synth");
    return guarded(manifest, log, [&] {
        const RunConfig cfg = resolve_config(opts.common);
        manifest.config(cfg);
        manifest.set("out_dir", out.string());
        const unsigned workers = resolve_workers(opts.common.workers);
        fs::create_directories(out / "labelTxt");
        fs::create_directories(out / "points");
        fs::create_directories(out / "cpm");
        const ClassTable table = ClassTable::dota_default(cfg.scene.n_class);
        write_file(out / "classes.txt", table.serialize());

        std::vector<std::size_t> counts(static_cast<std::size_t>(cfg.scene_count));
        {
            StageTimer t(manifest, "synth");
            parallel_for(counts.size(), workers, [&](std::size_t i) {
                const RenderedScene r = make_scene(cfg, static_cast<int>(i));
                std::vector<DotaInstance> dota;
                for (const auto& inst : r.scene.instances) dota.push_back(to_dota(inst.box, table.name(inst.class_id)));
                write_file(out / "labelTxt" / (r.stem + ".txt"), write_dota(dota));
                write_file(out / "points" / (r.stem + ".txt"), write_points(r.points, table));
                write_file(out / "cpm" / (r.stem + ".cpm"), write_cpm(r.cpm));
                counts[i] = r.scene.instances.size();
            });
        }
        std::size_t total = 0;
        for (auto c : counts) total += c;
        manifest.set("scenes", counts.size());
        manifest.set("instances", total);
        log << "synth: " << counts.size() << " scenes, " << total << " instances -> " << out.string() << '\n';
        return kOk;
    });
}

// ---------------------------------------------------------------------------
// assign

int run_assign(const AssignOptions& opts, std::ostream& log) {
    const fs::path out = opts.common.out_dir.empty() ? fs::path(".") : fs::path(opts.common.out_dir);
    Manifest manifest(out, "assign");
    return guarded(manifest, log, [&] {
        const RunConfig cfg = resolve_config(opts.common);
        manifest.config(cfg);
        const fs::path points_dir = !opts.points_dir.empty() ? fs::path(opts.points_dir) : fs::path(cfg.points_dir);
        const std::string classes_path = !opts.classes_file.empty() ? opts.classes_file : cfg.classes_file;
        manifest.set("points_dir", points_dir.string());
        manifest.set("classes_file", classes_path);
        manifest.set("out_dir", out.string());
        if (classes_path.empty()) throw InputError("assign needs --classes");
        const ClassTable table = load_classes(classes_path);
        const int width = map_cells(cfg.scene.image_width, cfg.stride);
        const int height = map_cells(cfg.scene.image_height, cfg.stride);
        fs::create_directories(out);

        const auto stems = list_stems(points_dir, ".txt");
        if (stems.empty()) throw InputError("no points files in " + points_dir.string());
        std::vector<std::string> errors(stems.size());
        std::vector<std::uint8_t> single(stems.size(), 0);
        {
            StageTimer t(manifest, "assign");
            parallel_for(stems.size(), resolve_workers(opts.common.workers), [&](std::size_t i) {
                try {
                    const auto points = parse_points(read_text(points_dir / (stems[i] + ".txt")), table);
                    if (points.empty()) throw InputError("points file is empty");
                    single[i] = points.size() == 1 ? 1 : 0;
                    const TargetMap map = assign_image(points, cfg.stride, width, height, cfg.assign);
                    write_file(out / (stems[i] + ".tgt"),
                               write_target_map(map, static_cast<std::uint32_t>(table.size()), cfg.stride));
                } catch (const Error& e) {
                    errors[i] = e.what();
                }
            });
        }
        std::vector<std::string> failures;
        std::size_t singles = 0;
        for (std::size_t i = 0; i < stems.size(); ++i) {
            if (!errors[i].empty()) {
                failures.push_back(stems[i]);
                log << "error: " << stems[i] << ": " << errors[i] << '\n';
            } else if (single[i]) {
                ++singles;
                log << "warning: " << stems[i] << " has a single annotation; using fallback_radius\n";
            }
        }
        manifest.set("images", stems.size() - failures.size());
        manifest.set("warnings.single_annotation", singles);
        return report_failures(failures, manifest, log);
    });
}

// ---------------------------------------------------------------------------
// extract

int run_extract(const ExtractOptions& opts, std::ostream& log) {
    const fs::path out = opts.common.out_dir.empty() ? fs::path(".") : fs::path(opts.common.out_dir);
    Manifest manifest(out, "extract");
    return guarded(manifest, log, [&] {
        const RunConfig cfg = resolve_config(opts.common);
        manifest.config(cfg);
        const fs::path cpm_dir = !opts.cpm_dir.empty() ? fs::path(opts.cpm_dir) : fs::path(cfg.cpm_dir);
        const fs::path points_dir = !opts.points_dir.empty() ? fs::path(opts.points_dir) : fs::path(cfg.points_dir);
        const std::string classes_path = !opts.classes_file.empty() ? opts.classes_file : cfg.classes_file;
        manifest.set("cpm_dir", cpm_dir.string());
        manifest.set("points_dir", points_dir.string());
        manifest.set("classes_file", classes_path);
        manifest.set("out_dir", out.string());
        if (classes_path.empty()) throw InputError("extract needs --classes");
        const ClassTable table = load_classes(classes_path);
        fs::create_directories(out);

        const auto cpm_stems = list_stems(cpm_dir, ".cpm");
        const auto point_stems = list_stems(points_dir, ".txt");
        std::vector<std::string> stems;
        std::vector<std::string> failures;
        std::set_union(cpm_stems.begin(), cpm_stems.end(), point_stems.begin(), point_stems.end(),
                       std::back_inserter(stems));
        if (stems.empty()) throw InputError("no inputs found");

        std::vector<std::string> errors(stems.size());
        std::vector<ExtractStats> stats(stems.size());
        {
            StageTimer t(manifest, "extract");
            parallel_for(stems.size(), resolve_workers(opts.common.workers), [&](std::size_t i) {
                const std::string& stem = stems[i];
                try {
                    const fs::path cpm_path = cpm_dir / (stem + ".cpm");
                    const fs::path pts_path = points_dir / (stem + ".txt");
                    if (!fs::exists(cpm_path)) throw InputError("missing CPM for stem '" + stem + "'");
                    if (!fs::exists(pts_path)) throw InputError("missing points for stem '" + stem + "'");
                    const ClassProbabilityMap cpm = read_cpm(read_bytes(cpm_path));
                    const auto points = parse_points(read_text(pts_path), table);
                    for (const auto& p : points) {
                        if (static_cast<std::uint32_t>(p.class_id) >= cpm.n_class) {
                            throw InputError("class '" + table.name(p.class_id) + "' has no CPM plane");
                        }
                    }
                    const auto boxes = extract_image(cpm.view(), points, cfg.extract, cfg.seed, stem, 1, &stats[i]);
                    std::vector<DotaInstance> dota;
                    dota.reserve(boxes.size());
                    for (std::size_t k = 0; k < boxes.size(); ++k) {
                        dota.push_back(to_dota(boxes[k], table.name(points[k].class_id)));
                    }
                    write_file(out / (stem + ".txt"), write_dota(dota));
                } catch (const Error& e) {
                    errors[i] = e.what();
                }
            });
        }
        ExtractStats total;
        for (std::size_t i = 0; i < stems.size(); ++i) {
            if (!errors[i].empty()) {
                failures.push_back(stems[i]);
                log << "error: " << stems[i] << ": " << errors[i] << '\n';
                continue;
            }
            total.instances += stats[i].instances;
            total.fallback += stats[i].fallback;
            total.degenerate += stats[i].degenerate;
        }
        manifest.set("images", stems.size() - failures.size());
        manifest.set("instances", total.instances);
        manifest.set("boxes_emitted", total.instances);
        manifest.set("warnings.fallback_boxes", total.fallback);
        manifest.set("warnings.degenerate_pca", total.degenerate);
        if (total.fallback > 0) log << "warning: " << total.fallback << " fallback box(es) emitted\n";
        log << "extract: " << total.instances << " boxes from " << stems.size() - failures.size() << " image(s)\n";
        return report_failures(failures, manifest, log);
    });
}

// ---------------------------------------------------------------------------
// eval

int run_eval(const EvalOptions& opts, std::ostream& out_stream, std::ostream& log) {
    const fs::path out = opts.common.out_dir.empty() ? fs::path(".") : fs::path(opts.common.out_dir);
    Manifest manifest(out, "eval");
    return guarded(manifest, log, [&] {
        manifest.set("pred_dir", opts.pred_dir);
        manifest.set("gt_dir", opts.gt_dir);
        manifest.set("classes_file", opts.classes_file);
        manifest.set("out_dir", out.string());
        if (opts.classes_file.empty()) throw InputError("eval needs --classes");
        const ClassTable table = load_classes(opts.classes_file);
        fs::create_directories(out);

        const auto stems = list_stems(opts.gt_dir, ".txt");
        if (stems.empty()) throw InputError("no ground-truth files in " + opts.gt_dir);
        std::vector<Instance> pseudo;
        std::vector<Instance> gt;
        std::vector<std::string> failures;
        {
            StageTimer t(manifest, "eval");
            for (const auto& stem : stems) {
                try {
                    const fs::path pred_path = fs::path(opts.pred_dir) / (stem + ".txt");
                    if (!fs::exists(pred_path)) throw InputError("missing prediction for stem '" + stem + "'");
                    auto g = read_dota_instances(fs::path(opts.gt_dir) / (stem + ".txt"), table);
                    auto p = read_dota_instances(pred_path, table);
                    if (g.size() != p.size()) {
                        throw InputError(std::to_string(p.size()) + " predictions for " + std::to_string(g.size()) +
                                         " ground-truth instances");
                    }
                    gt.insert(gt.end(), g.begin(), g.end());
                    pseudo.insert(pseudo.end(), p.begin(), p.end());
                } catch (const Error& e) {
                    failures.push_back(stem);
                    log << "error: " << stem << ": " << e.what() << '\n';
                }
            }
        }
        std::size_t fallback = 0;
        const fs::path pred_manifest = fs::path(opts.pred_dir) / "manifest.txt";
        if (fs::exists(pred_manifest)) {
            const std::string text = read_text(pred_manifest);
            for (const auto line : split_lines(text)) {
                const std::string_view prefix = "warnings.fallback_boxes = ";
                if (line.substr(0, prefix.size()) == prefix) {
                    fallback = parse_int<std::size_t>(trim(line.substr(prefix.size()))).value_or(0);
                }
            }
        }
        const IoUReport report = miou(pseudo, gt, fallback);
        const std::string text = format_report(report, table.names());
        write_file(out / "report.txt", text);
        write_file(out / "miou.tsv", format_report_tsv(report));
        out_stream << text;
        manifest.set("instances", gt.size());
        manifest.set("mean_miou", format_double(report.mean, 6, false));
        return report_failures(failures, manifest, log);
    });
}

// ---------------------------------------------------------------------------
// bench

int run_bench(const BenchOptions& opts, std::ostream& out_stream, std::ostream& log) {
    const fs::path out = opts.common.out_dir.empty() ? fs::path() : fs::path(opts.common.out_dir);
    Manifest manifest(out, "bench");
    return guarded(manifest, log, [&] {
        const RunConfig cfg = resolve_config(opts.common);
        manifest.config(cfg);

        // Workload: a scene on a bench_map_cells^2 grid, its annotations cycled
        // up to bench_instances extractions.
        SceneParams params = cfg.scene;
        params.image_width = params.image_height = cfg.bench_map_cells * static_cast<int>(cfg.stride);
        params.seed = derive_seed(cfg.seed, "bench", 0);
        const Scene scene = generate_scene(params);
        const ClassProbabilityMap cpm = render_cpm(scene, cfg.stride, cfg.gamma);
        const CpmView view = cpm.view();
        const auto neighbors = neighbor_constraints(scene.annotations, cfg.stride, cfg.extract.constraint_neighbors);
        const std::size_t n = static_cast<std::size_t>(cfg.bench_instances);
        const std::size_t base = scene.annotations.size();

        auto timed_run = [&](unsigned workers) {
            std::vector<OrientedBox> boxes(n);
            const auto start = Clock::now();
            parallel_for(n, workers, [&](std::size_t i) {
                boxes[i] = extract_obb(view, scene.annotations[i % base], neighbors[i % base], cfg.extract,
                                       derive_seed(cfg.seed, "bench", i))
                               .box;
            });
            return std::chrono::duration<double>(Clock::now() - start).count();
        };

        std::vector<unsigned> counts = opts.worker_counts;
        if (counts.empty()) counts.push_back(opts.common.workers > 1 ? opts.common.workers : 4u);

        std::ostringstream report;
        report << "config_hash = " << Manifest::format_hash(config_hash(cfg)) << '\n';
        report << "map_cells = " << view.width() << 'x' << view.height() << '\n';
        report << "instances = " << n << '\n';
        report << "hardware_threads = " << std::thread::hardware_concurrency() << '\n';
        const double single = timed_run(1);
        const double single_rate = static_cast<double>(n) / single;
        report << "workers_1.seconds = " << format_double(single, 6, false) << '\n';
        report << "workers_1.instances_per_second = " << format_double(single_rate, 1, false) << '\n';
        for (const unsigned w : counts) {
            const double secs = timed_run(w);
            const double rate = static_cast<double>(n) / secs;
            const std::string key = "workers_" + std::to_string(w);
            report << key << ".seconds = " << format_double(secs, 6, false) << '\n';
            report << key << ".instances_per_second = " << format_double(rate, 1, false) << '\n';
            report << key << ".speedup = " << format_double(rate / single_rate, 3, false) << '\n';
        }
        out_stream << report.str();
        if (!out.empty()) {
            fs::create_directories(out);
            write_file(out / "bench.txt", report.str());
        }
        manifest.set("instances", n);
        manifest.timing("bench_single", single);
        return kOk;
    });
}

// ---------------------------------------------------------------------------
// ablate

namespace {

struct AssignVariant {
    std::string name;
    bool negative;
    bool middle;
};

AssignVariant parse_assign_variant(const std::string& name) {
    if (name == "pos") return {name, false, false};
    if (name == "pos+neg") return {name, true, false};
    if (name == "pos+negm") return {name, false, true};
    if (name == "pos+neg+negm") return {name, true, true};
    throw InputError("unknown assignment variant '" + name + "' (pos, pos+neg, pos+negm, pos+neg+negm)");
}

}  // namespace

int run_ablate(const AblateOptions& opts, std::ostream& out_stream, std::ostream& log) {
    const fs::path out = opts.common.out_dir.empty() ? fs::path(".") : fs::path(opts.common.out_dir);
    Manifest manifest(out, "ablate");
    return guarded(manifest, log, [&] {
        const RunConfig cfg = resolve_config(opts.common);
        manifest.config(cfg);
        const unsigned workers = resolve_workers(opts.common.workers);

        std::vector<AssignVariant> variants;
        for (const auto& v : opts.assign_variants.empty()
                                 ? std::vector<std::string>{"pos", "pos+neg", "pos+negm", "pos+neg+negm"}
                                 : opts.assign_variants) {
            variants.push_back(parse_assign_variant(v));
        }
        std::vector<SampleMode> modes;
        for (const auto& m : opts.sample_modes.empty() ? std::vector<std::string>{"weighted", "probabilistic"}
                                                       : opts.sample_modes) {
            if (m == "weighted") {
                modes.push_back(SampleMode::kWeighted);
            } else if (m == "probabilistic") {
                modes.push_back(SampleMode::kProbabilistic);
            } else {
                throw InputError("unknown sample mode '" + m + "'");
            }
        }
        const std::vector<int> grids = opts.grid_sizes.empty() ? std::vector<int>{5, 7, 9, 11} : opts.grid_sizes;
        std::vector<bool> constraints;
        for (const auto& c : opts.constraint.empty() ? std::vector<std::string>{"on", "off"} : opts.constraint) {
            if (c == "on") {
                constraints.push_back(true);
            } else if (c == "off") {
                constraints.push_back(false);
            } else {
                throw InputError("constraint must be on or off, got '" + c + "'");
            }
        }

        std::vector<RenderedScene> scenes(static_cast<std::size_t>(cfg.scene_count));
        {
            StageTimer t(manifest, "synth");
            parallel_for(scenes.size(), workers, [&](std::size_t i) { scenes[i] = make_scene(cfg, static_cast<int>(i)); });
        }

        // Label statistics per assignment variant. The rendered CPMs stand in
        // for a trained network, so assignment does not feed back into mIoU.
        struct LabelShare {
            double positive = 0, negative = 0, ignore = 0;
        };
        std::vector<LabelShare> shares(variants.size());
        {
            StageTimer t(manifest, "assign");
            for (std::size_t v = 0; v < variants.size(); ++v) {
                AssignParams ap = cfg.assign;
                ap.positive_enabled = true;
                ap.distance_negative_enabled = variants[v].negative;
                ap.middle_negative_enabled = variants[v].middle;
                double cells = 0;
                for (const auto& s : scenes) {
                    const TargetMap map = assign_image(s.points, cfg.stride, static_cast<int>(s.cpm.width),
                                                       static_cast<int>(s.cpm.height), ap);
                    for (const auto l : map.labels) {
                        if (l == TargetMap::kIgnore) {
                            shares[v].ignore += 1;
                        } else if (l == TargetMap::kNegative) {
                            shares[v].negative += 1;
                        } else {
                            shares[v].positive += 1;
                        }
                    }
                    cells += static_cast<double>(map.labels.size());
                }
                shares[v].positive /= cells;
                shares[v].negative /= cells;
                shares[v].ignore /= cells;
            }
        }

        struct Cell {
            SampleMode mode;
            int grid;
            bool constraint;
            double miou = 0.0;
            std::size_t fallback = 0;
        };
        std::vector<Cell> cells;
        for (const auto mode : modes) {
            for (const int g : grids) {
                for (const bool c : constraints) cells.push_back({mode, g, c});
            }
        }
        {
            StageTimer t(manifest, "extract");
            parallel_for(cells.size(), workers, [&](std::size_t k) {
                ExtractParams ep = cfg.extract;
                ep.sample_mode = cells[k].mode;
                ep.grid_size = cells[k].grid;
                ep.constraint_enabled = cells[k].constraint;
                std::vector<Instance> pseudo;
                std::vector<Instance> gt;
                ExtractStats stats;
                for (const auto& s : scenes) {
                    const auto boxes = extract_image(s.cpm.view(), s.points, ep, cfg.seed, s.stem, 1, &stats);
                    for (std::size_t i = 0; i < boxes.size(); ++i) {
                        pseudo.push_back({boxes[i], s.scene.instances[i].class_id});
                        gt.push_back(s.scene.instances[i]);
                    }
                }
                cells[k].miou = miou(pseudo, gt).mean;
                cells[k].fallback = stats.fallback;
            });
        }

        std::string table = "assign\tsample_mode\tgrid_size\tconstraint\tmiou\tpositive_share\tnegative_share\t"
                            "ignore_share\tfallback_boxes\n";
        for (std::size_t v = 0; v < variants.size(); ++v) {
            for (const auto& c : cells) {
                table += variants[v].name + '\t' + (c.mode == SampleMode::kWeighted ? "weighted" : "probabilistic") +
                         '\t' + std::to_string(c.grid) + '\t' + (c.constraint ? "on" : "off") + '\t' +
                         format_double(c.miou, 6, false) + '\t' + format_double(shares[v].positive, 6, false) + '\t' +
                         format_double(shares[v].negative, 6, false) + '\t' +
                         format_double(shares[v].ignore, 6, false) + '\t' + std::to_string(c.fallback) + '\n';
            }
        }
        fs::create_directories(out);
        write_file(out / "ablation.tsv", table);
        out_stream << table;
        manifest.set("scenes", scenes.size());
        manifest.set("rows", variants.size() * cells.size());
        return kOk;
    });
}

}  // namespace obbgen::cli
