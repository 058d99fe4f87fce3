#include "obbgen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "obbgen/error.hpp"
#include "obbgen/text.hpp"

namespace obbgen {

IoUReport miou(std::span<const Instance> pseudo, std::span<const Instance> gt, std::size_t fallback_count) {
    if (pseudo.size() != gt.size()) {
        throw InvalidArgument("pseudo and ground-truth lists differ in length (" + std::to_string(pseudo.size()) +
                              " vs " + std::to_string(gt.size()) + ")");
    }
    std::map<int, double> sums;
    IoUReport report;
    report.fallback_count = fallback_count;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        sums[gt[i].class_id] += rotated_iou(pseudo[i].box, gt[i].box);
        ++report.class_count[gt[i].class_id];
    }
    double total = 0.0;
    for (const auto& [cls, sum] : sums) {
        const double m = sum / static_cast<double>(report.class_count[cls]);
        report.class_miou[cls] = m;
        total += m;
    }
    report.mean = sums.empty() ? 0.0 : total / static_cast<double>(sums.size());
    return report;
}

std::vector<PointAnnotation> perturb_points(std::span<const PointAnnotation> annotations,
                                            std::span<const OrientedBox> gt_boxes, double sigma, std::uint64_t seed,
                                            int image_width, int image_height) {
    if (annotations.size() != gt_boxes.size()) throw InvalidArgument("annotations and boxes differ in length");
    if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be non-negative");
    std::vector<PointAnnotation> out(annotations.begin(), annotations.end());
    if (sigma == 0.0) return out;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> theta_dist(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double max_x = std::max(0, image_width - 1);
    const double max_y = std::max(0, image_height - 1);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double scale = std::sqrt(gt_boxes[i].w * gt_boxes[i].h);
        const double theta = theta_dist(rng);
        const double r = unit(rng) * sigma * scale;
        out[i].x = std::clamp(out[i].x + r * std::cos(theta), 0.0, max_x);
        out[i].y = std::clamp(out[i].y + r * std::sin(theta), 0.0, max_y);
    }
    return out;
}

double mc_iou_oracle(const OrientedBox& a, const OrientedBox& b, std::size_t n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw InvalidArgument("n_samples must be at least 1");
    double lo_x = std::numeric_limits<double>::infinity();
    double lo_y = lo_x;
    double hi_x = -lo_x;
    double hi_y = -lo_x;
    for (const auto& box : {a, b}) {
        for (const Vec2& c : obb_to_corners(box)) {
            lo_x = std::min(lo_x, c.x);
            lo_y = std::min(lo_y, c.y);
            hi_x = std::max(hi_x, c.x);
            hi_y = std::max(hi_y, c.y);
        }
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(lo_x, hi_x);
    std::uniform_real_distribution<double> uy(lo_y, hi_y);
    std::size_t both = 0;
    std::size_t either = 0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const Vec2 p{ux(rng), uy(rng)};
        const bool in_a = contains(a, p);
        const bool in_b = contains(b, p);
        both += (in_a && in_b) ? 1 : 0;
        either += (in_a || in_b) ? 1 : 0;
    }
    if (either == 0) throw InvalidEstimate("no sample fell inside either box");
    return static_cast<double>(both) / static_cast<double>(either);
}

std::string format_report(const IoUReport& report, std::span<const std::string> class_names) {
    std::ostringstream os;
    os << "class                 instances  mIoU\n";
    for (const auto& [cls, m] : report.class_miou) {
        std::string name = cls >= 0 && static_cast<std::size_t>(cls) < class_names.size()
                               ? class_names[static_cast<std::size_t>(cls)]
                               : "class" + std::to_string(cls);
        name.resize(std::max<std::size_t>(name.size(), 21), ' ');
        std::string count = std::to_string(report.class_count.at(cls));
        count.insert(0, count.size() < 9 ? 9 - count.size() : 0, ' ');
        os << name << ' ' << count << "  " << format_double(m, 4, false) << '\n';
    }
    os << "mean mIoU: " << format_double(report.mean, 4, false) << '\n';
    os << "fallback boxes: " << report.fallback_count << '\n';
    return os.str();
}

std::string format_report_tsv(const IoUReport& report) {
    std::string out;
    for (const auto& [cls, m] : report.class_miou) {
        out += std::to_string(cls) + '\t' + format_double(m, 6, false) + '\n';
    }
    out += "mean\t" + format_double(report.mean, 6, false) + '\n';
    return out;
}

}  // namespace obbgen
