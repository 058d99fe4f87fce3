#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "obbgen/assign.hpp"
#include "obbgen/synth.hpp"

namespace obbgen {

struct IoUReport {
    std::map<int, double> class_miou;
    std::map<int, std::size_t> class_count;
    double mean = 0.0;  // unweighted mean over classes present
    std::size_t fallback_count = 0;
};

/// Index-aligned pseudo-label quality: instance IoU, per-class mean, then the
/// mean over classes. Throws InvalidArgument on a length mismatch.
IoUReport miou(std::span<const Instance> pseudo, std::span<const Instance> gt, std::size_t fallback_count = 0);

/// Shifts each annotation by r * (cos t, sin t) with t ~ U[0, 2 pi) and
/// r ~ U[-sigma S, sigma S], S = sqrt(w h) of its box, then clamps into
/// [0, image_width - 1] x [0, image_height - 1].
std::vector<PointAnnotation> perturb_points(std::span<const PointAnnotation> annotations,
                                            std::span<const OrientedBox> gt_boxes, double sigma, std::uint64_t seed,
                                            int image_width, int image_height);

/// Monte-Carlo IoU over uniform samples in the joint bounding rectangle.
/// Independent of the clipping path; used as a test oracle.
double mc_iou_oracle(const OrientedBox& a, const OrientedBox& b, std::size_t n_samples, std::uint64_t seed);

/// Human-readable report.
std::string format_report(const IoUReport& report, std::span<const std::string> class_names = {});

/// `class_id<TAB>miou` lines followed by `mean<TAB>value`.
std::string format_report_tsv(const IoUReport& report);

}  // namespace obbgen
