// src/metrics/detection.cpp
#include <algorithm>
#include <cmath>
#include <tuple>

#include "ariadne/seg_metrics.hpp"

namespace ariadne {

DetectionOutcome match_detections(std::span<const Point2> detections, std::span<const Point2> ground_truth,
                                  double tol) {
    if (!(tol > 0.0)) throw ConfigError("detection tolerance must be positive");
    std::vector<DetectionMatch> pairs;
    for (std::size_t g = 0; g < ground_truth.size(); ++g)
        for (std::size_t d = 0; d < detections.size(); ++d) {
            const double dist = std::hypot(detections[d].x - ground_truth[g].x, detections[d].y - ground_truth[g].y);
            if (dist <= tol) pairs.push_back({static_cast<int>(d), static_cast<int>(g), dist});
        }
    std::sort(pairs.begin(), pairs.end(), [](const DetectionMatch& a, const DetectionMatch& b) {
        return std::tie(a.distance, a.ground_truth, a.detection) < std::tie(b.distance, b.ground_truth, b.detection);
    });

    std::vector<char> det_used(detections.size(), 0), gt_used(ground_truth.size(), 0);
    DetectionOutcome out;
    for (const auto& p : pairs) {
        if (det_used[p.detection] || gt_used[p.ground_truth]) continue;
        det_used[p.detection] = gt_used[p.ground_truth] = 1;
        out.matches.push_back(p);
    }
    out.tp_det = static_cast<int>(out.matches.size());
    out.fp_det = static_cast<int>(detections.size()) - out.tp_det;
    out.fn_det = static_cast<int>(ground_truth.size()) - out.tp_det;
    return out;
}

DetectionMetrics summarize_detections(const DetectionOutcome& totals, int n_images) {
    if (n_images < 1) throw ConfigError("detection metrics need at least one image");
    DetectionMetrics m;
    const double tp = totals.tp_det, fp = totals.fp_det, fn = totals.fn_det;
    m.tpr = tp + fn > 0 ? tp / (tp + fn) : 1.0;
    m.ppv = tp + fp > 0 ? tp / (tp + fp) : 1.0;
    m.f1 = m.tpr + m.ppv > 0 ? 2.0 * m.ppv * m.tpr / (m.ppv + m.tpr) : 0.0;
    m.fppi = fp / n_images;
    m.outcome = totals;
    return m;
}

DetectionMetrics detection_metrics(std::span<const Point2> detections, std::span<const Point2> ground_truth,
                                   double tol, int n_images) {
    return summarize_detections(match_detections(detections, ground_truth, tol), n_images);
}

DetectionMetrics detection_metrics(std::span<const ImageDetections> images, double tol) {
    DetectionOutcome totals;
    for (const auto& img : images) {
        const auto o = match_detections(img.detections, img.ground_truth, tol);
        totals.tp_det += o.tp_det;
        totals.fp_det += o.fp_det;
        totals.fn_det += o.fn_det;
    }
    if (images.empty()) return summarize_detections(totals, 1);
    return summarize_detections(totals, static_cast<int>(images.size()));
}

}  // namespace ariadne
