// include/ariadne/seg_metrics.hpp
// Pixel, topology-aware and lesion-level evaluation metrics.
#pragma once

#include <span>
#include <vector>

#include "ariadne/raster.hpp"

namespace ariadne {

struct ConfusionCounts {
    long long tp = 0;
    long long tn = 0;
    long long fp = 0;
    long long fn = 0;

    long long total() const noexcept { return tp + tn + fp + fn; }
};

ConfusionCounts confusion_counts(const BinaryMask& pred, const BinaryMask& gt);

// Ratios whose denominator is zero evaluate to 1 (both masks empty means a
// perfect prediction).
struct PixelMetrics {
    double dice = 0.0;
    double iou = 0.0;
    double accuracy = 0.0;
    double precision = 0.0;
    double sensitivity = 0.0;
};

PixelMetrics pixel_metrics(const BinaryMask& pred, const BinaryMask& gt);
double dice(const BinaryMask& pred, const BinaryMask& gt);

enum class ClDiceVariant {
    // Harmonic mean of topology precision |S(pred) & gt| / |S(pred)| and
    // topology sensitivity |S(gt) & pred| / |S(gt)|.
    Standard,
    // 2|S(pred) & S(gt)| / (|S(pred)| + |S(gt)|), skeleton against skeleton.
    PaperLiteral,
};

// Centerline Dice. Both skeletons empty gives 1, exactly one empty gives 0.
double cl_dice(const BinaryMask& pred, const BinaryMask& gt, ClDiceVariant variant = ClDiceVariant::Standard);

// Normalized surface Dice: boundary pixels of each mask lying within `tol`
// pixels of the other mask's boundary, over the total boundary size.
// Identical masks score 1.
double nsd(const BinaryMask& pred, const BinaryMask& gt, double tol);

struct DetectionMatch {
    int detection = 0;
    int ground_truth = 0;
    double distance = 0.0;
};

struct DetectionOutcome {
    int tp_det = 0;
    int fp_det = 0;
    int fn_det = 0;
    std::vector<DetectionMatch> matches;
};

struct DetectionMetrics {
    double tpr = 0.0;
    double ppv = 0.0;
    double f1 = 0.0;
    double fppi = 0.0;
    DetectionOutcome outcome;
};

inline constexpr double kDefaultDetectionTolerance = 75.0;

// One-to-one greedy matching of detections to ground-truth centroids within a
// single image: pairs with distance <= tol are taken in ascending distance,
// ties broken by lower ground-truth index, then lower detection index.
DetectionOutcome match_detections(std::span<const Point2> detections, std::span<const Point2> ground_truth,
                                  double tol);

// Rates from summed counts over `n_images` images. No ground truth gives
// tpr = 1; no detections gives ppv = 1.
DetectionMetrics summarize_detections(const DetectionOutcome& totals, int n_images);

// Single-image convenience: match then summarize.
DetectionMetrics detection_metrics(std::span<const Point2> detections, std::span<const Point2> ground_truth,
                                   double tol = kDefaultDetectionTolerance, int n_images = 1);

struct ImageDetections {
    std::vector<Point2> detections;
    std::vector<Point2> ground_truth;
};

// Matches each image independently and pools the counts.
DetectionMetrics detection_metrics(std::span<const ImageDetections> images, double tol = kDefaultDetectionTolerance);

}  // namespace ariadne
