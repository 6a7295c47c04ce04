// src/metrics/seg_metrics.cpp
#include "ariadne/seg_metrics.hpp"

#include "ariadne/parallel.hpp"
#include "ariadne/topology.hpp"

namespace ariadne {
namespace {

double ratio_or_one(double num, double den) { return den > 0.0 ? num / den : 1.0; }

long long overlap(const BinaryMask& a, const BinaryMask& b) {
    long long n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) n += (a[i] & b[i]);
    return n;
}

}  // namespace

ConfusionCounts confusion_counts(const BinaryMask& pred, const BinaryMask& gt) {
    require_same_shape(pred, gt, "confusion_counts");
    return parallel::chunked_reduce(
        pred.size(), 1 << 14, ConfusionCounts{},
        [&](std::size_t begin, std::size_t end) {
            ConfusionCounts c;
            for (std::size_t i = begin; i < end; ++i) {
                const bool p = pred[i] != 0, g = gt[i] != 0;
                c.tp += p && g;
                c.fp += p && !g;
                c.fn += !p && g;
                c.tn += !p && !g;
            }
            return c;
        },
        [](ConfusionCounts& acc, const ConfusionCounts& c) {
            acc.tp += c.tp;
            acc.tn += c.tn;
            acc.fp += c.fp;
            acc.fn += c.fn;
        });
}

PixelMetrics pixel_metrics(const BinaryMask& pred, const BinaryMask& gt) {
    const ConfusionCounts c = confusion_counts(pred, gt);
    const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
    const double fn = static_cast<double>(c.fn), tn = static_cast<double>(c.tn);
    PixelMetrics m;
    m.dice = ratio_or_one(2.0 * tp, 2.0 * tp + fp + fn);
    m.iou = ratio_or_one(tp, tp + fp + fn);
    m.accuracy = ratio_or_one(tp + tn, static_cast<double>(c.total()));
    m.precision = ratio_or_one(tp, tp + fp);
    m.sensitivity = ratio_or_one(tp, tp + fn);
    return m;
}

double dice(const BinaryMask& pred, const BinaryMask& gt) { return pixel_metrics(pred, gt).dice; }

double cl_dice(const BinaryMask& pred, const BinaryMask& gt, ClDiceVariant variant) {
    require_same_shape(pred, gt, "cl_dice");
    const BinaryMask skel_pred = skeletonize(pred);
    const BinaryMask skel_gt = skeletonize(gt);
    const double n_pred = static_cast<double>(skel_pred.count());
    const double n_gt = static_cast<double>(skel_gt.count());
    if (n_pred == 0.0 && n_gt == 0.0) return 1.0;
    if (n_pred == 0.0 || n_gt == 0.0) return 0.0;

    if (variant == ClDiceVariant::PaperLiteral)
        return 2.0 * static_cast<double>(overlap(skel_pred, skel_gt)) / (n_pred + n_gt);

    const double t_prec = static_cast<double>(overlap(skel_pred, gt)) / n_pred;
    const double t_sens = static_cast<double>(overlap(skel_gt, pred)) / n_gt;
    if (t_prec + t_sens == 0.0) return 0.0;
    return 2.0 * t_prec * t_sens / (t_prec + t_sens);
}

double nsd(const BinaryMask& pred, const BinaryMask& gt, double tol) {
    require_same_shape(pred, gt, "nsd");
    if (!(tol >= 0.0)) throw ConfigError("nsd: tolerance must be non-negative");
    const BinaryMask bp = boundary_mask(pred);
    const BinaryMask bg = boundary_mask(gt);
    const long long np = static_cast<long long>(bp.count());
    const long long ng = static_cast<long long>(bg.count());
    if (np == 0 && ng == 0) return 1.0;
    if (np == 0 || ng == 0) return 0.0;

    const Grid<double> to_gt = distance_to_set(bg);
    const Grid<double> to_pred = distance_to_set(bp);
    long long close = 0;
    for (std::size_t i = 0; i < bp.size(); ++i) {
        if (bp[i] && to_gt[i] <= tol) ++close;
        if (bg[i] && to_pred[i] <= tol) ++close;
    }
    return static_cast<double>(close) / static_cast<double>(np + ng);
}

}  // namespace ariadne
