#include "xaieval/metrics.hpp"

#include <numeric>
#include <string>

#include "xaieval/error.hpp"
#include "xaieval/simd/kernels.hpp"

namespace xaieval {
namespace {

Measure ratio_or_undefined(std::uint64_t num, std::uint64_t den) {
    if (den == 0) {
        return std::nullopt;
    }
    return Exact::ratio(num, den);
}

Measure percent_or_undefined(std::uint64_t num, std::uint64_t den) {
    if (den == 0) {
        return std::nullopt;
    }
    return Exact::ratio(num, den) * 100;
}

Measure difference(const Measure& a, const Measure& b) {
    if (!a || !b) {
        return std::nullopt;
    }
    return *a - *b;
}

}  // namespace

ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& reference) {
    require_same_grid(pred, reference, "prediction vs reference mask");
    const simd::PixelTally t = simd::active_kernels().tally(pred.bits().data(),
                                                            reference.bits().data(),
                                                            pred.pixel_count());
    return {t.both, t.pred_only, t.ref_only, t.neither};
}

MetricSet metric_set(const ConfusionCounts& c) {
    MetricSet m;
    m.precision = ratio_or_undefined(c.tp, c.tp + c.fp);
    m.recall = ratio_or_undefined(c.tp, c.tp + c.fn);
    // Count form of 2PR/(P+R); defined whenever either mask has a positive.
    m.f1 = ratio_or_undefined(2 * c.tp, 2 * c.tp + c.fp + c.fn);
    m.iou = ratio_or_undefined(c.tp, c.tp + c.fp + c.fn);
    m.tp_pct = percent_or_undefined(c.tp, c.tp + c.fn);
    m.fn_pct = percent_or_undefined(c.fn, c.tp + c.fn);
    m.fp_pct = percent_or_undefined(c.fp, c.fp + c.tn);
    m.reference_positive = c.reference_positive();
    m.reference_negative = c.reference_negative();
    return m;
}

DeltaSet delta_set(const MetricSet& baseline, const MetricSet& perturbed) {
    if (baseline.reference_positive != perturbed.reference_positive ||
        baseline.reference_negative != perturbed.reference_negative) {
        throw MetricError("reference population mismatch: baseline tp+fn=" +
                          std::to_string(baseline.reference_positive) + " fp+tn=" +
                          std::to_string(baseline.reference_negative) + ", perturbed tp+fn=" +
                          std::to_string(perturbed.reference_positive) + " fp+tn=" +
                          std::to_string(perturbed.reference_negative));
    }
    DeltaSet d;
    d.tp_drop_pct = difference(baseline.tp_pct, perturbed.tp_pct);
    d.fp_increase_pct = difference(perturbed.fp_pct, baseline.fp_pct);
    d.fn_increase_pct = difference(perturbed.fn_pct, baseline.fn_pct);
    return d;
}

ConfusionCounts aggregate(std::span<const ConfusionCounts> counts) {
    if (counts.empty()) {
        throw MetricError("aggregate of an empty sequence");
    }
    return std::accumulate(counts.begin(), counts.end(), ConfusionCounts{});
}

}  // namespace xaieval
