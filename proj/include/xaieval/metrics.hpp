#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "xaieval/exact.hpp"
#include "xaieval/raster.hpp"

namespace xaieval {

// Pixel tallies of one prediction compared against one reference mask.
struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
    std::uint64_t reference_positive() const noexcept { return tp + fn; }
    std::uint64_t reference_negative() const noexcept { return fp + tn; }
    std::uint64_t predicted_positive() const noexcept { return tp + fp; }

    ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        tn += o.tn;
        return *this;
    }
    friend ConfusionCounts operator+(ConfusionCounts a, const ConfusionCounts& b) noexcept {
        return a += b;
    }
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// nullopt marks a metric whose denominator is zero.
using Measure = std::optional<Exact>;

struct MetricSet {
    Measure precision;
    Measure recall;
    Measure f1;
    Measure iou;
    Measure tp_pct;  // percent of reference-positive pixels
    Measure fn_pct;  // percent of reference-positive pixels
    Measure fp_pct;  // percent of reference-negative pixels

    // Population sizes the percentages were taken over.
    std::uint64_t reference_positive = 0;
    std::uint64_t reference_negative = 0;

    friend bool operator==(const MetricSet&, const MetricSet&) = default;
};

// Signed change of each percentage relative to the unperturbed baseline.
struct DeltaSet {
    Measure tp_drop_pct;      // baseline tp_pct - perturbed tp_pct
    Measure fp_increase_pct;  // perturbed fp_pct - baseline fp_pct
    Measure fn_increase_pct;  // perturbed fn_pct - baseline fn_pct

    friend bool operator==(const DeltaSet&, const DeltaSet&) = default;
};

ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& reference);

MetricSet metric_set(const ConfusionCounts& c);

// Throws MetricError when the two sets were taken over different reference
// populations.
DeltaSet delta_set(const MetricSet& baseline, const MetricSet& perturbed);

// Component-wise sum. Throws MetricError on an empty sequence.
ConfusionCounts aggregate(std::span<const ConfusionCounts> counts);

}  // namespace xaieval
