#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "xaieval/raster.hpp"

namespace xaieval {

// Heatmap cut-off in [0, 1]. A pixel is highlighted when its value is >= the
// threshold, so 0 highlights everything.
class Threshold {
public:
    explicit Threshold(double value);
    double value() const noexcept { return value_; }
    friend auto operator<=>(const Threshold&, const Threshold&) = default;

private:
    double value_;
};

enum class Strategy {
    BackgroundOnly,   // S1: hide highlighted pixels
    HighlightedOnly,  // S2: keep only highlighted pixels
    XaiGt,            // S3: highlighted pixels plus ground-truth positives
    XaiPm,            // S3: highlighted pixels plus predicted-mask positives
};

inline constexpr Strategy kAllStrategies[] = {Strategy::BackgroundOnly, Strategy::HighlightedOnly,
                                              Strategy::XaiGt, Strategy::XaiPm};

// Short ids used on the command line and in file paths: s1, s2, s3gt, s3pm.
std::string_view strategy_id(Strategy s) noexcept;
// Display label as used in report headings.
std::string_view strategy_label(Strategy s) noexcept;
// Accepts the short id (case-insensitive). Throws ConfigError otherwise.
Strategy parse_strategy(std::string_view text);

constexpr bool needs_reference(Strategy s) noexcept {
    return s == Strategy::XaiGt || s == Strategy::XaiPm;
}

// Sample written to every channel of a hidden pixel.
struct FillPolicy {
    std::uint8_t sample = 0;
    friend bool operator==(const FillPolicy&, const FillPolicy&) = default;
};

BinaryMask threshold_heatmap(const Heatmap& heatmap, Threshold t);

// Pixels left visible by `strategy`. `reference` must be the GT mask for
// XaiGt and the predicted mask for XaiPm, and absent otherwise.
BinaryMask visible_set(Strategy strategy, const BinaryMask& relevance,
                       const std::optional<BinaryMask>& reference = std::nullopt);

ImageRaster apply_visibility(const ImageRaster& image, const BinaryMask& visibility, FillPolicy fill);

// threshold -> visible_set -> apply_visibility in one call.
ImageRaster perturb_image(const ImageRaster& image, const Heatmap& heatmap, Threshold t,
                          Strategy strategy, FillPolicy fill,
                          const std::optional<BinaryMask>& reference = std::nullopt);

}  // namespace xaieval
