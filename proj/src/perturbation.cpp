#include "xaieval/perturbation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "xaieval/error.hpp"
#include "xaieval/simd/kernels.hpp"

namespace xaieval {

Threshold::Threshold(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw ConfigError("threshold must lie in [0, 1], got " + std::to_string(value));
    }
}

std::string_view strategy_id(Strategy s) noexcept {
    switch (s) {
        case Strategy::BackgroundOnly: return "s1";
        case Strategy::HighlightedOnly: return "s2";
        case Strategy::XaiGt: return "s3gt";
        case Strategy::XaiPm: return "s3pm";
    }
    return "?";
}

std::string_view strategy_label(Strategy s) noexcept {
    switch (s) {
        case Strategy::BackgroundOnly: return "S1 (Background Only)";
        case Strategy::HighlightedOnly: return "S2 (Highlighted Only)";
        case Strategy::XaiGt: return "S3 (XAI-GT)";
        case Strategy::XaiPm: return "S3 (XAI-PM)";
    }
    return "?";
}

Strategy parse_strategy(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (Strategy s : kAllStrategies) {
        if (lower == strategy_id(s)) {
            return s;
        }
    }
    throw ConfigError("unknown strategy '" + std::string(text) + "' (expected s1, s2, s3gt or s3pm)");
}

BinaryMask threshold_heatmap(const Heatmap& heatmap, Threshold t) {
    std::vector<std::uint8_t> bits(heatmap.pixel_count());
    simd::active_kernels().threshold_ge(heatmap.values().data(), bits.size(),
                                        simd::float_threshold(t.value()), bits.data());
    return BinaryMask(heatmap.width(), heatmap.height(), std::move(bits), MaskRole::Relevance);
}

BinaryMask visible_set(Strategy strategy, const BinaryMask& relevance,
                       const std::optional<BinaryMask>& reference) {
    const auto& k = simd::active_kernels();
    const std::size_t n = relevance.pixel_count();
    std::vector<std::uint8_t> out(n);

    if (needs_reference(strategy) != reference.has_value()) {
        throw ConfigError(std::string("strategy ") + std::string(strategy_id(strategy)) +
                          (reference ? " takes no reference mask" : " requires a reference mask"));
    }
    switch (strategy) {
        case Strategy::BackgroundOnly:
            k.mask_not(relevance.bits().data(), n, out.data());
            break;
        case Strategy::HighlightedOnly:
            std::copy(relevance.bits().begin(), relevance.bits().end(), out.begin());
            break;
        case Strategy::XaiGt:
        case Strategy::XaiPm:
            require_same_grid(relevance, *reference, "relevance vs reference mask");
            k.mask_or(relevance.bits().data(), reference->bits().data(), n, out.data());
            break;
    }
    return BinaryMask(relevance.width(), relevance.height(), std::move(out), MaskRole::Visibility);
}

ImageRaster apply_visibility(const ImageRaster& image, const BinaryMask& visibility, FillPolicy fill) {
    require_same_grid(image, visibility, "image vs visibility mask");
    std::vector<std::uint8_t> out(image.samples().size());
    simd::active_kernels().select_fill(image.samples().data(), visibility.bits().data(),
                                       image.pixel_count(), image.channels(), fill.sample,
                                       out.data());
    return ImageRaster(image.width(), image.height(), image.channels(), std::move(out));
}

ImageRaster perturb_image(const ImageRaster& image, const Heatmap& heatmap, Threshold t,
                          Strategy strategy, FillPolicy fill,
                          const std::optional<BinaryMask>& reference) {
    require_same_grid(image, heatmap, "image vs heatmap");
    const BinaryMask relevance = threshold_heatmap(heatmap, t);
    return apply_visibility(image, visible_set(strategy, relevance, reference), fill);
}

}  // namespace xaieval
