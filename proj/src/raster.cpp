#include "xaieval/raster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xaieval/error.hpp"
#include "xaieval/simd/kernels.hpp"

namespace xaieval {

ImageRaster::ImageRaster(std::size_t width, std::size_t height, std::size_t channels,
                         std::vector<std::uint8_t> samples)
    : width_(width), height_(height), channels_(channels), samples_(std::move(samples)) {
    if (width_ == 0 || height_ == 0) {
        throw RasterError("image has zero dimension");
    }
    if (channels_ != 1 && channels_ != 3) {
        throw RasterError("unsupported channel count " + std::to_string(channels_));
    }
    if (samples_.size() != width_ * height_ * channels_) {
        throw RasterError("image sample count does not match dimensions");
    }
}

std::string_view to_string(MaskRole role) noexcept {
    switch (role) {
        case MaskRole::GroundTruth: return "ground-truth";
        case MaskRole::Prediction: return "prediction";
        case MaskRole::Relevance: return "relevance";
        case MaskRole::Visibility: return "visibility";
    }
    return "unknown";
}

BinaryMask::BinaryMask(std::size_t width, std::size_t height, std::vector<std::uint8_t> bits,
                       MaskRole role)
    : width_(width), height_(height), bits_(std::move(bits)), role_(role) {
    if (width_ == 0 || height_ == 0) {
        throw RasterError("mask has zero dimension");
    }
    if (bits_.size() != width_ * height_) {
        throw RasterError("mask bit count does not match dimensions");
    }
    for (auto& b : bits_) {
        b = b != 0 ? 1 : 0;
    }
}

BinaryMask BinaryMask::filled(std::size_t width, std::size_t height, bool value, MaskRole role) {
    return BinaryMask(width, height, std::vector<std::uint8_t>(width * height, value ? 1 : 0), role);
}

std::size_t BinaryMask::positive_count() const noexcept {
    return simd::active_kernels().count_nonzero(bits_.data(), bits_.size());
}

BinaryMask BinaryMask::with_role(MaskRole role) const {
    BinaryMask copy = *this;
    copy.role_ = role;
    return copy;
}

Heatmap::Heatmap(std::size_t width, std::size_t height, std::vector<float> values,
                 std::string method_id)
    : width_(width), height_(height), values_(std::move(values)), method_id_(std::move(method_id)) {
    if (width_ == 0 || height_ == 0) {
        throw RasterError("heatmap has zero dimension");
    }
    if (values_.size() != width_ * height_) {
        throw RasterError("heatmap value count does not match dimensions");
    }
    for (float v : values_) {
        if (std::isnan(v)) {
            throw RasterError("heatmap value is NaN");
        }
        if (v < 0.0f || v > 1.0f) {
            throw RasterError("heatmap value out of range: " + std::to_string(v));
        }
    }
}

float Heatmap::max_value() const noexcept {
    return *std::max_element(values_.begin(), values_.end());
}

void require_same_grid(std::size_t w1, std::size_t h1, std::size_t w2, std::size_t h2,
                       std::string_view what) {
    if (w1 != w2 || h1 != h2) {
        throw DimensionError(std::string(what) + ": dimension mismatch " + std::to_string(w1) +
                             "x" + std::to_string(h1) + " vs " + std::to_string(w2) + "x" +
                             std::to_string(h2));
    }
}

}  // namespace xaieval
