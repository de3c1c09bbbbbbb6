#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xaieval {

// 8-bit raster with 1 (gray) or 3 (RGB) interleaved channels, row-major.
class ImageRaster {
public:
    ImageRaster(std::size_t width, std::size_t height, std::size_t channels,
                std::vector<std::uint8_t> samples);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t channels() const noexcept { return channels_; }
    std::size_t pixel_count() const noexcept { return width_ * height_; }
    std::span<const std::uint8_t> samples() const noexcept { return samples_; }

    std::uint8_t at(std::size_t x, std::size_t y, std::size_t c) const {
        return samples_[(y * width_ + x) * channels_ + c];
    }

    friend bool operator==(const ImageRaster&, const ImageRaster&) = default;

private:
    std::size_t width_;
    std::size_t height_;
    std::size_t channels_;
    std::vector<std::uint8_t> samples_;
};

enum class MaskRole { GroundTruth, Prediction, Relevance, Visibility };

std::string_view to_string(MaskRole role) noexcept;

// One boolean per pixel, stored as bytes holding 0 or 1 so that the SIMD
// kernels can operate on the buffer directly.
class BinaryMask {
public:
    // Any nonzero input byte is treated as positive and stored as 1.
    BinaryMask(std::size_t width, std::size_t height, std::vector<std::uint8_t> bits,
               MaskRole role = MaskRole::Prediction);

    static BinaryMask filled(std::size_t width, std::size_t height, bool value,
                             MaskRole role = MaskRole::Prediction);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept { return width_ * height_; }
    MaskRole role() const noexcept { return role_; }
    std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    bool at(std::size_t x, std::size_t y) const { return bits_[y * width_ + x] != 0; }
    bool operator[](std::size_t i) const { return bits_[i] != 0; }

    std::size_t positive_count() const noexcept;
    std::size_t negative_count() const noexcept { return pixel_count() - positive_count(); }

    BinaryMask with_role(MaskRole role) const;

    // Equality compares geometry and bits; the role tag is metadata.
    friend bool operator==(const BinaryMask& a, const BinaryMask& b) noexcept {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.bits_ == b.bits_;
    }

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<std::uint8_t> bits_;
    MaskRole role_;
};

// Saliency field with every value in [0, 1].
class Heatmap {
public:
    // Throws RasterError on NaN or values outside [0, 1]; never clamps.
    Heatmap(std::size_t width, std::size_t height, std::vector<float> values,
            std::string method_id = {});

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept { return width_ * height_; }
    std::span<const float> values() const noexcept { return values_; }
    const std::string& method_id() const noexcept { return method_id_; }

    float at(std::size_t x, std::size_t y) const { return values_[y * width_ + x]; }
    float max_value() const noexcept;

    friend bool operator==(const Heatmap&, const Heatmap&) = default;

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<float> values_;
    std::string method_id_;
};

// Throws DimensionError naming `what` when the grids differ.
void require_same_grid(std::size_t w1, std::size_t h1, std::size_t w2, std::size_t h2,
                       std::string_view what);

template <typename A, typename B>
void require_same_grid(const A& a, const B& b, std::string_view what) {
    require_same_grid(a.width(), a.height(), b.width(), b.height(), what);
}

}  // namespace xaieval
