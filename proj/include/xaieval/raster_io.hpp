#pragma once

// On-disk encodings:
//   images   8-bit PNG, gray or RGB (no alpha, no palette)
//   masks    8-bit single-channel PNG; nonzero reads as positive, writes 255
//   heatmaps NPY v1.0 '<f4' C-order (H, W), or 16-bit gray PNG as sample/65535
//
// Writers are deterministic: identical rasters produce identical bytes.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "xaieval/raster.hpp"

namespace xaieval {

enum class HeatmapEncoding { Npy, Png16 };

ImageRaster load_image(const std::filesystem::path& path);
BinaryMask load_mask(const std::filesystem::path& path, MaskRole role = MaskRole::Prediction);

// Format is detected from the file magic, not the extension.
Heatmap load_heatmap(const std::filesystem::path& path, std::string method_id = {});

void store_image(const ImageRaster& image, const std::filesystem::path& path);
void store_mask(const BinaryMask& mask, const std::filesystem::path& path);
void store_heatmap(const Heatmap& heatmap, const std::filesystem::path& path,
                   HeatmapEncoding encoding);

// In-memory codecs behind the file functions.
std::vector<std::uint8_t> encode_image_png(const ImageRaster& image);
std::vector<std::uint8_t> encode_mask_png(const BinaryMask& mask);
std::vector<std::uint8_t> encode_heatmap_png16(const Heatmap& heatmap);
std::vector<std::uint8_t> encode_heatmap_npy(const Heatmap& heatmap);

ImageRaster decode_image_png(std::span<const std::uint8_t> bytes);
BinaryMask decode_mask_png(std::span<const std::uint8_t> bytes, MaskRole role = MaskRole::Prediction);
Heatmap decode_heatmap(std::span<const std::uint8_t> bytes, std::string method_id = {});

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
// Writes through a temporary sibling and renames, creating parent directories.
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace xaieval
