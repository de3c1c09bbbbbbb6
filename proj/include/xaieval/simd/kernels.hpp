#pragma once

// Data-parallel inner loops of the harness. Every kernel has a scalar
// reference implementation; wider variants must produce bit-identical
// output and are selected once at runtime from the host CPU features.
//
// Mask buffers hold one byte per pixel. Inputs may use any nonzero byte for
// "positive"; outputs always use exactly 0 or 1.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace xaieval::simd {

struct PixelTally {
    std::uint64_t both = 0;       // pred and ref positive
    std::uint64_t pred_only = 0;  // pred positive, ref negative
    std::uint64_t ref_only = 0;   // pred negative, ref positive
    std::uint64_t neither = 0;

    friend bool operator==(const PixelTally&, const PixelTally&) = default;
};

struct KernelTable {
    std::string_view name;

    // out[i] = values[i] >= threshold
    void (*threshold_ge)(const float* values, std::size_t n, float threshold, std::uint8_t* out);

    PixelTally (*tally)(const std::uint8_t* pred, const std::uint8_t* ref, std::size_t n);

    std::size_t (*count_nonzero)(const std::uint8_t* bits, std::size_t n);

    // out[i] = !in[i]
    void (*mask_not)(const std::uint8_t* in, std::size_t n, std::uint8_t* out);

    // out[i] = a[i] || b[i]
    void (*mask_or)(const std::uint8_t* a, const std::uint8_t* b, std::size_t n,
                    std::uint8_t* out);

    // Copies pixels where vis is positive, writes `fill` to every channel
    // elsewhere. channels is 1 or 3; samples/out hold pixels * channels bytes.
    void (*select_fill)(const std::uint8_t* samples, const std::uint8_t* vis,
                        std::size_t pixels, std::size_t channels, std::uint8_t fill,
                        std::uint8_t* out);

    // out[i] = prob[i] >= prob_cut && some channel of pixel i differs from fill
    void (*visible_and_probable)(const std::uint8_t* samples, const float* prob,
                                 std::size_t pixels, std::size_t channels, std::uint8_t fill,
                                 float prob_cut, std::uint8_t* out);
};

const KernelTable& scalar_kernels() noexcept;

// nullptr when the build or the host CPU lacks AVX2.
const KernelTable* avx2_kernels() noexcept;

// The table used by the library. Picks the widest supported variant unless
// the XAIEVAL_SIMD environment variable is set to "scalar".
const KernelTable& active_kernels() noexcept;

// Smallest float f with (double)f >= t, so that `v >= f` on floats agrees
// with `(double)v >= t` for every float v.
float float_threshold(double t) noexcept;

}  // namespace xaieval::simd
