#include "xaieval/simd/kernels.hpp"

#include <cmath>
#include <limits>

namespace xaieval::simd {
namespace {

void threshold_ge(const float* values, std::size_t n, float threshold, std::uint8_t* out) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = values[i] >= threshold ? 1 : 0;
    }
}

PixelTally tally(const std::uint8_t* pred, const std::uint8_t* ref, std::size_t n) {
    PixelTally t;
    for (std::size_t i = 0; i < n; ++i) {
        const bool p = pred[i] != 0;
        const bool r = ref[i] != 0;
        t.both += p && r;
        t.pred_only += p && !r;
        t.ref_only += !p && r;
        t.neither += !p && !r;
    }
    return t;
}

std::size_t count_nonzero(const std::uint8_t* bits, std::size_t n) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        count += bits[i] != 0;
    }
    return count;
}

void mask_not(const std::uint8_t* in, std::size_t n, std::uint8_t* out) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = in[i] == 0 ? 1 : 0;
    }
}

void mask_or(const std::uint8_t* a, const std::uint8_t* b, std::size_t n, std::uint8_t* out) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = (a[i] != 0 || b[i] != 0) ? 1 : 0;
    }
}

void select_fill(const std::uint8_t* samples, const std::uint8_t* vis, std::size_t pixels,
                 std::size_t channels, std::uint8_t fill, std::uint8_t* out) {
    for (std::size_t p = 0; p < pixels; ++p) {
        const bool keep = vis[p] != 0;
        for (std::size_t c = 0; c < channels; ++c) {
            const std::size_t i = p * channels + c;
            out[i] = keep ? samples[i] : fill;
        }
    }
}

void visible_and_probable(const std::uint8_t* samples, const float* prob, std::size_t pixels,
                          std::size_t channels, std::uint8_t fill, float prob_cut,
                          std::uint8_t* out) {
    for (std::size_t p = 0; p < pixels; ++p) {
        bool masked = true;
        for (std::size_t c = 0; c < channels; ++c) {
            masked = masked && samples[p * channels + c] == fill;
        }
        out[p] = (prob[p] >= prob_cut && !masked) ? 1 : 0;
    }
}

}  // namespace

const KernelTable& scalar_kernels() noexcept {
    static constexpr KernelTable table{
        "scalar",     &threshold_ge, &tally,       &count_nonzero,
        &mask_not,    &mask_or,      &select_fill, &visible_and_probable,
    };
    return table;
}

float float_threshold(double t) noexcept {
    auto f = static_cast<float>(t);
    if (static_cast<double>(f) < t) {
        f = std::nextafter(f, std::numeric_limits<float>::infinity());
    }
    return f;
}

}  // namespace xaieval::simd
