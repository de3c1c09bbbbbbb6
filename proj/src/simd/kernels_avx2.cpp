#include "xaieval/simd/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#define XAIEVAL_HAVE_AVX2_KERNELS 1
#include <immintrin.h>
#endif

namespace xaieval::simd {

#if XAIEVAL_HAVE_AVX2_KERNELS
namespace {

#define XAIEVAL_AVX2 __attribute__((target("avx2,popcnt")))

// Four 8-float compare results packed into 32 bytes of 0x00/0xFF, in
// element order.
XAIEVAL_AVX2 inline __m256i pack_compare32(__m256 c0, __m256 c1, __m256 c2, __m256 c3) {
    const __m256i p01 = _mm256_packs_epi32(_mm256_castps_si256(c0), _mm256_castps_si256(c1));
    const __m256i p23 = _mm256_packs_epi32(_mm256_castps_si256(c2), _mm256_castps_si256(c3));
    const __m256i bytes = _mm256_packs_epi16(p01, p23);
    return _mm256_permutevar8x32_epi32(bytes, _mm256_setr_epi32(0, 4, 1, 5, 2, 6, 3, 7));
}

XAIEVAL_AVX2 inline __m256i ge32(const float* v, __m256 t) {
    return pack_compare32(_mm256_cmp_ps(_mm256_loadu_ps(v), t, _CMP_GE_OQ),
                          _mm256_cmp_ps(_mm256_loadu_ps(v + 8), t, _CMP_GE_OQ),
                          _mm256_cmp_ps(_mm256_loadu_ps(v + 16), t, _CMP_GE_OQ),
                          _mm256_cmp_ps(_mm256_loadu_ps(v + 24), t, _CMP_GE_OQ));
}

XAIEVAL_AVX2 inline std::uint32_t nonzero_bits(const std::uint8_t* p) {
    const __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p));
    const __m256i z = _mm256_cmpeq_epi8(x, _mm256_setzero_si256());
    return ~static_cast<std::uint32_t>(_mm256_movemask_epi8(z));
}

XAIEVAL_AVX2 void threshold_ge(const float* values, std::size_t n, float threshold,
                               std::uint8_t* out) {
    const __m256 t = _mm256_set1_ps(threshold);
    const __m256i one = _mm256_set1_epi8(1);
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        const __m256i m = _mm256_and_si256(ge32(values + i, t), one);
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i), m);
    }
    scalar_kernels().threshold_ge(values + i, n - i, threshold, out + i);
}

XAIEVAL_AVX2 PixelTally tally(const std::uint8_t* pred, const std::uint8_t* ref, std::size_t n) {
    PixelTally t;
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        const std::uint32_t p = nonzero_bits(pred + i);
        const std::uint32_t r = nonzero_bits(ref + i);
        t.both += static_cast<std::uint64_t>(_mm_popcnt_u32(p & r));
        t.pred_only += static_cast<std::uint64_t>(_mm_popcnt_u32(p & ~r));
        t.ref_only += static_cast<std::uint64_t>(_mm_popcnt_u32(~p & r));
    }
    const PixelTally tail = scalar_kernels().tally(pred + i, ref + i, n - i);
    t.both += tail.both;
    t.pred_only += tail.pred_only;
    t.ref_only += tail.ref_only;
    t.neither = n - t.both - t.pred_only - t.ref_only;
    return t;
}

XAIEVAL_AVX2 std::size_t count_nonzero(const std::uint8_t* bits, std::size_t n) {
    std::size_t count = 0;
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        count += static_cast<std::size_t>(_mm_popcnt_u32(nonzero_bits(bits + i)));
    }
    return count + scalar_kernels().count_nonzero(bits + i, n - i);
}

XAIEVAL_AVX2 void mask_not(const std::uint8_t* in, std::size_t n, std::uint8_t* out) {
    const __m256i zero = _mm256_setzero_si256();
    const __m256i one = _mm256_set1_epi8(1);
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        const __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(in + i));
        const __m256i r = _mm256_and_si256(_mm256_cmpeq_epi8(x, zero), one);
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i), r);
    }
    scalar_kernels().mask_not(in + i, n - i, out + i);
}

XAIEVAL_AVX2 void mask_or(const std::uint8_t* a, const std::uint8_t* b, std::size_t n,
                          std::uint8_t* out) {
    const __m256i zero = _mm256_setzero_si256();
    const __m256i one = _mm256_set1_epi8(1);
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        const __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
        const __m256i y = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
        const __m256i empty = _mm256_cmpeq_epi8(_mm256_or_si256(x, y), zero);
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i), _mm256_andnot_si256(empty, one));
    }
    scalar_kernels().mask_or(a + i, b + i, n - i, out + i);
}

XAIEVAL_AVX2 void select_fill(const std::uint8_t* samples, const std::uint8_t* vis,
                              std::size_t pixels, std::size_t channels, std::uint8_t fill,
                              std::uint8_t* out) {
    std::size_t p = 0;
    if (channels == 1) {
        const __m256i zero = _mm256_setzero_si256();
        const __m256i fv = _mm256_set1_epi8(static_cast<char>(fill));
        for (; p + 32 <= pixels; p += 32) {
            const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(vis + p));
            const __m256i s = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(samples + p));
            const __m256i hidden = _mm256_cmpeq_epi8(v, zero);
            _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + p),
                                _mm256_blendv_epi8(s, fv, hidden));
        }
    } else if (channels == 3) {
        // 16 pixels -> 48 interleaved samples; spread each pixel's flag over
        // its three channel bytes.
        const __m128i zero = _mm_setzero_si128();
        const __m128i fv = _mm_set1_epi8(static_cast<char>(fill));
        const __m128i spread0 = _mm_setr_epi8(0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3, 4, 4, 4, 5);
        const __m128i spread1 = _mm_setr_epi8(5, 5, 6, 6, 6, 7, 7, 7, 8, 8, 8, 9, 9, 9, 10, 10);
        const __m128i spread2 =
            _mm_setr_epi8(10, 11, 11, 11, 12, 12, 12, 13, 13, 13, 14, 14, 14, 15, 15, 15);
        for (; p + 16 <= pixels; p += 16) {
            const __m128i v = _mm_loadu_si128(reinterpret_cast<const __m128i*>(vis + p));
            const __m128i hidden = _mm_cmpeq_epi8(v, zero);
            const std::uint8_t* s = samples + p * 3;
            std::uint8_t* o = out + p * 3;
            const __m128i h[3] = {_mm_shuffle_epi8(hidden, spread0),
                                  _mm_shuffle_epi8(hidden, spread1),
                                  _mm_shuffle_epi8(hidden, spread2)};
            for (int k = 0; k < 3; ++k) {
                const __m128i x = _mm_loadu_si128(reinterpret_cast<const __m128i*>(s + 16 * k));
                _mm_storeu_si128(reinterpret_cast<__m128i*>(o + 16 * k),
                                 _mm_blendv_epi8(x, fv, h[k]));
            }
        }
    }
    scalar_kernels().select_fill(samples + p * channels, vis + p, pixels - p, channels, fill,
                                 out + p * channels);
}

XAIEVAL_AVX2 void visible_and_probable(const std::uint8_t* samples, const float* prob,
                                       std::size_t pixels, std::size_t channels,
                                       std::uint8_t fill, float prob_cut, std::uint8_t* out) {
    std::size_t p = 0;
    if (channels == 1) {
        const __m256 cut = _mm256_set1_ps(prob_cut);
        const __m256i fv = _mm256_set1_epi8(static_cast<char>(fill));
        const __m256i one = _mm256_set1_epi8(1);
        for (; p + 32 <= pixels; p += 32) {
            const __m256i s = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(samples + p));
            const __m256i masked = _mm256_cmpeq_epi8(s, fv);
            const __m256i keep = _mm256_andnot_si256(masked, ge32(prob + p, cut));
            _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + p), _mm256_and_si256(keep, one));
        }
    }
    scalar_kernels().visible_and_probable(samples + p * channels, prob + p, pixels - p, channels,
                                          fill, prob_cut, out + p);
}

#undef XAIEVAL_AVX2

}  // namespace

const KernelTable* avx2_kernels() noexcept {
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt");
    static constexpr KernelTable table{
        "avx2",    &threshold_ge, &tally,       &count_nonzero,
        &mask_not, &mask_or,      &select_fill, &visible_and_probable,
    };
    return supported ? &table : nullptr;
}

#else

const KernelTable* avx2_kernels() noexcept { return nullptr; }

#endif

}  // namespace xaieval::simd
