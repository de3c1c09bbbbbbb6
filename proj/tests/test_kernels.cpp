#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>

#include "xaieval/simd/kernels.hpp"

using namespace xaieval::simd;

namespace {

struct Variants : ::testing::Test {
    const KernelTable& scalar = scalar_kernels();
    const KernelTable* wide = avx2_kernels();

    void SetUp() override {
        if (!wide) {
            GTEST_SKIP() << "host lacks AVX2";
        }
    }
};

std::vector<std::uint8_t> random_bytes(std::size_t n, std::mt19937_64& rng, bool any_nonzero) {
    std::uniform_int_distribution<int> d(0, 255);
    std::bernoulli_distribution coin(0.5);
    std::vector<std::uint8_t> v(n);
    for (auto& x : v) {
        x = any_nonzero ? static_cast<std::uint8_t>(coin(rng) ? d(rng) : 0) : coin(rng);
    }
    return v;
}

// Lengths around vector widths, plus odd tails.
const std::size_t kLengths[] = {0, 1, 7, 15, 16, 17, 31, 32, 33, 63, 64, 65, 100, 255, 256, 1000, 4099};

}  // namespace

TEST(FloatThreshold, MatchesDoubleComparison) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> td(0.0, 1.0);
    std::uniform_real_distribution<float> vd(0.0f, 1.0f);
    const double fixed[] = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 0.1, 1.0 / 3.0};
    std::vector<double> ts(std::begin(fixed), std::end(fixed));
    for (int i = 0; i < 200; ++i) {
        ts.push_back(td(rng));
    }
    for (double t : ts) {
        const float f = float_threshold(t);
        const float below = std::nextafter(f, -1.0f);
        const float above = std::nextafter(f, 2.0f);
        for (float v : {f, below, above, static_cast<float>(t), vd(rng)}) {
            EXPECT_EQ(v >= f, static_cast<double>(v) >= t) << "t=" << t << " v=" << v;
        }
    }
}

TEST(ScalarKernels, AgainstPlainLoops) {
    const KernelTable& k = scalar_kernels();
    std::mt19937_64 rng(2);
    for (std::size_t n : kLengths) {
        const auto a = random_bytes(n, rng, true), b = random_bytes(n, rng, true);
        PixelTally expect;
        std::size_t nz = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool p = a[i] != 0, r = b[i] != 0;
            expect.both += p && r;
            expect.pred_only += p && !r;
            expect.ref_only += !p && r;
            expect.neither += !p && !r;
            nz += p;
        }
        EXPECT_EQ(k.tally(a.data(), b.data(), n), expect);
        EXPECT_EQ(k.count_nonzero(a.data(), n), nz);
        std::vector<std::uint8_t> out(n);
        k.mask_not(a.data(), n, out.data());
        for (std::size_t i = 0; i < n; ++i) {
            ASSERT_EQ(out[i], a[i] == 0 ? 1 : 0);
        }
        k.mask_or(a.data(), b.data(), n, out.data());
        for (std::size_t i = 0; i < n; ++i) {
            ASSERT_EQ(out[i], (a[i] || b[i]) ? 1 : 0);
        }
    }
}

TEST_F(Variants, ThresholdGe) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<float> v(0.0f, 1.0f);
    for (std::size_t n : kLengths) {
        std::vector<float> values(n);
        for (auto& x : values) {
            x = (rng() % 4 == 0) ? static_cast<float>(rng() % 11) / 10.0f : v(rng);
        }
        for (double t : {0.0, 0.2, 0.4, 0.5, 0.6, 0.8, 1.0}) {
            const float ft = float_threshold(t);
            std::vector<std::uint8_t> s(n, 9), w(n, 9);
            scalar.threshold_ge(values.data(), n, ft, s.data());
            wide->threshold_ge(values.data(), n, ft, w.data());
            ASSERT_EQ(s, w) << "n=" << n << " t=" << t;
        }
    }
}

TEST_F(Variants, TallyCountNotOr) {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 20; ++rep) {
        for (std::size_t n : kLengths) {
            const auto a = random_bytes(n, rng, rep % 2 == 0);
            const auto b = random_bytes(n, rng, rep % 2 == 0);
            ASSERT_EQ(scalar.tally(a.data(), b.data(), n), wide->tally(a.data(), b.data(), n));
            ASSERT_EQ(scalar.count_nonzero(a.data(), n), wide->count_nonzero(a.data(), n));
            std::vector<std::uint8_t> s(n), w(n);
            scalar.mask_not(a.data(), n, s.data());
            wide->mask_not(a.data(), n, w.data());
            ASSERT_EQ(s, w);
            scalar.mask_or(a.data(), b.data(), n, s.data());
            wide->mask_or(a.data(), b.data(), n, w.data());
            ASSERT_EQ(s, w);
        }
    }
}

TEST_F(Variants, TallyLargeCountsDoNotWrap) {
    // Longer than any 8-bit lane accumulator could hold.
    const std::size_t n = 300000;
    std::vector<std::uint8_t> a(n, 1), b(n, 1);
    EXPECT_EQ(wide->tally(a.data(), b.data(), n).both, n);
    EXPECT_EQ(wide->count_nonzero(a.data(), n), n);
}

TEST_F(Variants, SelectFill) {
    std::mt19937_64 rng(5);
    for (std::size_t channels : {1u, 3u}) {
        for (std::size_t n : kLengths) {
            const auto samples = random_bytes(n * channels, rng, true);
            const auto vis = random_bytes(n, rng, true);
            for (std::uint8_t fill : {0, 17, 255}) {
                std::vector<std::uint8_t> s(n * channels), w(n * channels);
                scalar.select_fill(samples.data(), vis.data(), n, channels, fill, s.data());
                wide->select_fill(samples.data(), vis.data(), n, channels, fill, w.data());
                ASSERT_EQ(s, w) << "channels=" << channels << " n=" << n;
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t c = 0; c < channels; ++c) {
                        ASSERT_EQ(s[i * channels + c], vis[i] ? samples[i * channels + c] : fill);
                    }
                }
            }
        }
    }
}

TEST_F(Variants, VisibleAndProbable) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<float> v(0.0f, 1.0f);
    for (std::size_t channels : {1u, 3u}) {
        for (std::size_t n : kLengths) {
            auto samples = random_bytes(n * channels, rng, true);
            // Plant fully filled pixels and partially filled ones.
            for (std::size_t i = 0; i < n; i += 3) {
                for (std::size_t c = 0; c < channels; ++c) {
                    samples[i * channels + c] = (i % 2 == 0 || c == 0) ? 0 : 5;
                }
            }
            std::vector<float> prob(n);
            for (auto& x : prob) {
                x = rng() % 5 == 0 ? 0.5f : v(rng);
            }
            std::vector<std::uint8_t> s(n), w(n);
            scalar.visible_and_probable(samples.data(), prob.data(), n, channels, 0, 0.5f, s.data());
            wide->visible_and_probable(samples.data(), prob.data(), n, channels, 0, 0.5f, w.data());
            ASSERT_EQ(s, w);
            for (std::size_t i = 0; i < n; ++i) {
                bool visible = false;
                for (std::size_t c = 0; c < channels; ++c) {
                    visible = visible || samples[i * channels + c] != 0;
                }
                ASSERT_EQ(s[i], (prob[i] >= 0.5f && visible) ? 1 : 0);
            }
        }
    }
}

TEST(Dispatch, EnvironmentForcesScalar) {
    const char* env = std::getenv("XAIEVAL_SIMD");
    if (env && std::string(env) == "scalar") {
        EXPECT_EQ(active_kernels().name, scalar_kernels().name);
    } else if (avx2_kernels()) {
        EXPECT_EQ(active_kernels().name, avx2_kernels()->name);
    } else {
        EXPECT_EQ(active_kernels().name, scalar_kernels().name);
    }
}
