#include <gtest/gtest.h>

#include <algorithm>

#include "oracle.hpp"
#include "paper_tables.hpp"
#include "xaieval/error.hpp"
#include "xaieval/metrics.hpp"

using namespace xaieval;
using testkit::Bits;

namespace {

ConfusionCounts counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn, std::uint64_t tn = 0) {
    return {tp, fp, fn, tn};
}

// m == p / q, checked by cross-multiplication.
::testing::AssertionResult is_ratio(const Measure& m, std::uint64_t p, std::uint64_t q) {
    if (!m) {
        return ::testing::AssertionFailure() << "undefined";
    }
    if (m->num() * static_cast<Exact::Int>(q) == static_cast<Exact::Int>(p) * m->den()) {
        return ::testing::AssertionSuccess();
    }
    return ::testing::AssertionFailure() << m->to_double() << " != " << p << "/" << q;
}

double hundredths(int v) {
    return v / 100.0;
}

}  // namespace

TEST(Confusion, IdentityAndDisjoint) {
    std::mt19937_64 rng(1);
    const BinaryMask m = testkit::random_mask(13, 11, rng);
    const ConfusionCounts same = confusion(m, m);
    EXPECT_EQ(same.fp, 0u);
    EXPECT_EQ(same.fn, 0u);
    const BinaryMask inv = testkit::mask_of(13, 11, testkit::bits_not(testkit::bits_of(m)));
    const ConfusionCounts dis = confusion(inv, m);
    EXPECT_EQ(dis.tp, 0u);
    EXPECT_EQ(dis.tn, 0u);
}

TEST(Confusion, MatchesPixelLoopOracle) {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 1500; ++i) {
        const std::size_t w = 1 + rng() % 32, h = 1 + rng() % 32;
        const BinaryMask p = testkit::random_mask(w, h, rng), r = testkit::random_mask(w, h, rng);
        const testkit::Tally t = testkit::tally(testkit::bits_of(p), testkit::bits_of(r));
        const ConfusionCounts c = confusion(p, r);
        ASSERT_EQ(c, counts(t.tp, t.fp, t.fn, t.tn));
        ASSERT_EQ(c.reference_positive(), r.positive_count());
        ASSERT_EQ(c.predicted_positive(), p.positive_count());
        ASSERT_EQ(c.total(), w * h);
    }
}

TEST(Confusion, ComplementSwapsCounts) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const BinaryMask p = testkit::random_mask(9, 9, rng), r = testkit::random_mask(9, 9, rng);
        const auto np = testkit::mask_of(9, 9, testkit::bits_not(testkit::bits_of(p)));
        const auto nr = testkit::mask_of(9, 9, testkit::bits_not(testkit::bits_of(r)));
        const ConfusionCounts a = confusion(p, r), b = confusion(np, nr);
        ASSERT_EQ(a.tp, b.tn);
        ASSERT_EQ(a.tn, b.tp);
        ASSERT_EQ(a.fp, b.fn);
        ASSERT_EQ(a.fn, b.fp);
    }
}

TEST(Confusion, DimensionMismatch) {
    EXPECT_THROW(confusion(BinaryMask::filled(2, 3, true), BinaryMask::filled(3, 2, true)),
                 DimensionError);
}

TEST(MetricSet, Definitions) {
    const MetricSet m = metric_set(counts(3, 1, 2, 4));
    EXPECT_TRUE(is_ratio(m.precision, 3, 4));
    EXPECT_TRUE(is_ratio(m.recall, 3, 5));
    EXPECT_TRUE(is_ratio(m.f1, 6, 9));
    EXPECT_TRUE(is_ratio(m.iou, 3, 6));
    EXPECT_TRUE(is_ratio(m.tp_pct, 300, 5));
    EXPECT_TRUE(is_ratio(m.fn_pct, 200, 5));
    EXPECT_TRUE(is_ratio(m.fp_pct, 100, 5));
    EXPECT_EQ(m.reference_positive, 5u);
    EXPECT_EQ(m.reference_negative, 5u);
}

TEST(MetricSet, ZeroDenominatorsAreUndefined) {
    const MetricSet empty = metric_set(counts(0, 0, 0, 10));
    EXPECT_FALSE(empty.precision);
    EXPECT_FALSE(empty.recall);
    EXPECT_FALSE(empty.f1);
    EXPECT_FALSE(empty.iou);
    EXPECT_FALSE(empty.tp_pct);
    EXPECT_FALSE(empty.fn_pct);
    EXPECT_TRUE(is_ratio(empty.fp_pct, 0, 1));

    const MetricSet all_pos = metric_set(counts(0, 0, 4, 0));
    EXPECT_FALSE(all_pos.precision);
    EXPECT_TRUE(is_ratio(all_pos.recall, 0, 1));
    EXPECT_TRUE(is_ratio(all_pos.f1, 0, 1));
    EXPECT_FALSE(all_pos.fp_pct);
}

TEST(MetricSet, InvariantsOnRandomCounts) {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<std::uint64_t> d(0, 100000);
    for (int i = 0; i < 2000; ++i) {
        const ConfusionCounts c = counts(d(rng), d(rng), d(rng), d(rng));
        const MetricSet m = metric_set(c);
        if (m.tp_pct) {
            ASSERT_EQ(*m.tp_pct + *m.fn_pct, Exact(100, 1));
        }
        if (m.f1 && m.iou) {
            ASSERT_GE(*m.f1, *m.iou);
            const double f1 = m.f1->to_double();
            ASSERT_NEAR(m.iou->to_double(), f1 / (2 - f1), 1e-12);
        }
        if (m.precision && m.recall && c.tp > 0) {
            const double p = m.precision->to_double(), r = m.recall->to_double();
            ASSERT_NEAR(m.f1->to_double(), 2 * p * r / (p + r), 1e-12);
        }
        for (const Measure& x : {m.precision, m.recall, m.f1, m.iou}) {
            if (x) {
                ASSERT_GE(*x, Exact(0, 1));
                ASSERT_LE(*x, Exact(1, 1));
            }
        }
    }
}

TEST(MetricSet, PaperAnchors) {
    const MetricSet model = metric_set(counts(49431, 2886, 3390));
    EXPECT_EQ(model.precision->to_fixed(2), "0.94");
    EXPECT_EQ(model.recall->to_fixed(2), "0.94");
    EXPECT_EQ(model.f1->to_fixed(2), "0.94");
    EXPECT_EQ(model.iou->to_fixed(2), "0.89");

    const MetricSet gradcam = metric_set(counts(45259, 2806, 7562));
    EXPECT_EQ(gradcam.precision->to_fixed(2), "0.94");
    EXPECT_EQ(gradcam.recall->to_fixed(2), "0.86");
    EXPECT_EQ(gradcam.iou->to_fixed(2), "0.81");
    EXPECT_EQ(gradcam.tp_pct->to_fixed(2), "85.68");

    const MetricSet scorecam_gt = metric_set(counts(45413, 79348, 7408));
    EXPECT_EQ(scorecam_gt.iou->to_fixed(2), "0.34");
    EXPECT_EQ(scorecam_gt.precision->to_fixed(2), "0.36");
    EXPECT_EQ(scorecam_gt.recall->to_fixed(2), "0.86");
    EXPECT_EQ(scorecam_gt.f1->to_fixed(2), "0.51");
}

TEST(MetricSet, PaperTablesWithinPrintedPrecision) {
    int off_by_one = 0;
    for (const auto* t : testkit::kPaperTables) {
        for (std::size_t i = 0; i < 7; ++i) {
            SCOPED_TRACE(std::string(t->name) + " / " + testkit::kPaperColumns[i]);
            const auto c = counts(t->tp[i], t->fp[i], t->fn[i],
                                  testkit::kPaperNegatives - t->fp[i]);
            // Three published columns count one extra positive pixel.
            EXPECT_LE(c.reference_positive() - testkit::kPaperPositives, 1u);
            off_by_one += c.reference_positive() != testkit::kPaperPositives;
            const MetricSet m = metric_set(c);
            EXPECT_NEAR(m.precision->to_double(), hundredths(t->precision[i]), 0.005 + 1e-9);
            EXPECT_NEAR(m.recall->to_double(), hundredths(t->recall[i]), 0.005 + 1e-9);
            EXPECT_NEAR(m.f1->to_double(), hundredths(t->f1[i]), 0.005 + 1e-9);
            EXPECT_NEAR(m.iou->to_double(), hundredths(t->iou[i]), 0.005 + 1e-9);
            EXPECT_NEAR(m.tp_pct->to_double(), hundredths(t->tp_pct[i]), 0.01 + 1e-9);
            EXPECT_NEAR(m.fn_pct->to_double(), hundredths(t->fn_pct[i]), 0.01 + 1e-9);
            EXPECT_NEAR(m.fp_pct->to_double(), hundredths(t->fp_pct[i]), 0.01 + 1e-9);
        }
    }
    EXPECT_EQ(off_by_one, 3);
}

TEST(DeltaSet, PaperExamples) {
    MetricSet base, pert;
    base.reference_positive = pert.reference_positive = 100;
    base.reference_negative = pert.reference_negative = 100;
    base.tp_pct = Exact::from_decimal(9358, 2);
    pert.tp_pct = Exact::from_decimal(8568, 2);
    base.fp_pct = Exact::from_decimal(138, 2);
    pert.fp_pct = Exact::from_decimal(134, 2);
    base.fn_pct = Exact::from_decimal(642, 2);
    pert.fn_pct = Exact::from_decimal(1432, 2);
    const DeltaSet d = delta_set(base, pert);
    EXPECT_EQ(d.tp_drop_pct->to_fixed(2), "7.90");
    EXPECT_EQ(d.fp_increase_pct->to_fixed(2), "-0.04");
    EXPECT_EQ(d.fn_increase_pct->to_fixed(2), "7.90");
}

TEST(DeltaSet, IdentityIsZero) {
    const MetricSet m = metric_set(counts(10, 3, 5, 40));
    const DeltaSet d = delta_set(m, m);
    EXPECT_EQ(*d.tp_drop_pct, Exact());
    EXPECT_EQ(*d.fp_increase_pct, Exact());
    EXPECT_EQ(*d.fn_increase_pct, Exact());
}

TEST(DeltaSet, DropEqualsFnIncreaseOnSharedReference) {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::uint64_t> d(0, 1000);
    for (int i = 0; i < 500; ++i) {
        const std::uint64_t pos = 1 + d(rng), neg = 1 + d(rng);
        const std::uint64_t tp1 = d(rng) % (pos + 1), tp2 = d(rng) % (pos + 1);
        const std::uint64_t fp1 = d(rng) % (neg + 1), fp2 = d(rng) % (neg + 1);
        const DeltaSet ds = delta_set(metric_set(counts(tp1, fp1, pos - tp1, neg - fp1)),
                                      metric_set(counts(tp2, fp2, pos - tp2, neg - fp2)));
        ASSERT_EQ(*ds.tp_drop_pct, *ds.fn_increase_pct);
    }
}

TEST(DeltaSet, PopulationMismatchIsError) {
    EXPECT_THROW(delta_set(metric_set(counts(5, 1, 5, 9)), metric_set(counts(5, 1, 6, 9))), MetricError);
    EXPECT_THROW(delta_set(metric_set(counts(5, 1, 5, 9)), metric_set(counts(5, 1, 5, 8))), MetricError);
}

TEST(Aggregate, SumsAndIsOrderFree) {
    EXPECT_THROW(aggregate({}), MetricError);
    const ConfusionCounts one = counts(1, 2, 3, 4);
    EXPECT_EQ(aggregate(std::vector{one}), one);

    std::mt19937_64 rng(6);
    std::vector<ConfusionCounts> cs;
    for (int i = 0; i < 20; ++i) {
        cs.push_back(counts(rng() % 100, rng() % 100, rng() % 100, rng() % 100));
    }
    const ConfusionCounts sum = aggregate(cs);
    std::shuffle(cs.begin(), cs.end(), rng);
    EXPECT_EQ(aggregate(cs), sum);
    const MetricSet m = metric_set(sum);
    EXPECT_TRUE(is_ratio(m.iou, sum.tp, sum.tp + sum.fp + sum.fn));
}

TEST(Aggregate, EqualsConfusionOfConcatenatedMasks) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        const std::size_t h = 1 + rng() % 20, w1 = 1 + rng() % 20, w2 = 1 + rng() % 20;
        const BinaryMask p1 = testkit::random_mask(w1, h, rng), r1 = testkit::random_mask(w1, h, rng);
        const BinaryMask p2 = testkit::random_mask(w2, h, rng), r2 = testkit::random_mask(w2, h, rng);
        // Side by side: each row is the row of the first mask then the second.
        const auto join = [&](const BinaryMask& a, const BinaryMask& b) {
            Bits out;
            for (std::size_t y = 0; y < h; ++y) {
                for (std::size_t x = 0; x < w1; ++x) out.push_back(a.at(x, y));
                for (std::size_t x = 0; x < w2; ++x) out.push_back(b.at(x, y));
            }
            return testkit::mask_of(w1 + w2, h, out);
        };
        const std::vector parts = {confusion(p1, r1), confusion(p2, r2)};
        ASSERT_EQ(aggregate(parts), confusion(join(p1, p2), join(r1, r2)));
    }
}
