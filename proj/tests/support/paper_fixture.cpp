#include "paper_fixture.hpp"

namespace xaieval::testkit {
namespace {

Exact hundredths(int v) {
    return Exact::from_decimal(v, 2);
}

ConfusionCounts column_counts(const PaperTable& t, std::size_t col) {
    return {t.tp[col], t.fp[col], t.fn[col], kPaperNegatives - t.fp[col]};
}

MetricSet column_metrics(const PaperTable& t, std::size_t col, bool printed) {
    MetricSet m = metric_set(column_counts(t, col));
    if (printed) {
        m.tp_pct = hundredths(t.tp_pct[col]);
        m.fp_pct = hundredths(t.fp_pct[col]);
        m.fn_pct = hundredths(t.fn_pct[col]);
        m.iou = hundredths(t.iou[col]);
        m.precision = hundredths(t.precision[col]);
        m.recall = hundredths(t.recall[col]);
        m.f1 = hundredths(t.f1[col]);
        // Printed percentages are all taken over the same nominal population.
        m.reference_positive = kPaperPositives;
        m.reference_negative = kPaperNegatives;
    }
    return m;
}

}  // namespace

RunResult paper_run_result(bool printed) {
    RunResult r;
    r.metadata.methods.assign(kPaperColumns.begin() + 1, kPaperColumns.end());
    r.metadata.thresholds = {0.4};
    r.metadata.target_class = "building";

    const PaperTable& first = *kPaperTables[0];
    BaselineResult base;
    base.counts = column_counts(first, 0);
    base.metrics = column_metrics(first, 0, printed);
    r.baseline = base;

    for (const PaperTable* t : kPaperTables) {
        r.metadata.strategies.push_back(t->strategy);
    }
    for (std::size_t m = 0; m < r.metadata.methods.size(); ++m) {
        for (const PaperTable* t : kPaperTables) {
            CellResult c;
            c.key = {r.metadata.methods[m], 0.4, t->strategy};
            c.counts = column_counts(*t, m + 1);
            c.metrics = column_metrics(*t, m + 1, printed);
            if (printed) {
                c.deltas = DeltaSet{hundredths(t->drop[m]), hundredths(t->fp_increase[m]),
                                    hundredths(t->fn_increase[m])};
            } else if (c.metrics.reference_positive == base.metrics.reference_positive) {
                c.deltas = delta_set(base.metrics, c.metrics);
            }
            r.cells.push_back(std::move(c));
        }
    }
    return r;
}

}  // namespace xaieval::testkit
