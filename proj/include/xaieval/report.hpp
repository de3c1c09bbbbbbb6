#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "xaieval/pipeline.hpp"
#include "xaieval/report_spec.hpp"

namespace xaieval {

struct TableCell {
    std::string text;
    bool best = false;

    friend bool operator==(const TableCell&, const TableCell&) = default;
};

// A rendered table: one labelled row per statistic, one column for the model
// baseline followed by one per method.
struct Table {
    std::string title;
    std::string corner;                // label above the row labels
    std::vector<std::string> columns;  // "Model", then method ids
    std::vector<std::string> row_labels;
    std::vector<std::vector<TableCell>> rows;

    // Throws ReportError when the row or column does not exist.
    const TableCell& at(const std::string& row_label, const std::string& column) const;
    // Methods flagged best on a row, in column order.
    std::vector<std::string> best_of(const std::string& row_label) const;
};

// TP/FP/FN pixels, their percentages and the deltas against the baseline.
// Throws ReportError when a requested cell is absent from the result.
Table emit_count_table(const RunResult& result, Strategy strategy, double threshold,
                       const ReportSpec& spec = {});

// IoU (Micro), Precision, Recall and F1.
Table emit_metric_table(const RunResult& result, Strategy strategy, double threshold,
                        const ReportSpec& spec = {});

struct SweepReport {
    // One (count, metric) pair per strategy and threshold, strategy-major.
    std::vector<std::pair<Table, Table>> pairs;
    std::string json;  // full RunResult export
};

SweepReport emit_sweep(const RunResult& result, const ReportSpec& spec = {});

std::string render_markdown(const Table& table);
// Header row, one row per statistic, and a trailing "best" column listing
// the flagged methods separated by ';'.
std::string render_csv(const Table& table);
std::string render_json(const std::vector<Table>& tables);

// `report`: per strategy at the focus threshold, report_<strategy>.<ext>.
// `sweep`: every strategy and threshold; markdown goes to sweep.md, csv is
// the per-cell export (sweep.csv) and json the full result (sweep.json).
enum class ReportScope { Focus, Sweep };

std::vector<std::filesystem::path> write_reports(const RunResult& result, const ReportSpec& spec,
                                                 ReportScope scope,
                                                 const std::filesystem::path& out_dir);

}  // namespace xaieval
