#include "xaieval/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <optional>
#include <sstream>

#include "xaieval/error.hpp"
#include "xaieval/raster_io.hpp"
#include "xaieval/result_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace xaieval {

// ---------------------------------------------------------------------------
// Report configuration

std::string_view statistic_id(Statistic s) noexcept {
    switch (s) {
        case Statistic::TpDrop: return "tp_drop";
        case Statistic::FpIncrease: return "fp_increase";
        case Statistic::FnIncrease: return "fn_increase";
        case Statistic::Iou: return "iou";
        case Statistic::Precision: return "precision";
        case Statistic::Recall: return "recall";
        case Statistic::F1: return "f1";
    }
    return "?";
}

Statistic parse_statistic(std::string_view text) {
    for (Statistic s : kAllStatistics) {
        if (statistic_id(s) == text) {
            return s;
        }
    }
    throw ConfigError("unknown statistic '" + std::string(text) + "'");
}

std::string_view direction_id(Direction d) noexcept {
    return d == Direction::HigherBetter ? "higher" : "lower";
}

Direction parse_direction(std::string_view text) {
    if (text == "higher") {
        return Direction::HigherBetter;
    }
    if (text == "lower") {
        return Direction::LowerBetter;
    }
    throw ConfigError("unknown ranking direction '" + std::string(text) +
                      "' (expected higher or lower)");
}

RankingTable::RankingTable() {
    for (Strategy s : kAllStrategies) {
        const bool s1 = s == Strategy::BackgroundOnly;
        for (Statistic stat : kAllStatistics) {
            const bool delta = stat == Statistic::TpDrop || stat == Statistic::FpIncrease ||
                               stat == Statistic::FnIncrease;
            set(s, stat, (delta == s1) ? Direction::HigherBetter : Direction::LowerBetter);
        }
    }
}

Direction RankingTable::direction(Strategy strategy, Statistic stat) const noexcept {
    return table_[static_cast<std::size_t>(strategy)][static_cast<std::size_t>(stat)];
}

void RankingTable::set(Strategy strategy, Statistic stat, Direction d) noexcept {
    table_[static_cast<std::size_t>(strategy)][static_cast<std::size_t>(stat)] = d;
}

std::string_view format_id(ReportFormat f) noexcept {
    switch (f) {
        case ReportFormat::Csv: return "csv";
        case ReportFormat::Json: return "json";
        case ReportFormat::Markdown: return "markdown";
    }
    return "?";
}

ReportFormat parse_format(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "csv") {
        return ReportFormat::Csv;
    }
    if (lower == "json") {
        return ReportFormat::Json;
    }
    if (lower == "markdown" || lower == "md") {
        return ReportFormat::Markdown;
    }
    throw ConfigError("unknown report format '" + std::string(text) +
                      "' (expected csv, json or markdown)");
}

bool ReportSpec::wants(ReportFormat f) const noexcept {
    return std::find(formats.begin(), formats.end(), f) != formats.end();
}

// ---------------------------------------------------------------------------
// Tables

const TableCell& Table::at(const std::string& row_label, const std::string& column) const {
    const auto r = std::find(row_labels.begin(), row_labels.end(), row_label);
    const auto c = std::find(columns.begin(), columns.end(), column);
    if (r == row_labels.end() || c == columns.end()) {
        throw ReportError("no table entry for row '" + row_label + "', column '" + column + "'");
    }
    return rows[r - row_labels.begin()][c - columns.begin()];
}

std::vector<std::string> Table::best_of(const std::string& row_label) const {
    std::vector<std::string> out;
    const auto r = std::find(row_labels.begin(), row_labels.end(), row_label);
    if (r == row_labels.end()) {
        return out;
    }
    const auto& row = rows[r - row_labels.begin()];
    for (std::size_t c = 0; c < row.size(); ++c) {
        if (row[c].best) {
            out.push_back(columns[c]);
        }
    }
    return out;
}

namespace {

constexpr std::string_view kUndefined = "—";
constexpr std::string_view kFailed = "failed";

std::string fixed(const Measure& m, int decimals) {
    return m ? m->to_fixed(decimals) : std::string(kUndefined);
}

std::string direction_label(Direction d) {
    return d == Direction::HigherBetter ? "Higher better" : "Lower better";
}

std::vector<const CellResult*> collect_cells(const RunResult& result, Strategy strategy,
                                             double threshold) {
    std::vector<const CellResult*> cells;
    for (const auto& method : result.metadata.methods) {
        const CellResult* c = result.find(method, threshold, strategy);
        if (!c) {
            throw ReportError("result has no cell for method '" + method + "', threshold " +
                              threshold_text(threshold) + ", strategy " +
                              std::string(strategy_id(strategy)));
        }
        cells.push_back(c);
    }
    return cells;
}

Table table_frame(const RunResult& result, std::string title, std::string corner) {
    Table t;
    t.title = std::move(title);
    t.corner = std::move(corner);
    t.columns.push_back("Model");
    for (const auto& m : result.metadata.methods) {
        t.columns.push_back(m);
    }
    return t;
}

// Marks the best method entries of one row. Ties at display precision are
// all flagged; undefined and failed entries never win.
void flag_best(std::vector<TableCell>& row, const std::vector<const CellResult*>& cells,
               const std::function<Measure(const CellResult&)>& value, Direction dir,
               int decimals) {
    std::vector<std::optional<Exact::Int>> scaled(cells.size());
    std::optional<Exact::Int> best;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!cells[i]->ok()) {
            continue;
        }
        const Measure m = value(*cells[i]);
        if (!m) {
            continue;
        }
        scaled[i] = m->round_scaled(decimals);
        if (!best || (dir == Direction::HigherBetter ? *scaled[i] > *best : *scaled[i] < *best)) {
            best = scaled[i];
        }
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        row[i + 1].best = scaled[i] && best && *scaled[i] == *best;
    }
}

std::string table_title(std::string_view what, Strategy strategy, double threshold) {
    return std::string(what) + " of " + std::string(strategy_label(strategy)) + ", threshold " +
           threshold_text(threshold);
}

std::string md_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '|') {
            out += '\\';
        }
        out += c;
    }
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + "\"";
}

void write_text(const fs::path& path, const std::string& text) {
    write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace

Table emit_count_table(const RunResult& result, Strategy strategy, double threshold,
                       const ReportSpec& spec) {
    const auto cells = collect_cells(result, strategy, threshold);
    const int dp = spec.decimals;
    Table t = table_frame(result, table_title("Pixel-level performance evaluation", strategy, threshold),
                          "XAI/Metric");

    using CountFn = std::uint64_t (*)(const ConfusionCounts&);
    using PctFn = Measure (*)(const MetricSet&);
    using DeltaFn = Measure (*)(const DeltaSet&);
    struct Group {
        std::string name;
        CountFn count;
        PctFn pct;
        DeltaFn delta;
        std::string delta_name;
        Statistic stat;
    };
    const Group groups[] = {
        {"TP", [](const ConfusionCounts& c) { return c.tp; },
         [](const MetricSet& m) { return m.tp_pct; },
         [](const DeltaSet& d) { return d.tp_drop_pct; }, "Drop %", Statistic::TpDrop},
        {"FP", [](const ConfusionCounts& c) { return c.fp; },
         [](const MetricSet& m) { return m.fp_pct; },
         [](const DeltaSet& d) { return d.fp_increase_pct; }, "Increase %", Statistic::FpIncrease},
        {"FN", [](const ConfusionCounts& c) { return c.fn; },
         [](const MetricSet& m) { return m.fn_pct; },
         [](const DeltaSet& d) { return d.fn_increase_pct; }, "Increase %", Statistic::FnIncrease},
    };

    const auto baseline_or = [&](auto fn) -> std::string {
        return result.baseline ? fn(*result.baseline) : std::string(kUndefined);
    };

    for (const Group& g : groups) {
        std::vector<TableCell> count_row, pct_row, delta_row;
        count_row.push_back({baseline_or([&](const BaselineResult& b) {
            return std::to_string(g.count(b.counts));
        })});
        pct_row.push_back({baseline_or([&](const BaselineResult& b) { return fixed(g.pct(b.metrics), dp); })});
        delta_row.push_back({""});
        for (const CellResult* c : cells) {
            if (!c->ok()) {
                count_row.push_back({std::string(kFailed)});
                pct_row.push_back({std::string(kFailed)});
                delta_row.push_back({std::string(kFailed)});
                continue;
            }
            count_row.push_back({std::to_string(g.count(c->counts))});
            pct_row.push_back({fixed(g.pct(c->metrics), dp)});
            delta_row.push_back({c->deltas ? fixed(g.delta(*c->deltas), dp) : std::string(kUndefined)});
        }
        const Direction dir = spec.ranking.direction(strategy, g.stat);
        flag_best(delta_row, cells,
                  [&](const CellResult& c) { return c.deltas ? g.delta(*c.deltas) : Measure{}; }, dir,
                  dp);

        t.row_labels.push_back(g.name + " Pixels");
        t.rows.push_back(std::move(count_row));
        t.row_labels.push_back(g.name + " Pixels (%)");
        t.rows.push_back(std::move(pct_row));
        t.row_labels.push_back(g.delta_name + " (" + direction_label(dir) + ")");
        t.rows.push_back(std::move(delta_row));
    }
    return t;
}

Table emit_metric_table(const RunResult& result, Strategy strategy, double threshold,
                        const ReportSpec& spec) {
    const auto cells = collect_cells(result, strategy, threshold);
    const int dp = spec.decimals;
    Table t = table_frame(result, table_title("Pixel-level metrics", strategy, threshold), "Method");

    struct Row {
        std::string label;
        Measure MetricSet::*field;
        Statistic stat;
    };
    const Row rows[] = {
        {"IoU (Micro)", &MetricSet::iou, Statistic::Iou},
        {"Precision", &MetricSet::precision, Statistic::Precision},
        {"Recall", &MetricSet::recall, Statistic::Recall},
        {"F1", &MetricSet::f1, Statistic::F1},
    };
    for (const Row& r : rows) {
        std::vector<TableCell> row;
        row.push_back({result.baseline ? fixed(result.baseline->metrics.*r.field, dp)
                                       : std::string(kUndefined)});
        for (const CellResult* c : cells) {
            row.push_back({c->ok() ? fixed(c->metrics.*r.field, dp) : std::string(kFailed)});
        }
        flag_best(row, cells, [&](const CellResult& c) { return c.metrics.*r.field; },
                  spec.ranking.direction(strategy, r.stat), dp);
        t.row_labels.push_back(r.label);
        t.rows.push_back(std::move(row));
    }
    return t;
}

SweepReport emit_sweep(const RunResult& result, const ReportSpec& spec) {
    SweepReport out;
    for (Strategy s : result.metadata.strategies) {
        for (double th : result.metadata.thresholds) {
            out.pairs.emplace_back(emit_count_table(result, s, th, spec),
                                   emit_metric_table(result, s, th, spec));
        }
    }
    out.json = run_result_to_json(result);
    return out;
}

std::string render_markdown(const Table& table) {
    std::ostringstream os;
    os << "### " << table.title << "\n\n";
    os << "| " << md_escape(table.corner);
    for (const auto& c : table.columns) {
        os << " | " << md_escape(c);
    }
    os << " |\n|---";
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        os << "|---:";
    }
    os << "|\n";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        os << "| " << md_escape(table.row_labels[r]);
        for (const auto& cell : table.rows[r]) {
            os << " | ";
            if (cell.best) {
                os << "**" << cell.text << "**";
            } else {
                os << cell.text;
            }
        }
        os << " |\n";
    }
    return os.str();
}

std::string render_csv(const Table& table) {
    std::ostringstream os;
    os << csv_field(table.corner);
    for (const auto& c : table.columns) {
        os << ',' << csv_field(c);
    }
    os << ",best\n";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        os << csv_field(table.row_labels[r]);
        std::string best;
        for (std::size_t c = 0; c < table.rows[r].size(); ++c) {
            os << ',' << csv_field(table.rows[r][c].text);
            if (table.rows[r][c].best) {
                best += (best.empty() ? "" : ";") + table.columns[c];
            }
        }
        os << ',' << csv_field(best) << '\n';
    }
    return os.str();
}

std::string render_json(const std::vector<Table>& tables) {
    json arr = json::array();
    for (const Table& t : tables) {
        json rows = json::array();
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            json values = json::array();
            json best = json::array();
            for (std::size_t c = 0; c < t.rows[r].size(); ++c) {
                values.push_back(t.rows[r][c].text);
                if (t.rows[r][c].best) {
                    best.push_back(t.columns[c]);
                }
            }
            rows.push_back({{"label", t.row_labels[r]}, {"values", values}, {"best", best}});
        }
        arr.push_back({{"title", t.title}, {"columns", t.columns}, {"rows", rows}});
    }
    return json{{"schema", kResultSchema}, {"tables", arr}}.dump(2) + "\n";
}

std::vector<fs::path> write_reports(const RunResult& result, const ReportSpec& spec,
                                    ReportScope scope, const fs::path& out_dir) {
    std::vector<fs::path> written;
    const auto emit = [&](const fs::path& p, const std::string& text) {
        write_text(p, text);
        written.push_back(p);
    };

    if (scope == ReportScope::Focus) {
        if (std::find(result.metadata.thresholds.begin(), result.metadata.thresholds.end(),
                      spec.focus_threshold) == result.metadata.thresholds.end()) {
            throw ReportError("focus threshold " + threshold_text(spec.focus_threshold) +
                              " was not part of the run");
        }
        for (Strategy s : result.metadata.strategies) {
            const std::vector<Table> tables = {
                emit_count_table(result, s, spec.focus_threshold, spec),
                emit_metric_table(result, s, spec.focus_threshold, spec)};
            const std::string stem = "report_" + std::string(strategy_id(s));
            if (spec.wants(ReportFormat::Markdown)) {
                emit(out_dir / (stem + ".md"),
                     render_markdown(tables[0]) + "\n" + render_markdown(tables[1]));
            }
            if (spec.wants(ReportFormat::Csv)) {
                emit(out_dir / (stem + ".csv"), render_csv(tables[0]) + "\n" + render_csv(tables[1]));
            }
            if (spec.wants(ReportFormat::Json)) {
                emit(out_dir / (stem + ".json"), render_json(tables));
            }
        }
        return written;
    }

    const SweepReport sweep = emit_sweep(result, spec);
    if (spec.wants(ReportFormat::Markdown)) {
        std::string md;
        for (const auto& [counts, metrics] : sweep.pairs) {
            md += (md.empty() ? "" : "\n") + render_markdown(counts) + "\n" + render_markdown(metrics);
        }
        emit(out_dir / "sweep.md", md);
    }
    if (spec.wants(ReportFormat::Csv)) {
        emit(out_dir / "sweep.csv", cells_csv(result));
    }
    if (spec.wants(ReportFormat::Json)) {
        emit(out_dir / "sweep.json", sweep.json);
    }
    return written;
}

}  // namespace xaieval
