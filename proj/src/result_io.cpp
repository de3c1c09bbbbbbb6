#include "xaieval/result_io.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

#include "xaieval/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace xaieval {
namespace {

json counts_json(const ConfusionCounts& c) {
    return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
}

ConfusionCounts counts_from(const json& j) {
    return {j.at("tp").get<std::uint64_t>(), j.at("fp").get<std::uint64_t>(),
            j.at("fn").get<std::uint64_t>(), j.at("tn").get<std::uint64_t>()};
}

json measure_json(const Measure& m) {
    return m ? json(m->to_double()) : json(nullptr);
}

json metrics_json(const MetricSet& m) {
    return {{"precision", measure_json(m.precision)}, {"recall", measure_json(m.recall)},
            {"f1", measure_json(m.f1)},               {"iou", measure_json(m.iou)},
            {"tp_pct", measure_json(m.tp_pct)},       {"fp_pct", measure_json(m.fp_pct)},
            {"fn_pct", measure_json(m.fn_pct)}};
}

json deltas_json(const std::optional<DeltaSet>& d) {
    if (!d) {
        return nullptr;
    }
    return {{"tp_drop_pct", measure_json(d->tp_drop_pct)},
            {"fp_increase_pct", measure_json(d->fp_increase_pct)},
            {"fn_increase_pct", measure_json(d->fn_increase_pct)}};
}

json per_image_json(const std::vector<ImageCounts>& rows) {
    json arr = json::array();
    for (const auto& r : rows) {
        json e = counts_json(r.counts);
        e["id"] = r.image_id;
        arr.push_back(std::move(e));
    }
    return arr;
}

std::vector<ImageCounts> per_image_from(const json& arr) {
    std::vector<ImageCounts> out;
    for (const auto& e : arr) {
        out.push_back({e.at("id").get<std::string>(), counts_from(e)});
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

void append_metric_columns(std::ostringstream& os, const ConfusionCounts& c, const MetricSet& m,
                           const std::optional<DeltaSet>& d) {
    os << ',' << c.tp << ',' << c.fp << ',' << c.fn << ',' << c.tn << ',' << measure_text(m.tp_pct)
       << ',' << measure_text(m.fp_pct) << ',' << measure_text(m.fn_pct) << ','
       << measure_text(m.precision) << ',' << measure_text(m.recall) << ',' << measure_text(m.f1)
       << ',' << measure_text(m.iou) << ',';
    if (d) {
        os << measure_text(d->tp_drop_pct) << ',' << measure_text(d->fp_increase_pct) << ','
           << measure_text(d->fn_increase_pct);
    } else {
        os << ",,";
    }
    os << '\n';
}

}  // namespace

std::string measure_text(const Measure& m) {
    if (!m) {
        return {};
    }
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), m->to_double());
    return std::string(buf, res.ptr);
}

std::string run_result_to_json(const RunResult& result) {
    const RunMetadata& md = result.metadata;
    json strategies = json::array();
    for (Strategy s : md.strategies) {
        strategies.push_back(std::string(strategy_id(s)));
    }
    json doc;
    doc["schema"] = kResultSchema;
    doc["metadata"] = {
        {"methods", md.methods},
        {"thresholds", md.thresholds},
        {"strategies", strategies},
        {"fill", md.fill},
        {"s3_mode", std::string(s3_mode_id(md.s3_mode))},
        {"target_class", md.target_class},
        {"runner_identity", md.runner_identity},
        {"manifest_hash", md.manifest_hash},
        {"effective_config", md.effective_config},
    };
    if (result.baseline) {
        doc["baseline"] = {{"counts", counts_json(result.baseline->counts)},
                           {"metrics", metrics_json(result.baseline->metrics)},
                           {"per_image", per_image_json(result.baseline->per_image)}};
    } else {
        doc["baseline"] = nullptr;
    }
    json cells = json::array();
    for (const auto& c : result.cells) {
        json cell = {{"method", c.key.method},
                     {"threshold", c.key.threshold},
                     {"strategy", std::string(strategy_id(c.key.strategy))}};
        if (!c.ok()) {
            cell["error"] = c.error;
        } else {
            cell["counts"] = counts_json(c.counts);
            cell["metrics"] = metrics_json(c.metrics);
            cell["deltas"] = deltas_json(c.deltas);
            cell["per_image"] = per_image_json(c.per_image);
        }
        cells.push_back(std::move(cell));
    }
    doc["cells"] = std::move(cells);
    return doc.dump(2) + "\n";
}

RunResult run_result_from_json(const std::string& text) {
    try {
        const json doc = json::parse(text);
        if (!doc.is_object() || !doc.contains("schema")) {
            throw ConfigError("results file has no schema version");
        }
        if (doc.at("schema") != kResultSchema) {
            throw ConfigError("unsupported results schema " + doc.at("schema").dump() +
                              " (expected " + std::to_string(kResultSchema) + ")");
        }
        RunResult r;
        const json& md = doc.at("metadata");
        r.metadata.methods = md.at("methods").get<std::vector<std::string>>();
        r.metadata.thresholds = md.at("thresholds").get<std::vector<double>>();
        for (const auto& s : md.at("strategies")) {
            r.metadata.strategies.push_back(parse_strategy(s.get<std::string>()));
        }
        r.metadata.fill = md.at("fill").get<int>();
        r.metadata.s3_mode = parse_s3_mode(md.at("s3_mode").get<std::string>());
        r.metadata.target_class = md.at("target_class").get<std::string>();
        r.metadata.runner_identity = md.at("runner_identity").get<std::string>();
        r.metadata.manifest_hash = md.at("manifest_hash").get<std::string>();
        r.metadata.effective_config = md.at("effective_config").get<std::string>();

        if (!doc.at("baseline").is_null()) {
            const json& b = doc.at("baseline");
            BaselineResult base;
            base.counts = counts_from(b.at("counts"));
            base.metrics = metric_set(base.counts);
            base.per_image = per_image_from(b.at("per_image"));
            r.baseline = std::move(base);
        }
        for (const auto& c : doc.at("cells")) {
            CellResult cell;
            cell.key = {c.at("method").get<std::string>(), c.at("threshold").get<double>(),
                        parse_strategy(c.at("strategy").get<std::string>())};
            if (c.contains("error")) {
                cell.error = c.at("error").get<std::string>();
            } else {
                cell.counts = counts_from(c.at("counts"));
                cell.metrics = metric_set(cell.counts);
                cell.per_image = per_image_from(c.at("per_image"));
                if (!c.at("deltas").is_null()) {
                    if (!r.baseline) {
                        throw ConfigError("results carry deltas but no baseline");
                    }
                    cell.deltas = delta_set(r.baseline->metrics, cell.metrics);
                }
            }
            r.cells.push_back(std::move(cell));
        }
        return r;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed results file: ") + e.what());
    }
}

RunResult load_run_result(const fs::path& path) {
    fs::path file = path;
    if (fs::is_directory(file / "results")) {
        file = file / "results" / "results.json";
    } else if (fs::is_directory(file)) {
        file = file / "results.json";
    }
    std::ifstream in(file);
    if (!in) {
        throw ConfigError("cannot read results: " + file.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return run_result_from_json(ss.str());
}

std::string cells_csv(const RunResult& result) {
    std::ostringstream os;
    os << "strategy,threshold,method,tp,fp,fn,tn,tp_pct,fp_pct,fn_pct,precision,recall,f1,iou,"
          "tp_drop_pct,fp_increase_pct,fn_increase_pct\n";
    if (result.baseline) {
        os << "baseline,,model";
        append_metric_columns(os, result.baseline->counts, result.baseline->metrics, std::nullopt);
    }
    for (const auto& c : result.cells) {
        if (!c.ok()) {
            continue;
        }
        os << strategy_id(c.key.strategy) << ',' << threshold_text(c.key.threshold) << ','
           << csv_field(c.key.method);
        append_metric_columns(os, c.counts, c.metrics, c.deltas);
    }
    return os.str();
}

std::string per_image_csv(const RunResult& result) {
    std::ostringstream os;
    os << "strategy,threshold,method,image,tp,fp,fn,tn\n";
    const auto rows = [&os](std::string_view prefix, const std::vector<ImageCounts>& per_image) {
        for (const auto& r : per_image) {
            os << prefix << ',' << csv_field(r.image_id) << ',' << r.counts.tp << ',' << r.counts.fp
               << ',' << r.counts.fn << ',' << r.counts.tn << '\n';
        }
    };
    if (result.baseline) {
        rows("baseline,,model", result.baseline->per_image);
    }
    for (const auto& c : result.cells) {
        if (c.ok()) {
            rows(std::string(strategy_id(c.key.strategy)) + ',' + threshold_text(c.key.threshold) +
                     ',' + csv_field(c.key.method),
                 c.per_image);
        }
    }
    return os.str();
}

std::string failures_json(const RunResult& result) {
    json arr = json::array();
    for (const CellResult* c : result.failures()) {
        arr.push_back({{"method", c->key.method},
                       {"threshold", c->key.threshold},
                       {"strategy", std::string(strategy_id(c->key.strategy))},
                       {"error", c->error}});
    }
    return json{{"schema", kResultSchema}, {"failed_cells", arr}}.dump(2) + "\n";
}

}  // namespace xaieval
