#include "xaieval/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <ostream>
#include <set>

#include "xaieval/error.hpp"
#include "xaieval/manifest.hpp"
#include "xaieval/metrics.hpp"
#include "xaieval/perturbation.hpp"
#include "xaieval/pipeline.hpp"
#include "xaieval/raster_io.hpp"
#include "xaieval/report.hpp"
#include "xaieval/result_io.hpp"

namespace fs = std::filesystem;

namespace xaieval {
namespace {

// Flags shared by subcommands that may override manifest fields. Unset
// optionals leave the manifest value in place.
struct Overrides {
    std::vector<double> thresholds;
    std::vector<std::string> strategies;
    std::optional<int> fill;
    std::optional<std::string> s3_mode;
    std::optional<unsigned> jobs;
    std::vector<std::string> formats;
    bool no_cache = false;
    std::optional<double> focus_threshold;
    std::optional<std::string> output;
};

void apply(const Overrides& o, EvaluationManifest& m) {
    if (!o.thresholds.empty()) {
        m.thresholds = o.thresholds;
    }
    if (!o.strategies.empty()) {
        m.strategies.clear();
        for (const auto& s : o.strategies) {
            m.strategies.push_back(parse_strategy(s));
        }
    }
    if (o.fill) {
        if (*o.fill < 0 || *o.fill > 255) {
            throw ConfigError("--fill must lie in [0, 255]");
        }
        m.fill.sample = static_cast<std::uint8_t>(*o.fill);
    }
    if (o.s3_mode) {
        m.s3_mode = parse_s3_mode(*o.s3_mode);
    }
    if (o.jobs) {
        m.jobs = *o.jobs;
    }
    if (!o.formats.empty()) {
        m.report.formats.clear();
        for (const auto& f : o.formats) {
            m.report.formats.push_back(parse_format(f));
        }
    }
    if (o.no_cache) {
        m.cache = false;
    }
    if (o.focus_threshold) {
        m.report.focus_threshold = *o.focus_threshold;
    }
    if (o.output) {
        m.output_dir = fs::absolute(*o.output);
    }
}

std::set<std::string> png_stems(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw ConfigError("not a directory: " + dir.string());
    }
    std::set<std::string> ids;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".png") {
            ids.insert(e.path().stem().string());
        }
    }
    return ids;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (const auto& s : items) {
        out += (out.empty() ? "" : std::string(sep)) + s;
    }
    return out;
}

// ---------------------------------------------------------------------------

int cmd_evaluate(const std::string& manifest_path, const Overrides& o, int verbosity,
                 std::ostream& out, std::ostream& err) {
    EvaluationManifest m = EvaluationManifest::load(manifest_path);
    apply(o, m);
    m.validate();

    EvaluationPipeline pipeline(m);
    if (verbosity > 0) {
        err << "evaluating " << pipeline.image_ids().size() << " images, " << m.methods.size()
            << " methods, " << m.thresholds.size() << " thresholds, " << m.strategies.size()
            << " strategies\n";
    }
    const RunResult result = pipeline.run_all();
    const RunStats stats = pipeline.stats();
    persist_results(result, stats, m.output_dir, m.jobs, m.cache);
    const auto reports = write_reports(result, m.report, ReportScope::Focus, m.output_dir / "reports");

    const auto failures = result.failures();
    out << "cells: " << result.cells.size() << " (" << stats.cells_executed << " executed, "
        << stats.cells_from_cache << " cached, " << failures.size() << " failed)\n";
    out << "runner invocations: " << stats.runner_invocations << "\n";
    out << "results: " << (m.output_dir / "results").string() << "\n";
    if (verbosity > 0) {
        for (const auto& p : reports) {
            out << "wrote " << p.string() << "\n";
        }
    }
    for (const CellResult* c : failures) {
        err << "failed: " << c->error << "\n";
    }
    return failures.empty() ? kExitOk : kExitFailedCells;
}

int cmd_perturb(const std::string& image_path, const std::string& heatmap_path, double threshold,
                const std::string& strategy_text, const std::optional<std::string>& reference_path,
                int fill, const std::string& out_path, std::ostream& out) {
    const Strategy strategy = parse_strategy(strategy_text);
    const Threshold t(threshold);
    if (fill < 0 || fill > 255) {
        throw ConfigError("--fill must lie in [0, 255]");
    }
    if (needs_reference(strategy) && !reference_path) {
        throw ConfigError("strategy " + std::string(strategy_id(strategy)) + " needs --reference");
    }
    if (!needs_reference(strategy) && reference_path) {
        throw ConfigError("strategy " + std::string(strategy_id(strategy)) +
                          " does not take --reference");
    }
    const ImageRaster image = load_image(image_path);
    const Heatmap heatmap = load_heatmap(heatmap_path);
    std::optional<BinaryMask> reference;
    if (reference_path) {
        reference = load_mask(*reference_path, strategy == Strategy::XaiGt ? MaskRole::GroundTruth
                                                                           : MaskRole::Prediction);
    }
    const ImageRaster edited = perturb_image(image, heatmap, t, strategy,
                                             FillPolicy{static_cast<std::uint8_t>(fill)}, reference);
    store_image(edited, out_path);
    out << "wrote " << out_path << "\n";
    return kExitOk;
}

int cmd_metrics(const std::string& pred_dir, const std::string& ref_dir, const std::string& format,
                int decimals, std::ostream& out) {
    const auto pred_ids = png_stems(pred_dir);
    const auto ref_ids = png_stems(ref_dir);
    std::vector<std::string> only_pred, only_ref;
    std::set_difference(pred_ids.begin(), pred_ids.end(), ref_ids.begin(), ref_ids.end(),
                        std::back_inserter(only_pred));
    std::set_difference(ref_ids.begin(), ref_ids.end(), pred_ids.begin(), pred_ids.end(),
                        std::back_inserter(only_ref));
    if (!only_pred.empty() || !only_ref.empty()) {
        std::string msg = "unmatched mask ids";
        if (!only_pred.empty()) {
            msg += "; only in " + pred_dir + ": " + join(only_pred, ", ");
        }
        if (!only_ref.empty()) {
            msg += "; only in " + ref_dir + ": " + join(only_ref, ", ");
        }
        throw ConfigError(msg);
    }
    if (pred_ids.empty()) {
        throw ConfigError("no masks found in " + pred_dir);
    }
    if (decimals < 0 || decimals > 9) {
        throw ConfigError("--decimals must lie in [0, 9]");
    }
    const bool csv = parse_format(format) == ReportFormat::Csv;
    if (!csv && parse_format(format) != ReportFormat::Markdown) {
        throw ConfigError("metrics supports --format csv or markdown");
    }

    std::vector<std::pair<std::string, ConfusionCounts>> rows;
    std::vector<ConfusionCounts> all;
    for (const auto& id : pred_ids) {
        const BinaryMask pred = load_mask(fs::path(pred_dir) / (id + ".png"), MaskRole::Prediction);
        const BinaryMask ref = load_mask(fs::path(ref_dir) / (id + ".png"), MaskRole::GroundTruth);
        try {
            rows.emplace_back(id, confusion(pred, ref));
        } catch (const Error& e) {
            throw Error("image '" + id + "': " + e.what());
        }
        all.push_back(rows.back().second);
    }
    rows.emplace_back("micro", aggregate(all));

    const auto fmt = [&](const Measure& m) { return m ? m->to_fixed(decimals) : std::string("—"); };
    if (csv) {
        out << "image,tp,fp,fn,tn,precision,recall,f1,iou\n";
    } else {
        out << "| image | TP | FP | FN | TN | Precision | Recall | F1 | IoU |\n"
               "|---|---:|---:|---:|---:|---:|---:|---:|---:|\n";
    }
    for (const auto& [id, c] : rows) {
        const MetricSet ms = metric_set(c);
        const std::vector<std::string> fields = {id,           std::to_string(c.tp),
                                                 std::to_string(c.fp), std::to_string(c.fn),
                                                 std::to_string(c.tn), fmt(ms.precision),
                                                 fmt(ms.recall), fmt(ms.f1), fmt(ms.iou)};
        out << (csv ? join(fields, ",") : "| " + join(fields, " | ") + " |") << "\n";
    }
    return kExitOk;
}

int cmd_render(ReportScope scope, const std::optional<std::string>& results_path,
               const std::optional<std::string>& manifest_path, const Overrides& o,
               const std::optional<std::string>& out_dir, std::ostream& out) {
    ReportSpec spec;
    fs::path run_dir;
    RunResult result;
    if (manifest_path) {
        EvaluationManifest m = EvaluationManifest::load(*manifest_path);
        apply(o, m);
        spec = m.report;
        run_dir = m.output_dir;
    } else {
        if (!o.formats.empty()) {
            spec.formats.clear();
            for (const auto& f : o.formats) {
                spec.formats.push_back(parse_format(f));
            }
        }
        if (o.focus_threshold) {
            spec.focus_threshold = *o.focus_threshold;
        }
    }
    if (results_path) {
        result = load_run_result(*results_path);
        fs::path p = fs::absolute(*results_path);
        if (fs::is_regular_file(p)) {
            p = p.parent_path();
        }
        if (p.filename() == "results") {
            p = p.parent_path();
        }
        if (run_dir.empty()) {
            run_dir = p;
        }
    } else {
        result = load_run_result(run_dir);
    }
    const fs::path target = out_dir ? fs::path(*out_dir) : run_dir / "reports";
    for (const auto& p : write_reports(result, spec, scope, target)) {
        out << "wrote " << p.string() << "\n";
    }
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Perturbation-based faithfulness evaluation of segmentation saliency maps", "xaieval"};
    app.require_subcommand(1);
    int verbosity = 0;
    app.add_flag("-v,--verbose", verbosity, "More progress output (repeatable)");

    const auto add_overrides = [](CLI::App* cmd, Overrides& o, bool run_flags) {
        cmd->add_option("--format", o.formats, "Report formats: csv,json,markdown")->delimiter(',');
        cmd->add_option("--focus-threshold", o.focus_threshold, "Threshold the report renders");
        if (!run_flags) {
            return;
        }
        cmd->add_option("--thresholds", o.thresholds, "Comma-separated thresholds in [0,1]")
            ->delimiter(',');
        cmd->add_option("--strategies", o.strategies, "Comma-separated subset of s1,s2,s3gt,s3pm")
            ->delimiter(',');
        cmd->add_option("--fill", o.fill, "Sample written to hidden pixels (0-255)");
        cmd->add_option("--s3-mode", o.s3_mode, "S3 scoring: rerun or mask");
        cmd->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
        cmd->add_flag("--no-cache", o.no_cache, "Recompute every cell");
        cmd->add_option("--output", o.output, "Output directory (overrides the manifest)");
    };

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Run the baseline and every cell, then write results and reports");
    std::string eval_manifest;
    Overrides eval_o;
    evaluate->add_option("--manifest", eval_manifest, "Run manifest (JSON)")->required();
    add_overrides(evaluate, eval_o, true);

    // perturb
    auto* perturb = app.add_subcommand("perturb", "Write the edited image for one strategy and threshold");
    std::string p_image, p_heatmap, p_strategy, p_out;
    double p_threshold = 0.4;
    std::optional<std::string> p_reference;
    int p_fill = 0;
    perturb->add_option("--image", p_image, "Input image (PNG)")->required();
    perturb->add_option("--heatmap", p_heatmap, "Heatmap (NPY or 16-bit PNG)")->required();
    perturb->add_option("--threshold", p_threshold, "Highlight threshold in [0,1]")->capture_default_str();
    perturb->add_option("--strategy", p_strategy, "s1, s2, s3gt or s3pm")->required();
    perturb->add_option("--reference", p_reference, "GT mask (s3gt) or predicted mask (s3pm)");
    perturb->add_option("--fill", p_fill, "Sample written to hidden pixels (0-255)")->capture_default_str();
    perturb->add_option("--out", p_out, "Output PNG")->required();

    // metrics
    auto* metrics = app.add_subcommand("metrics", "Confusion counts and metrics for matching mask pairs");
    std::string m_pred, m_ref, m_format = "markdown";
    int m_decimals = 2;
    metrics->add_option("--pred", m_pred, "Directory of predicted masks <id>.png")->required();
    metrics->add_option("--ref", m_ref, "Directory of reference masks <id>.png")->required();
    metrics->add_option("--format", m_format, "csv or markdown")->capture_default_str();
    metrics->add_option("--decimals", m_decimals, "Decimal places")->capture_default_str();

    // report / sweep
    struct RenderArgs {
        std::optional<std::string> results;
        std::optional<std::string> manifest;
        std::optional<std::string> out;
        Overrides o;
    };
    RenderArgs report_args, sweep_args;
    const auto add_render = [&](CLI::App* cmd, RenderArgs& a) {
        auto* r = cmd->add_option("--results", a.results, "results.json, its directory, or a run output directory");
        auto* m = cmd->add_option("--manifest", a.manifest, "Run manifest; locates results and report settings");
        r->excludes(m);
        cmd->add_option("--out", a.out, "Report directory (default <run>/reports)");
        add_overrides(cmd, a.o, false);
    };
    auto* report = app.add_subcommand("report", "Render the tables at the focus threshold");
    add_render(report, report_args);
    auto* sweep = app.add_subcommand("sweep", "Render every strategy and threshold");
    add_render(sweep, sweep_args);

    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitConfig;
    }

    try {
        if (evaluate->parsed()) {
            return cmd_evaluate(eval_manifest, eval_o, verbosity, out, err);
        }
        if (perturb->parsed()) {
            return cmd_perturb(p_image, p_heatmap, p_threshold, p_strategy, p_reference, p_fill, p_out, out);
        }
        if (metrics->parsed()) {
            return cmd_metrics(m_pred, m_ref, m_format, m_decimals, out);
        }
        for (auto [cmd, a, scope] : {std::tuple{report, &report_args, ReportScope::Focus},
                                     std::tuple{sweep, &sweep_args, ReportScope::Sweep}}) {
            if (cmd->parsed()) {
                if (!a->results && !a->manifest) {
                    throw ConfigError("one of --results or --manifest is required");
                }
                return cmd_render(scope, a->results, a->manifest, a->o, a->out, out);
            }
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailedCells;
    }
    return kExitConfig;
}

}  // namespace xaieval
