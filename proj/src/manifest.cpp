#include "xaieval/manifest.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "xaieval/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace xaieval {
namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> known,
                         std::string_view where) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError("unknown field '" + key + "' in " + std::string(where));
        }
    }
}

RunnerSpec parse_runner(const json& j, const fs::path& base, const fs::path& dataset) {
    reject_unknown_keys(j, {"mode", "command", "dir", "kind", "timeout", "reentrant"}, "runner");
    RunnerSpec spec;
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "subprocess") {
        SubprocessRunner s;
        s.command = j.at("command").get<std::vector<std::string>>();
        spec.mode = std::move(s);
    } else if (mode == "precomputed") {
        spec.mode = PrecomputedRunner{j.contains("dir") ? resolve(base, j.at("dir").get<std::string>())
                                                        : dataset / "pred"};
    } else if (mode == "builtin") {
        BuiltinRunner b;
        b.kind = parse_builtin(j.at("kind").get<std::string>());
        if (j.contains("dir")) {
            b.data_dir = resolve(base, j.at("dir").get<std::string>());
        } else {
            b.data_dir = dataset / (b.kind == BuiltinKind::IdentityGt ? "gt" : "prob");
        }
        spec.mode = std::move(b);
    } else {
        throw ConfigError("unknown runner mode '" + mode + "'");
    }
    if (j.contains("timeout")) {
        spec.timeout = std::chrono::duration<double>(j.at("timeout").get<double>());
    }
    spec.reentrant = j.value("reentrant", false);
    return spec;
}

ReportSpec parse_report(const json& j) {
    reject_unknown_keys(j, {"formats", "focus_threshold", "decimals", "ranking"}, "report");
    ReportSpec r;
    if (j.contains("formats")) {
        r.formats.clear();
        for (const auto& f : j.at("formats")) {
            r.formats.push_back(parse_format(f.get<std::string>()));
        }
    }
    r.focus_threshold = j.value("focus_threshold", r.focus_threshold);
    r.decimals = j.value("decimals", r.decimals);
    if (j.contains("ranking")) {
        for (const auto& [sid, stats] : j.at("ranking").items()) {
            const Strategy s = parse_strategy(sid);
            for (const auto& [stat, dir] : stats.items()) {
                r.ranking.set(s, parse_statistic(stat), parse_direction(dir.get<std::string>()));
            }
        }
    }
    return r;
}

}  // namespace

std::string_view s3_mode_id(S3Mode m) noexcept {
    return m == S3Mode::Rerun ? "rerun" : "mask";
}

S3Mode parse_s3_mode(std::string_view text) {
    if (text == "rerun") {
        return S3Mode::Rerun;
    }
    if (text == "mask" || text == "mask-vs-reference") {
        return S3Mode::MaskVsReference;
    }
    throw ConfigError("unknown s3 mode '" + std::string(text) + "' (expected rerun or mask)");
}

std::string threshold_text(double t) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), t);
    return std::string(buf, res.ptr);
}

void EvaluationManifest::validate() const {
    if (methods.empty()) {
        throw ConfigError("no methods configured");
    }
    std::set<std::string> seen_methods;
    for (const auto& m : methods) {
        if (m.empty() || m.find('/') != std::string::npos || m == "." || m == "..") {
            throw ConfigError("invalid method id '" + m + "'");
        }
        if (!seen_methods.insert(m).second) {
            throw ConfigError("duplicate method id '" + m + "'");
        }
    }
    if (thresholds.empty()) {
        throw ConfigError("no thresholds configured");
    }
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        (void)Threshold(thresholds[i]);
        if (i > 0 && !(thresholds[i] > thresholds[i - 1])) {
            throw ConfigError("thresholds must be strictly increasing");
        }
    }
    if (strategies.empty()) {
        throw ConfigError("no strategies configured");
    }
    std::set<Strategy> seen_strategies;
    for (Strategy s : strategies) {
        if (!seen_strategies.insert(s).second) {
            throw ConfigError("duplicate strategy '" + std::string(strategy_id(s)) + "'");
        }
    }
    if (jobs == 0) {
        throw ConfigError("jobs must be at least 1");
    }
    if (output_dir.empty()) {
        throw ConfigError("no output directory configured");
    }
    if (std::find(thresholds.begin(), thresholds.end(), report.focus_threshold) == thresholds.end()) {
        throw ConfigError("focus threshold " + threshold_text(report.focus_threshold) +
                          " is not one of the configured thresholds");
    }
    if (report.decimals < 0 || report.decimals > 9) {
        throw ConfigError("report decimals must lie in [0, 9]");
    }
    if (report.formats.empty()) {
        throw ConfigError("no report formats configured");
    }
    if (runner) {
        runner->validate();
    }
}

std::vector<std::string> EvaluationManifest::image_ids() const {
    std::vector<std::string> ids;
    const fs::path dir = dataset_root / "images";
    if (!fs::is_directory(dir)) {
        return ids;
    }
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".png") {
            ids.push_back(e.path().stem().string());
        }
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

fs::path EvaluationManifest::image_path(const std::string& id) const {
    return dataset_root / "images" / (id + ".png");
}

fs::path EvaluationManifest::gt_path(const std::string& id) const {
    return dataset_root / "gt" / (id + ".png");
}

fs::path EvaluationManifest::heatmap_path(const std::string& method, const std::string& id) const {
    const fs::path dir = dataset_root / "heatmaps" / method;
    fs::path npy = dir / (id + ".npy");
    if (fs::exists(npy)) {
        return npy;
    }
    return dir / (id + ".png");
}

void EvaluationManifest::validate_dataset() const {
    if (!fs::is_directory(dataset_root)) {
        throw ConfigError("dataset directory not found: " + dataset_root.string());
    }
    for (const char* sub : {"images", "gt"}) {
        if (!fs::is_directory(dataset_root / sub)) {
            throw ConfigError("missing directory: " + (dataset_root / sub).string());
        }
    }
    for (const auto& m : methods) {
        if (!fs::is_directory(dataset_root / "heatmaps" / m)) {
            throw ConfigError("missing directory: " + (dataset_root / "heatmaps" / m).string());
        }
    }
    const auto ids = image_ids();
    if (ids.empty()) {
        throw ConfigError("no images found in " + (dataset_root / "images").string());
    }
    for (const auto& id : ids) {
        if (!fs::exists(gt_path(id))) {
            throw ConfigError("missing ground-truth mask for image '" + id + "': " + gt_path(id).string());
        }
        for (const auto& m : methods) {
            if (!fs::exists(heatmap_path(m, id))) {
                throw ConfigError("missing heatmap for method '" + m + "', image '" + id + "' in " +
                                  (dataset_root / "heatmaps" / m).string());
            }
        }
    }
    if (!runner && !fs::is_directory(dataset_root / "pred")) {
        throw ConfigError("no runner configured and no pred/ directory in " + dataset_root.string());
    }
}

RunnerSpec EvaluationManifest::effective_runner() const {
    if (runner) {
        return *runner;
    }
    RunnerSpec spec;
    spec.mode = PrecomputedRunner{dataset_root / "pred"};
    return spec;
}

std::string EvaluationManifest::effective_config_json() const {
    json strategies_json = json::array();
    for (Strategy s : strategies) {
        strategies_json.push_back(std::string(strategy_id(s)));
    }
    const RunnerSpec r = effective_runner();
    json doc = {
        {"schema", kSchema},
        {"dataset", dataset_root.string()},
        {"methods", methods},
        {"thresholds", thresholds},
        {"strategies", strategies_json},
        {"s3_mode", std::string(s3_mode_id(s3_mode))},
        {"fill", fill.sample},
        {"target_class", target_class},
        {"runner", {{"mode", std::string(r.mode_name())},
                    {"identity", r.identity()},
                    {"timeout", r.timeout.count()},
                    {"reentrant", r.reentrant}}},
    };
    return doc.dump();
}

EvaluationManifest EvaluationManifest::from_json_text(const std::string& text, const fs::path& base_dir) {
    try {
        const json doc = json::parse(text);
        if (!doc.is_object()) {
            throw ConfigError("run manifest must be a JSON object");
        }
        reject_unknown_keys(doc,
                            {"schema", "dataset", "methods", "thresholds", "strategies", "s3_mode",
                             "fill", "target_class", "runner", "output", "cache", "jobs", "report"},
                            "run manifest");
        if (doc.value("schema", kSchema) != kSchema) {
            throw ConfigError("unsupported run manifest schema " + doc.at("schema").dump());
        }
        EvaluationManifest m;
        m.dataset_root = resolve(base_dir, doc.at("dataset").get<std::string>());
        m.methods = doc.value("methods", std::vector<std::string>{});
        if (doc.contains("thresholds")) {
            m.thresholds = doc.at("thresholds").get<std::vector<double>>();
        }
        if (doc.contains("strategies")) {
            m.strategies.clear();
            for (const auto& s : doc.at("strategies")) {
                m.strategies.push_back(parse_strategy(s.get<std::string>()));
            }
        }
        if (doc.contains("s3_mode")) {
            m.s3_mode = parse_s3_mode(doc.at("s3_mode").get<std::string>());
        }
        if (doc.contains("fill")) {
            const int fill = doc.at("fill").get<int>();
            if (fill < 0 || fill > 255) {
                throw ConfigError("fill must lie in [0, 255]");
            }
            m.fill.sample = static_cast<std::uint8_t>(fill);
        }
        m.target_class = doc.value("target_class", m.target_class);
        if (doc.contains("runner")) {
            m.runner = parse_runner(doc.at("runner"), base_dir, m.dataset_root);
        }
        m.output_dir = resolve(base_dir, doc.value("output", std::string("out")));
        m.cache = doc.value("cache", true);
        const int jobs = doc.value("jobs", 1);
        if (jobs < 1) {
            throw ConfigError("jobs must be at least 1");
        }
        m.jobs = static_cast<unsigned>(jobs);
        if (doc.contains("report")) {
            m.report = parse_report(doc.at("report"));
        }
        return m;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed run manifest: ") + e.what());
    }
}

EvaluationManifest EvaluationManifest::load(const fs::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw ConfigError("cannot read run manifest: " + file.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str(), fs::absolute(file).parent_path());
}

}  // namespace xaieval
