#include "xaieval/runner.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>

#include "xaieval/digest.hpp"
#include "xaieval/error.hpp"
#include "xaieval/raster_io.hpp"
#include "xaieval/simd/kernels.hpp"
#include "xaieval/subprocess.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace xaieval {
namespace {

// Heatmap files for an id: .npy preferred over .png.
fs::path find_heatmap_file(const fs::path& dir, const std::string& id) {
    for (const char* ext : {".npy", ".png"}) {
        fs::path p = dir / (id + ext);
        if (fs::exists(p)) {
            return p;
        }
    }
    return {};
}

std::string digest_directory(const fs::path& dir) {
    Sha256 h;
    if (!fs::is_directory(dir)) {
        return h.hex_digest();
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file()) {
            files.push_back(e.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        h.field(f.filename().string()).file(f);
    }
    return h.hex_digest();
}

class SubprocessModelRunner : public ModelRunner {
public:
    SubprocessModelRunner(SubprocessRunner spec, std::chrono::duration<double> timeout, bool reentrant)
        : spec_(std::move(spec)), timeout_(timeout), reentrant_(reentrant) {}

    PredictionMap predict(const BatchManifest& manifest, const fs::path& out_dir) override {
        fs::create_directories(out_dir);
        for (const auto& e : manifest.entries) {
            std::error_code ec;
            fs::remove(out_dir / (e.id + ".png"), ec);
        }
        const fs::path manifest_path = out_dir / "manifest.json";
        const std::string text = manifest.to_json();
        write_file_bytes(manifest_path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                                  text.size()));

        std::vector<std::string> argv = spec_.command;
        argv.insert(argv.end(), {"--manifest", manifest_path.string(), "--out", out_dir.string()});
        const ProcessOutcome outcome = run_process(argv, timeout_);
        if (!outcome.succeeded()) {
            throw RunnerError("runner '" + spec_.command.front() + "' failed: " + outcome.describe());
        }

        PredictionMap out;
        for (const auto& e : manifest.entries) {
            const fs::path mask_path = out_dir / (e.id + ".png");
            if (!fs::exists(mask_path)) {
                throw RunnerError("runner produced no mask for id '" + e.id + "'");
            }
            out.emplace(e.id, load_mask(mask_path, MaskRole::Prediction));
        }
        return out;
    }

    std::string identity() const override {
        std::string id = "subprocess:";
        for (const auto& a : spec_.command) {
            id += " " + a;
        }
        return id;
    }

    bool reentrant() const noexcept override { return reentrant_; }
    bool writes_masks() const noexcept override { return true; }

private:
    SubprocessRunner spec_;
    std::chrono::duration<double> timeout_;
    bool reentrant_;
};

class PrecomputedModelRunner : public ModelRunner {
public:
    explicit PrecomputedModelRunner(PrecomputedRunner spec)
        : spec_(std::move(spec)), digest_(digest_directory(spec_.prediction_dir)) {}

    PredictionMap predict(const BatchManifest& manifest, const fs::path&) override {
        PredictionMap out;
        for (const auto& e : manifest.entries) {
            const fs::path p = spec_.prediction_dir / (e.id + ".png");
            if (!fs::exists(p)) {
                throw RunnerError("no precomputed mask for id '" + e.id + "' in " +
                                  spec_.prediction_dir.string());
            }
            out.emplace(e.id, load_mask(p, MaskRole::Prediction));
        }
        return out;
    }

    std::string identity() const override {
        return "precomputed:" + spec_.prediction_dir.filename().string() + "@" + digest_;
    }

    bool reentrant() const noexcept override { return true; }

private:
    PrecomputedRunner spec_;
    std::string digest_;
};

}  // namespace

// ---------------------------------------------------------------------------

void BatchManifest::validate() const {
    std::set<std::string> seen;
    for (const auto& e : entries) {
        if (e.id.empty()) {
            throw ConfigError("batch manifest entry with empty id");
        }
        if (!seen.insert(e.id).second) {
            throw ConfigError("duplicate id in batch manifest: '" + e.id + "'");
        }
    }
}

std::string BatchManifest::to_json() const {
    json entries_json = json::array();
    for (const auto& e : entries) {
        entries_json.push_back({{"id", e.id}, {"image", e.image.string()}});
    }
    json doc = {{"schema", kSchema}, {"target_class", target_class}, {"entries", entries_json}};
    return doc.dump(2) + "\n";
}

BatchManifest BatchManifest::from_json(const std::string& text) {
    try {
        const json doc = json::parse(text);
        if (doc.at("schema").get<int>() != kSchema) {
            throw ConfigError("unsupported batch manifest schema " + doc.at("schema").dump());
        }
        BatchManifest m;
        m.target_class = doc.at("target_class").get<std::string>();
        for (const auto& e : doc.at("entries")) {
            m.entries.push_back({e.at("id").get<std::string>(), e.at("image").get<std::string>()});
        }
        m.validate();
        return m;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed batch manifest: ") + e.what());
    }
}

std::string_view builtin_name(BuiltinKind kind) noexcept {
    return kind == BuiltinKind::IdentityGt ? "identity-gt" : "visibility-prob";
}

BuiltinKind parse_builtin(std::string_view name) {
    if (name == "identity-gt") {
        return BuiltinKind::IdentityGt;
    }
    if (name == "visibility-prob") {
        return BuiltinKind::VisibilityProb;
    }
    throw ConfigError("unknown builtin runner '" + std::string(name) + "'");
}

void RunnerSpec::validate() const {
    if (!(timeout.count() > 0.0)) {
        throw ConfigError("runner timeout must be positive");
    }
    if (const auto* s = std::get_if<SubprocessRunner>(&mode)) {
        if (s->command.empty() || s->command.front().empty()) {
            throw ConfigError("subprocess runner needs a command");
        }
    } else if (const auto* p = std::get_if<PrecomputedRunner>(&mode)) {
        if (p->prediction_dir.empty()) {
            throw ConfigError("precomputed runner needs a prediction directory");
        }
    } else if (const auto* b = std::get_if<BuiltinRunner>(&mode)) {
        if (b->data_dir.empty()) {
            throw ConfigError(std::string("builtin runner ") + std::string(builtin_name(b->kind)) +
                              " needs a data directory");
        }
    }
}

std::string_view RunnerSpec::mode_name() const noexcept {
    switch (mode.index()) {
        case 0: return "subprocess";
        case 1: return "precomputed";
        default: return "builtin";
    }
}

std::string RunnerSpec::identity() const {
    return make_runner(*this, FillPolicy{})->identity();
}

std::unique_ptr<ModelRunner> make_runner(const RunnerSpec& spec, FillPolicy fill) {
    spec.validate();
    if (const auto* s = std::get_if<SubprocessRunner>(&spec.mode)) {
        return std::make_unique<SubprocessModelRunner>(*s, spec.timeout, spec.reentrant);
    }
    if (const auto* p = std::get_if<PrecomputedRunner>(&spec.mode)) {
        return std::make_unique<PrecomputedModelRunner>(*p);
    }
    const auto& b = std::get<BuiltinRunner>(spec.mode);
    if (b.kind == BuiltinKind::IdentityGt) {
        return std::make_unique<IdentityGtRunner>(b.data_dir);
    }
    return std::make_unique<VisibilityProbRunner>(b.data_dir, fill);
}

PredictionMap run_batch(ModelRunner& runner, const BatchManifest& manifest, const fs::path& out_dir) {
    manifest.validate();
    for (const auto& e : manifest.entries) {
        if (!fs::exists(e.image)) {
            throw RunnerError("batch image missing for id '" + e.id + "': " + e.image.string());
        }
    }
    PredictionMap predictions = runner.predict(manifest, out_dir);
    PredictionMap checked;
    for (const auto& e : manifest.entries) {
        auto it = predictions.find(e.id);
        if (it == predictions.end()) {
            throw RunnerError("runner produced no mask for id '" + e.id + "'");
        }
        const ImageRaster image = load_image(e.image);
        if (it->second.width() != image.width() || it->second.height() != image.height()) {
            throw RunnerError("mask for id '" + e.id + "' is " + std::to_string(it->second.width()) +
                              "x" + std::to_string(it->second.height()) + " but image is " +
                              std::to_string(image.width()) + "x" + std::to_string(image.height()));
        }
        checked.emplace(e.id, it->second.with_role(MaskRole::Prediction));
    }
    if (!runner.writes_masks() && !out_dir.empty()) {
        for (const auto& [id, mask] : checked) {
            store_mask(mask, out_dir / (id + ".png"));
        }
    }
    return checked;
}

PredictionMap run_batch(const RunnerSpec& spec, const BatchManifest& manifest, const fs::path& out_dir,
                        FillPolicy fill) {
    auto runner = make_runner(spec, fill);
    return run_batch(*runner, manifest, out_dir);
}

// ---------------------------------------------------------------------------

BinaryMask builtin_visibility_prob(const ImageRaster& image, const Heatmap& prob, FillPolicy fill) {
    require_same_grid(image, prob, "image vs probability map");
    std::vector<std::uint8_t> bits(image.pixel_count());
    simd::active_kernels().visible_and_probable(image.samples().data(), prob.values().data(),
                                                image.pixel_count(), image.channels(), fill.sample,
                                                0.5f, bits.data());
    return BinaryMask(image.width(), image.height(), std::move(bits), MaskRole::Prediction);
}

IdentityGtRunner::IdentityGtRunner(fs::path gt_dir) : gt_dir_(std::move(gt_dir)) {}

void IdentityGtRunner::register_mask(const std::string& id, BinaryMask gt) {
    std::lock_guard lock(mutex_);
    registry_.insert_or_assign(id, std::move(gt));
}

const BinaryMask& IdentityGtRunner::mask_for(const std::string& id) {
    std::lock_guard lock(mutex_);
    auto it = registry_.find(id);
    if (it == registry_.end()) {
        const fs::path p = gt_dir_ / (id + ".png");
        if (gt_dir_.empty() || !fs::exists(p)) {
            throw RunnerError("identity-gt: no ground-truth mask registered for id '" + id + "'");
        }
        it = registry_.emplace(id, load_mask(p, MaskRole::Prediction)).first;
    }
    return it->second;
}

PredictionMap IdentityGtRunner::predict(const BatchManifest& manifest, const fs::path&) {
    PredictionMap out;
    for (const auto& e : manifest.entries) {
        out.emplace(e.id, mask_for(e.id).with_role(MaskRole::Prediction));
    }
    return out;
}

std::string IdentityGtRunner::identity() const {
    return "builtin:identity-gt";
}

VisibilityProbRunner::VisibilityProbRunner(fs::path prob_dir, FillPolicy fill)
    : prob_dir_(std::move(prob_dir)), fill_(fill), content_digest_(digest_directory(prob_dir_)) {}

void VisibilityProbRunner::register_prob(const std::string& id, Heatmap prob) {
    std::lock_guard lock(mutex_);
    registry_.insert_or_assign(id, std::move(prob));
}

const Heatmap& VisibilityProbRunner::prob_for(const std::string& id) {
    std::lock_guard lock(mutex_);
    auto it = registry_.find(id);
    if (it == registry_.end()) {
        const fs::path p = prob_dir_.empty() ? fs::path{} : find_heatmap_file(prob_dir_, id);
        if (p.empty()) {
            throw RunnerError("visibility-prob: no probability map registered for id '" + id + "'");
        }
        it = registry_.emplace(id, load_heatmap(p)).first;
    }
    return it->second;
}

PredictionMap VisibilityProbRunner::predict(const BatchManifest& manifest, const fs::path&) {
    PredictionMap out;
    for (const auto& e : manifest.entries) {
        const Heatmap& prob = prob_for(e.id);
        out.emplace(e.id, builtin_visibility_prob(load_image(e.image), prob, fill_));
    }
    return out;
}

std::string VisibilityProbRunner::identity() const {
    return "builtin:visibility-prob@" + content_digest_;
}

}  // namespace xaieval
