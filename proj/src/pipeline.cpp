#include "xaieval/pipeline.hpp"

#include <json.hpp>

#include <chrono>
#include <ctime>
#include <exception>
#include <mutex>
#include <thread>

#include "xaieval/digest.hpp"
#include "xaieval/error.hpp"
#include "xaieval/perturbation.hpp"
#include "xaieval/raster_io.hpp"
#include "xaieval/result_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace xaieval {
namespace {

constexpr std::string_view kCellCacheVersion = "xaieval-cell-v1";
constexpr std::string_view kBaselineCacheVersion = "xaieval-baseline-v1";

json counts_to_json(const std::vector<ImageCounts>& per_image) {
    json arr = json::array();
    for (const auto& ic : per_image) {
        arr.push_back({{"id", ic.image_id},
                       {"tp", ic.counts.tp},
                       {"fp", ic.counts.fp},
                       {"fn", ic.counts.fn},
                       {"tn", ic.counts.tn}});
    }
    return arr;
}

std::vector<ImageCounts> counts_from_json(const json& arr) {
    std::vector<ImageCounts> out;
    for (const auto& e : arr) {
        out.push_back({e.at("id").get<std::string>(),
                       {e.at("tp").get<std::uint64_t>(), e.at("fp").get<std::uint64_t>(),
                        e.at("fn").get<std::uint64_t>(), e.at("tn").get<std::uint64_t>()}});
    }
    return out;
}

ConfusionCounts sum_counts(const std::vector<ImageCounts>& per_image) {
    std::vector<ConfusionCounts> counts;
    counts.reserve(per_image.size());
    for (const auto& ic : per_image) {
        counts.push_back(ic.counts);
    }
    return aggregate(counts);
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::optional<std::string> read_text_if_exists(const fs::path& path) {
    if (!fs::exists(path)) {
        return std::nullopt;
    }
    const auto bytes = read_file_bytes(path);
    return std::string(bytes.begin(), bytes.end());
}

// Adds the image id to errors raised while processing one image.
template <typename Fn>
auto with_image_context(const std::string& id, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error("image '" + id + "': " + e.what());
    }
}

}  // namespace

struct EvaluationPipeline::State {
    std::mutex mutex;
    std::mutex runner_mutex;
    std::optional<BaselineResult> baseline;
    std::map<fs::path, std::string> digests;
    std::atomic<std::size_t> runner_invocations{0};
    std::atomic<std::size_t> cells_executed{0};
    std::atomic<std::size_t> cells_from_cache{0};
    bool baseline_from_cache = false;

    std::string digest(const fs::path& p) {
        {
            std::lock_guard lock(mutex);
            if (auto it = digests.find(p); it != digests.end()) {
                return it->second;
            }
        }
        std::string d = sha256_hex(read_file_bytes(p));
        std::lock_guard lock(mutex);
        digests.emplace(p, d);
        return d;
    }
};

std::string describe(const CellKey& key) {
    return "method '" + key.method + "', threshold " + threshold_text(key.threshold) +
           ", strategy " + std::string(strategy_id(key.strategy));
}

const CellResult* RunResult::find(const std::string& method, double threshold, Strategy strategy) const {
    for (const auto& c : cells) {
        if (c.key.method == method && c.key.threshold == threshold && c.key.strategy == strategy) {
            return &c;
        }
    }
    return nullptr;
}

std::vector<const CellResult*> RunResult::failures() const {
    std::vector<const CellResult*> out;
    for (const auto& c : cells) {
        if (!c.ok()) {
            out.push_back(&c);
        }
    }
    return out;
}

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    const unsigned count = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
    workers.reserve(count);
    for (unsigned w = 0; w < count; ++w) {
        workers.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) {
                    return;
                }
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) {
                        first_error = std::current_exception();
                    }
                    next.store(n);
                }
            }
        });
    }
    for (auto& t : workers) {
        t.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

// ---------------------------------------------------------------------------

EvaluationPipeline::EvaluationPipeline(EvaluationManifest manifest)
    : EvaluationPipeline(manifest, nullptr) {}

EvaluationPipeline::EvaluationPipeline(EvaluationManifest manifest, std::unique_ptr<ModelRunner> runner)
    : manifest_(std::move(manifest)), runner_(std::move(runner)), state_(std::make_unique<State>()) {
    manifest_.validate();
    manifest_.validate_dataset();
    ids_ = manifest_.image_ids();
    if (!runner_) {
        runner_ = make_runner(manifest_.effective_runner(), manifest_.fill);
    }
}

EvaluationPipeline::~EvaluationPipeline() = default;

RunStats EvaluationPipeline::stats() const {
    RunStats s;
    s.runner_invocations = state_->runner_invocations.load();
    s.cells_executed = state_->cells_executed.load();
    s.cells_from_cache = state_->cells_from_cache.load();
    s.baseline_from_cache = state_->baseline_from_cache;
    return s;
}

bool EvaluationPipeline::needs_baseline() const {
    for (Strategy s : manifest_.strategies) {
        if (!needs_reference(s) || manifest_.s3_mode == S3Mode::Rerun || s == Strategy::XaiPm) {
            return true;
        }
    }
    return false;
}

PredictionMap EvaluationPipeline::invoke_runner(const BatchManifest& batch, const fs::path& out_dir) {
    std::unique_lock<std::mutex> lock(state_->runner_mutex, std::defer_lock);
    if (!runner_->reentrant()) {
        lock.lock();
    }
    ++state_->runner_invocations;
    return run_batch(*runner_, batch, out_dir);
}

std::string EvaluationPipeline::baseline_cache_key() {
    Sha256 h;
    h.field(kBaselineCacheVersion)
        .field(runner_->identity())
        .field(std::to_string(manifest_.fill.sample))
        .field(manifest_.target_class);
    for (const auto& id : ids_) {
        h.field(id)
            .field(state_->digest(manifest_.image_path(id)))
            .field(state_->digest(manifest_.gt_path(id)));
    }
    return h.hex_digest();
}

std::string EvaluationPipeline::cell_cache_key(const CellKey& key) {
    const bool mask_mode = needs_reference(key.strategy) && manifest_.s3_mode == S3Mode::MaskVsReference;
    const fs::path baseline_dir = manifest_.output_dir / "pred" / "baseline";
    Sha256 h;
    h.field(kCellCacheVersion)
        .field(mask_mode ? "mask" : runner_->identity())
        .field(std::to_string(manifest_.fill.sample))
        .field(strategy_id(key.strategy))
        .field(threshold_text(key.threshold))
        .field(manifest_.target_class)
        .field(key.method);
    for (const auto& id : ids_) {
        h.field(id)
            .field(state_->digest(manifest_.image_path(id)))
            .field(state_->digest(manifest_.gt_path(id)))
            .field(state_->digest(manifest_.heatmap_path(key.method, id)));
        if (key.strategy == Strategy::XaiPm) {
            h.field(state_->digest(baseline_dir / (id + ".png")));
        }
    }
    return h.hex_digest();
}

const BaselineResult& EvaluationPipeline::run_baseline() {
    if (state_->baseline) {
        return *state_->baseline;
    }
    const fs::path pred_dir = manifest_.output_dir / "pred" / "baseline";
    std::string key;
    fs::path cache_file;
    if (manifest_.cache) {
        key = baseline_cache_key();
        cache_file = manifest_.output_dir / "cache" / ("baseline-" + key + ".json");
        if (auto text = read_text_if_exists(cache_file)) {
            bool complete = true;
            for (const auto& id : ids_) {
                complete = complete && fs::exists(pred_dir / (id + ".png"));
            }
            if (complete) {
                const json doc = json::parse(*text);
                BaselineResult b;
                b.per_image = counts_from_json(doc.at("per_image"));
                b.counts = sum_counts(b.per_image);
                b.metrics = metric_set(b.counts);
                state_->baseline = std::move(b);
                state_->baseline_from_cache = true;
                return *state_->baseline;
            }
        }
    }

    BatchManifest batch;
    batch.target_class = manifest_.target_class;
    for (const auto& id : ids_) {
        batch.entries.push_back({id, fs::absolute(manifest_.image_path(id))});
    }
    const PredictionMap predictions = invoke_runner(batch, pred_dir);

    BaselineResult b;
    b.per_image.resize(ids_.size());
    parallel_for(ids_.size(), manifest_.jobs, [&](std::size_t i) {
        const std::string& id = ids_[i];
        b.per_image[i] = with_image_context(id, [&] {
            const BinaryMask gt = load_mask(manifest_.gt_path(id), MaskRole::GroundTruth);
            return ImageCounts{id, confusion(predictions.at(id), gt)};
        });
    });
    b.counts = sum_counts(b.per_image);
    b.metrics = metric_set(b.counts);

    if (manifest_.cache) {
        write_text(cache_file, json{{"key", key}, {"per_image", counts_to_json(b.per_image)}}.dump(1) + "\n");
    }
    state_->baseline = std::move(b);
    return *state_->baseline;
}

CellResult EvaluationPipeline::run_cell(const std::string& method, double threshold, Strategy strategy) {
    return compute_cell(CellKey{method, threshold, strategy}, manifest_.jobs);
}

CellResult EvaluationPipeline::compute_cell(const CellKey& key, unsigned image_jobs) {
    try {
        (void)Threshold(key.threshold);
        const bool mask_mode =
            needs_reference(key.strategy) && manifest_.s3_mode == S3Mode::MaskVsReference;
        if (!mask_mode || key.strategy == Strategy::XaiPm) {
            run_baseline();
        }

        std::string cache_key;
        fs::path cache_file;
        if (manifest_.cache) {
            cache_key = cell_cache_key(key);
            cache_file = manifest_.output_dir / "cache" / ("cell-" + cache_key + ".json");
            if (auto text = read_text_if_exists(cache_file)) {
                const json doc = json::parse(*text);
                CellResult cell;
                cell.key = key;
                cell.per_image = counts_from_json(doc.at("per_image"));
                cell.counts = sum_counts(cell.per_image);
                cell.metrics = metric_set(cell.counts);
                if (state_->baseline &&
                    state_->baseline->metrics.reference_positive == cell.metrics.reference_positive &&
                    state_->baseline->metrics.reference_negative == cell.metrics.reference_negative) {
                    cell.deltas = delta_set(state_->baseline->metrics, cell.metrics);
                }
                ++state_->cells_from_cache;
                return cell;
            }
        }

        CellResult cell = mask_mode ? mask_cell(key, image_jobs) : rerun_cell(key, image_jobs);
        ++state_->cells_executed;
        if (manifest_.cache) {
            write_text(cache_file,
                       json{{"key", cache_key}, {"per_image", counts_to_json(cell.per_image)}}.dump(1) + "\n");
        }
        return cell;
    } catch (const std::exception& e) {
        CellResult failed;
        failed.key = key;
        failed.error = describe(key) + ": " + e.what();
        return failed;
    }
}

CellResult EvaluationPipeline::rerun_cell(const CellKey& key, unsigned image_jobs) {
    const fs::path rel = fs::path(key.method) / threshold_text(key.threshold) /
                         std::string(strategy_id(key.strategy));
    const fs::path edited_dir = manifest_.output_dir / "edited" / rel;
    const fs::path pred_dir = manifest_.output_dir / "pred" / rel;
    const fs::path baseline_dir = manifest_.output_dir / "pred" / "baseline";
    const Threshold t(key.threshold);

    BatchManifest batch;
    batch.target_class = manifest_.target_class;
    batch.entries.resize(ids_.size());
    parallel_for(ids_.size(), image_jobs, [&](std::size_t i) {
        const std::string& id = ids_[i];
        with_image_context(id, [&] {
            const ImageRaster image = load_image(manifest_.image_path(id));
            const Heatmap heatmap = load_heatmap(manifest_.heatmap_path(key.method, id), key.method);
            std::optional<BinaryMask> reference;
            if (key.strategy == Strategy::XaiGt) {
                reference = load_mask(manifest_.gt_path(id), MaskRole::GroundTruth);
            } else if (key.strategy == Strategy::XaiPm) {
                reference = load_mask(baseline_dir / (id + ".png"), MaskRole::Prediction);
            }
            const ImageRaster edited =
                perturb_image(image, heatmap, t, key.strategy, manifest_.fill, reference);
            const fs::path out = edited_dir / (id + ".png");
            store_image(edited, out);
            batch.entries[i] = {id, fs::absolute(out)};
        });
    });

    const PredictionMap predictions = invoke_runner(batch, pred_dir);

    CellResult cell;
    cell.key = key;
    cell.per_image.resize(ids_.size());
    parallel_for(ids_.size(), image_jobs, [&](std::size_t i) {
        const std::string& id = ids_[i];
        cell.per_image[i] = with_image_context(id, [&] {
            const BinaryMask gt = load_mask(manifest_.gt_path(id), MaskRole::GroundTruth);
            return ImageCounts{id, confusion(predictions.at(id), gt)};
        });
    });
    cell.counts = sum_counts(cell.per_image);
    cell.metrics = metric_set(cell.counts);
    cell.deltas = delta_set(state_->baseline->metrics, cell.metrics);
    return cell;
}

CellResult EvaluationPipeline::mask_cell(const CellKey& key, unsigned image_jobs) {
    const fs::path baseline_dir = manifest_.output_dir / "pred" / "baseline";
    const Threshold t(key.threshold);

    CellResult cell;
    cell.key = key;
    cell.per_image.resize(ids_.size());
    parallel_for(ids_.size(), image_jobs, [&](std::size_t i) {
        const std::string& id = ids_[i];
        cell.per_image[i] = with_image_context(id, [&] {
            const Heatmap heatmap = load_heatmap(manifest_.heatmap_path(key.method, id), key.method);
            const BinaryMask reference =
                key.strategy == Strategy::XaiGt
                    ? load_mask(manifest_.gt_path(id), MaskRole::GroundTruth)
                    : load_mask(baseline_dir / (id + ".png"), MaskRole::Prediction);
            return ImageCounts{id, confusion(threshold_heatmap(heatmap, t), reference)};
        });
    });
    cell.counts = sum_counts(cell.per_image);
    cell.metrics = metric_set(cell.counts);
    if (state_->baseline &&
        state_->baseline->metrics.reference_positive == cell.metrics.reference_positive &&
        state_->baseline->metrics.reference_negative == cell.metrics.reference_negative) {
        cell.deltas = delta_set(state_->baseline->metrics, cell.metrics);
    }
    return cell;
}

RunMetadata EvaluationPipeline::make_metadata() const {
    RunMetadata m;
    m.methods = manifest_.methods;
    m.thresholds = manifest_.thresholds;
    m.strategies = manifest_.strategies;
    m.fill = manifest_.fill.sample;
    m.s3_mode = manifest_.s3_mode;
    m.target_class = manifest_.target_class;
    m.runner_identity = runner_->identity();
    m.effective_config = manifest_.effective_config_json();
    m.manifest_hash = sha256_hex(m.effective_config);
    m.timestamp = utc_timestamp();
    return m;
}

RunResult EvaluationPipeline::run_all() {
    RunResult result;
    result.metadata = make_metadata();

    std::string baseline_error;
    if (needs_baseline()) {
        try {
            result.baseline = run_baseline();
        } catch (const std::exception& e) {
            baseline_error = std::string("baseline failed: ") + e.what();
        }
    }

    std::vector<CellKey> keys;
    for (const auto& method : manifest_.methods) {
        for (double t : manifest_.thresholds) {
            for (Strategy s : manifest_.strategies) {
                keys.push_back({method, t, s});
            }
        }
    }
    result.cells.resize(keys.size());

    const auto run_one = [&](std::size_t i, unsigned image_jobs) {
        const CellKey& key = keys[i];
        const bool mask_mode =
            needs_reference(key.strategy) && manifest_.s3_mode == S3Mode::MaskVsReference;
        const bool depends_on_baseline = !mask_mode || key.strategy == Strategy::XaiPm;
        if (!baseline_error.empty() && depends_on_baseline) {
            result.cells[i].key = key;
            result.cells[i].error = describe(key) + ": " + baseline_error;
            return;
        }
        result.cells[i] = compute_cell(key, image_jobs);
    };

    if (runner_->reentrant()) {
        parallel_for(keys.size(), manifest_.jobs, [&](std::size_t i) { run_one(i, 1); });
    } else {
        for (std::size_t i = 0; i < keys.size(); ++i) {
            run_one(i, manifest_.jobs);
        }
    }
    return result;
}

void persist_results(const RunResult& result, const RunStats& stats, const fs::path& output_dir,
                     unsigned jobs, bool cache) {
    const fs::path dir = output_dir / "results";
    write_text(dir / "results.json", run_result_to_json(result));
    write_text(dir / "cells.csv", cells_csv(result));
    write_text(dir / "per_image.csv", per_image_csv(result));
    const fs::path failures = dir / "failures.json";
    if (result.failures().empty()) {
        std::error_code ec;
        fs::remove(failures, ec);
    } else {
        write_text(failures, failures_json(result));
    }
    const json info = {
        {"timestamp", result.metadata.timestamp},
        {"jobs", jobs},
        {"cache", cache},
        {"runner_invocations", stats.runner_invocations},
        {"cells_executed", stats.cells_executed},
        {"cells_from_cache", stats.cells_from_cache},
        {"baseline_from_cache", stats.baseline_from_cache},
        {"failed_cells", result.failures().size()},
    };
    write_text(dir / "run_info.json", info.dump(2) + "\n");
}

}  // namespace xaieval
