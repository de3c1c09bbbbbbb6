#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "xaieval/manifest.hpp"
#include "xaieval/metrics.hpp"
#include "xaieval/runner.hpp"

namespace xaieval {

struct ImageCounts {
    std::string image_id;
    ConfusionCounts counts;

    friend bool operator==(const ImageCounts&, const ImageCounts&) = default;
};

struct BaselineResult {
    ConfusionCounts counts;
    MetricSet metrics;
    std::vector<ImageCounts> per_image;

    friend bool operator==(const BaselineResult&, const BaselineResult&) = default;
};

struct CellKey {
    std::string method;
    double threshold = 0.0;
    Strategy strategy = Strategy::BackgroundOnly;

    friend bool operator==(const CellKey&, const CellKey&) = default;
};

std::string describe(const CellKey& key);

struct CellResult {
    CellKey key;
    // Empty on success; otherwise the failure record and no numbers.
    std::string error;
    ConfusionCounts counts;
    MetricSet metrics;
    // Absent when the cell was scored against a different reference
    // population than the baseline (mask-vs-reference against PM).
    std::optional<DeltaSet> deltas;
    std::vector<ImageCounts> per_image;

    bool ok() const noexcept { return error.empty(); }
    friend bool operator==(const CellResult&, const CellResult&) = default;
};

struct RunMetadata {
    std::vector<std::string> methods;
    std::vector<double> thresholds;
    std::vector<Strategy> strategies;
    int fill = 0;
    S3Mode s3_mode = S3Mode::Rerun;
    std::string target_class;
    std::string runner_identity;
    std::string manifest_hash;
    std::string effective_config;  // JSON text that manifest_hash digests
    // Wall-clock start time (UTC, ISO-8601). Not part of the persisted
    // results so that identical runs produce identical files.
    std::string timestamp;

    friend bool operator==(const RunMetadata&, const RunMetadata&) = default;
};

struct RunResult {
    std::optional<BaselineResult> baseline;
    std::vector<CellResult> cells;  // method-major, then threshold, then strategy
    RunMetadata metadata;

    const CellResult* find(const std::string& method, double threshold, Strategy strategy) const;
    std::vector<const CellResult*> failures() const;
};

struct RunStats {
    std::size_t runner_invocations = 0;
    std::size_t cells_executed = 0;
    std::size_t cells_from_cache = 0;
    bool baseline_from_cache = false;
};

// Orchestrates one evaluation run. Output layout under manifest.output_dir:
//   edited/<method>/<t>/<strategy>/<id>.png   perturbed inputs
//   pred/baseline/<id>.png                    predictions on the originals
//   pred/<method>/<t>/<strategy>/<id>.png     predictions on perturbed inputs
//   cache/<key>.json                          completed cells by content hash
//   results/                                  see persist_results()
class EvaluationPipeline {
public:
    // Validates the manifest and dataset; throws ConfigError.
    explicit EvaluationPipeline(EvaluationManifest manifest);
    // Uses `runner` instead of the one the manifest describes.
    EvaluationPipeline(EvaluationManifest manifest, std::unique_ptr<ModelRunner> runner);
    ~EvaluationPipeline();

    const EvaluationManifest& manifest() const noexcept { return manifest_; }
    const std::vector<std::string>& image_ids() const noexcept { return ids_; }

    const BaselineResult& run_baseline();
    CellResult run_cell(const std::string& method, double threshold, Strategy strategy);
    // Baseline plus every requested cell. Failed cells carry an error record
    // and do not stop their siblings.
    RunResult run_all();

    RunStats stats() const;

private:
    struct State;

    bool needs_baseline() const;
    CellResult compute_cell(const CellKey& key, unsigned image_jobs);
    CellResult rerun_cell(const CellKey& key, unsigned image_jobs);
    CellResult mask_cell(const CellKey& key, unsigned image_jobs);
    std::string cell_cache_key(const CellKey& key);
    std::string baseline_cache_key();
    PredictionMap invoke_runner(const BatchManifest& batch, const std::filesystem::path& out_dir);
    RunMetadata make_metadata() const;

    EvaluationManifest manifest_;
    std::vector<std::string> ids_;
    std::unique_ptr<ModelRunner> runner_;
    std::unique_ptr<State> state_;
};

// Writes results/results.json, results/cells.csv, results/per_image.csv,
// results/run_info.json and, when any cell failed, results/failures.json.
void persist_results(const RunResult& result, const RunStats& stats,
                     const std::filesystem::path& output_dir, unsigned jobs, bool cache);

// Runs `fn(i)` for i in [0, n) on up to `jobs` threads. Rethrows the first
// exception after all workers stop.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

}  // namespace xaieval
