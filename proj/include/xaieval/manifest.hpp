#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "xaieval/perturbation.hpp"
#include "xaieval/report_spec.hpp"
#include "xaieval/runner.hpp"

namespace xaieval {

// How S3 cells are scored.
enum class S3Mode {
    Rerun,             // edit the image, re-run the model, compare with GT
    MaskVsReference,   // compare the relevance mask with GT/PM directly
};

std::string_view s3_mode_id(S3Mode m) noexcept;  // "rerun" / "mask"
S3Mode parse_s3_mode(std::string_view text);

// Dataset layout under `dataset_root`:
//   images/<id>.png, gt/<id>.png, heatmaps/<method>/<id>.{npy,png}, pred/<id>.png (optional)
struct EvaluationManifest {
    static constexpr int kSchema = 1;

    std::filesystem::path dataset_root;
    std::vector<std::string> methods;
    std::vector<double> thresholds = {0.2, 0.4, 0.6, 0.8};
    std::vector<Strategy> strategies = {std::begin(kAllStrategies), std::end(kAllStrategies)};
    S3Mode s3_mode = S3Mode::Rerun;
    FillPolicy fill;
    std::string target_class = "building";
    // Absent: precomputed runner over <dataset>/pred.
    std::optional<RunnerSpec> runner;
    std::filesystem::path output_dir;
    bool cache = true;
    unsigned jobs = 1;
    ReportSpec report;

    // Field invariants; throws ConfigError.
    void validate() const;
    // Directory layout and per-image file presence; throws ConfigError naming
    // the missing directory or file.
    void validate_dataset() const;

    // Image ids (stems of images/*.png), sorted.
    std::vector<std::string> image_ids() const;

    std::filesystem::path image_path(const std::string& id) const;
    std::filesystem::path gt_path(const std::string& id) const;
    std::filesystem::path heatmap_path(const std::string& method, const std::string& id) const;

    RunnerSpec effective_runner() const;

    // Canonical JSON of everything that affects numeric results (no jobs,
    // no cache toggle, no output directory). Hashed into run metadata.
    std::string effective_config_json() const;

    // Relative paths in the document resolve against `base_dir`.
    static EvaluationManifest from_json_text(const std::string& text,
                                             const std::filesystem::path& base_dir);
    static EvaluationManifest load(const std::filesystem::path& file);
};

// Shortest decimal text of a threshold, e.g. 0.4 -> "0.4"; used in paths.
std::string threshold_text(double t);

}  // namespace xaieval
