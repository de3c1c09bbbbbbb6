#pragma once

// Model runner protocol.
//
// A runner maps a batch of images to one predicted mask per image. The
// subprocess form is invoked as
//
//     <command...> --manifest <out>/manifest.json --out <out>
//
// and must write <out>/<id>.png (8-bit single-channel mask) for every entry,
// then exit 0. Its stdout is redirected to the harness's stderr; stderr is
// inherited.
//
// Manifest: {"schema": 1, "target_class": "...", "entries": [{"id": "...", "image": "..."}]}

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <variant>
#include <vector>

#include "xaieval/perturbation.hpp"
#include "xaieval/raster.hpp"

namespace xaieval {

struct BatchEntry {
    std::string id;
    std::filesystem::path image;
};

struct BatchManifest {
    static constexpr int kSchema = 1;

    std::string target_class = "building";
    std::vector<BatchEntry> entries;

    // Throws ConfigError on duplicate or empty ids.
    void validate() const;
    std::string to_json() const;
    static BatchManifest from_json(const std::string& text);
};

struct SubprocessRunner {
    std::vector<std::string> command;  // executable followed by fixed arguments
};

struct PrecomputedRunner {
    std::filesystem::path prediction_dir;  // holds <id>.png
};

enum class BuiltinKind {
    IdentityGt,      // returns the ground-truth mask whatever the input
    VisibilityProb,  // prob >= 0.5 on pixels not painted with the fill sample
};

std::string_view builtin_name(BuiltinKind kind) noexcept;
BuiltinKind parse_builtin(std::string_view name);

struct BuiltinRunner {
    BuiltinKind kind = BuiltinKind::IdentityGt;
    // identity-gt: directory of <id>.png GT masks.
    // visibility-prob: directory of <id>.{npy,png} probability maps.
    std::filesystem::path data_dir;
};

struct RunnerSpec {
    std::variant<SubprocessRunner, PrecomputedRunner, BuiltinRunner> mode;
    std::chrono::duration<double> timeout{600.0};
    bool reentrant = false;

    // Throws ConfigError when the active mode is incomplete or timeout <= 0.
    void validate() const;
    std::string_view mode_name() const noexcept;
    // Stable description used in run metadata and cache keys.
    std::string identity() const;
};

using PredictionMap = std::map<std::string, BinaryMask>;

class ModelRunner {
public:
    virtual ~ModelRunner() = default;

    // Produces one raw mask per entry; run_batch validates the result.
    virtual PredictionMap predict(const BatchManifest& manifest,
                                  const std::filesystem::path& out_dir) = 0;
    virtual std::string identity() const = 0;
    virtual bool reentrant() const noexcept { return false; }
    // True when predict() already leaves <out_dir>/<id>.png behind.
    virtual bool writes_masks() const noexcept { return false; }
};

// Builds the runner described by `spec`. `fill` is the masking sample the
// visibility-prob builtin treats as "hidden".
std::unique_ptr<ModelRunner> make_runner(const RunnerSpec& spec, FillPolicy fill);

// Drives `runner` over `manifest` and checks the protocol post-conditions:
// a mask for every id, each matching its image's dimensions. Masks are also
// persisted to <out_dir>/<id>.png for non-subprocess runners.
PredictionMap run_batch(ModelRunner& runner, const BatchManifest& manifest,
                        const std::filesystem::path& out_dir);

PredictionMap run_batch(const RunnerSpec& spec, const BatchManifest& manifest,
                        const std::filesystem::path& out_dir, FillPolicy fill = {});

// Synthetic runner rule, exposed for tests and the builtin.
BinaryMask builtin_visibility_prob(const ImageRaster& image, const Heatmap& prob, FillPolicy fill);

// Builtin runners backed by in-memory registries.
class IdentityGtRunner : public ModelRunner {
public:
    explicit IdentityGtRunner(std::filesystem::path gt_dir);
    void register_mask(const std::string& id, BinaryMask gt);

    PredictionMap predict(const BatchManifest& manifest, const std::filesystem::path& out_dir) override;
    std::string identity() const override;
    bool reentrant() const noexcept override { return true; }

private:
    const BinaryMask& mask_for(const std::string& id);

    std::filesystem::path gt_dir_;
    std::mutex mutex_;
    std::map<std::string, BinaryMask> registry_;
};

class VisibilityProbRunner : public ModelRunner {
public:
    VisibilityProbRunner(std::filesystem::path prob_dir, FillPolicy fill);
    void register_prob(const std::string& id, Heatmap prob);

    PredictionMap predict(const BatchManifest& manifest, const std::filesystem::path& out_dir) override;
    std::string identity() const override;
    bool reentrant() const noexcept override { return true; }

private:
    const Heatmap& prob_for(const std::string& id);

    std::filesystem::path prob_dir_;
    FillPolicy fill_;
    std::mutex mutex_;
    std::map<std::string, Heatmap> registry_;
    std::string content_digest_;
};

}  // namespace xaieval
