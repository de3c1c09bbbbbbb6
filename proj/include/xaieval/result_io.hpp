#pragma once

#include <filesystem>
#include <string>

#include "xaieval/pipeline.hpp"

namespace xaieval {

inline constexpr int kResultSchema = 1;

// Full RunResult with raw counts and derived metrics. Metrics are written as
// doubles for consumers; reloading re-derives them exactly from the counts.
std::string run_result_to_json(const RunResult& result);
// Throws ConfigError on a missing or mismatched schema version.
RunResult run_result_from_json(const std::string& text);
// Accepts results.json itself, a results/ directory, or a run output directory.
RunResult load_run_result(const std::filesystem::path& path);

// One row per cell (baseline first) with columns
// strategy,threshold,method,tp,fp,fn,tn,tp_pct,fp_pct,fn_pct,precision,recall,f1,iou,
// tp_drop_pct,fp_increase_pct,fn_increase_pct. Undefined values are empty.
std::string cells_csv(const RunResult& result);
// strategy,threshold,method,image,tp,fp,fn,tn
std::string per_image_csv(const RunResult& result);
std::string failures_json(const RunResult& result);

// Shortest round-trip decimal of a measure's double value ("" if undefined).
std::string measure_text(const Measure& m);

}  // namespace xaieval
