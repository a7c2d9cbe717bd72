#pragma once

#include "hoivid/harness/pipeline.hpp"
#include "hoivid/metrics/metrics.hpp"

namespace hoivid {

struct EvalOptions {
    uint64_t seed = 0;
    std::string save_dir;  // when set, generated frames are written here
};

// Runs inference on every record of the split and scores it against the
// (aligned) ground truth with the pluggable extractors.
MetricReport evaluate_split(Pipeline& pipe, const std::string& split, const EvalOptions& opts);

// Scores one record; exposed for the acceptance suite.
ClipMetrics evaluate_record(Pipeline& pipe, size_t record_idx, const EvalOptions& opts);

Toggles toggles_for_ablation(const std::string& name);

// Retrains the toy pipeline with the named component toggled off and emits the
// metric report (written to <out_dir>/report.json and table.txt).
MetricReport run_ablation(const std::string& name, RunConfig cfg,
                          const std::string& reuse_ae_checkpoint = "");

}  // namespace hoivid
