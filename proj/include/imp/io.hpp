#pragma once

#include "imp/experiments.hpp"
#include "imp/matching.hpp"
#include "imp/scm.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace imp {

// Structured-text spec document, schema-versioned. Shapes are checked on
// read; semantic validation stays with validate().
ScmSpec read_spec_json(const std::string& path);
void write_spec_json(const std::string& path, const ScmSpec& spec);

// Model document: alpha_quantile, epsilon and the selected candidates with
// 1-based indices. Loading restores d, the threshold and the selected set;
// the full candidate table is not persisted.
ImpModel read_model_json(const std::string& path);
void write_model_json(const std::string& path, const ImpModel& model);

// Dataset CSV with header env,x1,...,xd and an optional trailing y column.
// Rows may interleave environments; source maps each original row to
// (environment index, row within environment) so per-row outputs can be
// written back in input order.
struct CsvData {
  std::vector<EnvDataset> envs;  // first-appearance order
  std::vector<std::pair<int, int>> source;
  bool has_y = false;

  // Pooled-order values (env blocks concatenated) rearranged to the original
  // row order, and the per-row environment labels to match.
  Vector to_source_order(const Vector& pooled) const;
  std::vector<std::string> source_labels() const;
};

CsvData read_dataset_csv(const std::string& path);
void write_dataset_csv(const std::string& path, std::span<const EnvDataset> envs);

// Per-row predictions, header env,y_hat, one row per input row.
void write_predictions_csv(const std::string& path,
                           std::span<const std::string> labels, const Vector& values);

// Benchmark outputs: one CSV row per scored (model, method) pair, plus a
// JSON summary carrying the config echo, per-method statistics and the
// failed model list.
void write_report_csv(const std::string& path, const RssReport& report);
void write_report_json(const std::string& path, const RssReport& report);

}  // namespace imp
