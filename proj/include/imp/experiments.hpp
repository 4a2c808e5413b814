#pragma once

#include "imp/scm.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace imp {

struct ExperimentConfig {
  std::string name = "custom";
  int n_models = 500;
  int d = 10;
  std::vector<std::string> train_labels;
  std::vector<std::string> test_labels;
  Interval train_alpha_range{-2.0, 2.0};
  Interval test_alpha_range{-10.0, 10.0};
  double edge_prob = 0.5;
  Interval coef_magnitude{0.5, 1.5};
  int n_per_env = 300;
  std::uint64_t seed = 0;
};

void validate_config(const ExperimentConfig& config);

// The three benchmark settings. A: five training environments with response
// coefficients drawn from [-2, 2]; B1: the same with [-1, 1]; B2: the A
// ranges with only two training environments. All share d = 10, six test
// environments on [-10, 10] and 300 rows per environment.
ExperimentConfig preset(const std::string& name);

constexpr std::array<const char*, 3> method_names() {
  return {"imp", "ols", "anchor"};
}

// Mean RSS of each method on one simulated model, or the failure that
// stopped it.
struct ModelResult {
  int model = 0;
  bool failed = false;
  std::string failure;
  std::array<double, 3> rss{};  // method_names order
};

struct MethodSummary {
  std::string method;
  double median = 0.0;
  double variance = 0.0;
  int models = 0;
};

struct RssReport {
  ExperimentConfig config;
  std::vector<ModelResult> models;
  std::vector<MethodSummary> summary;
};

// Medians and unbiased variances of the per-model RSS values, failed models
// excluded.
std::vector<MethodSummary> summarize(const std::vector<ModelResult>& models);

// One full benchmark: per model index, generate a random training and
// testing system, sample data, run the matching method against the pooled
// and anchor baselines, and score everything on the pooled test rows. Models
// run independently on substreams of config.seed, so results do not depend
// on scheduling and shrinking n_models keeps a prefix of the rows. More than
// 10% failed models aborts.
RssReport run_experiment(const ExperimentConfig& config);

}  // namespace imp
