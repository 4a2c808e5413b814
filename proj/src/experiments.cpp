#include "imp/experiments.hpp"

#include "imp/baselines.hpp"
#include "imp/estimators.hpp"
#include "imp/matching.hpp"

#include <cmath>
#include <utility>

namespace imp {

namespace {

constexpr std::uint64_t kModelStream = 0x0e01;
constexpr std::uint64_t kAnchorStream = 0x0e02;

void check_interval(const Interval& range, const char* what) {
  if (!(range.lo <= range.hi)) {
    fail(errc::invalid_argument, std::string(what) + " range must be ordered");
  }
}

ModelResult run_one(const ExperimentConfig& config, int index) {
  ModelResult result;
  result.model = index;
  try {
    std::mt19937_64 engine =
        make_engine(mix_seed(config.seed, {kModelStream, static_cast<std::uint64_t>(index)}));
    GenConfig gen;
    gen.edge_prob = config.edge_prob;
    gen.coef_magnitude = config.coef_magnitude;
    gen.alpha_range = config.train_alpha_range;

    const ScmSpec spec = random_scm(config.d, config.train_labels, gen, engine);
    const ScmSpec test_spec =
        derive_test_spec(spec, config.test_labels, config.test_alpha_range, engine);

    std::vector<EnvDataset> train_data;
    for (const std::string& label : config.train_labels) {
      train_data.push_back(sample(spec, label, config.n_per_env, engine));
    }
    std::vector<EnvDataset> test_data;
    for (const std::string& label : config.test_labels) {
      test_data.push_back(sample(test_spec, label, config.n_per_env, engine));
    }

    Eigen::Index rows = 0;
    for (const EnvDataset& env : test_data) rows += env.rows();
    Matrix test_x(rows, config.d);
    Vector test_y(rows);
    Eigen::Index offset = 0;
    for (const EnvDataset& env : test_data) {
      test_x.middleRows(offset, env.rows()) = env.x;
      test_y.segment(offset, env.rows()) = *env.y;
      offset += env.rows();
    }

    const ImpModel model = train(train_data, 0.05);
    const Vector imp_pred = predict(model, test_data);
    const Vector ols_coef = pooled_ols(train_data);
    const AnchorFit anchor = anchor_cv(
        train_data, mix_seed(config.seed, {kAnchorStream, static_cast<std::uint64_t>(index)}));

    result.rss[0] = evaluate_rss(imp_pred, test_y);
    result.rss[1] = evaluate_rss(test_x * ols_coef, test_y);
    result.rss[2] = evaluate_rss(test_x * anchor.coef, test_y);
  } catch (const error& e) {
    result.failed = true;
    result.failure = std::string(errc_name(e.code())) + ": " + e.what();
  }
  return result;
}

}  // namespace

void validate_config(const ExperimentConfig& config) {
  if (config.n_models < 1) {
    fail(errc::invalid_argument, "n_models must be at least 1");
  }
  if (config.d < 2) {
    fail(errc::invalid_argument, "at least two predictors are required");
  }
  if (config.n_per_env < 1) {
    fail(errc::invalid_argument, "n_per_env must be at least 1");
  }
  if (config.train_labels.empty() || config.test_labels.empty()) {
    fail(errc::invalid_argument, "training and testing label sets must be nonempty");
  }
  check_interval(config.train_alpha_range, "training alpha");
  check_interval(config.test_alpha_range, "testing alpha");
  check_interval(config.coef_magnitude, "coefficient magnitude");
  if (!(config.edge_prob >= 0.0 && config.edge_prob <= 1.0)) {
    fail(errc::invalid_argument, "edge probability must lie in [0, 1]");
  }
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig config;
  config.name = name;
  config.train_labels = {"1", "2", "3", "4", "5"};
  config.test_labels = {"5", "6", "7", "8", "9", "10"};
  if (name == "A") {
    config.train_alpha_range = {-2.0, 2.0};
  } else if (name == "B1") {
    config.train_alpha_range = {-1.0, 1.0};
  } else if (name == "B2") {
    config.train_alpha_range = {-2.0, 2.0};
    config.train_labels = {"1", "2"};
  } else {
    fail(errc::unknown_preset, "unknown preset '" + name + "', expected A, B1 or B2");
  }
  return config;
}

std::vector<MethodSummary> summarize(const std::vector<ModelResult>& models) {
  std::vector<MethodSummary> out;
  const auto names = method_names();
  for (std::size_t m = 0; m < names.size(); ++m) {
    std::vector<double> values;
    for (const ModelResult& row : models) {
      if (!row.failed) values.push_back(row.rss[m]);
    }
    MethodSummary summary;
    summary.method = names[m];
    summary.models = static_cast<int>(values.size());
    if (!values.empty()) {
      summary.median = quantile(values, 0.5);
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= static_cast<double>(values.size());
      double ss = 0.0;
      for (double v : values) ss += (v - mean) * (v - mean);
      summary.variance =
          values.size() > 1 ? ss / static_cast<double>(values.size() - 1) : 0.0;
    }
    out.push_back(std::move(summary));
  }
  return out;
}

RssReport run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  RssReport report;
  report.config = config;
  report.models.resize(static_cast<std::size_t>(config.n_models));
  parallel_for(report.models.size(), [&](std::size_t i) {
    report.models[i] = run_one(config, static_cast<int>(i));
  });

  int failures = 0;
  for (const ModelResult& row : report.models) {
    if (row.failed) ++failures;
  }
  if (failures * 10 > config.n_models) {
    fail(errc::experiment_aborted,
         std::to_string(failures) + " of " + std::to_string(config.n_models) +
             " models failed");
  }
  report.summary = summarize(report.models);
  return report;
}

}  // namespace imp
