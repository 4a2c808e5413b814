#include "imp.h"

#include "imp/baselines.hpp"
#include "imp/estimators.hpp"
#include "imp/experiments.hpp"
#include "imp/io.hpp"
#include "imp/matching.hpp"
#include "imp/scm.hpp"

#include <exception>
#include <memory>
#include <string>
#include <vector>

struct imp_spec {
  imp::ScmSpec value;
};

struct imp_data {
  imp::CsvData value;
};

struct imp_model {
  imp::ImpModel value;
  std::vector<std::string> selected_names;
};

struct imp_report {
  imp::RssReport value;
};

namespace {

thread_local std::string last_error;

imp_status to_status(imp::errc code) {
  switch (code) {
    case imp::errc::invalid_argument: return IMP_ERR_INVALID_ARGUMENT;
    case imp::errc::invalid_spec: return IMP_ERR_INVALID_SPEC;
    case imp::errc::non_finite_input: return IMP_ERR_NON_FINITE_INPUT;
    case imp::errc::insufficient_samples: return IMP_ERR_INSUFFICIENT_SAMPLES;
    case imp::errc::singular_covariance: return IMP_ERR_SINGULAR_COVARIANCE;
    case imp::errc::empty_input: return IMP_ERR_EMPTY_INPUT;
    case imp::errc::length_mismatch: return IMP_ERR_LENGTH_MISMATCH;
    case imp::errc::no_environment_variation: return IMP_ERR_NO_ENVIRONMENT_VARIATION;
    case imp::errc::empty_selection: return IMP_ERR_EMPTY_SELECTION;
    case imp::errc::generation_failed: return IMP_ERR_GENERATION_FAILED;
    case imp::errc::experiment_aborted: return IMP_ERR_EXPERIMENT_ABORTED;
    case imp::errc::unknown_preset: return IMP_ERR_UNKNOWN_PRESET;
    case imp::errc::io_error: return IMP_ERR_IO;
    case imp::errc::bad_format: return IMP_ERR_BAD_FORMAT;
  }
  return IMP_ERR_INTERNAL;
}

template <typename Body>
imp_status guarded(Body&& body) {
  try {
    body();
    last_error.clear();
    return IMP_OK;
  } catch (const imp::error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    last_error = e.what();
    return IMP_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return IMP_ERR_INTERNAL;
  }
}

imp_status require(bool condition, const char* message) {
  if (condition) {
    return IMP_OK;
  }
  last_error = message;
  return IMP_ERR_INVALID_ARGUMENT;
}

std::vector<std::string> selected_names(const imp::ImpModel& model) {
  std::vector<std::string> names;
  names.reserve(model.selected.size());
  for (const imp::CandidateFit& fit : model.selected) {
    names.push_back(imp::to_string(fit.feature));
  }
  return names;
}

constexpr std::uint64_t kSampleStream = 0x0c01;

}  // namespace

extern "C" {

const char* imp_status_name(imp_status status) {
  switch (status) {
    case IMP_OK: return "Ok";
    case IMP_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case IMP_ERR_INVALID_SPEC: return "InvalidSpec";
    case IMP_ERR_NON_FINITE_INPUT: return "NonFiniteInput";
    case IMP_ERR_INSUFFICIENT_SAMPLES: return "InsufficientSamples";
    case IMP_ERR_SINGULAR_COVARIANCE: return "SingularCovariance";
    case IMP_ERR_EMPTY_INPUT: return "EmptyInput";
    case IMP_ERR_LENGTH_MISMATCH: return "LengthMismatch";
    case IMP_ERR_NO_ENVIRONMENT_VARIATION: return "NoEnvironmentVariation";
    case IMP_ERR_EMPTY_SELECTION: return "EmptySelection";
    case IMP_ERR_GENERATION_FAILED: return "GenerationFailed";
    case IMP_ERR_EXPERIMENT_ABORTED: return "ExperimentAborted";
    case IMP_ERR_UNKNOWN_PRESET: return "UnknownPreset";
    case IMP_ERR_IO: return "IoError";
    case IMP_ERR_BAD_FORMAT: return "BadFormat";
    case IMP_ERR_INTERNAL: return "Internal";
  }
  return "Unknown";
}

const char* imp_last_error(void) {
  return last_error.c_str();
}

imp_status imp_spec_load(const char* path, imp_spec** out) {
  if (imp_status s = require(path && out, "path and out must not be null")) return s;
  return guarded([&] {
    auto spec = std::make_unique<imp_spec>();
    spec->value = imp::read_spec_json(path);
    *out = spec.release();
  });
}

imp_status imp_spec_save(const imp_spec* spec, const char* path) {
  if (imp_status s = require(spec && path, "spec and path must not be null")) return s;
  return guarded([&] { imp::write_spec_json(path, spec->value); });
}

imp_status imp_spec_check(const imp_spec* spec) {
  if (imp_status s = require(spec != nullptr, "spec must not be null")) return s;
  return guarded([&] {
    const std::vector<imp::SpecIssue> issues = imp::validate(spec->value);
    if (!issues.empty()) {
      std::string text;
      for (const imp::SpecIssue& issue : issues) {
        if (!text.empty()) text += '\n';
        text += std::string(imp::violation_name(issue.code)) + ": " + issue.detail;
      }
      imp::fail(imp::errc::invalid_spec, text);
    }
  });
}

int imp_spec_dim(const imp_spec* spec) {
  return spec ? spec->value.d : 0;
}

size_t imp_spec_env_count(const imp_spec* spec) {
  return spec ? spec->value.env_count() : 0;
}

const char* imp_spec_env_label(const imp_spec* spec, size_t index) {
  if (!spec || index >= spec->value.env_count()) return nullptr;
  return spec->value.env_coef[index].first.c_str();
}

imp_status imp_data_sample(const imp_spec* spec, int n_per_env, uint64_t seed,
                           imp_data** out) {
  if (imp_status s = require(spec && out, "spec and out must not be null")) return s;
  return guarded([&] {
    if (n_per_env < 1) {
      imp::fail(imp::errc::invalid_argument, "n_per_env must be at least 1");
    }
    auto data = std::make_unique<imp_data>();
    std::mt19937_64 engine = imp::make_engine(imp::mix_seed(seed, {kSampleStream}));
    for (std::size_t e = 0; e < spec->value.env_count(); ++e) {
      data->value.envs.push_back(
          imp::sample(spec->value, spec->value.env_coef[e].first, n_per_env, engine));
      for (int r = 0; r < n_per_env; ++r) {
        data->value.source.emplace_back(static_cast<int>(e), r);
      }
    }
    data->value.has_y = true;
    *out = data.release();
  });
}

imp_status imp_data_load_csv(const char* path, imp_data** out) {
  if (imp_status s = require(path && out, "path and out must not be null")) return s;
  return guarded([&] {
    auto data = std::make_unique<imp_data>();
    data->value = imp::read_dataset_csv(path);
    *out = data.release();
  });
}

imp_status imp_data_save_csv(const imp_data* data, const char* path) {
  if (imp_status s = require(data && path, "data and path must not be null")) return s;
  return guarded([&] { imp::write_dataset_csv(path, data->value.envs); });
}

imp_status imp_data_save_env_csv(const imp_data* data, size_t env_index,
                                 const char* path) {
  if (imp_status s = require(data && path, "data and path must not be null")) return s;
  return guarded([&] {
    if (env_index >= data->value.envs.size()) {
      imp::fail(imp::errc::invalid_argument, "environment index out of range");
    }
    imp::write_dataset_csv(path, {&data->value.envs[env_index], 1});
  });
}

int imp_data_dim(const imp_data* data) {
  if (!data || data->value.envs.empty()) return 0;
  return static_cast<int>(data->value.envs.front().x.cols());
}

int imp_data_has_response(const imp_data* data) {
  return data && data->value.has_y ? 1 : 0;
}

size_t imp_data_env_count(const imp_data* data) {
  return data ? data->value.envs.size() : 0;
}

const char* imp_data_env_label(const imp_data* data, size_t index) {
  if (!data || index >= data->value.envs.size()) return nullptr;
  return data->value.envs[index].env_label.c_str();
}

size_t imp_data_env_rows(const imp_data* data, size_t index) {
  if (!data || index >= data->value.envs.size()) return 0;
  return static_cast<size_t>(data->value.envs[index].rows());
}

size_t imp_data_row_count(const imp_data* data) {
  return data ? data->value.source.size() : 0;
}

imp_status imp_data_response_copy(const imp_data* data, double* out) {
  if (imp_status s = require(data && out, "data and out must not be null")) return s;
  return guarded([&] {
    if (!data->value.has_y) {
      imp::fail(imp::errc::invalid_argument, "data carries no response column");
    }
    imp::Vector pooled(static_cast<Eigen::Index>(data->value.source.size()));
    Eigen::Index offset = 0;
    for (const imp::EnvDataset& env : data->value.envs) {
      pooled.segment(offset, env.rows()) = *env.y;
      offset += env.rows();
    }
    const imp::Vector ordered = data->value.to_source_order(pooled);
    for (Eigen::Index i = 0; i < ordered.size(); ++i) out[i] = ordered(i);
  });
}

imp_status imp_train(const imp_data* train, double alpha_quantile,
                     int max_subset_size, imp_model** out) {
  if (imp_status s = require(train && out, "train and out must not be null")) return s;
  return guarded([&] {
    std::optional<int> cap;
    if (max_subset_size > 0) cap = max_subset_size;
    auto model = std::make_unique<imp_model>();
    model->value = imp::train(train->value.envs, alpha_quantile, cap);
    model->selected_names = selected_names(model->value);
    *out = model.release();
  });
}

imp_status imp_model_load(const char* path, imp_model** out) {
  if (imp_status s = require(path && out, "path and out must not be null")) return s;
  return guarded([&] {
    auto model = std::make_unique<imp_model>();
    model->value = imp::read_model_json(path);
    model->selected_names = selected_names(model->value);
    *out = model.release();
  });
}

imp_status imp_model_save(const imp_model* model, const char* path) {
  if (imp_status s = require(model && path, "model and path must not be null")) return s;
  return guarded([&] { imp::write_model_json(path, model->value); });
}

int imp_model_dim(const imp_model* model) {
  return model ? model->value.d : 0;
}

double imp_model_alpha_quantile(const imp_model* model) {
  return model ? model->value.alpha_quantile : 0.0;
}

double imp_model_epsilon(const imp_model* model) {
  return model ? model->value.epsilon : 0.0;
}

size_t imp_model_candidate_count(const imp_model* model) {
  return model ? model->value.candidates.size() : 0;
}

size_t imp_model_selected_count(const imp_model* model) {
  return model ? model->value.selected.size() : 0;
}

const char* imp_model_selected_name(const imp_model* model, size_t index) {
  if (!model || index >= model->selected_names.size()) return nullptr;
  return model->selected_names[index].c_str();
}

double imp_model_selected_rss(const imp_model* model, size_t index) {
  if (!model || index >= model->value.selected.size()) return 0.0;
  return model->value.selected[index].train_rss;
}

imp_status imp_predict(const imp_model* model, const imp_data* test, double* out) {
  if (imp_status s = require(model && test && out, "model, test and out must not be null")) {
    return s;
  }
  return guarded([&] {
    const imp::Vector pooled = imp::predict(model->value, test->value.envs);
    const imp::Vector ordered = test->value.to_source_order(pooled);
    for (Eigen::Index i = 0; i < ordered.size(); ++i) out[i] = ordered(i);
  });
}

imp_status imp_predictions_save_csv(const imp_data* data, const double* values,
                                    const char* path) {
  if (imp_status s = require(data && values && path,
                             "data, values and path must not be null")) {
    return s;
  }
  return guarded([&] {
    const std::vector<std::string> labels = data->value.source_labels();
    imp::Vector v(static_cast<Eigen::Index>(labels.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = values[i];
    imp::write_predictions_csv(path, labels, v);
  });
}

imp_status imp_evaluate_rss(const double* pred, const double* truth, size_t n,
                            double* out) {
  if (imp_status s = require(pred && truth && out,
                             "pred, truth and out must not be null")) {
    return s;
  }
  return guarded([&] {
    imp::Vector p(static_cast<Eigen::Index>(n));
    imp::Vector t(static_cast<Eigen::Index>(n));
    for (size_t i = 0; i < n; ++i) {
      p(static_cast<Eigen::Index>(i)) = pred[i];
      t(static_cast<Eigen::Index>(i)) = truth[i];
    }
    *out = imp::evaluate_rss(p, t);
  });
}

imp_status imp_bench(const char* preset, int n_models, uint64_t seed,
                     imp_report** out) {
  if (imp_status s = require(preset && out, "preset and out must not be null")) return s;
  return guarded([&] {
    imp::ExperimentConfig config = imp::preset(preset);
    if (n_models > 0) config.n_models = n_models;
    config.seed = seed;
    auto report = std::make_unique<imp_report>();
    report->value = imp::run_experiment(config);
    *out = report.release();
  });
}

imp_status imp_report_save(const imp_report* report, const char* csv_path,
                           const char* json_path) {
  if (imp_status s = require(report != nullptr, "report must not be null")) return s;
  return guarded([&] {
    if (csv_path) imp::write_report_csv(csv_path, report->value);
    if (json_path) imp::write_report_json(json_path, report->value);
  });
}

size_t imp_report_method_count(const imp_report* report) {
  return report ? report->value.summary.size() : 0;
}

const char* imp_report_method(const imp_report* report, size_t index) {
  if (!report || index >= report->value.summary.size()) return nullptr;
  return report->value.summary[index].method.c_str();
}

double imp_report_median(const imp_report* report, size_t index) {
  if (!report || index >= report->value.summary.size()) return 0.0;
  return report->value.summary[index].median;
}

double imp_report_variance(const imp_report* report, size_t index) {
  if (!report || index >= report->value.summary.size()) return 0.0;
  return report->value.summary[index].variance;
}

size_t imp_report_model_count(const imp_report* report, size_t index) {
  if (!report || index >= report->value.summary.size()) return 0;
  return static_cast<size_t>(report->value.summary[index].models);
}

size_t imp_report_failure_count(const imp_report* report) {
  if (!report) return 0;
  size_t failures = 0;
  for (const imp::ModelResult& row : report->value.models) {
    if (row.failed) ++failures;
  }
  return failures;
}

void imp_spec_free(imp_spec* spec) { delete spec; }
void imp_data_free(imp_data* data) { delete data; }
void imp_model_free(imp_model* model) { delete model; }
void imp_report_free(imp_report* report) { delete report; }

}  // extern "C"
