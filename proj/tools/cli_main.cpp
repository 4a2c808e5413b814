#include "imp.h"

#include <CLI11.hpp>

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <system_error>
#include <vector>

namespace {

// Central mapping from library statuses to the documented exit codes:
// 2 invalid spec or schema, 3 I/O, 4 no environment variation,
// 5 insufficient samples, 6 aborted experiment, 1 anything else.
int exit_code(imp_status status) {
  switch (status) {
    case IMP_OK: return 0;
    case IMP_ERR_INVALID_SPEC:
    case IMP_ERR_BAD_FORMAT:
    case IMP_ERR_LENGTH_MISMATCH: return 2;
    case IMP_ERR_IO: return 3;
    case IMP_ERR_NO_ENVIRONMENT_VARIATION: return 4;
    case IMP_ERR_INSUFFICIENT_SAMPLES: return 5;
    case IMP_ERR_EXPERIMENT_ABORTED: return 6;
    default: return 1;
  }
}

int report_failure(imp_status status) {
  std::fprintf(stderr, "imp: %s: %s\n", imp_status_name(status), imp_last_error());
  return exit_code(status);
}

std::string format_number(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) return "nan";
  return std::string(buffer, ptr);
}

std::string env_file_name(const std::string& pooled_path, const std::string& label) {
  std::filesystem::path path(pooled_path);
  std::string safe;
  for (char c : label) {
    const bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
                    (c >= 'A' && c <= 'Z') || c == '-' || c == '_';
    safe += ok ? c : '_';
  }
  const std::string stem = path.stem().string();
  path.replace_filename(stem + "." + safe + path.extension().string());
  return path.string();
}

struct SpecHandle {
  imp_spec* p = nullptr;
  ~SpecHandle() { imp_spec_free(p); }
};
struct DataHandle {
  imp_data* p = nullptr;
  ~DataHandle() { imp_data_free(p); }
};
struct ModelHandle {
  imp_model* p = nullptr;
  ~ModelHandle() { imp_model_free(p); }
};
struct ReportHandle {
  imp_report* p = nullptr;
  ~ReportHandle() { imp_report_free(p); }
};

int cmd_validate(const std::string& spec_path) {
  SpecHandle spec;
  if (imp_status s = imp_spec_load(spec_path.c_str(), &spec.p)) return report_failure(s);
  if (imp_status s = imp_spec_check(spec.p)) {
    std::fprintf(stderr, "imp: %s\n%s\n", imp_status_name(s), imp_last_error());
    return exit_code(s);
  }
  std::printf("spec ok: d=%d, %zu environments\n", imp_spec_dim(spec.p),
              imp_spec_env_count(spec.p));
  return 0;
}

int cmd_simulate(const std::string& spec_path, const std::string& out_path,
                 int n_per_env, std::uint64_t seed) {
  SpecHandle spec;
  if (imp_status s = imp_spec_load(spec_path.c_str(), &spec.p)) return report_failure(s);
  if (imp_status s = imp_spec_check(spec.p)) {
    std::fprintf(stderr, "imp: %s\n%s\n", imp_status_name(s), imp_last_error());
    return exit_code(s);
  }
  std::printf("seed: %llu\n", static_cast<unsigned long long>(seed));

  DataHandle data;
  if (imp_status s = imp_data_sample(spec.p, n_per_env, seed, &data.p)) {
    return report_failure(s);
  }
  for (size_t e = 0; e < imp_data_env_count(data.p); ++e) {
    const std::string path = env_file_name(out_path, imp_data_env_label(data.p, e));
    if (imp_status s = imp_data_save_env_csv(data.p, e, path.c_str())) {
      return report_failure(s);
    }
    std::printf("%s: %zu rows\n", path.c_str(), imp_data_env_rows(data.p, e));
  }
  if (imp_status s = imp_data_save_csv(data.p, out_path.c_str())) {
    return report_failure(s);
  }
  std::printf("%s: %zu rows\n", out_path.c_str(), imp_data_row_count(data.p));
  return 0;
}

int cmd_train(const std::string& data_path, const std::string& model_path,
              double alpha_quantile, int max_subset_size) {
  DataHandle data;
  if (imp_status s = imp_data_load_csv(data_path.c_str(), &data.p)) {
    return report_failure(s);
  }
  if (!imp_data_has_response(data.p)) {
    std::fprintf(stderr, "imp: BadFormat: '%s' has no y column\n", data_path.c_str());
    return 2;
  }
  ModelHandle model;
  if (imp_status s = imp_train(data.p, alpha_quantile, max_subset_size, &model.p)) {
    return report_failure(s);
  }
  std::printf("candidates: %zu\n", imp_model_candidate_count(model.p));
  std::printf("epsilon: %s\n", format_number(imp_model_epsilon(model.p)).c_str());
  std::printf("selected %zu:\n", imp_model_selected_count(model.p));
  for (size_t i = 0; i < imp_model_selected_count(model.p); ++i) {
    std::printf("  %s train_rss=%s\n", imp_model_selected_name(model.p, i),
                format_number(imp_model_selected_rss(model.p, i)).c_str());
  }
  if (imp_status s = imp_model_save(model.p, model_path.c_str())) {
    return report_failure(s);
  }
  std::printf("model written to %s\n", model_path.c_str());
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& out_path) {
  ModelHandle model;
  if (imp_status s = imp_model_load(model_path.c_str(), &model.p)) {
    return report_failure(s);
  }
  DataHandle data;
  if (imp_status s = imp_data_load_csv(data_path.c_str(), &data.p)) {
    return report_failure(s);
  }
  const size_t rows = imp_data_row_count(data.p);
  std::vector<double> predictions(rows);
  if (imp_status s = imp_predict(model.p, data.p, predictions.data())) {
    return report_failure(s);
  }
  if (imp_status s = imp_predictions_save_csv(data.p, predictions.data(),
                                              out_path.c_str())) {
    return report_failure(s);
  }
  std::printf("%s: %zu rows\n", out_path.c_str(), rows);
  if (imp_data_has_response(data.p)) {
    std::vector<double> truth(rows);
    if (imp_status s = imp_data_response_copy(data.p, truth.data())) {
      return report_failure(s);
    }
    double rss = 0.0;
    if (imp_status s = imp_evaluate_rss(predictions.data(), truth.data(), rows, &rss)) {
      return report_failure(s);
    }
    std::printf("mean rss: %s\n", format_number(rss).c_str());
  }
  return 0;
}

int cmd_bench(const std::string& preset, int n_models, std::uint64_t seed,
              const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    std::fprintf(stderr, "imp: IoError: cannot create '%s'\n", out_dir.c_str());
    return 3;
  }
  std::printf("preset: %s\nmodels: %d\nseed: %llu\n", preset.c_str(), n_models,
              static_cast<unsigned long long>(seed));

  ReportHandle report;
  if (imp_status s = imp_bench(preset.c_str(), n_models, seed, &report.p)) {
    return report_failure(s);
  }
  const std::string csv_path = (std::filesystem::path(out_dir) / "report.csv").string();
  const std::string json_path = (std::filesystem::path(out_dir) / "summary.json").string();
  if (imp_status s = imp_report_save(report.p, csv_path.c_str(), json_path.c_str())) {
    return report_failure(s);
  }
  for (size_t m = 0; m < imp_report_method_count(report.p); ++m) {
    std::printf("%s: median=%s variance=%s models=%zu\n",
                imp_report_method(report.p, m),
                format_number(imp_report_median(report.p, m)).c_str(),
                format_number(imp_report_variance(report.p, m)).c_str(),
                imp_report_model_count(report.p, m));
  }
  std::printf("failures: %zu\n", imp_report_failure_count(report.p));
  std::printf("report: %s\nsummary: %s\n", csv_path.c_str(), json_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prediction under intervened responses via invariant matching"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string data_path;
  std::string model_path;
  std::string out_path;
  std::string out_dir = ".";
  std::string preset_name;
  int n_per_env = 100;
  int n_models = 100;
  int max_subset_size = 0;
  double alpha_quantile = 0.05;
  std::uint64_t seed = 0;

  CLI::App* simulate = app.add_subcommand("simulate", "Sample datasets from a spec");
  simulate->add_option("--spec", spec_path, "Spec document")->required();
  simulate->add_option("--out", out_path, "Pooled CSV path")->required();
  simulate->add_option("--n", n_per_env, "Rows per environment")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--seed", seed, "Sampling seed");

  CLI::App* train = app.add_subcommand("train", "Train a matching model");
  train->add_option("--data", data_path, "Training CSV")->required();
  train->add_option("--model-out", model_path, "Model file to write")->required();
  train->add_option("--alpha", alpha_quantile, "Selection quantile");
  train->add_option("--max-subset-size", max_subset_size,
                    "Cap on conditioning set size (0 = none)");

  CLI::App* predict = app.add_subcommand("predict", "Predict with a trained model");
  predict->add_option("--model", model_path, "Model file")->required();
  predict->add_option("--data", data_path, "Test CSV")->required();
  predict->add_option("--out", out_path, "Predictions CSV to write")->required();

  CLI::App* bench = app.add_subcommand("bench", "Run a benchmark preset");
  bench->add_option("--preset", preset_name, "A, B1 or B2")->required();
  bench->add_option("--n-models", n_models, "Simulated models")
      ->check(CLI::PositiveNumber);
  bench->add_option("--seed", seed, "Experiment seed");
  bench->add_option("--out-dir", out_dir, "Report directory");

  CLI::App* validate = app.add_subcommand("validate", "Check a spec document");
  validate->add_option("--spec", spec_path, "Spec document")->required();

  CLI11_PARSE(app, argc, argv);

  if (simulate->parsed()) return cmd_simulate(spec_path, out_path, n_per_env, seed);
  if (train->parsed()) return cmd_train(data_path, model_path, alpha_quantile, max_subset_size);
  if (predict->parsed()) return cmd_predict(model_path, data_path, out_path);
  if (bench->parsed()) return cmd_bench(preset_name, n_models, seed, out_dir);
  return cmd_validate(spec_path);
}
