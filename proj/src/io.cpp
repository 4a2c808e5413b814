#include "imp/io.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

namespace imp {

namespace {

using json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    fail(errc::io_error, "cannot open '" + path + "' for reading");
  }
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    fail(errc::io_error, "cannot open '" + path + "' for writing");
  }
  return out;
}

void finish_output(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) {
    fail(errc::io_error, "write to '" + path + "' failed");
  }
}

json parse_document(const std::string& path) {
  std::ifstream in = open_input(path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) {
    fail(errc::bad_format, "'" + path + "' is not a well-formed document");
  }
  return doc;
}

void check_schema(const json& doc, const std::string& path) {
  if (!doc.is_object() || !doc.contains("schema_version") ||
      !doc["schema_version"].is_number_integer()) {
    fail(errc::bad_format, "'" + path + "' lacks a schema_version field");
  }
  if (doc["schema_version"].get<int>() != kSchemaVersion) {
    fail(errc::bad_format, "'" + path + "' uses an unsupported schema version");
  }
}

double number_field(const json& node, const char* key, const std::string& path) {
  if (!node.contains(key) || !node[key].is_number()) {
    fail(errc::bad_format, "'" + path + "' needs a numeric '" + key + "'");
  }
  return node[key].get<double>();
}

Vector parse_vector(const json& arr, const std::string& what, const std::string& path) {
  if (!arr.is_array()) {
    fail(errc::bad_format, "'" + path + "': " + what + " must be an array");
  }
  Vector out(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) {
      fail(errc::bad_format, "'" + path + "': " + what + " holds a non-number");
    }
    out(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  }
  return out;
}

Vector vector_field(const json& node, const char* key, const std::string& path) {
  if (!node.contains(key)) {
    fail(errc::bad_format, "'" + path + "' needs an array '" + key + "'");
  }
  return parse_vector(node[key], std::string("'") + key + "'", path);
}

json to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

json to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

double parse_number(std::string_view text, const std::string& path, std::size_t line) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    fail(errc::bad_format,
         "'" + path + "' line " + std::to_string(line) + ": '" +
             std::string(text) + "' is not a number");
  }
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

ScmSpec read_spec_json(const std::string& path) {
  const json doc = parse_document(path);
  check_schema(doc, path);

  ScmSpec spec;
  const double d_value = number_field(doc, "d", path);
  spec.d = static_cast<int>(d_value);
  if (spec.d < 1 || static_cast<double>(spec.d) != d_value) {
    fail(errc::bad_format, "'" + path + "': 'd' must be a positive integer");
  }

  if (!doc.contains("pred_coef") || !doc["pred_coef"].is_array() ||
      doc["pred_coef"].size() != static_cast<std::size_t>(spec.d)) {
    fail(errc::bad_format, "'" + path + "': 'pred_coef' must hold d rows");
  }
  spec.pred_coef.resize(spec.d, spec.d);
  for (int r = 0; r < spec.d; ++r) {
    const Vector row =
        parse_vector(doc["pred_coef"][static_cast<std::size_t>(r)], "'pred_coef' row", path);
    if (row.size() != spec.d) {
      fail(errc::bad_format, "'" + path + "': 'pred_coef' rows must have d entries");
    }
    spec.pred_coef.row(r) = row.transpose();
  }

  const auto sized_vector = [&](const json& node, const char* key) {
    Vector value = vector_field(node, key, path);
    if (value.size() != spec.d) {
      fail(errc::bad_format,
           "'" + path + "': '" + key + "' must have d entries");
    }
    return value;
  };
  spec.child_coef = sized_vector(doc, "child_coef");
  spec.invariant_coef = sized_vector(doc, "invariant_coef");
  spec.pred_noise_var = sized_vector(doc, "pred_noise_var");
  spec.resp_noise_var = number_field(doc, "resp_noise_var", path);

  if (!doc.contains("env_coef") || !doc["env_coef"].is_array() || doc["env_coef"].empty()) {
    fail(errc::bad_format, "'" + path + "': 'env_coef' must be a nonempty array");
  }
  for (const json& entry : doc["env_coef"]) {
    if (!entry.is_object() || !entry.contains("label") || !entry["label"].is_string()) {
      fail(errc::bad_format, "'" + path + "': each env_coef entry needs a string label");
    }
    spec.env_coef.emplace_back(entry["label"].get<std::string>(),
                               sized_vector(entry, "alpha"));
  }
  return spec;
}

void write_spec_json(const std::string& path, const ScmSpec& spec) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["d"] = spec.d;
  doc["pred_coef"] = to_json(spec.pred_coef);
  doc["child_coef"] = to_json(spec.child_coef);
  doc["invariant_coef"] = to_json(spec.invariant_coef);
  json envs = json::array();
  for (const auto& [label, alpha] : spec.env_coef) {
    envs.push_back(json{{"label", label}, {"alpha", to_json(alpha)}});
  }
  doc["env_coef"] = std::move(envs);
  doc["pred_noise_var"] = to_json(spec.pred_noise_var);
  doc["resp_noise_var"] = spec.resp_noise_var;

  std::ofstream out = open_output(path);
  out << doc.dump(2) << '\n';
  finish_output(out, path);
}

ImpModel read_model_json(const std::string& path) {
  const json doc = parse_document(path);
  check_schema(doc, path);

  ImpModel model;
  const double d_value = number_field(doc, "d", path);
  model.d = static_cast<int>(d_value);
  if (model.d < 2 || static_cast<double>(model.d) != d_value) {
    fail(errc::bad_format, "'" + path + "': 'd' must be an integer of at least 2");
  }
  model.alpha_quantile = number_field(doc, "alpha_quantile", path);
  model.epsilon = number_field(doc, "epsilon", path);

  if (!doc.contains("selected") || !doc["selected"].is_array() || doc["selected"].empty()) {
    fail(errc::bad_format, "'" + path + "': 'selected' must be a nonempty array");
  }
  for (const json& entry : doc["selected"]) {
    if (!entry.is_object()) {
      fail(errc::bad_format, "'" + path + "': selected entries must be objects");
    }
    CandidateFit fit;
    const double k_value = number_field(entry, "k", path);
    fit.feature.target = static_cast<int>(k_value) - 1;
    if (fit.feature.target < 0 || fit.feature.target >= model.d ||
        static_cast<double>(fit.feature.target + 1) != k_value) {
      fail(errc::bad_format, "'" + path + "': 'k' must be an integer in 1..d");
    }
    const Vector s = vector_field(entry, "S", path);
    if (s.size() == 0) {
      fail(errc::bad_format, "'" + path + "': 'S' must be nonempty");
    }
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const int j = static_cast<int>(s(i)) - 1;
      if (j < 0 || j >= model.d || static_cast<double>(j + 1) != s(i) ||
          j == fit.feature.target) {
        fail(errc::bad_format, "'" + path + "': 'S' entries must lie in 1..d minus k");
      }
      fit.feature.given.push_back(j);
    }
    std::sort(fit.feature.given.begin(), fit.feature.given.end());
    fit.beta = vector_field(entry, "beta", path);
    if (fit.beta.size() != model.d + 1) {
      fail(errc::bad_format, "'" + path + "': 'beta' must have d + 1 entries");
    }
    fit.train_rss = number_field(entry, "train_rss", path);
    model.selected.push_back(std::move(fit));
  }
  return model;
}

void write_model_json(const std::string& path, const ImpModel& model) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["d"] = model.d;
  doc["alpha_quantile"] = model.alpha_quantile;
  doc["epsilon"] = model.epsilon;
  json selected = json::array();
  for (const CandidateFit& fit : model.selected) {
    json entry;
    entry["k"] = fit.feature.target + 1;
    json s = json::array();
    for (int j : fit.feature.given) s.push_back(j + 1);
    entry["S"] = std::move(s);
    entry["beta"] = to_json(fit.beta);
    entry["train_rss"] = fit.train_rss;
    selected.push_back(std::move(entry));
  }
  doc["selected"] = std::move(selected);

  std::ofstream out = open_output(path);
  out << doc.dump(2) << '\n';
  finish_output(out, path);
}

Vector CsvData::to_source_order(const Vector& pooled) const {
  std::vector<Eigen::Index> offsets(envs.size() + 1, 0);
  for (std::size_t e = 0; e < envs.size(); ++e) {
    offsets[e + 1] = offsets[e] + envs[e].rows();
  }
  if (pooled.size() != offsets.back() ||
      pooled.size() != static_cast<Eigen::Index>(source.size())) {
    fail(errc::length_mismatch, "pooled vector does not match the dataset rows");
  }
  Vector out(pooled.size());
  for (std::size_t r = 0; r < source.size(); ++r) {
    const auto [e, i] = source[r];
    out(static_cast<Eigen::Index>(r)) = pooled(offsets[static_cast<std::size_t>(e)] + i);
  }
  return out;
}

std::vector<std::string> CsvData::source_labels() const {
  std::vector<std::string> out;
  out.reserve(source.size());
  for (const auto& [e, i] : source) {
    out.push_back(envs[static_cast<std::size_t>(e)].env_label);
  }
  return out;
}

CsvData read_dataset_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) {
    fail(errc::bad_format, "'" + path + "' is empty");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string_view> header = split_fields(line);
  if (header.size() < 2 || header[0] != "env") {
    fail(errc::bad_format, "'" + path + "': header must start with env,x1,...");
  }
  CsvData data;
  data.has_y = header.back() == "y";
  const std::size_t d = header.size() - 1 - (data.has_y ? 1 : 0);
  if (d < 1) {
    fail(errc::bad_format, "'" + path + "': no predictor columns");
  }
  for (std::size_t j = 0; j < d; ++j) {
    if (header[j + 1] != "x" + std::to_string(j + 1)) {
      fail(errc::bad_format, "'" + path + "': predictor columns must be x1..xd in order");
    }
  }

  struct Block {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    int rows = 0;
  };
  std::vector<Block> blocks;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string_view> fields = split_fields(line);
    if (fields.size() != header.size()) {
      fail(errc::bad_format, "'" + path + "' line " + std::to_string(line_number) +
                                 ": wrong field count");
    }
    const std::string label(fields[0]);
    int env_index = -1;
    for (std::size_t e = 0; e < blocks.size(); ++e) {
      if (blocks[e].label == label) {
        env_index = static_cast<int>(e);
        break;
      }
    }
    if (env_index < 0) {
      env_index = static_cast<int>(blocks.size());
      blocks.push_back(Block{label, {}, {}, 0});
    }
    Block& block = blocks[static_cast<std::size_t>(env_index)];
    for (std::size_t j = 0; j < d; ++j) {
      block.x.push_back(parse_number(fields[j + 1], path, line_number));
    }
    if (data.has_y) {
      block.y.push_back(parse_number(fields.back(), path, line_number));
    }
    data.source.emplace_back(env_index, block.rows);
    ++block.rows;
  }
  if (data.source.empty()) {
    fail(errc::empty_input, "'" + path + "' holds no data rows");
  }

  for (Block& block : blocks) {
    EnvDataset env;
    env.env_label = std::move(block.label);
    env.x.resize(block.rows, static_cast<Eigen::Index>(d));
    for (int r = 0; r < block.rows; ++r) {
      for (std::size_t j = 0; j < d; ++j) {
        env.x(r, static_cast<Eigen::Index>(j)) = block.x[static_cast<std::size_t>(r) * d + j];
      }
    }
    if (data.has_y) {
      env.y.emplace(block.rows);
      for (int r = 0; r < block.rows; ++r) {
        (*env.y)(r) = block.y[static_cast<std::size_t>(r)];
      }
    }
    data.envs.push_back(std::move(env));
  }
  return data;
}

void write_dataset_csv(const std::string& path, std::span<const EnvDataset> envs) {
  if (envs.empty()) {
    fail(errc::empty_input, "no environments to write");
  }
  const Eigen::Index d = envs.front().x.cols();
  bool has_y = envs.front().y.has_value();
  for (const EnvDataset& env : envs) {
    if (env.x.cols() != d || env.y.has_value() != has_y) {
      fail(errc::length_mismatch, "environments disagree on columns");
    }
  }

  std::ofstream out = open_output(path);
  out << "env";
  for (Eigen::Index j = 0; j < d; ++j) out << ",x" << (j + 1);
  if (has_y) out << ",y";
  out << '\n';
  for (const EnvDataset& env : envs) {
    for (Eigen::Index r = 0; r < env.rows(); ++r) {
      out << env.env_label;
      for (Eigen::Index j = 0; j < d; ++j) {
        out << ',' << format_double(env.x(r, j));
      }
      if (has_y) out << ',' << format_double((*env.y)(r));
      out << '\n';
    }
  }
  finish_output(out, path);
}

void write_predictions_csv(const std::string& path,
                           std::span<const std::string> labels, const Vector& values) {
  if (static_cast<Eigen::Index>(labels.size()) != values.size()) {
    fail(errc::length_mismatch, "one label per prediction is required");
  }
  std::ofstream out = open_output(path);
  out << "env,y_hat\n";
  for (std::size_t r = 0; r < labels.size(); ++r) {
    out << labels[r] << ',' << format_double(values(static_cast<Eigen::Index>(r))) << '\n';
  }
  finish_output(out, path);
}

void write_report_csv(const std::string& path, const RssReport& report) {
  std::ofstream out = open_output(path);
  out << "model,method,mean_rss\n";
  const auto names = method_names();
  for (const ModelResult& row : report.models) {
    if (row.failed) continue;
    for (std::size_t m = 0; m < names.size(); ++m) {
      out << row.model << ',' << names[m] << ',' << format_double(row.rss[m]) << '\n';
    }
  }
  finish_output(out, path);
}

void write_report_json(const std::string& path, const RssReport& report) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  json config;
  config["name"] = report.config.name;
  config["n_models"] = report.config.n_models;
  config["d"] = report.config.d;
  config["train_labels"] = report.config.train_labels;
  config["test_labels"] = report.config.test_labels;
  config["train_alpha_range"] = {report.config.train_alpha_range.lo,
                                 report.config.train_alpha_range.hi};
  config["test_alpha_range"] = {report.config.test_alpha_range.lo,
                                report.config.test_alpha_range.hi};
  config["edge_prob"] = report.config.edge_prob;
  config["coef_magnitude"] = {report.config.coef_magnitude.lo,
                              report.config.coef_magnitude.hi};
  config["n_per_env"] = report.config.n_per_env;
  config["seed"] = report.config.seed;
  doc["config"] = std::move(config);

  json summary = json::array();
  for (const MethodSummary& s : report.summary) {
    summary.push_back(json{{"method", s.method},
                           {"median", s.median},
                           {"variance", s.variance},
                           {"models", s.models}});
  }
  doc["summary"] = std::move(summary);

  json failures = json::array();
  for (const ModelResult& row : report.models) {
    if (row.failed) {
      failures.push_back(json{{"model", row.model}, {"error", row.failure}});
    }
  }
  doc["failures"] = std::move(failures);

  std::ofstream out = open_output(path);
  out << doc.dump(2) << '\n';
  finish_output(out, path);
}

}  // namespace imp
