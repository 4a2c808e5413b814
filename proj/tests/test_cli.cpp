#include <doctest.h>

#include "imp/io.hpp"
#include "imp/scm.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined

  bool contains(const std::string& needle) const {
    return output.find(needle) != std::string::npos;
  }
};

RunResult run(const std::string& args) {
  const std::string command = std::string(IMP_CLI_PATH) + " " + args + " 2>&1";
  RunResult result;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buffer[4096];
  std::size_t got = 0;
  while ((got = fread(buffer, 1, sizeof(buffer), pipe)) > 0) {
    result.output.append(buffer, got);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

RunResult run_with_env(const std::string& env, const std::string& args) {
  RunResult result;
  const std::string command =
      "env " + env + " " + std::string(IMP_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buffer[4096];
  std::size_t got = 0;
  while ((got = fread(buffer, 1, sizeof(buffer), pipe)) > 0) {
    result.output.append(buffer, got);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

const fs::path kWorkDir = fs::temp_directory_path() / "imp_cli_test";

std::string path_of(const std::string& name) { return (kWorkDir / name).string(); }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

std::size_t line_count(const std::string& text) {
  std::size_t lines = 0;
  for (char c : text) {
    if (c == '\n') ++lines;
  }
  return lines;
}

struct WorkDirSetup {
  WorkDirSetup() {
    fs::remove_all(kWorkDir);
    fs::create_directories(kWorkDir);
    imp::write_spec_json(path_of("toy.json"), imp::toy_scm({{"0", 0.0}, {"2", 2.0}}));
  }
};

WorkDirSetup setup_once;

}  // namespace

TEST_CASE("validate reports spec health") {
  const RunResult ok = run("validate --spec " + path_of("toy.json"));
  CHECK(ok.exit_code == 0);
  CHECK(ok.contains("spec ok: d=3, 2 environments"));

  imp::ScmSpec broken = imp::toy_scm({{"0", 0.0}, {"2", 2.0}});
  broken.resp_noise_var = -1.0;
  imp::write_spec_json(path_of("broken.json"), broken);
  const RunResult bad = run("validate --spec " + path_of("broken.json"));
  CHECK(bad.exit_code == 2);
  CHECK(bad.contains("NonPositiveNoise"));

  const RunResult missing = run("validate --spec " + path_of("nope.json"));
  CHECK(missing.exit_code == 3);
  CHECK(missing.contains("IoError"));
}

TEST_CASE("simulate writes per-environment and pooled files") {
  const RunResult r =
      run("simulate --spec " + path_of("toy.json") + " --out " + path_of("sim.csv") +
          " --n 100");
  CHECK(r.exit_code == 0);
  CHECK(r.contains("seed: 0"));
  CHECK(r.contains("200 rows"));

  const std::string pooled = slurp(path_of("sim.csv"));
  CHECK(pooled.substr(0, pooled.find('\n')) == "env,x1,x2,x3,y");
  CHECK(line_count(pooled) == 201);
  CHECK(fs::exists(path_of("sim.0.csv")));
  CHECK(fs::exists(path_of("sim.2.csv")));
  CHECK(line_count(slurp(path_of("sim.0.csv"))) == 101);

  // Same seed, same bytes; a different seed changes the data.
  const RunResult again =
      run("simulate --spec " + path_of("toy.json") + " --out " + path_of("sim_b.csv") +
          " --n 100");
  CHECK(again.exit_code == 0);
  CHECK(slurp(path_of("sim_b.csv")) == pooled);

  const RunResult other =
      run("simulate --spec " + path_of("toy.json") + " --out " + path_of("sim_c.csv") +
          " --n 100 --seed 9");
  CHECK(other.exit_code == 0);
  CHECK(other.contains("seed: 9"));
  CHECK(slurp(path_of("sim_c.csv")) != pooled);

  const RunResult bad = run("simulate --spec " + path_of("broken.json") + " --out " +
                            path_of("sim_d.csv") + " --n 10");
  CHECK(bad.exit_code == 2);
}

TEST_CASE("train fits and stores a model") {
  REQUIRE(run("simulate --spec " + path_of("toy.json") + " --out " + path_of("train.csv") +
              " --n 400 --seed 3")
              .exit_code == 0);

  const RunResult r = run("train --data " + path_of("train.csv") + " --model-out " +
                          path_of("model.json") + " --alpha 0.4");
  CHECK(r.exit_code == 0);
  CHECK(r.contains("candidates: 9"));
  CHECK(r.contains("epsilon: "));
  CHECK(r.contains("selected 4:"));
  CHECK(r.contains("(3,{1,2}) train_rss="));
  CHECK(r.contains("model written to "));
  CHECK(fs::exists(path_of("model.json")));

  const RunResult all = run("train --data " + path_of("train.csv") + " --model-out " +
                            path_of("model_all.json") + " --alpha 1");
  CHECK(all.exit_code == 0);
  CHECK(all.contains("selected 9:"));

  // Single-environment data cannot constrain the selection.
  REQUIRE(run("simulate --spec " + path_of("toy.json") + " --out " + path_of("single.csv") +
              " --n 50")
              .exit_code == 0);
  const RunResult single = run("train --data " + path_of("single.0.csv") +
                               " --model-out " + path_of("m.json"));
  CHECK(single.exit_code == 4);
  CHECK(single.contains("NoEnvironmentVariation"));

  // Data without a response column is a schema violation.
  const std::string labeled = slurp(path_of("train.csv"));
  std::ofstream unlabeled(path_of("no_y.csv"));
  std::istringstream lines(labeled);
  std::string line;
  while (std::getline(lines, line)) {
    unlabeled << line.substr(0, line.rfind(',')) << '\n';
  }
  unlabeled.close();
  const RunResult no_y = run("train --data " + path_of("no_y.csv") + " --model-out " +
                             path_of("m2.json"));
  CHECK(no_y.exit_code == 2);
  CHECK(no_y.contains("no y column"));
}

TEST_CASE("predict writes per-row outputs and scores labeled data") {
  REQUIRE(run("simulate --spec " + path_of("toy.json") + " --out " + path_of("test.csv") +
              " --n 60 --seed 5")
              .exit_code == 0);

  const RunResult with_y = run("predict --model " + path_of("model.json") + " --data " +
                               path_of("test.csv") + " --out " + path_of("pred.csv"));
  CHECK(with_y.exit_code == 0);
  CHECK(with_y.contains("120 rows"));
  CHECK(with_y.contains("mean rss: "));
  const std::string pred = slurp(path_of("pred.csv"));
  CHECK(pred.substr(0, pred.find('\n')) == "env,y_hat");
  CHECK(line_count(pred) == 121);

  const RunResult without_y =
      run("predict --model " + path_of("model.json") + " --data " + path_of("no_y.csv") +
          " --out " + path_of("pred2.csv"));
  CHECK(without_y.exit_code == 0);
  CHECK_FALSE(without_y.contains("mean rss"));

  // Predictor count mismatch between the model and the data.
  std::ofstream narrow(path_of("narrow.csv"));
  narrow << "env,x1,x2,y\na,1,2,3\na,2,3,4\na,3,4,5\nb,1,1,1\nb,2,2,2\nb,3,3,3\n";
  narrow.close();
  const RunResult mismatch =
      run("predict --model " + path_of("model.json") + " --data " + path_of("narrow.csv") +
          " --out " + path_of("pred3.csv"));
  CHECK(mismatch.exit_code == 2);

  // A test environment smaller than |S| + 1 cannot host the feature fit.
  std::ofstream tiny(path_of("tiny.csv"));
  tiny << "env,x1,x2,x3,y\na,1,2,3,4\n";
  tiny.close();
  const RunResult small = run("predict --model " + path_of("model.json") + " --data " +
                              path_of("tiny.csv") + " --out " + path_of("pred4.csv"));
  CHECK(small.exit_code == 5);
  CHECK(small.contains("InsufficientSamples"));
}

TEST_CASE("bench replays a preset deterministically") {
  fs::create_directories(path_of("bench1"));
  fs::create_directories(path_of("bench2"));
  const std::string flags = "bench --preset B2 --n-models 2 --seed 1 --out-dir ";

  const RunResult first = run(flags + path_of("bench1"));
  CHECK(first.exit_code == 0);
  CHECK(first.contains("preset: B2"));
  CHECK(first.contains("models: 2"));
  CHECK(first.contains("seed: 1"));
  CHECK(first.contains("imp: median="));
  CHECK(first.contains("failures: 0"));

  const std::string csv = slurp(path_of("bench1/report.csv"));
  CHECK(line_count(csv) == 7);  // header + 2 models x 3 methods
  const std::string json = slurp(path_of("bench1/summary.json"));
  CHECK(json.find("\"B2\"") != std::string::npos);

  const RunResult second = run(flags + path_of("bench2"));
  CHECK(second.exit_code == 0);
  CHECK(slurp(path_of("bench2/report.csv")) == csv);
  CHECK(slurp(path_of("bench2/summary.json")) == json);

  const RunResult unknown = run("bench --preset Q --out-dir " + path_of("bench1"));
  CHECK(unknown.exit_code == 1);
  CHECK(unknown.contains("UnknownPreset"));
}

TEST_CASE("worker count never changes results") {
  fs::create_directories(path_of("threads1"));
  fs::create_directories(path_of("threads8"));

  const RunResult one = run_with_env(
      "IMP_THREADS=1", "bench --preset B2 --n-models 2 --seed 4 --out-dir " +
                           path_of("threads1"));
  CHECK(one.exit_code == 0);
  const RunResult eight = run_with_env(
      "IMP_THREADS=8", "bench --preset B2 --n-models 2 --seed 4 --out-dir " +
                           path_of("threads8"));
  CHECK(eight.exit_code == 0);
  CHECK(slurp(path_of("threads1/report.csv")) == slurp(path_of("threads8/report.csv")));
  CHECK(slurp(path_of("threads1/summary.json")) == slurp(path_of("threads8/summary.json")));
}
