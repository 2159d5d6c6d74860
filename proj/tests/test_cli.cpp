#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ocimix/experiment.hpp"

using namespace ocimix;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string small_train_config(const std::string& out_dir, const std::string& extra = "") {
  std::ostringstream os;
  os << R"({
  "dataset": {"type": "blobs", "class_count": 4, "dim": 8, "separation": 3.0,
              "per_class_train": 30, "per_class_test": 10},
  "classes_per_task": 2,
  "trainer": {"method": "er_dualmix", "hidden": [12, 8], "memory_capacity": 40,
              "batch_size": 10, "pipeline": "noise:0.1"},
  "seeds": [1, 2],
  "out_dir": ")" << out_dir << "\"" << extra << "\n}\n";
  return os.str();
}

std::string write_config(const fs::path& dir, const std::string& body) {
  const fs::path p = dir / "config.json";
  std::ofstream os(p);
  os << body;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cmd_train writes per-run outputs and a mean/std summary") {
  TempDir tmp("ocimix_cli_train");
  const auto cfg = write_config(tmp.path, small_train_config((tmp.path / "out").string()));
  CHECK(cli::cmd_train(cfg, {}) == 0);

  for (const char* seed_dir : {"run_1", "run_2"}) {
    const fs::path dir = tmp.path / "out" / seed_dir;
    for (const char* f : {"accuracy_matrix.csv", "loss_trace.csv", "norm_trace.csv",
                          "metrics.csv", "confusion_task1.csv", "confusion_task2.csv",
                          "buffer_histogram.csv", "model.ckpt", "manifest.json"}) {
      CHECK(fs::exists(dir / f));
    }
  }
  const fs::path summary = tmp.path / "out" / "summary.json";
  REQUIRE(fs::exists(summary));
  const auto j = nlohmann::json::parse(slurp(summary));
  CHECK(j.at("runs").size() == 2);
  CHECK(j.at("final_average_accuracy").contains("mean"));
  CHECK(j.at("final_average_accuracy").contains("std"));
  CHECK(j.at("final_average_forgetting").contains("mean"));
}

TEST_CASE("rerunning a command reproduces the output files byte for byte") {
  TempDir tmp("ocimix_cli_repro");
  const auto cfg_a = write_config(tmp.path, small_train_config((tmp.path / "a").string()));
  CHECK(cli::cmd_train(cfg_a, {}) == 0);
  cli::Overrides to_b;
  to_b.out_dir = (tmp.path / "b").string();
  CHECK(cli::cmd_train(cfg_a, to_b) == 0);

  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(tmp.path / "a")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), tmp.path / "a");
    CHECK(slurp(entry.path()) == slurp(tmp.path / "b" / rel));
    ++compared;
  }
  CHECK(compared >= 10);
}

TEST_CASE("missing dataset file fails with status 2 and writes nothing") {
  TempDir tmp("ocimix_cli_missing");
  const std::string body = R"({
  "dataset": {"type": "idx", "train_images": "nope.idx", "train_labels": "nope.idx",
              "test_images": "nope.idx", "test_labels": "nope.idx"},
  "seeds": [1],
  "out_dir": ")" + (tmp.path / "out").string() + R"("
})";
  const auto cfg = write_config(tmp.path, body);
  CHECK(cli::cmd_train(cfg, {}) == 2);
  CHECK_FALSE(fs::exists(tmp.path / "out"));
}

TEST_CASE("invalid config json fails with status 2") {
  TempDir tmp("ocimix_cli_badjson");
  const auto cfg = write_config(tmp.path, "{not json");
  CHECK(cli::cmd_train(cfg, {}) == 2);
  CHECK(cli::cmd_train("nonexistent_config.json", {}) == 2);
}

TEST_CASE("method override changes the manifest") {
  TempDir tmp("ocimix_cli_method");
  const auto cfg = write_config(tmp.path, small_train_config((tmp.path / "out").string()));
  cli::Overrides ov;
  ov.method = "finetune";
  ov.seeds = std::vector<std::uint64_t>{7};
  CHECK(cli::cmd_train(cfg, ov) == 0);
  const auto manifest =
      nlohmann::json::parse(slurp(tmp.path / "out" / "run_7" / "manifest.json"));
  CHECK(manifest.at("trainer").at("method") == "finetune");
  CHECK(manifest.at("seed") == 7);
}

TEST_CASE("boundary-trace requires a cadence and emits the trace csv") {
  TempDir tmp("ocimix_cli_trace");
  const auto no_cadence = write_config(tmp.path, small_train_config((tmp.path / "o1").string()));
  CHECK(cli::cmd_boundary_trace(no_cadence, {}) == 2);

  const std::string with_cadence = R"({
  "dataset": {"type": "blobs", "class_count": 4, "dim": 8, "separation": 3.0,
              "per_class_train": 30, "per_class_test": 10},
  "classes_per_task": 2,
  "trainer": {"method": "er_plain", "hidden": [12, 8], "memory_capacity": 40,
              "trace_every": 2},
  "seeds": [3],
  "out_dir": ")" + (tmp.path / "o2").string() + R"("
})";
  const auto cfg = write_config(tmp.path, with_cadence);
  CHECK(cli::cmd_boundary_trace(cfg, {}) == 0);
  const fs::path trace = tmp.path / "o2" / "run_3" / "boundary_trace.csv";
  REQUIRE(fs::exists(trace));
  const auto text = slurp(trace);
  CHECK(text.rfind("step,task,er_new_as_old,er_old_as_new", 0) == 0);
}

TEST_CASE("analyze-da needs at least three configs and writes the scatter csv") {
  TempDir tmp("ocimix_cli_scan");
  const std::string base = R"({
  "dataset": {"type": "blobs", "class_count": 4, "dim": 8, "separation": 3.0,
              "per_class_train": 40, "per_class_test": 10},
  "classes_per_task": 2,
  "trainer": {"hidden": [12, 8], "memory_capacity": 40},
  "seeds": [1],
  "mc_samples": 8,
  "out_dir": ")" + (tmp.path / "out").string() + R"(",
  "da_configs": [
    {"name": "identity", "pipeline": "identity"},
    {"name": "noise", "pipeline": "noise:0.1"},
    {"name": "jitter", "pipeline": "jitter:0.3"}
  ]
})";
  const auto cfg = write_config(tmp.path, base);
  CHECK(cli::cmd_analyze_da(cfg, {}) == 0);
  const fs::path scatter = tmp.path / "out" / "da_scan.csv";
  REQUIRE(fs::exists(scatter));
  const auto text = slurp(scatter);
  CHECK(text.rfind("seed,pipeline,strength,co,fg,m_bar,final_aa", 0) == 0);
  // one header + 3 configs x 1 seed
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);

  const std::string two = R"({
  "dataset": {"type": "blobs", "class_count": 4, "dim": 8, "separation": 3.0,
              "per_class_train": 40, "per_class_test": 10},
  "seeds": [1],
  "out_dir": ")" + (tmp.path / "out2").string() + R"(",
  "da_configs": [{"pipeline": "identity"}, {"pipeline": "noise:0.1"}]
})";
  CHECK(cli::cmd_analyze_da(write_config(tmp.path, two), {}) == 2);
}

TEST_CASE("eval reloads a checkpoint written by train") {
  TempDir tmp("ocimix_cli_eval");
  const auto cfg = write_config(tmp.path, small_train_config((tmp.path / "out").string()));
  REQUIRE(cli::cmd_train(cfg, {}) == 0);
  const std::string model = (tmp.path / "out" / "run_1" / "model.ckpt").string();
  CHECK(cli::cmd_eval(cfg, model, {}) == 0);
  CHECK(cli::cmd_eval(cfg, "missing.ckpt", {}) == 2);
}

TEST_CASE("pattern-image dataset type builds tasks through the config path") {
  TempDir tmp("ocimix_cli_patterns");
  const std::string body = R"({
  "dataset": {"type": "patterns", "class_count": 4, "side": 6, "similarity": 0.4,
              "per_class_train": 20, "per_class_test": 5},
  "classes_per_task": 2,
  "trainer": {"method": "er_da", "hidden": [10], "memory_capacity": 30,
              "pipeline": "flip|jitter:0.2"},
  "seeds": [1],
  "out_dir": ")" + (tmp.path / "out").string() + R"("
})";
  const auto cfg_path = write_config(tmp.path, body);
  const auto cfg = cli::load_config(cfg_path);
  const auto tasks = cli::build_tasks(cfg, 1);
  REQUIRE(tasks.size() == 2);
  CHECK(tasks[0].train_examples[0].features.shape == std::vector<std::size_t>{6, 6});
  CHECK(cli::cmd_train(cfg_path, {}) == 0);
  const auto manifest =
      nlohmann::json::parse(slurp(tmp.path / "out" / "run_1" / "manifest.json"));
  CHECK(manifest.at("dataset").at("type") == "patterns");
}

TEST_CASE("idx dataset type trains end to end from synthesized files") {
  TempDir tmp("ocimix_cli_idx");
  auto be = [](std::ofstream& os, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) os.put(static_cast<char>((v >> s) & 0xff));
  };
  auto write_pair = [&](const fs::path& img, const fs::path& lab, std::uint32_t count) {
    std::ofstream io(img, std::ios::binary);
    be(io, 0x00000803u);
    be(io, count);
    be(io, 4);
    be(io, 4);
    for (std::uint32_t i = 0; i < count * 16; ++i) io.put(static_cast<char>(i * 31 % 256));
    std::ofstream lo(lab, std::ios::binary);
    be(lo, 0x00000801u);
    be(lo, count);
    for (std::uint32_t i = 0; i < count; ++i) lo.put(static_cast<char>(i % 2));
  };
  write_pair(tmp.path / "train_img.idx", tmp.path / "train_lab.idx", 40);
  write_pair(tmp.path / "test_img.idx", tmp.path / "test_lab.idx", 10);

  const std::string body = R"({
  "dataset": {"type": "idx",
              "train_images": ")" + (tmp.path / "train_img.idx").string() + R"(",
              "train_labels": ")" + (tmp.path / "train_lab.idx").string() + R"(",
              "test_images": ")" + (tmp.path / "test_img.idx").string() + R"(",
              "test_labels": ")" + (tmp.path / "test_lab.idx").string() + R"("},
  "classes_per_task": 1,
  "trainer": {"method": "er_plain", "hidden": [8], "memory_capacity": 20},
  "seeds": [1],
  "out_dir": ")" + (tmp.path / "out").string() + R"("
})";
  const auto cfg_path = write_config(tmp.path, body);
  CHECK(cli::cmd_train(cfg_path, {}) == 0);
  CHECK(fs::exists(tmp.path / "out" / "run_1" / "accuracy_matrix.csv"));
}

TEST_CASE("seed list parsing") {
  CHECK(cli::parse_seed_list("1,2,3") == std::vector<std::uint64_t>({1, 2, 3}));
  CHECK(cli::parse_seed_list("42") == std::vector<std::uint64_t>({42}));
  CHECK_THROWS(cli::parse_seed_list(""));
}
