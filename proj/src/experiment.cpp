#include "ocimix/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ocimix/metrics.hpp"
#include "ocimix/rng.hpp"
#include "ocimix/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ocimix::cli {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

trainer::Retrieval retrieval_from_string(const std::string& s) {
  if (s == "er") return trainer::Retrieval::er;
  if (s == "mir") return trainer::Retrieval::mir;
  throw std::runtime_error("config: unknown retrieval '" + s + "'");
}

std::string retrieval_to_string(trainer::Retrieval r) {
  return r == trainer::Retrieval::mir ? "mir" : "er";
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw std::runtime_error(std::string("config: missing ") + what);
  if (!fs::exists(path)) {
    throw std::runtime_error(std::string("config: ") + what + " not found: " + path);
  }
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    seeds.push_back(std::stoull(token));
  }
  if (seeds.empty()) throw std::runtime_error("seed list is empty");
  return seeds;
}

std::size_t sweep_thread_limit() {
  if (const char* env = std::getenv("OCIMIX_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<std::size_t>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path);
  json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("config: parse error in " + path + ": " + e.what());
  }

  ExperimentConfig cfg;
  const auto& jd = j.at("dataset");
  const std::string kind = jd.value("type", "blobs");
  cfg.dataset.class_count = jd.value("class_count", cfg.dataset.class_count);
  cfg.dataset.per_class_train = jd.value("per_class_train", cfg.dataset.per_class_train);
  cfg.dataset.per_class_test = jd.value("per_class_test", cfg.dataset.per_class_test);
  if (kind == "blobs") {
    cfg.dataset.kind = DatasetSpec::Kind::blobs;
    cfg.dataset.dim = jd.value("dim", cfg.dataset.dim);
    cfg.dataset.separation = jd.value("separation", cfg.dataset.separation);
    cfg.dataset.image_side = jd.value("image_side", cfg.dataset.image_side);
    if (cfg.dataset.image_side > 0 &&
        cfg.dataset.image_side * cfg.dataset.image_side != cfg.dataset.dim) {
      throw std::runtime_error("config: image_side^2 must equal dim");
    }
  } else if (kind == "patterns") {
    cfg.dataset.kind = DatasetSpec::Kind::patterns;
    cfg.dataset.side = jd.value("side", cfg.dataset.side);
    cfg.dataset.similarity = jd.value("similarity", cfg.dataset.similarity);
  } else if (kind == "idx") {
    cfg.dataset.kind = DatasetSpec::Kind::idx;
    cfg.dataset.train_images = jd.value("train_images", "");
    cfg.dataset.train_labels = jd.value("train_labels", "");
    cfg.dataset.test_images = jd.value("test_images", "");
    cfg.dataset.test_labels = jd.value("test_labels", "");
    require_file(cfg.dataset.train_images, "train_images");
    require_file(cfg.dataset.train_labels, "train_labels");
    require_file(cfg.dataset.test_images, "test_images");
    require_file(cfg.dataset.test_labels, "test_labels");
  } else {
    throw std::runtime_error("config: unknown dataset type '" + kind + "'");
  }

  cfg.classes_per_task = j.value("classes_per_task", cfg.classes_per_task);

  if (j.contains("trainer")) {
    const auto& jt = j.at("trainer");
    auto& t = cfg.trainer;
    t.lr = jt.value("lr", t.lr);
    t.batch_size = jt.value("batch_size", t.batch_size);
    t.memory_batch_size = jt.value("memory_batch_size", t.batch_size);
    t.memory_capacity = jt.value("memory_capacity", t.memory_capacity);
    t.retrieval = retrieval_from_string(jt.value("retrieval", "er"));
    t.method = trainer::method_from_string(jt.value("method", "er_plain"));
    t.pipeline = augment::parse_pipeline(jt.value("pipeline", ""));
    t.hidden = jt.value("hidden", t.hidden);
    t.mir_candidates = jt.value("mir_candidates", t.mir_candidates);
    t.augment_current = jt.value("augment_current", t.augment_current);
    t.dualmix_include_plain_aug =
        jt.value("dualmix_include_plain_aug", t.dualmix_include_plain_aug);
    t.freeze_buffer = jt.value("freeze_buffer", t.freeze_buffer);
    t.trace_every = jt.value("trace_every", t.trace_every);
    if (jt.contains("mix")) {
      const auto& jm = jt.at("mix");
      t.mix.alpha = jm.value("alpha", t.mix.alpha);
      t.mix.delta = jm.value("delta", t.mix.delta);
      t.mix.kappa = jm.value("kappa", t.mix.kappa);
      t.mix.tau = jm.value("tau", t.mix.tau);
      t.mix.validate();
    }
  }

  cfg.seeds = j.value("seeds", std::vector<std::uint64_t>{1});
  if (cfg.seeds.empty()) throw std::runtime_error("config: seeds must be non-empty");
  cfg.out_dir = j.value("out_dir", cfg.out_dir);

  if (j.contains("da_configs")) {
    for (const auto& jc : j.at("da_configs")) {
      analysis::DAConfig dc;
      dc.name = jc.value("name", "");
      dc.ops = augment::parse_pipeline(jc.value("pipeline", ""));
      dc.enmix = jc.value("enmix", false);
      if (dc.name.empty()) dc.name = augment::pipeline_to_string(dc.ops);
      cfg.da_configs.push_back(std::move(dc));
    }
  }
  cfg.mc_samples = j.value("mc_samples", cfg.mc_samples);
  cfg.aa_seeds = j.value("aa_seeds", cfg.aa_seeds);
  return cfg;
}

std::vector<stream::TaskSpec> build_tasks(const ExperimentConfig& config,
                                          std::uint64_t run_seed) {
  std::vector<stream::Example> train, test;
  if (config.dataset.kind == DatasetSpec::Kind::blobs) {
    auto blobs = stream::gen_gaussian_blobs(
        config.dataset.class_count, config.dataset.dim, config.dataset.separation,
        config.dataset.per_class_train, config.dataset.per_class_test,
        derive_seed(run_seed, SeedTag::data));
    train = std::move(blobs.train);
    test = std::move(blobs.test);
    if (config.dataset.image_side > 0) {
      const std::size_t s = config.dataset.image_side;
      train = stream::reshape_examples(std::move(train), {s, s});
      test = stream::reshape_examples(std::move(test), {s, s});
    }
  } else if (config.dataset.kind == DatasetSpec::Kind::patterns) {
    auto patterns = stream::gen_pattern_images(
        config.dataset.class_count, config.dataset.side, config.dataset.similarity,
        config.dataset.per_class_train, config.dataset.per_class_test,
        derive_seed(run_seed, SeedTag::data));
    train = std::move(patterns.train);
    test = std::move(patterns.test);
  } else {
    train = stream::load_idx(config.dataset.train_images, config.dataset.train_labels);
    test = stream::load_idx(config.dataset.test_images, config.dataset.test_labels);
  }
  return stream::split_into_tasks(train, test, config.classes_per_task,
                                  derive_seed(run_seed, SeedTag::split));
}

namespace {

json config_manifest(const ExperimentConfig& cfg, std::uint64_t seed) {
  json m;
  m["version"] = kVersion;
  m["seed"] = seed;
  m["classes_per_task"] = cfg.classes_per_task;
  json jd;
  jd["class_count"] = cfg.dataset.class_count;
  jd["per_class_train"] = cfg.dataset.per_class_train;
  jd["per_class_test"] = cfg.dataset.per_class_test;
  if (cfg.dataset.kind == DatasetSpec::Kind::blobs) {
    jd["type"] = "blobs";
    jd["dim"] = cfg.dataset.dim;
    jd["separation"] = cfg.dataset.separation;
    jd["image_side"] = cfg.dataset.image_side;
  } else if (cfg.dataset.kind == DatasetSpec::Kind::patterns) {
    jd["type"] = "patterns";
    jd["side"] = cfg.dataset.side;
    jd["similarity"] = cfg.dataset.similarity;
  } else {
    jd["type"] = "idx";
    jd["train_images"] = cfg.dataset.train_images;
    jd["train_labels"] = cfg.dataset.train_labels;
    jd["test_images"] = cfg.dataset.test_images;
    jd["test_labels"] = cfg.dataset.test_labels;
  }
  m["dataset"] = jd;
  const auto& t = cfg.trainer;
  json jt;
  jt["lr"] = t.lr;
  jt["batch_size"] = t.batch_size;
  jt["memory_batch_size"] = t.memory_batch_size;
  jt["memory_capacity"] = t.memory_capacity;
  jt["retrieval"] = retrieval_to_string(t.retrieval);
  jt["method"] = trainer::method_to_string(t.method);
  jt["pipeline"] = augment::pipeline_to_string(t.pipeline);
  jt["hidden"] = t.hidden;
  jt["mix"] = {{"alpha", t.mix.alpha}, {"delta", t.mix.delta},
               {"kappa", t.mix.kappa}, {"tau", t.mix.tau}};
  jt["augment_current"] = t.augment_current;
  jt["dualmix_include_plain_aug"] = t.dualmix_include_plain_aug;
  jt["freeze_buffer"] = t.freeze_buffer;
  jt["trace_every"] = t.trace_every;
  m["trainer"] = jt;
  return m;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

void write_run_outputs(const fs::path& dir, const ExperimentConfig& cfg,
                       std::uint64_t seed, const std::vector<stream::TaskSpec>& tasks,
                       const trainer::TrainResult& result) {
  fs::create_directories(dir);
  const auto& log = result.log;

  {
    std::ostringstream os;
    for (std::size_t i = 0; i < log.accuracy.size(); ++i) {
      os << (i + 1);
      for (double v : log.accuracy[i]) os << ',' << fmt(v);
      os << "\n";
    }
    write_text(dir / "accuracy_matrix.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "step,task,loss\n";
    for (const auto& p : log.loss_trace) {
      os << p.step << ',' << (p.task + 1) << ',' << fmt(p.loss) << "\n";
    }
    write_text(dir / "loss_trace.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "step,task,new_class_norm_mean,old_class_norm_mean\n";
    for (const auto& p : log.norm_trace) {
      os << p.step << ',' << (p.task + 1) << ',' << fmt(p.new_mean) << ','
         << fmt_opt(p.old_mean) << "\n";
    }
    write_text(dir / "norm_trace.csv", os.str());
  }
  for (std::size_t t = 0; t < log.confusions.size(); ++t) {
    std::ostringstream os;
    for (const auto& row : log.confusions[t]) {
      for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
      os << "\n";
    }
    write_text(dir / ("confusion_task" + std::to_string(t + 1) + ".csv"), os.str());
  }
  {
    // Per-task metric summary; er ratios split old = earlier tasks,
    // new = that task's classes.
    std::ostringstream os;
    os << "task_index,average_accuracy,average_forgetting,er_new_as_old,er_old_as_new,m_bar\n";
    std::vector<std::size_t> old_classes;
    for (std::size_t t = 0; t < log.accuracy.size(); ++t) {
      const double aa = metrics::average_accuracy(log.accuracy, t + 1);
      std::optional<double> af;
      if (t >= 1) af = metrics::average_forgetting(log.accuracy, t + 1);
      std::optional<double> er_no, er_on;
      if (t >= 1) {
        const auto report =
            metrics::misclass_ratios(log.confusions[t], old_classes, tasks[t].class_ids);
        er_no = report.er_new_as_old;
        er_on = report.er_old_as_new;
      }
      os << (t + 1) << ',' << fmt(aa) << ',' << fmt_opt(af) << ',' << fmt_opt(er_no) << ','
         << fmt_opt(er_on) << ',' << fmt_opt(log.m_bar[t]) << "\n";
      for (std::size_t c : tasks[t].class_ids) old_classes.push_back(c);
    }
    write_text(dir / "metrics.csv", os.str());
  }
  if (!log.boundary_trace.empty()) {
    std::ostringstream os;
    os << "step,task,er_new_as_old,er_old_as_new\n";
    for (const auto& p : log.boundary_trace) {
      os << p.step << ',' << (p.task + 1) << ',' << fmt_opt(p.er_new_as_old) << ','
         << fmt_opt(p.er_old_as_new) << "\n";
    }
    write_text(dir / "boundary_trace.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "task_index,label,count\n";
    for (std::size_t t = 0; t < log.buffer_histograms.size(); ++t) {
      for (const auto& [label, count] : log.buffer_histograms[t]) {
        os << (t + 1) << ',' << label << ',' << count << "\n";
      }
    }
    write_text(dir / "buffer_histogram.csv", os.str());
  }
  nn::save_model(result.model, (dir / "model.ckpt").string());
  write_text(dir / "manifest.json", config_manifest(cfg, seed).dump(2) + "\n");
}

struct RunSummary {
  std::uint64_t seed;
  double final_aa;
  std::optional<double> final_af;
};

// Bounded parallel sweep; each worker owns disjoint output directories.
template <typename Fn>
void parallel_sweep(std::size_t jobs, Fn&& fn) {
  const std::size_t workers = std::min(jobs, sweep_thread_limit());
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next(0);
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= jobs) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double var = 0.0;
  for (double x : v) var += (x - m) * (x - m);
  return std::sqrt(var / static_cast<double>(v.size() - 1));
}

ExperimentConfig load_with_overrides(const std::string& config_path,
                                     const Overrides& overrides) {
  ExperimentConfig cfg = load_config(config_path);
  if (overrides.out_dir) cfg.out_dir = *overrides.out_dir;
  if (overrides.seeds) cfg.seeds = *overrides.seeds;
  if (overrides.method) cfg.trainer.method = trainer::method_from_string(*overrides.method);
  return cfg;
}

int run_training_command(const std::string& config_path, const Overrides& overrides,
                         bool require_trace) {
  ExperimentConfig cfg;
  try {
    cfg = load_with_overrides(config_path, overrides);
    if (require_trace && cfg.trainer.trace_every == 0) {
      throw std::runtime_error("config: boundary-trace requires trainer.trace_every > 0");
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  const fs::path out_dir(cfg.out_dir);
  std::vector<fs::path> created;
  try {
    fs::create_directories(out_dir);
    std::vector<RunSummary> summaries(cfg.seeds.size());
    std::vector<fs::path> run_dirs(cfg.seeds.size());
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
      run_dirs[i] = out_dir / ("run_" + std::to_string(cfg.seeds[i]));
      created.push_back(run_dirs[i]);
    }

    parallel_sweep(cfg.seeds.size(), [&](std::size_t i) {
      const std::uint64_t seed = cfg.seeds[i];
      auto tasks = build_tasks(cfg, seed);
      trainer::TrainerConfig tc = cfg.trainer;
      tc.seed = seed;
      auto result = trainer::train_stream(tc, tasks);
      write_run_outputs(run_dirs[i], cfg, seed, tasks, result);
      RunSummary s;
      s.seed = seed;
      s.final_aa = metrics::average_accuracy(result.log.accuracy, tasks.size());
      if (tasks.size() >= 2) {
        s.final_af = metrics::average_forgetting(result.log.accuracy, tasks.size());
      }
      summaries[i] = s;
    });

    json out;
    out["version"] = kVersion;
    out["method"] = trainer::method_to_string(cfg.trainer.method);
    std::vector<double> aa, af;
    json runs = json::array();
    for (const auto& s : summaries) {
      json r;
      r["seed"] = s.seed;
      r["final_average_accuracy"] = s.final_aa;
      if (s.final_af) r["final_average_forgetting"] = *s.final_af;
      runs.push_back(r);
      aa.push_back(s.final_aa);
      if (s.final_af) af.push_back(*s.final_af);
    }
    out["runs"] = runs;
    out["final_average_accuracy"] = {{"mean", mean_of(aa)}, {"std", std_of(aa)}};
    if (!af.empty()) {
      out["final_average_forgetting"] = {{"mean", mean_of(af)}, {"std", std_of(af)}};
    }
    const fs::path summary_path = out_dir / "summary.json";
    created.push_back(summary_path);
    write_text(summary_path, out.dump(2) + "\n");
    std::cout << "wrote " << summary_path.string() << " (" << cfg.seeds.size()
              << " runs)\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& p : created) {
      std::error_code ec;
      fs::remove_all(p, ec);
    }
    return 1;
  }
}

}  // namespace

int cmd_train(const std::string& config_path, const Overrides& overrides) {
  return run_training_command(config_path, overrides, /*require_trace=*/false);
}

int cmd_boundary_trace(const std::string& config_path, const Overrides& overrides) {
  return run_training_command(config_path, overrides, /*require_trace=*/true);
}

int cmd_analyze_da(const std::string& config_path, const Overrides& overrides) {
  ExperimentConfig cfg;
  try {
    cfg = load_with_overrides(config_path, overrides);
    if (cfg.da_configs.size() < 3) {
      throw std::runtime_error("config: analyze-da needs >= 3 da_configs");
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  const fs::path out_dir(cfg.out_dir);
  const fs::path scatter_path = out_dir / "da_scan.csv";
  try {
    fs::create_directories(out_dir);

    // Per-seed scans; the printed correlations use per-config means.
    std::vector<analysis::ScanResult> scans(cfg.seeds.size());
    parallel_sweep(cfg.seeds.size(), [&](std::size_t i) {
      const std::uint64_t seed = cfg.seeds[i];
      analysis::ScanSetup setup;
      setup.tasks = build_tasks(cfg, seed);
      setup.base = cfg.trainer;
      setup.base.seed = seed;
      setup.mc_samples = cfg.mc_samples;
      setup.aa_seeds = cfg.aa_seeds;
      scans[i] = analysis::da_strength_scan(cfg.da_configs, setup);
    });

    std::ostringstream os;
    os << "seed,pipeline,strength,co,fg,m_bar,final_aa\n";
    const std::size_t nc = cfg.da_configs.size();
    std::vector<double> co(nc, 0.0), fg(nc, 0.0), mbar(nc, 0.0), aa(nc, 0.0);
    for (std::size_t i = 0; i < scans.size(); ++i) {
      for (std::size_t c = 0; c < nc; ++c) {
        const auto& p = scans[i].points[c];
        os << cfg.seeds[i] << ',' << p.pipeline << ',' << fmt(p.strength) << ','
           << fmt(p.co) << ',' << fmt(p.fg) << ',' << fmt(p.m_bar) << ','
           << fmt(p.final_aa) << "\n";
        co[c] += p.co;
        fg[c] += p.fg;
        mbar[c] += p.m_bar;
        aa[c] += p.final_aa;
      }
    }
    const double inv = 1.0 / static_cast<double>(scans.size());
    for (std::size_t c = 0; c < nc; ++c) {
      co[c] *= inv;
      fg[c] *= inv;
      mbar[c] *= inv;
      aa[c] *= inv;
    }
    write_text(scatter_path, os.str());
    std::cout << "wrote " << scatter_path.string() << "\n";
    std::cout << "spearman(CO, FG) = " << fmt(analysis::spearman(co, fg)) << "\n";
    std::cout << "spearman(m_bar, final_AA) = " << fmt(analysis::spearman(mbar, aa)) << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::error_code ec;
    fs::remove(scatter_path, ec);
    return 1;
  }
}

int cmd_eval(const std::string& config_path, const std::string& model_path,
             const Overrides& overrides) {
  try {
    ExperimentConfig cfg = load_with_overrides(config_path, overrides);
    require_file(model_path, "model checkpoint");
    const nn::Model model = nn::load_model(model_path);
    const auto tasks = build_tasks(cfg, cfg.seeds.front());
    const auto [accuracies, confusion] = trainer::evaluate(model, tasks);
    (void)confusion;
    double sum = 0.0;
    for (std::size_t t = 0; t < accuracies.size(); ++t) {
      std::cout << "task " << (t + 1) << " accuracy " << fmt(accuracies[t]) << "\n";
      sum += accuracies[t];
    }
    std::cout << "average_accuracy " << fmt(sum / static_cast<double>(accuracies.size()))
              << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace ocimix::cli
