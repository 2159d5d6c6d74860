#include <string>

#include <CLI11.hpp>

#include "ocimix/experiment.hpp"
#include "ocimix/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ocimix: online class-incremental learning with mixup-based replay"};
  app.set_version_flag("--version", std::string(ocimix::kVersion));
  app.require_subcommand(1);

  std::string config_path, out_dir, seeds_csv, method, model_path;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
    cmd->add_option("--out", out_dir, "output directory (overrides config)");
    cmd->add_option("--seeds", seeds_csv, "comma-separated seed list (overrides config)");
    cmd->add_option("--method", method, "training method (overrides config)");
  };

  auto* train = app.add_subcommand("train", "run the training sweep and write RunLog CSVs");
  add_common(train);
  auto* analyze = app.add_subcommand("analyze-da", "scan DA configs and write the scatter CSV");
  add_common(analyze);
  auto* boundary = app.add_subcommand(
      "boundary-trace", "train with a misclassification-trace cadence and write the trace CSV");
  add_common(boundary);
  auto* eval = app.add_subcommand("eval", "re-evaluate a model checkpoint on the config's tasks");
  add_common(eval);
  eval->add_option("--model", model_path, "model checkpoint path")->required();

  CLI11_PARSE(app, argc, argv);

  ocimix::cli::Overrides overrides;
  if (!out_dir.empty()) overrides.out_dir = out_dir;
  if (!method.empty()) overrides.method = method;
  if (!seeds_csv.empty()) {
    try {
      overrides.seeds = ocimix::cli::parse_seed_list(seeds_csv);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 2;
    }
  }

  if (train->parsed()) return ocimix::cli::cmd_train(config_path, overrides);
  if (analyze->parsed()) return ocimix::cli::cmd_analyze_da(config_path, overrides);
  if (boundary->parsed()) return ocimix::cli::cmd_boundary_trace(config_path, overrides);
  if (eval->parsed()) return ocimix::cli::cmd_eval(config_path, model_path, overrides);
  return 2;
}
