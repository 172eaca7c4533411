#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slicenet/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"slicenet: entropy-based slice selection and transfer learning for volumetric scans"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
  std::size_t threads = 1;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--output", output_dir, "Output directory (overrides output_dir)");
  app.add_option("--seed", seed, "Seed for training, folds and pretraining");
  app.add_flag("--deterministic", deterministic, "Fixed-order reductions (always the case; recorded for the run)");
  app.add_option("--threads", threads, "Folds evaluated concurrently")->check(CLI::PositiveNumber);

  auto* select = app.add_subcommand("select", "Rank slices by entropy and write one selection file per subject");
  auto* pretrain = app.add_subcommand("pretrain", "Train on an auxiliary synthetic cohort and write a weight container");
  auto* train_eval = app.add_subcommand("train-eval", "Cross-validate the configured model and write a report");
  auto* compare = app.add_subcommand("compare", "Compare entropy and random slice selection");
  auto* report = app.add_subcommand("report", "Merge report files into one table");
  std::vector<std::string> report_files;
  report->add_option("files", report_files, "train-eval report JSON files");

  CLI11_PARSE(app, argc, argv);

  try {
    slicenet::RunConfig cfg;
    const bool needs_config = !report->parsed();
    if (!config_path.empty())
      cfg = slicenet::load_run_config(config_path);
    else if (needs_config)
      throw slicenet::Error(slicenet::ErrorCode::BadConfig, "--config is required for this command");
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    if (seed) slicenet::apply_seed_override(cfg, *seed);
    cfg.deterministic = deterministic;
    cfg.threads = threads;

    if (select->parsed()) {
      slicenet::cmd_select(cfg, std::cout);
    } else if (pretrain->parsed()) {
      slicenet::cmd_pretrain(cfg, std::cout);
    } else if (train_eval->parsed()) {
      slicenet::cmd_train_eval(cfg, std::cout);
    } else if (compare->parsed()) {
      slicenet::cmd_compare(cfg, std::cout);
    } else if (report->parsed()) {
      slicenet::cmd_report(report_files, cfg.output_dir, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
