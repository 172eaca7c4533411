#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "slicenet/eval.hpp"

namespace slicenet {

/// Parameters of the auxiliary cohort that stands in for a large pretraining set.
struct PretrainConfig {
  CohortParams cohort{.n_subjects = 40, .dims = {32, 32, 24}, .class_gap = 30.0, .noise = 1.0,
                      .seed = 1000, .texture_family = 1};
  std::size_t selection_k = 8;
  TrainConfig train;
};

struct CompareConfig {
  std::vector<SelectionStrategy> strategies{SelectionStrategy::Entropy, SelectionStrategy::Random};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
};

/// Mirrors the JSON config file field for field; unknown keys are rejected.
struct RunConfig {
  std::string manifest_path;
  SelectionConfig selection;
  std::size_t input_size = 150;
  NormalizationSpec normalization;
  Architecture architecture = Architecture::MicroVGG;
  TransferMode regime = TransferMode::Scratch;
  std::string weights_path;
  std::size_t trainable_tail = 1;
  TrainConfig train = vgg_recipe();
  CvSettings cv;
  std::string output_dir;
  PretrainConfig pretrain;
  CompareConfig compare;

  // Command-line only.
  bool deterministic = false;
  std::size_t threads = 1;
};

RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
nlohmann::ordered_json run_config_to_json(const RunConfig& cfg);

/// Overrides train.seed, cv.seed and the pretraining cohort seed.
void apply_seed_override(RunConfig& cfg, std::uint64_t seed);

/// Field checks shared by every command. `needs_manifest` and `needs_weights`
/// add the command-specific requirements.
void validate_run_config(const RunConfig& cfg, bool needs_manifest, bool needs_weights);

/// Volumes named by the manifest; relative paths resolve against the
/// manifest's directory. Errors carry the subject id and path.
Cohort load_cohort(const std::string& manifest_path);

/// Writes a cohort as RAWVOL files plus manifest.jsonl into `dir`.
std::string write_cohort(const Cohort& cohort, const std::string& dir);

/// Where each command writes.
std::string selections_dir(const RunConfig& cfg);
std::string weights_dir(const RunConfig& cfg);
std::string reports_dir(const RunConfig& cfg);

/// Name of the single key holding wall-clock time in every report file.
inline constexpr const char* kTimestampKey = "generated_at";

struct SelectResult {
  std::vector<std::string> files;
  std::size_t warnings = 0;
};

SelectResult cmd_select(const RunConfig& cfg, std::ostream& log);

/// Returns the path of the written weight container.
std::string cmd_pretrain(const RunConfig& cfg, std::ostream& log);

struct TrainEvalResult {
  EvalReport report;
  std::string json_path;
  std::string text_path;
};

TrainEvalResult cmd_train_eval(const RunConfig& cfg, std::ostream& log);

struct CompareResult {
  ComparisonTable table;
  std::string json_path;
  std::string text_path;
};

CompareResult cmd_compare(const RunConfig& cfg, std::ostream& log);

struct ReportResult {
  std::vector<TableRow> rows;
  bool images_identity = false;
  bool training_size_identity = false;
  std::string json_path;
  std::string text_path;
};

/// Merges train-eval report files into one table and appends the published
/// reference rows, each flagged as such.
ReportResult cmd_report(const std::vector<std::string>& report_paths, const std::string& output_dir,
                        std::ostream& log);

/// The published reference rows appended by cmd_report.
std::vector<TableRow> published_reference_rows();

}  // namespace slicenet
