#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "slicenet/image_ops.hpp"
#include "slicenet/slice_select.hpp"
#include "slicenet/train.hpp"
#include "slicenet/volume.hpp"

namespace slicenet {

// ---- folds ---------------------------------------------------------------

enum class FoldLevel { Subject, Slice };

std::string_view to_string(FoldLevel level);
FoldLevel fold_level_from_string(std::string_view s);

struct FoldPlan {
  std::size_t k = 0;
  FoldLevel level = FoldLevel::Subject;
  std::map<std::string, std::size_t> assignment;

  /// Throws BadParams for units the plan does not cover.
  std::size_t fold_of(const std::string& unit) const;
  std::vector<std::size_t> fold_sizes() const;
};

/// Seeded shuffle of the units followed by round-robin assignment, so fold
/// sizes differ by at most one. Requires k >= 2 and |units| >= k.
FoldPlan kfold_split(std::span<const std::string> units, std::size_t k, std::uint64_t seed,
                     FoldLevel level = FoldLevel::Subject);

/// Fraction of positions where the two label lists agree.
double accuracy(std::span<const std::size_t> predictions, std::span<const std::size_t> truth);

/// Standard deviation with the n - 1 denominator; 0 for fewer than two values.
double sample_stddev(std::span<const double> values);

// ---- cross-validation ----------------------------------------------------

/// One preprocessed slice with its provenance.
struct Example {
  ImageTensor image;
  std::size_t label = 0;
  std::string subject_id;
  std::size_t slice_index = 0;
};

/// The fold unit an example belongs to: its subject, or "subject#slice".
std::string unit_id(const Example& e, FoldLevel level);

/// Distinct unit ids in order of first appearance.
std::vector<std::string> unit_ids(std::span<const Example> examples, FoldLevel level);

using Classifier = std::function<std::size_t(const Example&)>;
/// Builds a classifier from a fold's training split.
using FoldTrainer = std::function<Classifier(std::span<const Example> train_split, std::size_t fold)>;

struct EvalReport {
  std::vector<double> fold_accuracy;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t training_size = 0;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
};

/// Trains on every fold's complement and scores the fold. training_size is
/// the example count minus the examples of fold 0. DegenerateFold when a
/// training split lacks one of the two classes. With threads > 1 folds run
/// concurrently; results are assembled in fold order either way.
EvalReport cross_validate(std::span<const Example> dataset, const FoldPlan& plan, const FoldTrainer& trainer,
                          std::size_t threads = 1);

/// How to build and train the per-fold network.
struct ModelRecipe {
  Architecture architecture = Architecture::MicroVGG;
  TransferMode regime = TransferMode::Scratch;
  const WeightContainer* weights = nullptr;
  TrainConfig train;
  std::size_t trainable_tail = 1;
  std::size_t n_classes = 2;
};

/// Fold trainer for a CNN in float precision. Fold f initializes and shuffles
/// with seed train.seed + f.
FoldTrainer cnn_fold_trainer(const ModelRecipe& recipe);

nlohmann::ordered_json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

// ---- synthetic cohort ----------------------------------------------------

struct CohortParams {
  std::size_t n_subjects = 40;
  Dims dims{32, 32, 24};
  /// Peak texture amplitude above the background level.
  double class_gap = 30.0;
  /// Standard deviation of the additive Gaussian noise.
  double noise = 1.0;
  std::uint64_t seed = 0;
  /// 0: separable product of sines. 1: oriented gratings.
  int texture_family = 0;
};

struct Cohort {
  std::vector<Volume> volumes;
  std::vector<SubjectRecord> records;
};

/// Alternating HC / AD subjects. HC volumes carry a low-frequency texture and
/// AD volumes a high-frequency one, both modulated by a Gaussian envelope
/// along Z so that central slices carry the structure, plus seeded noise.
/// Voxels are float32-representable.
Cohort generate_synthetic_cohort(const CohortParams& params);

// ---- selection strategies ------------------------------------------------

enum class SelectionStrategy { Entropy, Random };

std::string_view to_string(SelectionStrategy s);
SelectionStrategy strategy_from_string(std::string_view s);

/// Slice indices for one volume: the entropy top-k, or k indices drawn
/// uniformly without replacement from a generator seeded by (seed, subject_id).
std::vector<std::size_t> select_slice_indices(const Volume& volume, const std::string& subject_id,
                                              const SelectionConfig& cfg, SelectionStrategy strategy,
                                              std::uint64_t seed);

/// Preprocessed examples for a cohort, subject by subject.
std::vector<Example> build_examples(const Cohort& cohort, const SelectionConfig& selection,
                                    SelectionStrategy strategy, std::uint64_t seed, std::size_t input_size,
                                    const NormalizationSpec& norm);

struct CvSettings {
  std::size_t k = 5;
  FoldLevel level = FoldLevel::Subject;
  std::uint64_t seed = 0;
};

struct ExperimentSpec {
  SelectionConfig selection;
  std::size_t input_size = 32;
  NormalizationSpec normalization;
  ModelRecipe recipe;
  CvSettings cv;
  std::size_t threads = 1;
};

/// select -> preprocess -> cross_validate for one strategy and selection seed.
EvalReport run_experiment(const Cohort& cohort, const ExperimentSpec& spec, SelectionStrategy strategy,
                          std::uint64_t selection_seed);

struct ComparisonRow {
  SelectionStrategy strategy = SelectionStrategy::Entropy;
  std::uint64_t seed = 0;
  EvalReport report;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;

  double strategy_mean(SelectionStrategy s) const;
};

/// Runs every (strategy, seed) pair. Seeds only drive random selection; the
/// fold plan and training seeds come from `spec` and stay fixed.
ComparisonTable compare_selection(const Cohort& cohort, std::span<const SelectionStrategy> strategies,
                                  std::span<const std::uint64_t> seeds, const ExperimentSpec& spec);

// ---- reporting -----------------------------------------------------------

/// Aligned table in the layout "Model | Avg. Acc. (st. dev.) (%) | Training Size".
struct TableRow {
  std::string model;
  double mean_percent = 0.0;
  double stddev_percent = 0.0;
  bool has_stddev = true;
  std::size_t training_size = 0;
  std::string source;
  /// Fixed decimals for the numbers; negative prints the shortest exact form.
  int decimals = 2;
};

std::string format_table(const std::string& title, std::span<const TableRow> rows);

nlohmann::ordered_json comparison_to_json(const ComparisonTable& table);
std::string comparison_to_text(const ComparisonTable& table);

}  // namespace slicenet
