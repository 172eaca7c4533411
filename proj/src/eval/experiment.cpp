#include <algorithm>
#include <numeric>
#include <random>

#include "slicenet/eval.hpp"

namespace slicenet {

std::string_view to_string(SelectionStrategy s) { return s == SelectionStrategy::Entropy ? "Entropy" : "Random"; }

SelectionStrategy strategy_from_string(std::string_view s) {
  if (s == "Entropy") return SelectionStrategy::Entropy;
  if (s == "Random") return SelectionStrategy::Random;
  throw Error(ErrorCode::BadConfig, "unknown selection strategy '" + std::string(s) + "'");
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::size_t extent(const Dims& d, Axis axis) {
  switch (axis) {
    case Axis::X: return d.nx;
    case Axis::Y: return d.ny;
    case Axis::Z: return d.nz;
  }
  return 0;
}

}  // namespace

std::vector<std::size_t> select_slice_indices(const Volume& volume, const std::string& subject_id,
                                              const SelectionConfig& cfg, SelectionStrategy strategy,
                                              std::uint64_t seed) {
  if (strategy == SelectionStrategy::Entropy) {
    std::vector<std::size_t> out;
    for (const auto& s : rank_slices(volume, cfg)) out.push_back(s.slice_index);
    return out;
  }
  if (cfg.k < 1) throw Error(ErrorCode::BadParams, "k must be at least 1");
  const std::size_t n = extent(volume.dims(), cfg.axis);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed ^ fnv1a(subject_id));
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min(cfg.k, n));
  return idx;
}

std::vector<Example> build_examples(const Cohort& cohort, const SelectionConfig& selection,
                                    SelectionStrategy strategy, std::uint64_t seed, std::size_t input_size,
                                    const NormalizationSpec& norm) {
  if (cohort.volumes.size() != cohort.records.size())
    throw Error(ErrorCode::LengthMismatch, "cohort has " + std::to_string(cohort.volumes.size()) +
                                               " volumes for " + std::to_string(cohort.records.size()) + " records");
  std::vector<Example> out;
  for (std::size_t i = 0; i < cohort.volumes.size(); ++i) {
    const auto& vol = cohort.volumes[i];
    const auto& rec = cohort.records[i];
    const auto slices = extract_slices(vol, selection.axis);
    for (std::size_t idx : select_slice_indices(vol, rec.subject_id, selection, strategy, seed)) {
      Example e;
      e.image = to_model_input(slices[idx], input_size, norm);
      e.label = static_cast<std::size_t>(rec.label);
      e.subject_id = rec.subject_id;
      e.slice_index = idx;
      out.push_back(std::move(e));
    }
  }
  return out;
}

EvalReport run_experiment(const Cohort& cohort, const ExperimentSpec& spec, SelectionStrategy strategy,
                          std::uint64_t selection_seed) {
  const auto examples =
      build_examples(cohort, spec.selection, strategy, selection_seed, spec.input_size, spec.normalization);
  const auto units = unit_ids(examples, spec.cv.level);
  const FoldPlan plan = kfold_split(units, spec.cv.k, spec.cv.seed, spec.cv.level);
  EvalReport report = cross_validate(examples, plan, cnn_fold_trainer(spec.recipe), spec.threads);

  auto& c = report.config;
  c["regime"] = to_string(spec.recipe.regime);
  c["architecture"] = to_string(spec.recipe.architecture);
  c["strategy"] = to_string(strategy);
  c["selection_k"] = spec.selection.k;
  c["selection_seed"] = selection_seed;
  c["input_size"] = spec.input_size;
  c["seed"] = spec.recipe.train.seed;
  c["cv_seed"] = spec.cv.seed;
  c["epochs"] = spec.recipe.train.epochs;
  c["batch_size"] = spec.recipe.train.batch_size;
  c["optimizer"] = to_string(spec.recipe.train.optimizer);
  c["learning_rate"] = spec.recipe.train.learning_rate;
  c["stddev"] = "sample (n-1)";
  return report;
}

double ComparisonTable::strategy_mean(SelectionStrategy s) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : rows)
    if (r.strategy == s) {
      sum += r.report.mean;
      ++n;
    }
  if (n == 0) throw Error(ErrorCode::Empty, "no rows for strategy " + std::string(to_string(s)));
  return sum / static_cast<double>(n);
}

ComparisonTable compare_selection(const Cohort& cohort, std::span<const SelectionStrategy> strategies,
                                  std::span<const std::uint64_t> seeds, const ExperimentSpec& spec) {
  if (seeds.size() < 2) throw Error(ErrorCode::BadParams, "selection comparison needs at least 2 seeds");
  if (strategies.empty()) throw Error(ErrorCode::BadParams, "no selection strategies given");
  ComparisonTable table;
  for (auto strategy : strategies)
    for (auto seed : seeds) table.rows.push_back({strategy, seed, run_experiment(cohort, spec, strategy, seed)});
  return table;
}

}  // namespace slicenet
