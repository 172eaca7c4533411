#include <algorithm>
#include <cmath>
#include <future>
#include <memory>
#include <numeric>
#include <random>
#include <set>

#include "slicenet/eval.hpp"

namespace slicenet {

std::string_view to_string(FoldLevel level) { return level == FoldLevel::Subject ? "Subject" : "Slice"; }

FoldLevel fold_level_from_string(std::string_view s) {
  if (s == "Subject") return FoldLevel::Subject;
  if (s == "Slice") return FoldLevel::Slice;
  throw Error(ErrorCode::BadConfig, "unknown CV level '" + std::string(s) + "'");
}

std::size_t FoldPlan::fold_of(const std::string& unit) const {
  auto it = assignment.find(unit);
  if (it == assignment.end()) throw Error(ErrorCode::BadParams, "unit '" + unit + "' is not in the fold plan");
  return it->second;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const {
  std::vector<std::size_t> sizes(k, 0);
  for (const auto& [_, f] : assignment) ++sizes[f];
  return sizes;
}

FoldPlan kfold_split(std::span<const std::string> units, std::size_t k, std::uint64_t seed, FoldLevel level) {
  if (k < 2) throw Error(ErrorCode::BadParams, "k-fold needs k >= 2");
  if (units.size() < k)
    throw Error(ErrorCode::TooFewUnits, std::to_string(units.size()) + " units cannot fill " + std::to_string(k) + " folds");
  std::vector<std::size_t> perm(units.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  FoldPlan plan;
  plan.k = k;
  plan.level = level;
  for (std::size_t i = 0; i < perm.size(); ++i)
    if (!plan.assignment.emplace(units[perm[i]], i % k).second)
      throw Error(ErrorCode::BadParams, "unit '" + units[perm[i]] + "' listed twice");
  return plan;
}

double accuracy(std::span<const std::size_t> predictions, std::span<const std::size_t> truth) {
  if (predictions.size() != truth.size())
    throw Error(ErrorCode::LengthMismatch, std::to_string(predictions.size()) + " predictions for " +
                                               std::to_string(truth.size()) + " labels");
  if (truth.empty()) throw Error(ErrorCode::Empty, "accuracy of an empty list");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predictions[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double sample_stddev(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

std::string unit_id(const Example& e, FoldLevel level) {
  return level == FoldLevel::Subject ? e.subject_id : e.subject_id + "#" + std::to_string(e.slice_index);
}

std::vector<std::string> unit_ids(std::span<const Example> examples, FoldLevel level) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& e : examples) {
    auto id = unit_id(e, level);
    if (seen.insert(id).second) out.push_back(std::move(id));
  }
  return out;
}

namespace {

double run_fold(std::span<const Example> dataset, const std::vector<std::size_t>& fold_of, std::size_t f,
                const FoldTrainer& trainer) {
  std::vector<Example> train_split;
  std::vector<const Example*> test_split;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (fold_of[i] == f)
      test_split.push_back(&dataset[i]);
    else
      train_split.push_back(dataset[i]);
  }
  std::set<std::size_t> classes;
  for (const auto& e : train_split) classes.insert(e.label);
  if (classes.size() < 2)
    throw Error(ErrorCode::DegenerateFold, "training split of fold " + std::to_string(f) + " holds " +
                                               std::to_string(classes.size()) + " class(es)");
  if (test_split.empty()) throw Error(ErrorCode::DegenerateFold, "fold " + std::to_string(f) + " is empty");

  const Classifier classify = trainer(train_split, f);
  std::vector<std::size_t> pred, truth;
  for (const Example* e : test_split) {
    pred.push_back(classify(*e));
    truth.push_back(e->label);
  }
  return accuracy(pred, truth);
}

}  // namespace

EvalReport cross_validate(std::span<const Example> dataset, const FoldPlan& plan, const FoldTrainer& trainer,
                          std::size_t threads) {
  if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "cross-validation dataset is empty");
  std::vector<std::size_t> fold_of(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) fold_of[i] = plan.fold_of(unit_id(dataset[i], plan.level));

  EvalReport report;
  report.fold_accuracy.resize(plan.k);
  threads = std::max<std::size_t>(1, threads);
  for (std::size_t base = 0; base < plan.k; base += threads) {
    const std::size_t end = std::min(plan.k, base + threads);
    if (end - base == 1) {
      report.fold_accuracy[base] = run_fold(dataset, fold_of, base, trainer);
      continue;
    }
    std::vector<std::future<double>> jobs;
    for (std::size_t f = base; f < end; ++f)
      jobs.push_back(std::async(std::launch::async, [&, f] { return run_fold(dataset, fold_of, f, trainer); }));
    for (std::size_t f = base; f < end; ++f) report.fold_accuracy[f] = jobs[f - base].get();
  }

  report.mean = std::accumulate(report.fold_accuracy.begin(), report.fold_accuracy.end(), 0.0) /
                static_cast<double>(plan.k);
  report.stddev = sample_stddev(report.fold_accuracy);
  const auto in_fold0 = static_cast<std::size_t>(std::count(fold_of.begin(), fold_of.end(), std::size_t{0}));
  report.training_size = dataset.size() - in_fold0;
  report.config["k"] = plan.k;
  report.config["level"] = to_string(plan.level);
  return report;
}

namespace {

Tensor<float> to_float_tensor(const ImageTensor& img) {
  return Tensor<float>({img.channels, img.height, img.width}, std::vector<float>(img.data.begin(), img.data.end()));
}

}  // namespace

FoldTrainer cnn_fold_trainer(const ModelRecipe& recipe) {
  return [recipe](std::span<const Example> train_split, std::size_t fold) -> Classifier {
    const Example& first = train_split.front();
    if (first.image.height != first.image.width)
      throw Error(ErrorCode::ShapeMismatch, "network inputs must be square");
    const ModelSpec spec =
        make_architecture(recipe.architecture, first.image.channels, first.image.height, recipe.n_classes);
    const std::uint64_t seed = recipe.train.seed + fold;
    auto transfer = apply_transfer<float>(spec, recipe.weights, recipe.regime, seed, recipe.trainable_tail);

    std::vector<Sample<float>> samples;
    samples.reserve(train_split.size());
    for (const auto& e : train_split) samples.push_back({to_float_tensor(e.image), e.label});
    TrainConfig cfg = recipe.train;
    cfg.seed = seed;
    train<float>(transfer.model, samples, cfg, transfer.mask);

    auto model = std::make_shared<const Model<float>>(std::move(transfer.model));
    return [model](const Example& e) { return predict(*model, to_float_tensor(e.image)).label; };
  };
}

}  // namespace slicenet
