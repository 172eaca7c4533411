#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "slicenet/eval.hpp"

using namespace slicenet;

namespace {

std::vector<std::string> names(std::size_t n, const std::string& prefix = "u") {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

Example example(const std::string& subject, std::size_t slice, std::size_t label) {
  Example e;
  e.subject_id = subject;
  e.slice_index = slice;
  e.label = label;
  return e;
}

// Dataset of `subjects` subjects with `slices` slices each; label alternates by subject.
std::vector<Example> grid(std::size_t subjects, std::size_t slices) {
  std::vector<Example> out;
  for (std::size_t s = 0; s < subjects; ++s)
    for (std::size_t k = 0; k < slices; ++k) out.push_back(example("s" + std::to_string(s), k, s % 2));
  return out;
}

FoldTrainer truth_oracle() {
  return [](std::span<const Example>, std::size_t) -> Classifier { return [](const Example& e) { return e.label; }; };
}

}  // namespace

TEST(KFold, ExactAndUnevenSizes) {
  auto ten = kfold_split(names(10), 5, 1);
  EXPECT_EQ(ten.fold_sizes(), (std::vector<std::size_t>(5, 2)));
  auto eleven = kfold_split(names(11), 5, 1).fold_sizes();
  std::sort(eleven.begin(), eleven.end());
  EXPECT_EQ(eleven, (std::vector<std::size_t>{2, 2, 2, 2, 3}));
  const auto two_hundred = kfold_split(names(200), 5, 9);
  for (std::size_t f = 0; f < 5; ++f) EXPECT_EQ(200 - two_hundred.fold_sizes()[f], 160u);
}

TEST(KFold, PartitionProperties) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 200)(rng);
    const std::size_t k = std::uniform_int_distribution<std::size_t>(2, n)(rng);
    const auto units = names(n);
    const auto plan = kfold_split(units, k, rng());
    EXPECT_EQ(plan.assignment.size(), n);
    const auto sizes = plan.fold_sizes();
    EXPECT_EQ(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}), n);
    EXPECT_LE(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()), 1u);
    for (const auto& u : units) EXPECT_LT(plan.fold_of(u), k);
  }
}

TEST(KFold, SeedsAndErrors) {
  const auto units = names(30);
  EXPECT_EQ(kfold_split(units, 5, 4).assignment, kfold_split(units, 5, 4).assignment);
  EXPECT_NE(kfold_split(units, 5, 4).assignment, kfold_split(units, 5, 5).assignment);
  EXPECT_THROW(kfold_split(units, 1, 0), Error);
  try {
    kfold_split(names(3), 5, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewUnits);
  }
  EXPECT_THROW(kfold_split(std::vector<std::string>{"a", "a", "b"}, 2, 0), Error);
  EXPECT_THROW(kfold_split(units, 5, 0).fold_of("zz"), Error);
}

TEST(Accuracy, Cases) {
  const std::vector<std::size_t> t{0, 1, 1, 0};
  EXPECT_EQ(accuracy(t, t), 1.0);
  EXPECT_EQ(accuracy(std::vector<std::size_t>{1, 0, 0, 1}, t), 0.0);
  EXPECT_EQ(accuracy(std::vector<std::size_t>{0, 1, 1, 1}, t), 0.75);
  EXPECT_THROW(accuracy(std::vector<std::size_t>{0}, t), Error);
  EXPECT_THROW(accuracy(std::vector<std::size_t>{}, std::vector<std::size_t>{}), Error);
}

TEST(Stddev, SampleDenominator) {
  EXPECT_EQ(sample_stddev(std::vector<double>{}), 0.0);
  EXPECT_EQ(sample_stddev(std::vector<double>{3.0}), 0.0);
  EXPECT_NEAR(sample_stddev(std::vector<double>{1, 2, 3, 4}), std::sqrt(5.0 / 3.0), 1e-15);
}

TEST(CrossValidate, PerfectClassifier) {
  const auto data = grid(10, 3);
  const auto plan = kfold_split(unit_ids(data, FoldLevel::Subject), 5, 0);
  const auto r = cross_validate(data, plan, truth_oracle());
  EXPECT_EQ(r.mean, 1.0);
  EXPECT_EQ(r.stddev, 0.0);
  EXPECT_EQ(r.fold_accuracy.size(), 5u);
  EXPECT_EQ(r.training_size, 24u);
}

TEST(CrossValidate, TrainingSizeForTwoHundredByThirtyTwo) {
  const auto data = grid(200, 32);
  for (auto level : {FoldLevel::Slice, FoldLevel::Subject}) {
    const auto plan = kfold_split(unit_ids(data, level), 5, 3, level);
    EXPECT_EQ(cross_validate(data, plan, truth_oracle()).training_size, 5120u);
  }
}

TEST(CrossValidate, HandWorkedStub) {
  // Four single-slice units, two folds. Fold 0's classifier is perfect,
  // fold 1's always answers class 0.
  std::vector<Example> data{example("a", 0, 0), example("b", 0, 1), example("c", 0, 0), example("d", 0, 1)};
  const FoldTrainer stub = [](std::span<const Example>, std::size_t fold) -> Classifier {
    if (fold == 0) return [](const Example& e) { return e.label; };
    return [](const Example&) { return std::size_t{0}; };
  };
  FoldPlan plan;
  plan.k = 2;
  plan.assignment = {{"a", 0}, {"b", 0}, {"c", 1}, {"d", 1}};
  const auto r = cross_validate(data, plan, stub);
  // Fold 0 tests {a, b} -> 1.0; fold 1 tests {c: 0, d: 1} -> 0.5.
  EXPECT_EQ(r.fold_accuracy, (std::vector<double>{1.0, 0.5}));
  EXPECT_EQ(r.mean, 0.75);
  EXPECT_NEAR(r.stddev, std::sqrt(0.125), 1e-15);
  EXPECT_EQ(r.training_size, 2u);

  // Fold 0 would train on {b, d}, which holds class 1 only.
  plan.assignment = {{"a", 0}, {"c", 0}, {"b", 1}, {"d", 1}};
  EXPECT_THROW(cross_validate(data, plan, stub), Error);
}

TEST(CrossValidate, ConstantStubScoresMajorityShare) {
  std::mt19937_64 rng(5);
  std::vector<Example> data;
  for (std::size_t s = 0; s < 23; ++s) data.push_back(example("s" + std::to_string(s), 0, rng() % 2));
  data[0].label = 0;
  data[1].label = 1;
  data[2].label = 0;
  data[3].label = 1;
  const auto plan = kfold_split(unit_ids(data, FoldLevel::Subject), 4, 7);
  try {
    const auto r = cross_validate(data, plan, [](auto, auto) -> Classifier { return [](const Example&) { return 1; }; });
    double want = 0.0;
    for (std::size_t f = 0; f < 4; ++f) {
      double hits = 0, n = 0;
      for (const auto& e : data)
        if (plan.fold_of(e.subject_id) == f) {
          n += 1;
          hits += e.label == 1;
        }
      EXPECT_EQ(r.fold_accuracy[f], hits / n);
      want += hits / n;
    }
    EXPECT_NEAR(r.mean, want / 4, 1e-15);
    EXPECT_NEAR(r.stddev, sample_stddev(r.fold_accuracy), 1e-12);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateFold);
  }
}

TEST(CrossValidate, SubjectLevelNeverLeaks) {
  const auto data = grid(17, 4);
  const auto plan = kfold_split(unit_ids(data, FoldLevel::Subject), 5, 1);
  const auto r = cross_validate(data, plan, [](std::span<const Example> train, std::size_t) -> Classifier {
    auto seen = std::make_shared<std::set<std::string>>();
    for (const auto& e : train) seen->insert(e.subject_id);
    return [seen](const Example& e) {
      EXPECT_EQ(seen->count(e.subject_id), 0u) << e.subject_id << " on both sides";
      return e.label;
    };
  });
  EXPECT_EQ(r.mean, 1.0);
}

TEST(CrossValidate, ThreadedRunsMatchSerialRuns) {
  const auto data = grid(12, 2);
  const auto plan = kfold_split(unit_ids(data, FoldLevel::Subject), 4, 2);
  const FoldTrainer t = [](std::span<const Example> train, std::size_t fold) -> Classifier {
    const std::size_t n = train.size() + fold;
    return [n](const Example& e) { return (e.slice_index + n) % 2; };
  };
  const auto a = cross_validate(data, plan, t, 1), b = cross_validate(data, plan, t, 3);
  EXPECT_EQ(a.fold_accuracy, b.fold_accuracy);
  EXPECT_EQ(report_to_json(a).dump(), report_to_json(b).dump());
}

TEST(CrossValidate, Errors) {
  const auto plan = kfold_split(names(4), 2, 0);
  EXPECT_THROW(cross_validate(std::vector<Example>{}, plan, truth_oracle()), Error);
  std::vector<Example> one_class{example("u0", 0, 0), example("u1", 0, 0), example("u2", 0, 0), example("u3", 0, 0)};
  try {
    cross_validate(one_class, plan, truth_oracle());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateFold);
  }
}

TEST(Report, JsonRoundtrip) {
  EvalReport r;
  r.fold_accuracy = {0.5, 0.75, 1.0};
  r.mean = 0.75;
  r.stddev = 0.25;
  r.training_size = 40;
  r.config["regime"] = "Scratch";
  const auto back = report_from_json(nlohmann::json::parse(report_to_json(r).dump()));
  EXPECT_EQ(back.fold_accuracy, r.fold_accuracy);
  EXPECT_EQ(back.mean, r.mean);
  EXPECT_EQ(back.training_size, 40u);
  EXPECT_EQ(back.config["regime"], "Scratch");

  for (const char* bad : {"[]", "{}", "{\"fold_accuracy\":[],\"mean\":0,\"stddev\":0,\"training_size\":0}",
                          "{\"fold_accuracy\":[2],\"mean\":0,\"stddev\":0,\"training_size\":0}",
                          "{\"fold_accuracy\":[0.5],\"mean\":\"x\",\"stddev\":0,\"training_size\":0}"}) {
    try {
      report_from_json(nlohmann::json::parse(bad));
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::MalformedReport) << bad;
    }
  }
}

TEST(Report, TableLayout) {
  const std::vector<TableRow> rows{{"A", 74.12, 1.55, true, 5120, "x", 2}, {"B", 96.25, 0, false, 0, "y", -1}};
  const auto t = format_table("T", rows);
  EXPECT_NE(t.find("74.12 (1.55)"), std::string::npos);
  EXPECT_NE(t.find("5,120"), std::string::npos);
  EXPECT_NE(t.find("| B "), std::string::npos);
  EXPECT_NE(t.find("Training Size"), std::string::npos);
}

// ---- synthetic cohort and selection --------------------------------------

TEST(Synthetic, BalanceAndDeterminism) {
  CohortParams p;
  p.n_subjects = 2;
  p.dims = {8, 8, 6};
  const auto c = generate_synthetic_cohort(p);
  ASSERT_EQ(c.records.size(), 2u);
  EXPECT_EQ(c.records[0].label, Label::HC);
  EXPECT_EQ(c.records[1].label, Label::AD);
  EXPECT_EQ(c.records[0].cdr, 0.0);
  EXPECT_GT(c.records[1].cdr, 0.0);
  const auto again = generate_synthetic_cohort(p);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_TRUE(c.volumes[i] == again.volumes[i]);
  p.seed = 1;
  EXPECT_FALSE(generate_synthetic_cohort(p).volumes[0] == c.volumes[0]);
  for (const auto& v : c.volumes)
    for (double x : v.voxels()) EXPECT_EQ(x, static_cast<double>(static_cast<float>(x)));
}

TEST(Synthetic, CentralSlicesCarryMoreEntropy) {
  CohortParams p;
  p.n_subjects = 10;
  p.class_gap = 60.0;
  p.noise = 0.5;
  const auto c = generate_synthetic_cohort(p);
  SelectionConfig cfg;
  cfg.k = p.dims.nz;
  double central = 0.0, border = 0.0;
  for (const auto& v : c.volumes)
    for (const auto& s : rank_slices(v, cfg)) {
      const std::size_t z = s.slice_index;
      if (z >= 10 && z <= 13) central += s.entropy_bits;
      if (z <= 1 || z >= 22) border += s.entropy_bits;
    }
  EXPECT_GT(central, border);
}

TEST(Synthetic, RejectsBadParameters) {
  CohortParams p;
  p.n_subjects = 3;
  EXPECT_THROW(generate_synthetic_cohort(p), Error);
  p = CohortParams{};
  p.class_gap = 0.0;
  EXPECT_THROW(generate_synthetic_cohort(p), Error);
  p = CohortParams{};
  p.texture_family = 2;
  EXPECT_THROW(generate_synthetic_cohort(p), Error);
}

TEST(Selection, EntropyIsSeedFreeRandomIsNot) {
  CohortParams p;
  p.n_subjects = 2;
  const auto c = generate_synthetic_cohort(p);
  SelectionConfig cfg;
  cfg.k = 8;
  const auto& v = c.volumes[0];
  const auto& id = c.records[0].subject_id;
  EXPECT_EQ(select_slice_indices(v, id, cfg, SelectionStrategy::Entropy, 1),
            select_slice_indices(v, id, cfg, SelectionStrategy::Entropy, 2));
  const auto r1 = select_slice_indices(v, id, cfg, SelectionStrategy::Random, 1);
  EXPECT_EQ(r1, select_slice_indices(v, id, cfg, SelectionStrategy::Random, 1));
  EXPECT_NE(r1, select_slice_indices(v, id, cfg, SelectionStrategy::Random, 2));
  EXPECT_EQ(std::set<std::size_t>(r1.begin(), r1.end()).size(), 8u);
  for (auto z : r1) EXPECT_LT(z, p.dims.nz);
}

TEST(Selection, ExamplesCarryProvenance) {
  CohortParams p;
  p.n_subjects = 4;
  const auto c = generate_synthetic_cohort(p);
  SelectionConfig cfg;
  cfg.k = 3;
  const auto ex = build_examples(c, cfg, SelectionStrategy::Entropy, 0, 16, {});
  ASSERT_EQ(ex.size(), 12u);
  EXPECT_EQ(ex[0].subject_id, c.records[0].subject_id);
  EXPECT_EQ(ex[5].label, 1u);
  EXPECT_EQ(ex[0].image.channels, 3u);
  EXPECT_EQ(ex[0].image.height, 16u);
  EXPECT_EQ(unit_id(ex[4], FoldLevel::Slice), ex[4].subject_id + "#" + std::to_string(ex[4].slice_index));
}

TEST(Compare, RowsAndSummary) {
  CohortParams p;
  p.n_subjects = 10;
  p.dims = {16, 16, 12};
  const auto c = generate_synthetic_cohort(p);
  ExperimentSpec spec;
  spec.selection.k = 2;
  spec.input_size = 8;
  spec.recipe.train.epochs = 1;
  spec.recipe.train.batch_size = 4;
  const std::vector<SelectionStrategy> strategies{SelectionStrategy::Entropy, SelectionStrategy::Random};
  const std::vector<std::uint64_t> seeds{1, 2};
  const auto table = compare_selection(c, strategies, seeds, spec);
  ASSERT_EQ(table.rows.size(), 4u);
  EXPECT_EQ(table.rows[0].report.fold_accuracy, table.rows[1].report.fold_accuracy);
  const auto j = comparison_to_json(table);
  EXPECT_NEAR(j["summary"]["mean_gap"].get<double>(),
              table.strategy_mean(SelectionStrategy::Entropy) - table.strategy_mean(SelectionStrategy::Random), 1e-15);
  EXPECT_NE(comparison_to_text(table).find("mean gap"), std::string::npos);
  EXPECT_THROW(compare_selection(c, strategies, std::vector<std::uint64_t>{1}, spec), Error);
}

TEST(Experiment, ConfigEchoAndDeterminism) {
  CohortParams p;
  p.n_subjects = 10;
  p.dims = {16, 16, 8};
  const auto c = generate_synthetic_cohort(p);
  ExperimentSpec spec;
  spec.selection.k = 2;
  spec.input_size = 8;
  spec.recipe.train.epochs = 2;
  spec.recipe.train.batch_size = 4;
  const auto a = run_experiment(c, spec, SelectionStrategy::Entropy, 0);
  const auto b = run_experiment(c, spec, SelectionStrategy::Entropy, 0);
  EXPECT_EQ(report_to_json(a).dump(), report_to_json(b).dump());
  EXPECT_EQ(a.config["regime"], "Scratch");
  EXPECT_EQ(a.config["architecture"], "MicroVGG");
  EXPECT_EQ(a.config["k"], 5);
  EXPECT_EQ(a.training_size, 16u);
}
