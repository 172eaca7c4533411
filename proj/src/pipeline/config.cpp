#include <cmath>
#include <set>

#include "slicenet/bytes.hpp"
#include "slicenet/pipeline.hpp"

namespace slicenet {

namespace {

using nlohmann::json;

Error bad_config(const std::string& where, const std::string& why) {
  return Error(ErrorCode::BadConfig, where + ": " + why);
}

// Reads keys out of one JSON object and rejects whatever is left over.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw bad_config(where_, "expected an object");
  }

  const json* take(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string path(const char* key) const { return where_.empty() ? key : where_ + "." + key; }

  void str(const char* key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) throw bad_config(path(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  template <typename U>
  void uint(const char* key, U& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_unsigned()) throw bad_config(path(key), "expected a non-negative integer");
      out = v->get<U>();
    }
  }

  void number(const char* key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) throw bad_config(path(key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) throw bad_config(path(key), "must be finite");
    }
  }

  void boolean(const char* key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) throw bad_config(path(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  template <typename E, typename Parse>
  void enumeration(const char* key, E& out, Parse parse) {
    std::string s;
    str(key, s);
    if (!j_.contains(key)) return;
    try {
      out = parse(s);
    } catch (const Error&) {
      throw bad_config(path(key), "unknown value '" + s + "'");
    }
  }

  void triple(const char* key, std::array<double, 3>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array() || v->size() != 3) throw bad_config(path(key), "expected an array of 3 numbers");
      for (std::size_t i = 0; i < 3; ++i) {
        if (!(*v)[i].is_number()) throw bad_config(path(key), "expected an array of 3 numbers");
        out[i] = (*v)[i].get<double>();
      }
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw bad_config(where_.empty() ? it.key() : where_ + "." + it.key(), "unknown key");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

void parse_train(const json& j, const std::string& where, TrainConfig& t) {
  Fields f(j, where);
  f.uint("epochs", t.epochs);
  f.uint("batch_size", t.batch_size);
  f.enumeration("optimizer", t.optimizer, optimizer_from_string);
  f.number("learning_rate", t.learning_rate);
  f.number("rmsprop_decay", t.rmsprop_decay);
  f.number("rmsprop_epsilon", t.rmsprop_epsilon);
  f.uint("seed", t.seed);
  f.boolean("shuffle", t.shuffle);
  f.finish();
}

nlohmann::ordered_json train_to_json(const TrainConfig& t) {
  nlohmann::ordered_json j;
  j["epochs"] = t.epochs;
  j["batch_size"] = t.batch_size;
  j["optimizer"] = to_string(t.optimizer);
  j["learning_rate"] = t.learning_rate;
  j["rmsprop_decay"] = t.rmsprop_decay;
  j["rmsprop_epsilon"] = t.rmsprop_epsilon;
  j["seed"] = t.seed;
  j["shuffle"] = t.shuffle;
  return j;
}

TrainConfig default_pretrain_train() {
  TrainConfig t;
  t.epochs = 30;
  t.batch_size = 8;
  t.seed = 7;
  return t;
}

}  // namespace

RunConfig parse_run_config(const nlohmann::json& j) {
  RunConfig cfg;
  cfg.pretrain.train = default_pretrain_train();
  Fields top(j, "");
  top.str("manifest_path", cfg.manifest_path);

  if (const json* v = top.take("selection")) {
    Fields f(*v, "selection");
    f.uint("k", cfg.selection.k);
    f.uint("bins", cfg.selection.bins);
    f.enumeration("axis", cfg.selection.axis, axis_from_string);
    f.enumeration("range_mode", cfg.selection.range_mode, range_mode_from_string);
    f.finish();
  }
  top.uint("input_size", cfg.input_size);
  if (const json* v = top.take("normalization")) {
    Fields f(*v, "normalization");
    f.enumeration("mode", cfg.normalization.mode, norm_mode_from_string);
    f.triple("mean", cfg.normalization.mean);
    f.triple("std", cfg.normalization.std);
    f.finish();
  }
  top.enumeration("architecture", cfg.architecture, architecture_from_string);
  top.enumeration("regime", cfg.regime, transfer_mode_from_string);
  top.str("weights_path", cfg.weights_path);
  top.uint("trainable_tail", cfg.trainable_tail);
  if (const json* v = top.take("train")) parse_train(*v, "train", cfg.train);
  if (const json* v = top.take("cv")) {
    Fields f(*v, "cv");
    f.uint("k", cfg.cv.k);
    f.enumeration("level", cfg.cv.level, fold_level_from_string);
    f.uint("seed", cfg.cv.seed);
    f.finish();
  }
  top.str("output_dir", cfg.output_dir);

  if (const json* v = top.take("pretrain")) {
    Fields f(*v, "pretrain");
    auto& c = cfg.pretrain.cohort;
    f.uint("n_subjects", c.n_subjects);
    if (const json* d = f.take("dims")) {
      if (!d->is_array() || d->size() != 3)
        throw bad_config("pretrain.dims", "expected an array of 3 positive integers");
      for (const auto& e : *d)
        if (!e.is_number_unsigned()) throw bad_config("pretrain.dims", "expected an array of 3 positive integers");
      c.dims = {(*d)[0].get<std::size_t>(), (*d)[1].get<std::size_t>(), (*d)[2].get<std::size_t>()};
    }
    f.number("class_gap", c.class_gap);
    f.number("noise", c.noise);
    f.uint("seed", c.seed);
    f.uint("texture_family", c.texture_family);
    f.uint("selection_k", cfg.pretrain.selection_k);
    if (const json* t = f.take("train")) parse_train(*t, "pretrain.train", cfg.pretrain.train);
    f.finish();
  }

  if (const json* v = top.take("compare")) {
    Fields f(*v, "compare");
    if (const json* s = f.take("strategies")) {
      if (!s->is_array()) throw bad_config("compare.strategies", "expected an array of strings");
      cfg.compare.strategies.clear();
      for (const auto& e : *s) {
        if (!e.is_string()) throw bad_config("compare.strategies", "expected an array of strings");
        try {
          cfg.compare.strategies.push_back(strategy_from_string(e.get<std::string>()));
        } catch (const Error&) {
          throw bad_config("compare.strategies", "unknown strategy '" + e.get<std::string>() + "'");
        }
      }
    }
    if (const json* s = f.take("seeds")) {
      if (!s->is_array()) throw bad_config("compare.seeds", "expected an array of integers");
      cfg.compare.seeds.clear();
      for (const auto& e : *s) {
        if (!e.is_number_unsigned()) throw bad_config("compare.seeds", "expected an array of integers");
        cfg.compare.seeds.push_back(e.get<std::uint64_t>());
      }
    }
    f.finish();
  }
  top.finish();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::BadConfig, path + ": " + e.what());
  }
  return parse_run_config(j);
}

nlohmann::ordered_json run_config_to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["manifest_path"] = cfg.manifest_path;
  j["selection"] = {{"k", cfg.selection.k},
                    {"bins", cfg.selection.bins},
                    {"axis", to_string(cfg.selection.axis)},
                    {"range_mode", to_string(cfg.selection.range_mode)}};
  j["input_size"] = cfg.input_size;
  j["normalization"] = {{"mode", to_string(cfg.normalization.mode)},
                        {"mean", cfg.normalization.mean},
                        {"std", cfg.normalization.std}};
  j["architecture"] = to_string(cfg.architecture);
  j["regime"] = to_string(cfg.regime);
  j["weights_path"] = cfg.weights_path;
  j["trainable_tail"] = cfg.trainable_tail;
  j["train"] = train_to_json(cfg.train);
  j["cv"] = {{"k", cfg.cv.k}, {"level", to_string(cfg.cv.level)}, {"seed", cfg.cv.seed}};
  j["output_dir"] = cfg.output_dir;
  const auto& c = cfg.pretrain.cohort;
  j["pretrain"] = {{"n_subjects", c.n_subjects},
                   {"dims", {c.dims.nx, c.dims.ny, c.dims.nz}},
                   {"class_gap", c.class_gap},
                   {"noise", c.noise},
                   {"seed", c.seed},
                   {"texture_family", c.texture_family},
                   {"selection_k", cfg.pretrain.selection_k},
                   {"train", train_to_json(cfg.pretrain.train)}};
  auto strategies = nlohmann::ordered_json::array();
  for (auto s : cfg.compare.strategies) strategies.push_back(to_string(s));
  j["compare"] = {{"strategies", strategies}, {"seeds", cfg.compare.seeds}};
  return j;
}

void apply_seed_override(RunConfig& cfg, std::uint64_t seed) {
  cfg.train.seed = seed;
  cfg.cv.seed = seed;
  cfg.pretrain.train.seed = seed;
}

void validate_run_config(const RunConfig& cfg, bool needs_manifest, bool needs_weights) {
  if (needs_manifest && cfg.manifest_path.empty()) throw bad_config("manifest_path", "required by this command");
  if (cfg.output_dir.empty()) throw bad_config("output_dir", "required (set it in the config or pass --output)");
  if (cfg.selection.k < 1) throw bad_config("selection.k", "must be at least 1");
  if (cfg.selection.bins < 2) throw bad_config("selection.bins", "must be at least 2");
  if (cfg.input_size < 8) throw bad_config("input_size", "must be at least 8");
  for (std::size_t c = 0; c < 3; ++c)
    if (!std::isfinite(cfg.normalization.mean[c]) || !std::isfinite(cfg.normalization.std[c]) ||
        cfg.normalization.std[c] == 0.0)
      throw bad_config("normalization", "mean must be finite and std finite and non-zero");
  if (cfg.trainable_tail < 1) throw bad_config("trainable_tail", "must be at least 1");
  if (needs_weights && cfg.regime == TransferMode::HeadOnly && cfg.weights_path.empty())
    throw bad_config("weights_path", "required for the HeadOnly regime");
  if (cfg.cv.k < 2) throw bad_config("cv.k", "must be at least 2");
  try {
    cfg.train.validate();
  } catch (const Error& e) {
    throw bad_config("train", e.what());
  }
  try {
    cfg.pretrain.train.validate();
  } catch (const Error& e) {
    throw bad_config("pretrain.train", e.what());
  }
  const auto& c = cfg.pretrain.cohort;
  if (c.n_subjects < 2 || c.n_subjects % 2 != 0) throw bad_config("pretrain.n_subjects", "must be a positive even number");
  if (c.dims.nx < 1 || c.dims.ny < 1 || c.dims.nz < 1) throw bad_config("pretrain.dims", "extents must be positive");
  if (!(c.class_gap > 0.0)) throw bad_config("pretrain.class_gap", "must be positive");
  if (!(c.noise >= 0.0)) throw bad_config("pretrain.noise", "must be non-negative");
  if (c.texture_family != 0 && c.texture_family != 1) throw bad_config("pretrain.texture_family", "must be 0 or 1");
  if (cfg.pretrain.selection_k < 1) throw bad_config("pretrain.selection_k", "must be at least 1");
  if (cfg.compare.strategies.empty()) throw bad_config("compare.strategies", "must not be empty");
  if (std::set(cfg.compare.strategies.begin(), cfg.compare.strategies.end()).size() != cfg.compare.strategies.size())
    throw bad_config("compare.strategies", "lists a strategy twice");
  if (cfg.compare.seeds.size() < 2) throw bad_config("compare.seeds", "needs at least 2 seeds");
}

}  // namespace slicenet
