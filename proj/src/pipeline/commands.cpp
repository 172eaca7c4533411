#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>

#include "slicenet/bytes.hpp"
#include "slicenet/pipeline.hpp"

namespace fs = std::filesystem;

namespace slicenet {

namespace {

// Error text without the "Code: " prefix the original already carries.
std::string bare_message(const Error& e) {
  std::string s = e.what();
  const std::string prefix = std::string(to_string(e.code())) + ": ";
  return s.rfind(prefix, 0) == 0 ? s.substr(prefix.size()) : s;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create directory '" + dir + "': " + ec.message());
}

// Timestamp first, then the payload.
std::string stamped_dump(const nlohmann::ordered_json& payload) {
  nlohmann::ordered_json doc;
  doc[kTimestampKey] = utc_timestamp();
  for (auto it = payload.begin(); it != payload.end(); ++it) doc[it.key()] = it.value();
  return doc.dump(2) + "\n";
}

std::optional<WeightContainer> load_weights_if_needed(const RunConfig& cfg) {
  if (cfg.regime != TransferMode::HeadOnly) return std::nullopt;
  try {
    return load_weights(read_file(cfg.weights_path));
  } catch (const Error& e) {
    throw Error(e.code(), "weights '" + cfg.weights_path + "': " + bare_message(e));
  }
}

ExperimentSpec experiment_spec(const RunConfig& cfg, const WeightContainer* weights) {
  ExperimentSpec spec;
  spec.selection = cfg.selection;
  spec.input_size = cfg.input_size;
  spec.normalization = cfg.normalization;
  spec.recipe.architecture = cfg.architecture;
  spec.recipe.regime = cfg.regime;
  spec.recipe.weights = weights;
  spec.recipe.train = cfg.train;
  spec.recipe.trainable_tail = cfg.trainable_tail;
  spec.cv = cfg.cv;
  spec.threads = cfg.threads;
  return spec;
}

std::string model_label(Architecture arch, TransferMode regime) {
  return std::string(to_string(arch)) + " (" + std::string(to_string(regime)) + ")";
}

}  // namespace

std::string selections_dir(const RunConfig& cfg) { return (fs::path(cfg.output_dir) / "selections").string(); }
std::string weights_dir(const RunConfig& cfg) { return (fs::path(cfg.output_dir) / "weights").string(); }
std::string reports_dir(const RunConfig& cfg) { return (fs::path(cfg.output_dir) / "reports").string(); }

Cohort load_cohort(const std::string& manifest_path) {
  Cohort cohort;
  try {
    cohort.records = parse_manifest(read_text_file(manifest_path));
  } catch (const Error& e) {
    throw Error(e.code(), "manifest '" + manifest_path + "': " + bare_message(e));
  }
  if (cohort.records.empty()) throw Error(ErrorCode::EmptyDataset, "manifest '" + manifest_path + "' lists no subjects");
  const fs::path base = fs::path(manifest_path).parent_path();
  for (const auto& rec : cohort.records) {
    fs::path p(rec.volume_path);
    if (p.is_relative()) p = base / p;
    try {
      Volume v = load_volume(p.string());
      cohort.volumes.emplace_back(v.dims(), std::vector<double>(v.voxels().begin(), v.voxels().end()), rec.subject_id);
    } catch (const Error& e) {
      throw Error(e.code(), "subject '" + rec.subject_id + "' (" + p.string() + "): " + bare_message(e));
    }
  }
  return cohort;
}

std::string write_cohort(const Cohort& cohort, const std::string& dir) {
  make_dir(dir);
  for (std::size_t i = 0; i < cohort.volumes.size(); ++i)
    write_file((fs::path(dir) / cohort.records[i].volume_path).string(), write_raw_volume(cohort.volumes[i]));
  const std::string manifest = (fs::path(dir) / "manifest.jsonl").string();
  write_text_file(manifest, write_manifest(cohort.records));
  return manifest;
}

SelectResult cmd_select(const RunConfig& cfg, std::ostream& log) {
  validate_run_config(cfg, true, false);
  const Cohort cohort = load_cohort(cfg.manifest_path);

  struct Pending {
    std::string path;
    std::string text;
  };
  std::vector<Pending> out;
  SelectResult result;
  for (std::size_t i = 0; i < cohort.records.size(); ++i) {
    const auto& rec = cohort.records[i];
    const auto& vol = cohort.volumes[i];
    std::vector<EntropyScore> ranked;
    try {
      ranked = rank_slices(vol, cfg.selection);
    } catch (const Error& e) {
      throw Error(e.code(), "subject '" + rec.subject_id + "': " + bare_message(e));
    }
    const Dims d = vol.dims();
    const std::size_t n = cfg.selection.axis == Axis::X ? d.nx : cfg.selection.axis == Axis::Y ? d.ny : d.nz;
    if (cfg.selection.k > n) {
      log << "warning: subject " << rec.subject_id << " has " << n << " slices along "
          << to_string(cfg.selection.axis) << ", fewer than k = " << cfg.selection.k << "; keeping all\n";
      ++result.warnings;
    }
    log << rec.subject_id << " top=" << fmt("%.6f", ranked.front().entropy_bits)
        << " cutoff=" << fmt("%.6f", ranked.back().entropy_bits) << " selected=" << ranked.size() << "\n";
    out.push_back({(fs::path(selections_dir(cfg)) / (rec.subject_id + ".json")).string(),
                   selection_to_json(rec.subject_id, cfg.selection, ranked).dump(2) + "\n"});
  }

  make_dir(selections_dir(cfg));
  for (const auto& p : out) {
    write_text_file(p.path, p.text);
    result.files.push_back(p.path);
  }
  return result;
}

std::string cmd_pretrain(const RunConfig& cfg, std::ostream& log) {
  validate_run_config(cfg, false, false);
  const auto& pre = cfg.pretrain;
  const Cohort cohort = generate_synthetic_cohort(pre.cohort);
  SelectionConfig sel = cfg.selection;
  sel.k = pre.selection_k;
  const auto examples = build_examples(cohort, sel, SelectionStrategy::Entropy, 0, cfg.input_size, cfg.normalization);

  std::vector<Sample<float>> samples;
  samples.reserve(examples.size());
  for (const auto& e : examples)
    samples.push_back({Tensor<float>({e.image.channels, e.image.height, e.image.width},
                                     std::vector<float>(e.image.data.begin(), e.image.data.end())),
                       e.label});
  const ModelSpec spec = make_architecture(cfg.architecture, 3, cfg.input_size, 2);
  Model<float> model = init_random<float>(spec, pre.train.seed);
  const History history = train<float>(model, samples, pre.train, all_trainable(spec));

  const std::string path = (fs::path(weights_dir(cfg)) / (std::string(to_string(cfg.architecture)) + ".nswt")).string();
  const auto bytes = save_weights(model, std::string(to_string(cfg.normalization.mode)));
  make_dir(weights_dir(cfg));
  write_file(path, bytes);
  log << "pretrained " << spec.architecture_id << " on " << samples.size() << " slices from "
      << cohort.records.size() << " auxiliary subjects";
  if (!history.empty())
    log << ", final loss " << fmt("%.4f", history.back().loss) << ", training accuracy "
        << fmt("%.2f", 100.0 * history.back().accuracy) << "%";
  log << "\nwrote " << path << "\n";
  return path;
}

TrainEvalResult cmd_train_eval(const RunConfig& cfg, std::ostream& log) {
  validate_run_config(cfg, true, true);
  const auto weights = load_weights_if_needed(cfg);
  const Cohort cohort = load_cohort(cfg.manifest_path);

  TrainEvalResult result;
  result.report = run_experiment(cohort, experiment_spec(cfg, weights ? &*weights : nullptr), SelectionStrategy::Entropy, 0);
  const EvalReport& r = result.report;

  TableRow row{model_label(cfg.architecture, cfg.regime), 100.0 * r.mean, 100.0 * r.stddev, true, r.training_size,
               "computed"};
  std::string text = format_table(
      "TESTED MODEL AND AVERAGE ACCURACY FROM " + std::to_string(cfg.cv.k) +
          "-FOLD CROSS-VALIDATION. STANDARD DEVIATION OVER THE FOLDS IN BRACKETS",
      std::span<const TableRow>(&row, 1));
  for (std::size_t f = 0; f < r.fold_accuracy.size(); ++f)
    text += "fold " + std::to_string(f) + ": " + fmt("%.2f", 100.0 * r.fold_accuracy[f]) + "%\n";

  const std::string stem = "train_eval_" + std::string(to_string(cfg.architecture)) + "_" + std::string(to_string(cfg.regime));
  result.json_path = (fs::path(reports_dir(cfg)) / (stem + ".json")).string();
  result.text_path = (fs::path(reports_dir(cfg)) / (stem + ".txt")).string();
  make_dir(reports_dir(cfg));
  write_text_file(result.json_path, stamped_dump(report_to_json(r)));
  write_text_file(result.text_path, text);
  log << row.model << ": mean accuracy " << fmt("%.2f", 100.0 * r.mean) << "% (" << fmt("%.2f", 100.0 * r.stddev)
      << "), training size " << r.training_size << "\nwrote " << result.json_path << "\n";
  return result;
}

CompareResult cmd_compare(const RunConfig& cfg, std::ostream& log) {
  validate_run_config(cfg, true, true);
  const auto weights = load_weights_if_needed(cfg);
  const Cohort cohort = load_cohort(cfg.manifest_path);

  CompareResult result;
  result.table = compare_selection(cohort, cfg.compare.strategies, cfg.compare.seeds,
                                   experiment_spec(cfg, weights ? &*weights : nullptr));
  const auto j = comparison_to_json(result.table);
  const std::string text = comparison_to_text(result.table);
  result.json_path = (fs::path(reports_dir(cfg)) / "compare.json").string();
  result.text_path = (fs::path(reports_dir(cfg)) / "compare.txt").string();
  make_dir(reports_dir(cfg));
  write_text_file(result.json_path, stamped_dump(j));
  write_text_file(result.text_path, text);
  log << text << "wrote " << result.json_path << "\n";
  return result;
}

std::vector<TableRow> published_reference_rows() {
  const std::string src = "published reference";
  return {
      {"VGG16 (from scratch)", 74.12, 1.55, true, 0, src, -1},
      {"VGG16 (transfer learning)", 92.3, 2.42, true, 0, src, -1},
      {"Inception V4 (transfer learning)", 96.25, 1.2, true, 0, src, -1},
      {"Wavelet + NN", 90.06, 0.0, false, 3629, src, -1},
      {"DeepAD (Inception)", 98.84, 0.0, false, 46751, src, -1},
      {"3DConv", 95.39, 0.0, false, 117708, src, -1},
      {"Sparse autoencoder + conv", 94.74, 0.0, false, 103683, src, -1},
      {"Stacked autoencoders", 87.76, 0.0, false, 21726, src, -1},
      {"Inception V4 (transfer learning)", 96.25, 0.0, false, 5120, src, -1},
  };
}

ReportResult cmd_report(const std::vector<std::string>& report_paths, const std::string& output_dir,
                        std::ostream& log) {
  if (report_paths.empty()) throw Error(ErrorCode::MalformedReport, "no report files to merge");
  if (output_dir.empty()) throw Error(ErrorCode::BadConfig, "output_dir: required");

  ReportResult result;
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (const auto& path : report_paths) {
    EvalReport r;
    try {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(read_text_file(path));
      } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::MalformedReport, e.what());
      }
      r = report_from_json(j);
    } catch (const Error& e) {
      throw Error(e.code(), "report '" + path + "': " + bare_message(e));
    }
    std::string model = fs::path(path).stem().string();
    const auto& c = r.config;
    if (c.contains("architecture") && c.contains("regime"))
      model = c["architecture"].get<std::string>() + " (" + c["regime"].get<std::string>() + ")";
    if (c.contains("strategy")) model += ", " + c["strategy"].get<std::string>() + " selection";
    result.rows.push_back({model, 100.0 * r.mean, 100.0 * r.stddev, true, r.training_size, "computed"});
    nlohmann::ordered_json run = report_to_json(r);
    run["file"] = path;
    runs.push_back(std::move(run));
  }
  const std::size_t n_computed = result.rows.size();
  for (auto& row : published_reference_rows()) result.rows.push_back(std::move(row));

  // Dataset size identities: 200 subjects with 32 slices each, 80% of it for training.
  constexpr std::size_t subjects = 200, slices = 32, images = 6400, train_images = 5120;
  result.images_identity = subjects * slices == images;
  result.training_size_identity = images * 4 / 5 == train_images && images * 4 % 5 == 0 &&
                                  static_cast<double>(images) * 0.8 == static_cast<double>(train_images);

  std::string text = format_table("ACCURACY AND TRAINING SIZE (computed runs, then published reference rows)", result.rows);
  text += "200 x 32 = 6,400: " + std::string(result.images_identity ? "OK" : "MISMATCH") + "\n";
  text += "6,400 x 0.8 = 5,120: " + std::string(result.training_size_identity ? "OK" : "MISMATCH") + "\n";

  nlohmann::ordered_json j;
  j["runs"] = std::move(runs);
  auto refs = nlohmann::ordered_json::array();
  for (std::size_t i = n_computed; i < result.rows.size(); ++i) {
    const auto& row = result.rows[i];
    nlohmann::ordered_json e;
    e["model"] = row.model;
    e["mean_percent"] = row.mean_percent;
    if (row.has_stddev) e["stddev_percent"] = row.stddev_percent;
    if (row.training_size) e["training_size"] = row.training_size;
    e["source"] = row.source;
    refs.push_back(std::move(e));
  }
  j["published_reference"] = std::move(refs);
  j["identities"] = {{"200x32=6400", result.images_identity}, {"6400x0.8=5120", result.training_size_identity}};

  const std::string dir = (fs::path(output_dir) / "reports").string();
  result.json_path = (fs::path(dir) / "summary.json").string();
  result.text_path = (fs::path(dir) / "summary.txt").string();
  make_dir(dir);
  write_text_file(result.json_path, stamped_dump(j));
  write_text_file(result.text_path, text);
  log << text << "wrote " << result.json_path << "\n";
  return result;
}

}  // namespace slicenet
