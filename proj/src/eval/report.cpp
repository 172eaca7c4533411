#include <algorithm>
#include <cstdio>
#include <sstream>

#include "slicenet/eval.hpp"

namespace slicenet {

nlohmann::ordered_json report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["fold_accuracy"] = report.fold_accuracy;
  j["mean"] = report.mean;
  j["stddev"] = report.stddev;
  j["training_size"] = report.training_size;
  j["config"] = report.config;
  return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
  auto bad = [](const std::string& why) { return Error(ErrorCode::MalformedReport, why); };
  if (!j.is_object()) throw bad("report is not a JSON object");
  for (const char* key : {"fold_accuracy", "mean", "stddev", "training_size"})
    if (!j.contains(key)) throw bad(std::string("report lacks '") + key + "'");
  if (!j["fold_accuracy"].is_array() || j["fold_accuracy"].empty()) throw bad("fold_accuracy must be a non-empty array");
  EvalReport r;
  for (const auto& v : j["fold_accuracy"]) {
    if (!v.is_number()) throw bad("fold accuracy is not a number");
    const double a = v.get<double>();
    if (a < 0.0 || a > 1.0) throw bad("fold accuracy outside [0, 1]");
    r.fold_accuracy.push_back(a);
  }
  if (!j["mean"].is_number() || !j["stddev"].is_number() || !j["training_size"].is_number_unsigned())
    throw bad("mean, stddev and training_size must be numbers");
  r.mean = j["mean"].get<double>();
  r.stddev = j["stddev"].get<double>();
  r.training_size = j["training_size"].get<std::size_t>();
  if (j.contains("config")) {
    if (!j["config"].is_object()) throw bad("config must be an object");
    r.config = nlohmann::ordered_json::parse(j["config"].dump());
  }
  return r;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  if (digits < 0)
    std::snprintf(buf, sizeof buf, "%.15g", v);
  else
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string with_thousands(std::size_t n) {
  std::string s = std::to_string(n);
  for (int i = static_cast<int>(s.size()) - 3; i > 0; i -= 3) s.insert(static_cast<std::size_t>(i), ",");
  return s;
}

}  // namespace

std::string format_table(const std::string& title, std::span<const TableRow> rows) {
  const std::vector<std::string> header = {"Model", "Avg. Acc. (st. dev.) (%)", "Training Size", "Source"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    std::string acc = fixed(r.mean_percent, r.decimals);
    if (r.has_stddev) acc += " (" + fixed(r.stddev_percent, r.decimals) + ")";
    cells.push_back({r.model, acc, r.training_size ? with_thousands(r.training_size) : "-", r.source});
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& row) {
    out << "|";
    for (std::size_t c = 0; c < row.size(); ++c) out << " " << row[c] << std::string(width[c] - row[c].size(), ' ') << " |";
    out << "\n";
  };
  out << title << "\n";
  line(header);
  out << "|";
  for (auto w : width) out << std::string(w + 2, '-') << "|";
  out << "\n";
  for (const auto& row : cells) line(row);
  return out.str();
}

nlohmann::ordered_json comparison_to_json(const ComparisonTable& table) {
  nlohmann::ordered_json j;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : table.rows) {
    nlohmann::ordered_json row;
    row["strategy"] = to_string(r.strategy);
    row["seed"] = r.seed;
    row["report"] = report_to_json(r.report);
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  for (auto s : {SelectionStrategy::Entropy, SelectionStrategy::Random}) {
    try {
      summary[std::string("mean_") + std::string(to_string(s))] = table.strategy_mean(s);
    } catch (const Error&) {
    }
  }
  if (summary.contains("mean_Entropy") && summary.contains("mean_Random"))
    summary["mean_gap"] = summary["mean_Entropy"].get<double>() - summary["mean_Random"].get<double>();
  j["summary"] = std::move(summary);
  return j;
}

std::string comparison_to_text(const ComparisonTable& table) {
  std::vector<TableRow> rows;
  for (const auto& r : table.rows) {
    TableRow t;
    t.model = std::string(to_string(r.strategy)) + " selection, seed " + std::to_string(r.seed);
    t.mean_percent = 100.0 * r.report.mean;
    t.stddev_percent = 100.0 * r.report.stddev;
    t.training_size = r.report.training_size;
    t.source = "computed";
    rows.push_back(std::move(t));
  }
  std::string out = format_table("SELECTION STRATEGY COMPARISON (k-fold mean accuracy, sample st. dev. in brackets)", rows);
  const auto j = comparison_to_json(table);
  if (j["summary"].contains("mean_gap")) {
    out += "mean(Entropy) = " + fixed(100.0 * j["summary"]["mean_Entropy"].get<double>(), 2) +
           "%, mean(Random) = " + fixed(100.0 * j["summary"]["mean_Random"].get<double>(), 2) +
           "%, mean gap (Entropy - Random) = " + fixed(100.0 * j["summary"]["mean_gap"].get<double>(), 2) +
           " points\n";
  }
  return out;
}

}  // namespace slicenet
