#include <set>
#include <sstream>

#include <json.hpp>

#include "slicenet/error.hpp"
#include "slicenet/volume.hpp"

namespace slicenet {

std::string_view to_string(Label label) { return label == Label::HC ? "HC" : "AD"; }

Label label_from_cdr(double cdr) {
  if (!(cdr >= 0.0 && cdr <= 2.0))
    throw Error(ErrorCode::CdrOutOfRange, "CDR " + std::to_string(cdr) + " outside [0, 2]");
  return cdr == 0.0 ? Label::HC : Label::AD;
}

namespace {

[[noreturn]] void malformed(std::size_t line_no, const std::string& why) {
  throw Error(ErrorCode::MalformedLine, "line " + std::to_string(line_no) + ": " + why);
}

SubjectRecord parse_line(const std::string& line, std::size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    malformed(line_no, e.what());
  }
  if (!j.is_object()) malformed(line_no, "expected a JSON object");
  for (const auto& [key, _] : j.items())
    if (key != "subject_id" && key != "cdr" && key != "volume_path")
      malformed(line_no, "unknown field '" + key + "'");

  SubjectRecord rec;
  if (!j.contains("subject_id") || !j["subject_id"].is_string())
    malformed(line_no, "subject_id must be a string");
  if (!j.contains("cdr") || !j["cdr"].is_number()) malformed(line_no, "cdr must be a number");
  if (!j.contains("volume_path") || !j["volume_path"].is_string())
    malformed(line_no, "volume_path must be a string");
  rec.subject_id = j["subject_id"].get<std::string>();
  rec.cdr = j["cdr"].get<double>();
  rec.volume_path = j["volume_path"].get<std::string>();
  if (rec.subject_id.empty()) malformed(line_no, "subject_id is empty");
  try {
    rec.label = label_from_cdr(rec.cdr);
  } catch (const Error& e) {
    throw Error(ErrorCode::CdrOutOfRange, "line " + std::to_string(line_no) + ": " + e.what());
  }
  return rec;
}

}  // namespace

std::vector<SubjectRecord> parse_manifest(std::string_view text) {
  std::vector<SubjectRecord> out;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    SubjectRecord rec = parse_line(line, line_no);
    if (!seen.insert(rec.subject_id).second)
      throw Error(ErrorCode::DuplicateSubject,
                  "line " + std::to_string(line_no) + ": subject '" + rec.subject_id + "' repeated");
    out.push_back(std::move(rec));
  }
  return out;
}

std::string write_manifest(std::span<const SubjectRecord> records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["subject_id"] = r.subject_id;
    j["cdr"] = r.cdr;
    j["volume_path"] = r.volume_path;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace slicenet
