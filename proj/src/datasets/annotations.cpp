#include "medfront/datasets/annotations.hpp"

#include <cctype>
#include <sstream>

#include "medfront/errors.hpp"

namespace medfront::datasets {

namespace {

std::string trim(const std::string& s) {
  std::size_t lo = 0;
  std::size_t hi = s.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
  while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
  return s.substr(lo, hi - lo);
}

double parse_number(const std::string& field, const std::string& name,
                    std::size_t line) {
  std::size_t consumed = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &consumed);
  } catch (const std::exception&) {
    consumed = 0;
  }
  if (consumed != field.size() || field.empty()) {
    throw DataError("parse_cycle_annotations: " + name + " line " +
                    std::to_string(line) + ": not a number: '" + field + "'");
  }
  return v;
}

bool parse_flag(const std::string& field, const std::string& name,
                std::size_t line) {
  if (field == "0") return false;
  if (field == "1") return true;
  throw DataError("parse_cycle_annotations: " + name + " line " +
                  std::to_string(line) + ": flag must be 0 or 1, got '" +
                  field + "'");
}

}  // namespace

std::vector<CycleAnnotation> parse_cycle_annotations(const std::string& text,
                                                     const std::string& name) {
  std::vector<CycleAnnotation> anns;
  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;

    std::istringstream fields(stripped);
    std::vector<std::string> parts;
    std::string part;
    while (fields >> part) parts.push_back(part);
    if (parts.size() != 4) {
      throw DataError("parse_cycle_annotations: " + name + " line " +
                      std::to_string(line_no) + ": expected 4 fields, got " +
                      std::to_string(parts.size()));
    }
    CycleAnnotation ann;
    ann.start_s = parse_number(parts[0], name, line_no);
    ann.end_s = parse_number(parts[1], name, line_no);
    ann.crackles = parse_flag(parts[2], name, line_no);
    ann.wheezes = parse_flag(parts[3], name, line_no);
    if (!(ann.start_s >= 0.0) || !(ann.start_s < ann.end_s)) {
      throw DataError("parse_cycle_annotations: " + name + " line " +
                      std::to_string(line_no) + ": need 0 <= start < end, got [" +
                      parts[0] + ", " + parts[1] + "]");
    }
    anns.push_back(ann);
  }
  return anns;
}

Label cycle_label(const CycleAnnotation& ann) {
  return ann.crackles || ann.wheezes ? Label::kAbnormal : Label::kNormal;
}

std::unordered_map<std::string, Label> parse_label_csv(
    const std::string& text, const std::string& name) {
  std::unordered_map<std::string, Label> labels;
  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    if (line_no == 1 && stripped == "file,label") continue;

    const std::size_t comma = stripped.find(',');
    if (comma == std::string::npos) {
      throw DataError("parse_label_csv: " + name + " line " +
                      std::to_string(line_no) + ": expected 'file,label'");
    }
    const std::string file = trim(stripped.substr(0, comma));
    const std::string label = trim(stripped.substr(comma + 1));
    if (file.empty()) {
      throw DataError("parse_label_csv: " + name + " line " +
                      std::to_string(line_no) + ": empty file name");
    }
    Label parsed;
    try {
      parsed = label_from_name(label);
    } catch (const std::invalid_argument&) {
      throw DataError("parse_label_csv: " + name + " line " +
                      std::to_string(line_no) + ": unknown label '" + label +
                      "'");
    }
    if (!labels.emplace(file, parsed).second) {
      throw DataError("parse_label_csv: " + name + " line " +
                      std::to_string(line_no) + ": duplicate file '" + file +
                      "'");
    }
  }
  return labels;
}

std::unordered_set<std::string> parse_exclusion_list(const std::string& text) {
  std::unordered_set<std::string> excluded;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    excluded.insert(stripped);
  }
  return excluded;
}

std::string patient_id_from_filename(const std::string& path) {
  std::size_t base = path.find_last_of("/\\");
  base = base == std::string::npos ? 0 : base + 1;
  const std::size_t underscore = path.find('_', base);
  if (underscore == std::string::npos) return "";
  return path.substr(base, underscore - base);
}

}  // namespace medfront::datasets
