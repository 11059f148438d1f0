#include "medfront/datasets/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "medfront/errors.hpp"

namespace medfront::datasets {

namespace {

constexpr const char* kHeader = "medfront-manifest v1";
constexpr const char* kColumns =
    "segment_path,label,partition,origin_file,start_s,end_s,patient_id";

void require_plain_field(const std::string& value, const std::string& what) {
  if (value.find_first_of(",\r\n") != std::string::npos) {
    throw std::invalid_argument("write_manifest: " + what +
                                " contains a comma or line break: '" + value +
                                "'");
  }
}

std::string format_seconds(double s) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", s);
  return buf;
}

double parse_seconds(const std::string& text, const std::string& name,
                     std::size_t line_no, const char* what) {
  try {
    std::size_t consumed = 0;
    const double value = std::stod(text, &consumed);
    if (consumed != text.size()) throw std::invalid_argument("trailing");
    return value;
  } catch (const std::exception&) {
    throw DataError("parse_manifest: " + name + " line " +
                    std::to_string(line_no) + ": bad " + what + " '" + text +
                    "'");
  }
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(current);
  return fields;
}

}  // namespace

std::string serialize_manifest(const SplitManifest& manifest) {
  std::ostringstream out;
  out << kHeader << '\n' << kColumns << '\n';
  for (const auto& e : manifest.entries) {
    require_plain_field(e.segment_path, "segment_path");
    require_plain_field(e.origin_file, "origin_file");
    require_plain_field(e.patient_id, "patient_id");
    out << e.segment_path << ',' << label_name(e.label) << ','
        << partition_name(e.partition) << ',' << e.origin_file << ','
        << format_seconds(e.start_s) << ',' << format_seconds(e.end_s) << ','
        << e.patient_id << '\n';
  }
  return out.str();
}

void write_manifest(const std::filesystem::path& path,
                    const SplitManifest& manifest) {
  const std::string text = serialize_manifest(manifest);
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("write_manifest: cannot open " + path.string());
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) {
    throw DataError("write_manifest: failed writing " + path.string());
  }
}

SplitManifest parse_manifest(const std::string& text,
                             const std::string& name) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;

  auto next_line = [&](const char* what) {
    if (!std::getline(in, line)) {
      throw DataError("parse_manifest: " + name + ": missing " + what);
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_no;
  };

  next_line("format header");
  if (line != kHeader) {
    throw DataError("parse_manifest: " + name + " line 1: expected '" +
                    std::string(kHeader) + "', got '" + line + "'");
  }
  next_line("column header");
  if (line != kColumns) {
    throw DataError("parse_manifest: " + name + " line 2: unexpected columns '" +
                    line + "'");
  }

  SplitManifest manifest;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 7) {
      throw DataError("parse_manifest: " + name + " line " +
                      std::to_string(line_no) + ": expected 7 fields, got " +
                      std::to_string(fields.size()));
    }
    ManifestEntry e;
    e.segment_path = fields[0];
    try {
      e.label = label_from_name(fields[1]);
      e.partition = partition_from_name(fields[2]);
    } catch (const std::invalid_argument& err) {
      throw DataError("parse_manifest: " + name + " line " +
                      std::to_string(line_no) + ": " + err.what());
    }
    e.origin_file = fields[3];
    e.start_s = parse_seconds(fields[4], name, line_no, "start_s");
    e.end_s = parse_seconds(fields[5], name, line_no, "end_s");
    e.patient_id = fields[6];
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

SplitManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("read_manifest: cannot open " + path.string());
  }
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_manifest(text, path.filename().string());
}

std::string manifest_digest(const SplitManifest& manifest) {
  const std::string text = serialize_manifest(manifest);
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace medfront::datasets
