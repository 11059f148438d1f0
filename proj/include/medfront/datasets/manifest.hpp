#pragma once

#include <filesystem>
#include <string>

#include "medfront/datasets/types.hpp"

namespace medfront::datasets {

// Manifest file format (text, one record per line):
//   line 1: "medfront-manifest v1"
//   line 2: "segment_path,label,partition,origin_file,start_s,end_s,patient_id"
//   rest:   one CSV row per segment, times printed with six decimals
// Fields may not contain commas or line breaks; paths that do are rejected at
// write time rather than silently corrupting the file.
std::string serialize_manifest(const SplitManifest& manifest);

void write_manifest(const std::filesystem::path& path,
                    const SplitManifest& manifest);

SplitManifest parse_manifest(const std::string& text, const std::string& name);

SplitManifest read_manifest(const std::filesystem::path& path);

// FNV-1a 64-bit hash of the serialized manifest, as 16 lowercase hex digits.
// Checkpoints record this so evaluation can prove it ran on the same split.
std::string manifest_digest(const SplitManifest& manifest);

}  // namespace medfront::datasets
