#pragma once

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "medfront/datasets/types.hpp"

namespace medfront::datasets {

// Parses cycle time-mark sidecar text: one cycle per non-empty line, four
// whitespace-separated fields `start end crackles wheezes` with the flags in
// {0, 1}. Malformed lines throw DataError naming the line number. `name`
// labels the source in error messages.
std::vector<CycleAnnotation> parse_cycle_annotations(const std::string& text,
                                                     const std::string& name);

// normal iff neither crackles nor wheezes.
Label cycle_label(const CycleAnnotation& ann);

// Parses recording-level labels: CSV lines `file,label` with label in
// {normal, abnormal}; an optional `file,label` header is skipped. Duplicate
// files and unknown labels throw DataError with the line number.
std::unordered_map<std::string, Label> parse_label_csv(const std::string& text,
                                                       const std::string& name);

// One filename per line; blank lines and `#` comments are skipped.
std::unordered_set<std::string> parse_exclusion_list(const std::string& text);

// ICBHI-style patient prefix: characters of the basename before the first
// '_', or empty when the name has no '_' separator.
std::string patient_id_from_filename(const std::string& path);

}  // namespace medfront::datasets
