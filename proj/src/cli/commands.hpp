#pragma once

#include <ostream>

#include "config.hpp"

namespace medfront::cli {

// Subcommand bodies over a resolved config. Reports for humans go to `out`,
// progress and warnings to `err`; machine artifacts land in cfg.output_dir,
// which every command seeds with the echoed effective config.

// Segment -> bandpass -> resample -> duration-fit every recording, write the
// per-segment WAVs, the stratified-split manifest, and an error sidecar
// listing files that failed (the run continues past them).
void cmd_preprocess(const RunConfig& cfg, std::ostream& out,
                    std::ostream& err);

// Dump features (binary map + PGM image) of the first extract_count manifest
// segments for each requested frontend, loading learned parameters from the
// checkpoint when one matches; otherwise the frontend stays at
// initialization with a warning.
void cmd_extract(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Train the configured frontend + classifier on the manifest's train/val
// partitions; writes the checkpoint bundle and the epoch log CSV.
void cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Score a checkpoint on the manifest's test partition and print the
// balanced accuracy / TPR / TNR table.
void cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Evaluate the three frontends' checkpoints on the identical test partition
// and run the paired McNemar comparison with Holm correction.
void cmd_compare(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace medfront::cli
