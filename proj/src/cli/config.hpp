#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "medfront/frontends/frontend.hpp"
#include "medfront/model/cnn.hpp"
#include "medfront/model/trainer.hpp"

namespace medfront::cli {

// Flat key = value run configuration shared by every subcommand. Enumerated
// fields are stored as their validated names so the echoed file is exactly
// re-parseable. A zero in band_low_hz/band_high_hz/fmin_hz/fmax_hz means
// "derive it" (see resolve()); empty paths likewise fall back to defaults
// under output_dir.
struct RunConfig {
  // Corpus and run layout.
  std::string dataset = "synthetic";  // synthetic | respiratory | heartbeat
  std::string corpus_dir = "corpus";
  std::string labels_csv;    // "" = <corpus_dir>/labels.csv (heartbeat kind)
  std::string exclude_file;  // "" = no exclusion list
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  int jobs = 1;

  // Preprocessing.
  double band_low_hz = 0.0;   // 0 = dataset default band
  double band_high_hz = 0.0;  // 0 = dataset default band
  int butterworth_order = 12;
  int sample_rate = 4000;  // target rate after resampling
  double segment_s = 2.0;
  double train_fraction = 0.75;
  double val_fraction = 0.15;
  double test_fraction = 0.10;
  bool group_by_patient = false;
  std::size_t synthetic_count = 1000;
  int synthetic_rate = 8000;
  double synthetic_duration_s = 2.0;

  // Frontend.
  std::string frontend = "mel";  // mel | leaf | nnaudio
  double window_ms = 30.0;
  double hop_ms = 10.0;
  std::size_t n_filters = 128;
  double fmin_hz = 0.0;  // 0 = band_low_hz
  double fmax_hz = 0.0;  // 0 = band_high_hz
  std::size_t n_fft = 0;  // 0 = next power of two >= window
  double log_eps = 1e-6;
  std::size_t gabor_length = 401;
  std::string compression = "pcen";  // pcen | log (LEAF only)
  double pcen_alpha = 2.0;
  double pcen_delta = 2.0;
  double pcen_root = 4.0;
  double pcen_s = 0.04;
  double pcen_eps = 1e-6;

  // Model.
  std::string architecture = "compact";  // compact | vgg_style
  std::string conv_blocks;  // "channels:kernel:pool,..."; "" = preset
  std::string dense_units;  // "units,..."; "" = preset
  double dropout_p = 0.5;
  std::string activation = "relu";  // relu | swish

  // Training.
  std::size_t epochs = 1;
  std::size_t batch_size = 64;
  double lr = 1e-5;
  std::size_t metrics_every = 1;
  double stop_at_val_ba = 2.0;  // > 1 disables early stopping

  // Artifact paths.
  std::string manifest;    // "" = <output_dir>/manifest.csv
  std::string checkpoint;  // "" = <output_dir>/checkpoint.mfck
  std::string checkpoint_mel;      // compare inputs; no defaults
  std::string checkpoint_leaf;
  std::string checkpoint_nnaudio;
  std::string extract_frontends = "mel,leaf,nnaudio";
  std::size_t extract_count = 1;
};

// One row of the key table: name, default (as serialized), description.
struct ConfigKeyDoc {
  std::string key;
  std::string preset;
  std::string help;
};

// Documentation for every accepted key, in serialization order.
const std::vector<ConfigKeyDoc>& config_key_docs();

// Parses `key = value` lines ('#' comments and blank lines skipped).
// Unknown or repeated keys and malformed values throw std::invalid_argument
// naming the line. `name` labels the source in errors.
RunConfig parse_config_text(const std::string& text, const std::string& name);

RunConfig read_config_file(const std::string& path);

// Every key in a fixed order, one `key = value` per line; parsing the
// result reproduces the config exactly (doubles print with %.17g).
std::string serialize_config(const RunConfig& cfg);

// Fills the derived fields: the dataset's default band (respiratory
// [120, 1800], heartbeat [25, 400], synthetic [25, 1000]), fmin/fmax from
// the band, and the default manifest/checkpoint/labels paths. Then checks
// ranges and enum names; violations throw std::invalid_argument.
RunConfig resolve(const RunConfig& cfg);

// Views of a resolved config as the module configs.
frontends::FrontendConfig frontend_config(const RunConfig& cfg);
model::ModelConfig model_config(const RunConfig& cfg);
model::TrainConfig train_config(const RunConfig& cfg);

// Comma-separated frontend names -> kinds, rejecting duplicates.
std::vector<frontends::FrontendKind> parse_frontend_list(
    const std::string& list);

}  // namespace medfront::cli
