#include "config.hpp"

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "medfront/signal/biquad.hpp"

namespace medfront::cli {

namespace {

std::string trim(const std::string& s) {
  const auto from = s.find_first_not_of(" \t\r");
  if (from == std::string::npos) return "";
  const auto to = s.find_last_not_of(" \t\r");
  return s.substr(from, to - from + 1);
}

// Shortest round-trip formatting, so the echoed config re-parses to the
// exact same double.
std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("'" + value + "' is not a number");
  }
  if (used != value.size()) {
    throw std::invalid_argument("'" + value + "' is not a number");
  }
  return out;
}

std::uint64_t parse_u64(const std::string& value) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(),
                                   out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw std::invalid_argument("'" + value +
                                "' is not a non-negative integer");
  }
  return out;
}

std::size_t parse_size(const std::string& value) {
  return static_cast<std::size_t>(parse_u64(value));
}

int parse_int(const std::string& value) {
  int out = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(),
                                   out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw std::invalid_argument("'" + value + "' is not an integer");
  }
  return out;
}

bool parse_bool(const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw std::invalid_argument("'" + value + "' is not true or false");
}

std::vector<std::string> split_list(const std::string& list, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(list);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

std::vector<model::ConvBlock> parse_conv_blocks(const std::string& text) {
  std::vector<model::ConvBlock> out;
  if (trim(text).empty()) return out;
  for (const std::string& item : split_list(text, ',')) {
    const auto parts = split_list(item, ':');
    if (parts.size() != 3) {
      throw std::invalid_argument("conv block '" + item +
                                  "' is not channels:kernel:pool");
    }
    out.push_back(
        {parse_size(parts[0]), parse_size(parts[1]), parse_size(parts[2])});
  }
  return out;
}

std::vector<std::size_t> parse_dense_units(const std::string& text) {
  std::vector<std::size_t> out;
  if (trim(text).empty()) return out;
  for (const std::string& item : split_list(text, ',')) {
    out.push_back(parse_size(item));
  }
  return out;
}

struct KeyBinding {
  const char* key;
  const char* help;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

// One table keeps parsing, echoing, and the documentation in sync.
const std::vector<KeyBinding>& bindings() {
  static const std::vector<KeyBinding> table = {
      {"dataset", "corpus kind: synthetic | respiratory | heartbeat",
       [](const RunConfig& c) { return c.dataset; },
       [](RunConfig& c, const std::string& v) { c.dataset = v; }},
      {"corpus_dir", "directory of input recordings (created for synthetic)",
       [](const RunConfig& c) { return c.corpus_dir; },
       [](RunConfig& c, const std::string& v) { c.corpus_dir = v; }},
      {"labels_csv",
       "recording-level label CSV for the heartbeat kind; empty = "
       "<corpus_dir>/labels.csv",
       [](const RunConfig& c) { return c.labels_csv; },
       [](RunConfig& c, const std::string& v) { c.labels_csv = v; }},
      {"exclude_file",
       "file of recording names to skip, one per line; empty = none",
       [](const RunConfig& c) { return c.exclude_file; },
       [](RunConfig& c, const std::string& v) { c.exclude_file = v; }},
      {"output_dir", "directory for all run artifacts",
       [](const RunConfig& c) { return c.output_dir; },
       [](RunConfig& c, const std::string& v) { c.output_dir = v; }},
      {"seed", "seed for corpus generation, splitting, and training",
       [](const RunConfig& c) { return std::to_string(c.seed); },
       [](RunConfig& c, const std::string& v) { c.seed = parse_u64(v); }},
      {"jobs", "worker threads for preprocess and extract",
       [](const RunConfig& c) { return std::to_string(c.jobs); },
       [](RunConfig& c, const std::string& v) { c.jobs = parse_int(v); }},
      {"band_low_hz",
       "bandpass low cutoff; 0 = dataset default (respiratory 120, "
       "heartbeat 25, synthetic 25)",
       [](const RunConfig& c) { return format_double(c.band_low_hz); },
       [](RunConfig& c, const std::string& v) {
         c.band_low_hz = parse_double(v);
       }},
      {"band_high_hz",
       "bandpass high cutoff; 0 = dataset default (respiratory 1800, "
       "heartbeat 400, synthetic 1000)",
       [](const RunConfig& c) { return format_double(c.band_high_hz); },
       [](RunConfig& c, const std::string& v) {
         c.band_high_hz = parse_double(v);
       }},
      {"butterworth_order", "bandpass filter order (even)",
       [](const RunConfig& c) { return std::to_string(c.butterworth_order); },
       [](RunConfig& c, const std::string& v) {
         c.butterworth_order = parse_int(v);
       }},
      {"sample_rate", "target rate every segment is resampled to",
       [](const RunConfig& c) { return std::to_string(c.sample_rate); },
       [](RunConfig& c, const std::string& v) {
         c.sample_rate = parse_int(v);
       }},
      {"segment_s", "segment duration; shorter clips are padded, longer cut",
       [](const RunConfig& c) { return format_double(c.segment_s); },
       [](RunConfig& c, const std::string& v) {
         c.segment_s = parse_double(v);
       }},
      {"train_fraction", "train share of the stratified split",
       [](const RunConfig& c) { return format_double(c.train_fraction); },
       [](RunConfig& c, const std::string& v) {
         c.train_fraction = parse_double(v);
       }},
      {"val_fraction", "validation share of the stratified split",
       [](const RunConfig& c) { return format_double(c.val_fraction); },
       [](RunConfig& c, const std::string& v) {
         c.val_fraction = parse_double(v);
       }},
      {"test_fraction", "test share of the stratified split",
       [](const RunConfig& c) { return format_double(c.test_fraction); },
       [](RunConfig& c, const std::string& v) {
         c.test_fraction = parse_double(v);
       }},
      {"group_by_patient",
       "assign whole patients to one partition (approximate fractions)",
       [](const RunConfig& c) {
         return std::string(c.group_by_patient ? "true" : "false");
       },
       [](RunConfig& c, const std::string& v) {
         c.group_by_patient = parse_bool(v);
       }},
      {"synthetic_count", "files generated for the synthetic kind",
       [](const RunConfig& c) { return std::to_string(c.synthetic_count); },
       [](RunConfig& c, const std::string& v) {
         c.synthetic_count = parse_size(v);
       }},
      {"synthetic_rate", "sample rate of generated synthetic files",
       [](const RunConfig& c) { return std::to_string(c.synthetic_rate); },
       [](RunConfig& c, const std::string& v) {
         c.synthetic_rate = parse_int(v);
       }},
      {"synthetic_duration_s", "duration of generated synthetic files",
       [](const RunConfig& c) {
         return format_double(c.synthetic_duration_s);
       },
       [](RunConfig& c, const std::string& v) {
         c.synthetic_duration_s = parse_double(v);
       }},
      {"frontend", "feature extractor: mel | leaf | nnaudio",
       [](const RunConfig& c) { return c.frontend; },
       [](RunConfig& c, const std::string& v) { c.frontend = v; }},
      {"window_ms", "analysis window length",
       [](const RunConfig& c) { return format_double(c.window_ms); },
       [](RunConfig& c, const std::string& v) {
         c.window_ms = parse_double(v);
       }},
      {"hop_ms", "analysis hop length",
       [](const RunConfig& c) { return format_double(c.hop_ms); },
       [](RunConfig& c, const std::string& v) { c.hop_ms = parse_double(v); }},
      {"n_filters", "number of frequency channels",
       [](const RunConfig& c) { return std::to_string(c.n_filters); },
       [](RunConfig& c, const std::string& v) {
         c.n_filters = parse_size(v);
       }},
      {"fmin_hz", "lowest filter frequency; 0 = band_low_hz",
       [](const RunConfig& c) { return format_double(c.fmin_hz); },
       [](RunConfig& c, const std::string& v) {
         c.fmin_hz = parse_double(v);
       }},
      {"fmax_hz", "highest filter frequency; 0 = band_high_hz",
       [](const RunConfig& c) { return format_double(c.fmax_hz); },
       [](RunConfig& c, const std::string& v) {
         c.fmax_hz = parse_double(v);
       }},
      {"n_fft", "FFT size; 0 = next power of two >= window",
       [](const RunConfig& c) { return std::to_string(c.n_fft); },
       [](RunConfig& c, const std::string& v) { c.n_fft = parse_size(v); }},
      {"log_eps", "epsilon inside the log compressor",
       [](const RunConfig& c) { return format_double(c.log_eps); },
       [](RunConfig& c, const std::string& v) {
         c.log_eps = parse_double(v);
       }},
      {"gabor_length", "LEAF Gabor kernel length in samples",
       [](const RunConfig& c) { return std::to_string(c.gabor_length); },
       [](RunConfig& c, const std::string& v) {
         c.gabor_length = parse_size(v);
       }},
      {"compression", "LEAF compressor: pcen | log",
       [](const RunConfig& c) { return c.compression; },
       [](RunConfig& c, const std::string& v) { c.compression = v; }},
      {"pcen_alpha", "PCEN gain exponent (initial)",
       [](const RunConfig& c) { return format_double(c.pcen_alpha); },
       [](RunConfig& c, const std::string& v) {
         c.pcen_alpha = parse_double(v);
       }},
      {"pcen_delta", "PCEN bias (initial)",
       [](const RunConfig& c) { return format_double(c.pcen_delta); },
       [](RunConfig& c, const std::string& v) {
         c.pcen_delta = parse_double(v);
       }},
      {"pcen_root", "PCEN root exponent (initial)",
       [](const RunConfig& c) { return format_double(c.pcen_root); },
       [](RunConfig& c, const std::string& v) {
         c.pcen_root = parse_double(v);
       }},
      {"pcen_s", "PCEN smoother coefficient",
       [](const RunConfig& c) { return format_double(c.pcen_s); },
       [](RunConfig& c, const std::string& v) { c.pcen_s = parse_double(v); }},
      {"pcen_eps", "PCEN denominator epsilon",
       [](const RunConfig& c) { return format_double(c.pcen_eps); },
       [](RunConfig& c, const std::string& v) {
         c.pcen_eps = parse_double(v);
       }},
      {"architecture", "classifier preset: compact | vgg_style",
       [](const RunConfig& c) { return c.architecture; },
       [](RunConfig& c, const std::string& v) { c.architecture = v; }},
      {"conv_blocks",
       "conv stages as channels:kernel:pool,...; empty = preset",
       [](const RunConfig& c) { return c.conv_blocks; },
       [](RunConfig& c, const std::string& v) { c.conv_blocks = v; }},
      {"dense_units", "hidden dense widths, comma separated; empty = preset",
       [](const RunConfig& c) { return c.dense_units; },
       [](RunConfig& c, const std::string& v) { c.dense_units = v; }},
      {"dropout_p", "dropout probability before the last two dense layers",
       [](const RunConfig& c) { return format_double(c.dropout_p); },
       [](RunConfig& c, const std::string& v) {
         c.dropout_p = parse_double(v);
       }},
      {"activation", "hidden activation: relu | swish",
       [](const RunConfig& c) { return c.activation; },
       [](RunConfig& c, const std::string& v) { c.activation = v; }},
      {"epochs", "training epochs",
       [](const RunConfig& c) { return std::to_string(c.epochs); },
       [](RunConfig& c, const std::string& v) { c.epochs = parse_size(v); }},
      {"batch_size", "examples per optimizer step",
       [](const RunConfig& c) { return std::to_string(c.batch_size); },
       [](RunConfig& c, const std::string& v) {
         c.batch_size = parse_size(v);
       }},
      {"lr", "Adam learning rate",
       [](const RunConfig& c) { return format_double(c.lr); },
       [](RunConfig& c, const std::string& v) { c.lr = parse_double(v); }},
      {"metrics_every", "epochs between validation passes",
       [](const RunConfig& c) { return std::to_string(c.metrics_every); },
       [](RunConfig& c, const std::string& v) {
         c.metrics_every = parse_size(v);
       }},
      {"stop_at_val_ba",
       "stop once validation balanced accuracy reaches this; > 1 = never",
       [](const RunConfig& c) { return format_double(c.stop_at_val_ba); },
       [](RunConfig& c, const std::string& v) {
         c.stop_at_val_ba = parse_double(v);
       }},
      {"manifest", "manifest path; empty = <output_dir>/manifest.csv",
       [](const RunConfig& c) { return c.manifest; },
       [](RunConfig& c, const std::string& v) { c.manifest = v; }},
      {"checkpoint",
       "checkpoint path for train/eval/extract; empty = "
       "<output_dir>/checkpoint.mfck",
       [](const RunConfig& c) { return c.checkpoint; },
       [](RunConfig& c, const std::string& v) { c.checkpoint = v; }},
      {"checkpoint_mel", "mel checkpoint compared by the compare command",
       [](const RunConfig& c) { return c.checkpoint_mel; },
       [](RunConfig& c, const std::string& v) { c.checkpoint_mel = v; }},
      {"checkpoint_leaf", "LEAF checkpoint compared by the compare command",
       [](const RunConfig& c) { return c.checkpoint_leaf; },
       [](RunConfig& c, const std::string& v) { c.checkpoint_leaf = v; }},
      {"checkpoint_nnaudio",
       "nnAudio checkpoint compared by the compare command",
       [](const RunConfig& c) { return c.checkpoint_nnaudio; },
       [](RunConfig& c, const std::string& v) { c.checkpoint_nnaudio = v; }},
      {"extract_frontends",
       "frontends the extract command renders, comma separated",
       [](const RunConfig& c) { return c.extract_frontends; },
       [](RunConfig& c, const std::string& v) { c.extract_frontends = v; }},
      {"extract_count", "manifest segments the extract command renders",
       [](const RunConfig& c) { return std::to_string(c.extract_count); },
       [](RunConfig& c, const std::string& v) {
         c.extract_count = parse_size(v);
       }},
  };
  return table;
}

}  // namespace

const std::vector<ConfigKeyDoc>& config_key_docs() {
  static const std::vector<ConfigKeyDoc> docs = [] {
    std::vector<ConfigKeyDoc> out;
    const RunConfig defaults;
    for (const auto& b : bindings()) {
      out.push_back({b.key, b.get(defaults), b.help});
    }
    return out;
  }();
  return docs;
}

RunConfig parse_config_text(const std::string& text, const std::string& name) {
  std::unordered_map<std::string, const KeyBinding*> by_key;
  for (const auto& b : bindings()) by_key.emplace(b.key, &b);

  RunConfig cfg;
  std::unordered_set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto where = name + ":" + std::to_string(line_no);
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: " + where +
                                  ": expected key = value, got '" + stripped +
                                  "'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    const auto it = by_key.find(key);
    if (it == by_key.end()) {
      throw std::invalid_argument("config: " + where + ": unknown key '" +
                                  key + "'");
    }
    if (!seen.insert(key).second) {
      throw std::invalid_argument("config: " + where + ": repeated key '" +
                                  key + "'");
    }
    try {
      it->second->set(cfg, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config: " + where + ": key '" + key +
                                  "': " + e.what());
    }
  }
  return cfg;
}

RunConfig read_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::invalid_argument("config: cannot open " + path);
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), path);
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& b : bindings()) {
    out += b.key;
    out += " = ";
    out += b.get(cfg);
    out += "\n";
  }
  return out;
}

RunConfig resolve(const RunConfig& in) {
  RunConfig cfg = in;

  if (cfg.dataset != "synthetic" && cfg.dataset != "respiratory" &&
      cfg.dataset != "heartbeat") {
    throw std::invalid_argument("config: unknown dataset '" + cfg.dataset +
                                "'");
  }
  frontends::frontend_from_name(cfg.frontend);
  model::architecture_from_name(cfg.architecture);
  model::activation_from_name(cfg.activation);
  if (cfg.compression != "pcen" && cfg.compression != "log") {
    throw std::invalid_argument("config: unknown compression '" +
                                cfg.compression + "'");
  }
  parse_frontend_list(cfg.extract_frontends);

  if (cfg.jobs < 1) {
    throw std::invalid_argument("config: jobs must be >= 1");
  }
  if (cfg.sample_rate <= 0) {
    throw std::invalid_argument("config: sample_rate must be positive");
  }
  if (!(cfg.segment_s > 0.0)) {
    throw std::invalid_argument("config: segment_s must be positive");
  }
  if (cfg.synthetic_rate <= 0 || !(cfg.synthetic_duration_s > 0.0)) {
    throw std::invalid_argument(
        "config: synthetic_rate and synthetic_duration_s must be positive");
  }
  const double fraction_sum =
      cfg.train_fraction + cfg.val_fraction + cfg.test_fraction;
  if (cfg.train_fraction < 0.0 || cfg.val_fraction < 0.0 ||
      cfg.test_fraction < 0.0 ||
      std::abs(fraction_sum - 1.0) > 1e-9) {
    throw std::invalid_argument(
        "config: split fractions must be non-negative and sum to 1");
  }

  if (cfg.band_low_hz == 0.0 && cfg.band_high_hz == 0.0) {
    if (cfg.dataset == "respiratory") {
      cfg.band_low_hz = 120.0;
      cfg.band_high_hz = 1800.0;
    } else if (cfg.dataset == "heartbeat") {
      cfg.band_low_hz = 25.0;
      cfg.band_high_hz = 400.0;
    } else {
      cfg.band_low_hz = 25.0;
      cfg.band_high_hz = 1000.0;
    }
  }
  if (!(cfg.band_low_hz > 0.0) || !(cfg.band_high_hz > cfg.band_low_hz)) {
    throw std::invalid_argument(
        "config: band cutoffs must satisfy 0 < band_low_hz < band_high_hz");
  }
  if (cfg.band_high_hz >= cfg.sample_rate / 2.0) {
    throw std::invalid_argument(
        "config: band_high_hz must sit below the target Nyquist rate");
  }
  // Fails fast on an unusable filter order (the same design runs per file).
  signal::design_butterworth_bandpass(cfg.butterworth_order, cfg.band_low_hz,
                                      cfg.band_high_hz, cfg.sample_rate);

  if (cfg.fmin_hz == 0.0) cfg.fmin_hz = cfg.band_low_hz;
  if (cfg.fmax_hz == 0.0) cfg.fmax_hz = cfg.band_high_hz;

  namespace fs = std::filesystem;
  if (cfg.labels_csv.empty()) {
    cfg.labels_csv = (fs::path(cfg.corpus_dir) / "labels.csv").string();
  }
  if (cfg.manifest.empty()) {
    cfg.manifest = (fs::path(cfg.output_dir) / "manifest.csv").string();
  }
  if (cfg.checkpoint.empty()) {
    cfg.checkpoint = (fs::path(cfg.output_dir) / "checkpoint.mfck").string();
  }

  // Surface bad module parameters at config time rather than mid-run.
  frontend_config(cfg).validate();
  model_config(cfg).validate();
  train_config(cfg).validate();
  return cfg;
}

frontends::FrontendConfig frontend_config(const RunConfig& cfg) {
  frontends::FrontendConfig fc;
  fc.window_ms = cfg.window_ms;
  fc.hop_ms = cfg.hop_ms;
  fc.n_filters = cfg.n_filters;
  fc.fmin_hz = cfg.fmin_hz;
  fc.fmax_hz = cfg.fmax_hz;
  fc.sample_rate = cfg.sample_rate;
  fc.compression = cfg.compression == "pcen" ? frontends::Compression::kPcen
                                             : frontends::Compression::kLog;
  fc.n_fft = cfg.n_fft;
  fc.log_eps = cfg.log_eps;
  fc.gabor_length = cfg.gabor_length;
  fc.pcen_alpha = cfg.pcen_alpha;
  fc.pcen_delta = cfg.pcen_delta;
  fc.pcen_root = cfg.pcen_root;
  fc.pcen_s = cfg.pcen_s;
  fc.pcen_eps = cfg.pcen_eps;
  return fc;
}

model::ModelConfig model_config(const RunConfig& cfg) {
  model::ModelConfig mc;
  mc.architecture = model::architecture_from_name(cfg.architecture);
  mc.conv_blocks = parse_conv_blocks(cfg.conv_blocks);
  mc.dense_units = parse_dense_units(cfg.dense_units);
  mc.dropout_p = cfg.dropout_p;
  mc.activation = model::activation_from_name(cfg.activation);
  mc.num_classes = 2;
  return mc;
}

model::TrainConfig train_config(const RunConfig& cfg) {
  model::TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch_size;
  tc.lr = cfg.lr;
  tc.seed = cfg.seed;
  tc.frontend = frontends::frontend_from_name(cfg.frontend);
  tc.metrics_every = cfg.metrics_every;
  tc.stop_at_val_ba = cfg.stop_at_val_ba;
  return tc;
}

std::vector<frontends::FrontendKind> parse_frontend_list(
    const std::string& list) {
  std::vector<frontends::FrontendKind> out;
  for (const std::string& item : split_list(list, ',')) {
    if (item.empty()) continue;
    const auto kind = frontends::frontend_from_name(item);
    for (const auto seen : out) {
      if (seen == kind) {
        throw std::invalid_argument("config: frontend '" + item +
                                    "' listed twice");
      }
    }
    out.push_back(kind);
  }
  if (out.empty()) {
    throw std::invalid_argument("config: extract_frontends lists no frontend");
  }
  return out;
}

}  // namespace medfront::cli
