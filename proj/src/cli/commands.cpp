#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "medfront/autodiff/rng.hpp"
#include "medfront/datasets/annotations.hpp"
#include "medfront/datasets/manifest.hpp"
#include "medfront/datasets/segmentation.hpp"
#include "medfront/datasets/split.hpp"
#include "medfront/datasets/synthetic.hpp"
#include "medfront/datasets/wav.hpp"
#include "medfront/errors.hpp"
#include "medfront/eval/metrics.hpp"
#include "medfront/eval/stats.hpp"
#include "medfront/frontends/feature_io.hpp"
#include "medfront/model/bundle.hpp"
#include "medfront/signal/biquad.hpp"
#include "medfront/signal/resample.hpp"

namespace medfront::cli {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

// Every command drops the default-merged config into the run directory, so
// the directory alone reproduces the run.
void echo_config(const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  write_text(fs::path(cfg.output_dir) / "effective_config.cfg",
             serialize_config(cfg));
}

// Runs fn(0..n) across up to `jobs` threads; fn must confine itself to its
// own index so results stay deterministic regardless of scheduling.
void parallel_for_index(std::size_t n, int jobs,
                        const std::function<void(std::size_t)>& fn) {
  const std::size_t threads =
      std::min<std::size_t>(std::max(jobs, 1), std::max<std::size_t>(n, 1));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

std::string basename_of(const std::string& path) {
  return fs::path(path).filename().string();
}

bool starts_with(const std::string& s, const std::string& prefix) {
  return s.rfind(prefix, 0) == 0;
}

// One recording queued for preprocessing.
struct SourceJob {
  std::string path;
  std::string base;  // name used in the manifest and error sidecar
  datasets::Label label = datasets::Label::kNormal;  // fixed-label kinds
  std::vector<datasets::CycleAnnotation> annotations;
  bool by_cycles = false;
  std::string patient;
};

struct JobResult {
  std::vector<datasets::Segment> segments;
  std::vector<std::string> log;  // printed in job order after the join
  std::string error;             // non-empty = recording skipped
};

JobResult preprocess_one(const SourceJob& job, const RunConfig& cfg) {
  JobResult r;
  try {
    const auto w = datasets::load_wav(job.path);
    r.log.push_back("preprocess: " + job.base + ": " +
                    std::to_string(w.sample_rate) + " Hz -> " +
                    std::to_string(cfg.sample_rate) + " Hz");
    auto segmentation =
        job.by_cycles
            ? datasets::segment_by_cycles(w, job.annotations)
            : datasets::segment_fixed(w, job.label, cfg.segment_s);
    for (const auto& warning : segmentation.warnings) {
      r.log.push_back("preprocess: " + job.base + ": " + warning);
    }
    // The band edges are fixed; the design adapts to each file's rate.
    const auto cascade = signal::design_butterworth_bandpass(
        cfg.butterworth_order, cfg.band_low_hz, cfg.band_high_hz,
        w.sample_rate);
    for (auto& clip : segmentation.clips) {
      const auto filtered = signal::apply_filter(cascade, clip.waveform);
      const auto resampled = signal::resample(filtered, cfg.sample_rate);
      datasets::Segment s;
      s.waveform = signal::fit_duration(resampled, cfg.segment_s);
      s.label = clip.label;
      s.origin_file = job.base;
      s.start_s = clip.start_s;
      s.end_s = clip.end_s;
      s.patient_id = job.patient;
      r.segments.push_back(std::move(s));
    }
  } catch (const std::exception& e) {
    r.segments.clear();
    r.error = job.base + ": " + e.what();
  }
  return r;
}

// Sorted *.wav paths directly inside `dir`.
std::vector<std::string> list_wavs(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    throw DataError("preprocess: corpus directory " + dir + " does not exist");
  }
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().extension() == ".wav") out.push_back(entry.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<model::Example> load_partition(const datasets::SplitManifest& m,
                                           const fs::path& manifest_dir,
                                           datasets::Partition p) {
  std::vector<model::Example> out;
  for (const auto& e : m.entries) {
    if (e.partition != p) continue;
    model::Example ex;
    ex.waveform = datasets::load_wav((manifest_dir / e.segment_path).string());
    ex.label = e.label;
    ex.id = e.segment_path;
    out.push_back(std::move(ex));
  }
  return out;
}

// Rebuilds the trained classifier a bundle describes.
struct LoadedBundle {
  model::Bundle bundle;
  std::unique_ptr<frontends::Frontend> frontend;
  std::unique_ptr<model::Model> net;
  model::Standardizer standardizer;
};

LoadedBundle rebuild(const fs::path& checkpoint) {
  LoadedBundle out;
  out.bundle = model::load_bundle(checkpoint);
  out.frontend = frontends::make_frontend(out.bundle.train_cfg.frontend,
                                          out.bundle.frontend_cfg);
  autodiff::Rng rng(0);  // weights are overwritten by the checkpoint
  out.net = std::make_unique<model::Model>(out.bundle.model_cfg,
                                           out.bundle.input_frames,
                                           out.bundle.input_filters, rng);
  out.standardizer = model::restore_into(out.bundle, *out.net, *out.frontend);
  return out;
}

std::string metrics_table(const eval::Metrics& m) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%-18s %-6s %-6s\n%-18s %-6s %-6s\n",
                "Balanced Accuracy", "TPR", "TNR",
                eval::format_percent(m.balanced_accuracy).c_str(),
                eval::format_percent(m.tpr).c_str(),
                eval::format_percent(m.tnr).c_str());
  return buf;
}

}  // namespace

void cmd_preprocess(const RunConfig& cfg, std::ostream& out,
                    std::ostream& err) {
  (void)out;
  echo_config(cfg);

  std::vector<SourceJob> jobs;
  std::vector<std::string> errors;

  std::unordered_set<std::string> excluded;
  if (!cfg.exclude_file.empty()) {
    excluded = datasets::parse_exclusion_list(read_text(cfg.exclude_file));
  }

  if (cfg.dataset == "synthetic") {
    datasets::SyntheticSpec spec;
    spec.count = cfg.synthetic_count;
    spec.sample_rate = cfg.synthetic_rate;
    spec.duration_s = cfg.synthetic_duration_s;
    spec.fmin_hz = cfg.band_low_hz;
    spec.fmax_hz = cfg.band_high_hz;
    spec.seed = cfg.seed;
    const auto listing = datasets::generate_synthetic_corpus(cfg.corpus_dir,
                                                             spec);
    err << "preprocess: generated " << listing.size() << " files in "
        << cfg.corpus_dir << "\n";
    for (const auto& [file, label] : listing) {
      SourceJob job;
      job.path = (fs::path(cfg.corpus_dir) / file).string();
      job.base = file;
      job.label = label;
      jobs.push_back(std::move(job));
    }
  } else {
    std::unordered_map<std::string, datasets::Label> labels;
    if (cfg.dataset == "heartbeat") {
      labels = datasets::parse_label_csv(read_text(cfg.labels_csv),
                                         cfg.labels_csv);
    }
    for (const std::string& path : list_wavs(cfg.corpus_dir)) {
      const std::string base = basename_of(path);
      if (excluded.count(base)) {
        err << "preprocess: " << base << ": excluded\n";
        continue;
      }
      SourceJob job;
      job.path = path;
      job.base = base;
      job.patient = datasets::patient_id_from_filename(base);
      if (cfg.dataset == "respiratory") {
        job.by_cycles = true;
        const auto sidecar = fs::path(path).replace_extension(".txt");
        try {
          job.annotations = datasets::parse_cycle_annotations(
              read_text(sidecar), sidecar.string());
        } catch (const std::exception& e) {
          errors.push_back(base + ": " + e.what());
          continue;
        }
      } else {
        const auto it = labels.find(base);
        if (it == labels.end()) {
          errors.push_back(base + ": no label in " + cfg.labels_csv);
          continue;
        }
        job.label = it->second;
      }
      jobs.push_back(std::move(job));
    }
  }

  std::vector<JobResult> results(jobs.size());
  parallel_for_index(jobs.size(), cfg.jobs, [&](std::size_t i) {
    results[i] = preprocess_one(jobs[i], cfg);
  });

  const fs::path out_dir(cfg.output_dir);
  fs::create_directories(out_dir / "segments");
  std::vector<datasets::ManifestEntry> entries;
  std::size_t failed = errors.size();
  for (const auto& r : results) {
    for (const auto& line : r.log) err << line << "\n";
    if (!r.error.empty()) {
      errors.push_back(r.error);
      ++failed;
      continue;
    }
    for (const auto& s : r.segments) {
      char name[48];
      std::snprintf(name, sizeof(name), "segments/seg_%05zu.wav",
                    entries.size());
      datasets::write_wav((out_dir / name).string(), s.waveform,
                          datasets::WavFormat::kFloat32);
      datasets::ManifestEntry e;
      e.segment_path = name;
      e.label = s.label;
      e.origin_file = s.origin_file;
      e.start_s = s.start_s;
      e.end_s = s.end_s;
      e.patient_id = s.patient_id;
      entries.push_back(std::move(e));
    }
  }

  std::string error_text;
  for (const auto& line : errors) error_text += line + "\n";
  write_text(out_dir / "preprocess_errors.txt", error_text);
  for (const auto& line : errors) err << "preprocess: error: " << line << "\n";

  const auto manifest = datasets::make_split(
      entries, cfg.seed,
      {cfg.train_fraction, cfg.val_fraction, cfg.test_fraction},
      cfg.group_by_patient);
  datasets::write_manifest(cfg.manifest, manifest);

  err << "preprocess: " << jobs.size() << " recordings -> " << entries.size()
      << " segments (" << failed << " failed), manifest " << cfg.manifest
      << "\n";
}

void cmd_extract(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  (void)out;
  echo_config(cfg);
  const auto manifest = datasets::read_manifest(cfg.manifest);
  const fs::path manifest_dir = fs::path(cfg.manifest).parent_path();
  const std::size_t count =
      std::min(cfg.extract_count, manifest.entries.size());
  const auto kinds = parse_frontend_list(cfg.extract_frontends);

  const fs::path features_dir = fs::path(cfg.output_dir) / "features";
  fs::create_directories(features_dir);

  std::size_t written = 0;
  for (const auto kind : kinds) {
    std::unique_ptr<frontends::Frontend> frontend;
    if (kind != frontends::FrontendKind::kMel && fs::exists(cfg.checkpoint)) {
      const auto bundle = model::load_bundle(cfg.checkpoint);
      if (bundle.train_cfg.frontend == kind) {
        frontend = frontends::make_frontend(kind, bundle.frontend_cfg);
        std::vector<std::pair<std::string, autodiff::Tensor>> weights;
        for (const auto& p : bundle.params) {
          if (!starts_with(p.first, "model.") &&
              !starts_with(p.first, "standardize.")) {
            weights.push_back(p);
          }
        }
        model::assign_parameters(frontend->parameters(), weights);
        err << "extract: " << frontends::frontend_name(kind)
            << ": loaded parameters from " << cfg.checkpoint << "\n";
      } else {
        err << "extract: warning: " << cfg.checkpoint << " holds a "
            << frontends::frontend_name(bundle.train_cfg.frontend)
            << " frontend; " << frontends::frontend_name(kind)
            << " stays at initialization\n";
      }
    } else if (kind != frontends::FrontendKind::kMel) {
      err << "extract: warning: no checkpoint at " << cfg.checkpoint << "; "
          << frontends::frontend_name(kind) << " stays at initialization\n";
    }
    if (!frontend) frontend = frontends::make_frontend(kind, frontend_config(cfg));

    std::vector<frontends::FeatureMap> maps(count);
    parallel_for_index(count, cfg.jobs, [&](std::size_t i) {
      const auto& entry = manifest.entries[i];
      const auto w =
          datasets::load_wav((manifest_dir / entry.segment_path).string());
      maps[i] = frontend->extract(w);
    });
    for (std::size_t i = 0; i < count; ++i) {
      const std::string stem =
          fs::path(manifest.entries[i].segment_path).stem().string();
      const std::string base =
          (features_dir / (stem + "." + frontends::frontend_name(kind)))
              .string();
      frontends::write_feature_file(base + ".mfft", maps[i], kind);
      frontends::write_feature_pgm(base + ".pgm", maps[i]);
      ++written;
    }
  }
  err << "extract: wrote " << written << " feature dumps to " << features_dir
      << "\n";
}

void cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  (void)out;
  echo_config(cfg);
  const auto manifest = datasets::read_manifest(cfg.manifest);
  const std::string digest =
      datasets::manifest_digest(manifest);
  const fs::path manifest_dir = fs::path(cfg.manifest).parent_path();
  const auto train_set =
      load_partition(manifest, manifest_dir, datasets::Partition::kTrain);
  const auto val_set =
      load_partition(manifest, manifest_dir, datasets::Partition::kVal);

  const auto fc = frontend_config(cfg);
  const auto tc = train_config(cfg);
  auto frontend = frontends::make_frontend(tc.frontend, fc);
  const std::size_t frames = fc.frames_for(static_cast<std::size_t>(
      std::llround(cfg.segment_s * cfg.sample_rate)));

  const auto standardizer = model::fit_standardizer(*frontend, train_set);
  autodiff::Rng rng(cfg.seed);
  model::Model net(model_config(cfg), frames, fc.n_filters, rng);

  const auto result =
      model::train(net, *frontend, standardizer, train_set, val_set, tc);
  for (const auto& row : result.log) {
    char buf[160];
    if (row.validated) {
      std::snprintf(buf, sizeof(buf),
                    "train: epoch %zu loss %.6g val_ba %.4f tpr %.4f tnr %.4f",
                    row.epoch, row.train_loss, row.val_balanced_accuracy,
                    row.val_tpr, row.val_tnr);
    } else {
      std::snprintf(buf, sizeof(buf), "train: epoch %zu loss %.6g", row.epoch,
                    row.train_loss);
    }
    err << buf << "\n";
  }

  // Ship the best-validation weights, not the last ones.
  auto params = net.parameters();
  for (const auto& p : frontend->parameters()) params.push_back(p);
  model::assign_parameters(params, result.best_params);

  model::Bundle bundle;
  bundle.model_cfg = model_config(cfg).resolved();
  bundle.train_cfg = tc;
  bundle.frontend_cfg = fc;
  bundle.manifest_digest = digest;
  bundle.input_frames = frames;
  bundle.input_filters = fc.n_filters;
  bundle.params = params;
  bundle.params.emplace_back("standardize.mean", standardizer.mean);
  bundle.params.emplace_back("standardize.std", standardizer.std);
  const fs::path checkpoint(cfg.checkpoint);
  if (checkpoint.has_parent_path()) {
    fs::create_directories(checkpoint.parent_path());
  }
  model::save_bundle(checkpoint, bundle);
  write_text(fs::path(cfg.output_dir) / "training_log.csv",
             model::training_log_csv(result.log));

  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "train: best val balanced accuracy %.4f at epoch %zu",
                result.best_val_ba, result.best_epoch);
  err << buf << " -> " << cfg.checkpoint << "\n";
}

void cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  echo_config(cfg);
  auto loaded = rebuild(cfg.checkpoint);
  const auto manifest = datasets::read_manifest(cfg.manifest);
  const std::string digest =
      datasets::manifest_digest(manifest);
  if (digest != loaded.bundle.manifest_digest) {
    err << "eval: warning: manifest digest " << digest
        << " differs from the checkpoint's " << loaded.bundle.manifest_digest
        << "\n";
  }
  const auto test_set = load_partition(
      manifest, fs::path(cfg.manifest).parent_path(),
      datasets::Partition::kTest);
  if (test_set.empty()) {
    throw DataError("eval: manifest has no test segments");
  }

  std::vector<datasets::Label> preds;
  std::vector<datasets::Label> truth;
  for (const auto& ex : test_set) {
    preds.push_back(model::predict_one(*loaded.net, *loaded.frontend,
                                       loaded.standardizer, ex.waveform)
                        .label);
    truth.push_back(ex.label);
  }
  const auto metrics =
      eval::compute_metrics(eval::count_confusion(preds, truth));
  const std::string table = metrics_table(metrics);
  out << table;
  write_text(fs::path(cfg.output_dir) / "eval.txt", table);
  err << "eval: " << test_set.size() << " test segments\n";
}

void cmd_compare(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  echo_config(cfg);
  const struct {
    const char* key;
    const std::string& path;
    frontends::FrontendKind kind;
  } inputs[] = {
      {"checkpoint_mel", cfg.checkpoint_mel, frontends::FrontendKind::kMel},
      {"checkpoint_leaf", cfg.checkpoint_leaf, frontends::FrontendKind::kLeaf},
      {"checkpoint_nnaudio", cfg.checkpoint_nnaudio,
       frontends::FrontendKind::kNnAudio},
  };
  for (const auto& input : inputs) {
    if (input.path.empty()) {
      throw std::invalid_argument(std::string("config: compare needs ") +
                                  input.key);
    }
  }

  const auto manifest = datasets::read_manifest(cfg.manifest);
  const std::string digest =
      datasets::manifest_digest(manifest);
  const auto test_set = load_partition(
      manifest, fs::path(cfg.manifest).parent_path(),
      datasets::Partition::kTest);
  if (test_set.empty()) {
    throw DataError("compare: manifest has no test segments");
  }
  std::vector<datasets::Label> truth;
  for (const auto& ex : test_set) truth.push_back(ex.label);

  std::vector<std::vector<datasets::Label>> preds;
  for (const auto& input : inputs) {
    auto loaded = rebuild(input.path);
    if (loaded.bundle.train_cfg.frontend != input.kind) {
      throw DataError(
          "compare: " + input.path + " holds a '" +
          frontends::frontend_name(loaded.bundle.train_cfg.frontend) +
          "' frontend, expected '" + frontends::frontend_name(input.kind) +
          "'");
    }
    if (loaded.bundle.manifest_digest != digest) {
      throw DataError("compare: " + input.path +
                      " was trained on manifest digest " +
                      loaded.bundle.manifest_digest + " but " + cfg.manifest +
                      " digests to " + digest +
                      "; paired tests need identical test partitions");
    }
    std::vector<datasets::Label> p;
    for (const auto& ex : test_set) {
      p.push_back(model::predict_one(*loaded.net, *loaded.frontend,
                                     loaded.standardizer, ex.waveform)
                      .label);
    }
    preds.push_back(std::move(p));
  }

  const auto report =
      eval::compare_frontends(preds[0], preds[1], preds[2], truth);
  const std::string table = eval::comparison_table(report);
  out << table;
  write_text(fs::path(cfg.output_dir) / "comparison.csv",
             eval::comparison_csv(report));
  write_text(fs::path(cfg.output_dir) / "comparison.txt", table);
  err << "compare: " << test_set.size() << " test segments\n";
}

}  // namespace medfront::cli
