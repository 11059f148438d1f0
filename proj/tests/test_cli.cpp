#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "config.hpp"
#include "medfront/datasets/manifest.hpp"
#include "medfront/datasets/wav.hpp"
#include "medfront/frontends/feature_io.hpp"

using namespace medfront;
using namespace medfront::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void spit(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

// Drives the installed binary through the shell, capturing both streams.
CliResult run_cli(const std::string& args, const fs::path& scratch) {
  fs::create_directories(scratch);
  const fs::path out_path = scratch / "stdout.txt";
  const fs::path err_path = scratch / "stderr.txt";
  const std::string cmd = std::string(MEDFRONT_BIN) + " " + args + " > " +
                          out_path.string() + " 2> " + err_path.string();
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

// Shared small-scale run setup: 60 one-second synthetic files at 1 kHz.
std::string base_config(const fs::path& root, const std::string& output_dir) {
  return "dataset = synthetic\n"
         "corpus_dir = " + (root / "corpus").string() + "\n"
         "output_dir = " + (root / output_dir).string() + "\n"
         "seed = 5\n"
         "synthetic_count = 60\n"
         "synthetic_rate = 1000\n"
         "synthetic_duration_s = 1\n"
         "sample_rate = 1000\n"
         "segment_s = 1\n"
         "band_low_hz = 50\n"
         "band_high_hz = 400\n"
         "n_filters = 16\n"
         "gabor_length = 101\n"
         "batch_size = 16\n"
         "lr = 0.001\n"
         "stop_at_val_ba = 0.9\n"
         "extract_count = 2\n";
}

}  // namespace

TEST_CASE("config defaults serialize, re-parse, and are all documented") {
  const RunConfig defaults;
  const std::string text = serialize_config(defaults);
  const RunConfig parsed = parse_config_text(text, "echo");
  CHECK(serialize_config(parsed) == text);

  const auto& docs = config_key_docs();
  CHECK(docs.size() ==
        static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')));
  for (const auto& doc : docs) {
    CHECK(!doc.help.empty());
    CHECK(text.find(doc.key + " = " + doc.preset + "\n") != std::string::npos);
  }
}

TEST_CASE("config parsing pins errors to lines") {
  CHECK_THROWS_WITH_AS(parse_config_text("seed = 1\nbogus = 2\n", "f"),
                       "config: f:2: unknown key 'bogus'",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_config_text("seed = 1\nseed = 2\n", "f"),
                       "config: f:2: repeated key 'seed'",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_config_text("seed\n", "f"),
                       "config: f:1: expected key = value, got 'seed'",
                       std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("epochs = three\n", "f"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("group_by_patient = yes\n", "f"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("lr = 1e-3junk\n", "f"),
                  std::invalid_argument);

  // Comments, blank lines, CRLF endings, and '=' in values all parse.
  const RunConfig cfg = parse_config_text(
      "# a comment\r\n\r\n  epochs = 7 \r\ncorpus_dir = a=b\r\n", "f");
  CHECK(cfg.epochs == 7);
  CHECK(cfg.corpus_dir == "a=b");
}

TEST_CASE("resolve fills dataset defaults and validates") {
  RunConfig cfg;
  cfg.dataset = "respiratory";
  RunConfig r = resolve(cfg);
  CHECK(r.band_low_hz == 120.0);
  CHECK(r.band_high_hz == 1800.0);
  CHECK(r.fmin_hz == 120.0);
  CHECK(r.fmax_hz == 1800.0);

  cfg.dataset = "heartbeat";
  r = resolve(cfg);
  CHECK(r.band_low_hz == 25.0);
  CHECK(r.band_high_hz == 400.0);

  cfg.dataset = "synthetic";
  r = resolve(cfg);
  CHECK(r.band_low_hz == 25.0);
  CHECK(r.band_high_hz == 1000.0);
  CHECK(r.labels_csv == (fs::path("corpus") / "labels.csv").string());
  CHECK(r.manifest == (fs::path("out") / "manifest.csv").string());
  CHECK(r.checkpoint == (fs::path("out") / "checkpoint.mfck").string());

  cfg.band_low_hz = 60.0;
  cfg.band_high_hz = 900.0;
  cfg.fmax_hz = 800.0;  // explicit filter ceiling below the band edge
  r = resolve(cfg);
  CHECK(r.fmin_hz == 60.0);
  CHECK(r.fmax_hz == 800.0);

  RunConfig bad;
  bad.band_high_hz = 3000.0;  // >= the 4 kHz target's Nyquist
  bad.band_low_hz = 120.0;
  CHECK_THROWS_AS(resolve(bad), std::invalid_argument);
  bad = RunConfig{};
  bad.dataset = "speech";
  CHECK_THROWS_AS(resolve(bad), std::invalid_argument);
  bad = RunConfig{};
  bad.val_fraction = 0.2;  // fractions now sum to 1.05
  CHECK_THROWS_AS(resolve(bad), std::invalid_argument);
  bad = RunConfig{};
  bad.butterworth_order = 3;
  CHECK_THROWS_AS(resolve(bad), std::invalid_argument);
  bad = RunConfig{};
  bad.frontend = "stft";
  CHECK_THROWS_AS(resolve(bad), std::invalid_argument);
  bad = RunConfig{};
  bad.conv_blocks = "8:3";  // not channels:kernel:pool
  CHECK_THROWS_AS(resolve(bad), std::invalid_argument);
  bad = RunConfig{};
  bad.extract_frontends = "mel,mel";
  CHECK_THROWS_AS(resolve(bad), std::invalid_argument);
}

TEST_CASE("config strings map onto the module configs") {
  RunConfig cfg;
  cfg.conv_blocks = "4:3:2, 8:5:1";
  cfg.dense_units = "16, 8";
  cfg.activation = "swish";
  cfg.architecture = "vgg_style";
  cfg.frontend = "nnaudio";
  cfg.compression = "log";
  const auto mc = model_config(cfg);
  REQUIRE(mc.conv_blocks.size() == 2);
  CHECK(mc.conv_blocks[1].channels == 8);
  CHECK(mc.conv_blocks[1].kernel == 5);
  CHECK(mc.conv_blocks[1].pool == 1);
  CHECK(mc.dense_units == std::vector<std::size_t>({16, 8}));
  CHECK(mc.activation == model::Activation::kSwish);
  CHECK(mc.architecture == model::Architecture::kVggStyle);

  cfg.sample_rate = 1000;
  cfg.fmin_hz = 50.0;
  cfg.fmax_hz = 400.0;
  const auto fc = frontend_config(cfg);
  CHECK(fc.sample_rate == 1000);
  CHECK(fc.compression == frontends::Compression::kLog);

  const auto tc = train_config(cfg);
  CHECK(tc.frontend == frontends::FrontendKind::kNnAudio);

  const auto kinds = parse_frontend_list("leaf, mel");
  REQUIRE(kinds.size() == 2);
  CHECK(kinds[0] == frontends::FrontendKind::kLeaf);
  CHECK(kinds[1] == frontends::FrontendKind::kMel);
}

TEST_CASE("the binary drives the full synthetic pipeline") {
  const fs::path root = fs::temp_directory_path() / "medfront_cli";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path scratch = root / "scratch";

  // --- preprocess ------------------------------------------------------
  const fs::path cfg_mel = root / "mel.cfg";
  spit(cfg_mel, base_config(root, "run_mel") + "frontend = mel\nepochs = 12\n");
  auto r = run_cli("preprocess --config " + cfg_mel.string(), scratch);
  INFO(r.err);
  REQUIRE(r.code == 0);
  CHECK(r.err.find(" Hz -> 1000 Hz") != std::string::npos);
  CHECK(fs::exists(root / "run_mel" / "manifest.csv"));
  CHECK(fs::exists(root / "run_mel" / "effective_config.cfg"));
  CHECK(slurp(root / "run_mel" / "preprocess_errors.txt").empty());

  const auto manifest = datasets::read_manifest(root / "run_mel" /
                                                "manifest.csv");
  CHECK(manifest.entries.size() == 60);
  std::size_t train_n = 0, val_n = 0, test_n = 0;
  for (const auto& e : manifest.entries) {
    if (e.partition == datasets::Partition::kTrain) ++train_n;
    if (e.partition == datasets::Partition::kVal) ++val_n;
    if (e.partition == datasets::Partition::kTest) ++test_n;
  }
  CHECK(train_n == 45);
  CHECK(val_n == 9);
  CHECK(test_n == 6);
  const auto seg0 = datasets::load_wav(
      (root / "run_mel" / manifest.entries[0].segment_path).string());
  CHECK(seg0.sample_rate == 1000);
  CHECK(seg0.samples.size() == 1000);

  // The echoed config is itself a valid, resolvable run configuration.
  const RunConfig echoed = parse_config_text(
      slurp(root / "run_mel" / "effective_config.cfg"), "echo");
  CHECK(echoed.band_low_hz == 50.0);
  CHECK(echoed.fmin_hz == 50.0);  // resolution is baked into the echo
  CHECK(resolve(echoed).seed == 5);

  // Same config in a different root -> byte-identical manifest.
  const fs::path root2 = root / "rerun";
  const fs::path cfg_rerun = root2 / "mel.cfg";
  spit(cfg_rerun,
       base_config(root2, "run_mel") + "frontend = mel\nepochs = 12\n");
  r = run_cli("preprocess --config " + cfg_rerun.string(), scratch);
  REQUIRE(r.code == 0);
  CHECK(slurp(root / "run_mel" / "manifest.csv") ==
        slurp(root2 / "run_mel" / "manifest.csv"));

  // --- extract before training: learnable frontends warn ----------------
  r = run_cli("extract --config " + cfg_mel.string(), scratch);
  REQUIRE(r.code == 0);
  CHECK(r.err.find("leaf stays at initialization") != std::string::npos);
  CHECK(r.err.find("nnaudio stays at initialization") != std::string::npos);
  const fs::path features = root / "run_mel" / "features";
  for (const char* kind : {"mel", "leaf", "nnaudio"}) {
    for (const char* seg : {"seg_00000", "seg_00001"}) {
      CHECK(fs::exists(features /
                       (std::string(seg) + "." + kind + ".mfft")));
      CHECK(fs::exists(features / (std::string(seg) + "." + kind + ".pgm")));
    }
  }
  const auto dump = frontends::read_feature_file(
      (features / "seg_00000.mel.mfft").string());
  CHECK(dump.kind == frontends::FrontendKind::kMel);
  CHECK(dump.map.frames == 98);
  CHECK(dump.map.channels == 16);
  CHECK(slurp(features / "seg_00000.mel.pgm").rfind("P5\n98 16\n255\n", 0) ==
        0);

  // --- train all three frontends ----------------------------------------
  r = run_cli("train --config " + cfg_mel.string(), scratch);
  INFO(r.err);
  REQUIRE(r.code == 0);
  CHECK(r.err.find("train: epoch 1 loss") != std::string::npos);
  CHECK(fs::exists(root / "run_mel" / "checkpoint.mfck"));
  CHECK(fs::exists(root / "run_mel" / "checkpoint.mfck.json"));
  const std::string log_csv = slurp(root / "run_mel" / "training_log.csv");
  CHECK(log_csv.rfind("epoch,train_loss", 0) == 0);

  // Retraining from the same manifest reproduces the checkpoint bytes.
  const fs::path cfg_repeat = root / "mel_repeat.cfg";
  spit(cfg_repeat, base_config(root, "run_mel_repeat") +
                       "frontend = mel\nepochs = 12\nmanifest = " +
                       (root / "run_mel" / "manifest.csv").string() + "\n");
  r = run_cli("train --config " + cfg_repeat.string(), scratch);
  REQUIRE(r.code == 0);
  CHECK(slurp(root / "run_mel" / "checkpoint.mfck") ==
        slurp(root / "run_mel_repeat" / "checkpoint.mfck"));
  CHECK(slurp(root / "run_mel" / "checkpoint.mfck.json") ==
        slurp(root / "run_mel_repeat" / "checkpoint.mfck.json"));
  CHECK(log_csv == slurp(root / "run_mel_repeat" / "training_log.csv"));

  const std::string shared_manifest =
      "manifest = " + (root / "run_mel" / "manifest.csv").string() + "\n";
  const fs::path cfg_leaf = root / "leaf.cfg";
  spit(cfg_leaf, base_config(root, "run_leaf") +
                     "frontend = leaf\nepochs = 8\n" + shared_manifest);
  r = run_cli("train --config " + cfg_leaf.string(), scratch);
  INFO(r.err);
  REQUIRE(r.code == 0);

  const fs::path cfg_nn = root / "nnaudio.cfg";
  spit(cfg_nn, base_config(root, "run_nnaudio") +
                   "frontend = nnaudio\nepochs = 8\n" + shared_manifest);
  r = run_cli("train --config " + cfg_nn.string(), scratch);
  INFO(r.err);
  REQUIRE(r.code == 0);

  // Extract with a matching checkpoint restores the learned filters.
  const fs::path cfg_leaf_extract = root / "leaf_extract.cfg";
  spit(cfg_leaf_extract,
       base_config(root, "run_leaf") + "frontend = leaf\n" + shared_manifest +
           "extract_frontends = leaf\ncheckpoint = " +
           (root / "run_leaf" / "checkpoint.mfck").string() + "\n");
  r = run_cli("extract --config " + cfg_leaf_extract.string(), scratch);
  REQUIRE(r.code == 0);
  CHECK(r.err.find("leaf: loaded parameters from") != std::string::npos);

  // --- eval --------------------------------------------------------------
  r = run_cli("eval --config " + cfg_mel.string(), scratch);
  INFO(r.err);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("Balanced Accuracy") != std::string::npos);
  CHECK(r.out == slurp(root / "run_mel" / "eval.txt"));
  CHECK(r.err.find("eval: 6 test segments") != std::string::npos);

  // --- compare ------------------------------------------------------------
  const fs::path cfg_cmp = root / "compare.cfg";
  spit(cfg_cmp,
       base_config(root, "run_compare") + shared_manifest +
           "checkpoint_mel = " +
           (root / "run_mel" / "checkpoint.mfck").string() + "\n" +
           "checkpoint_leaf = " +
           (root / "run_leaf" / "checkpoint.mfck").string() + "\n" +
           "checkpoint_nnaudio = " +
           (root / "run_nnaudio" / "checkpoint.mfck").string() + "\n");
  r = run_cli("compare --config " + cfg_cmp.string(), scratch);
  INFO(r.err);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("Mel-LEAF") != std::string::npos);
  CHECK(r.out.find("LEAF-nnAudio") != std::string::npos);
  const std::string csv = slurp(root / "run_compare" / "comparison.csv");
  CHECK(csv.rfind("pair,b,c,statistic,p_raw,p_holm,significant\n", 0) == 0);

  // Swapped checkpoint kinds are a data error.
  const fs::path cfg_swapped = root / "swapped.cfg";
  spit(cfg_swapped,
       base_config(root, "run_swapped") + shared_manifest +
           "checkpoint_mel = " +
           (root / "run_leaf" / "checkpoint.mfck").string() + "\n" +
           "checkpoint_leaf = " +
           (root / "run_mel" / "checkpoint.mfck").string() + "\n" +
           "checkpoint_nnaudio = " +
           (root / "run_nnaudio" / "checkpoint.mfck").string() + "\n");
  r = run_cli("compare --config " + cfg_swapped.string(), scratch);
  CHECK(r.code == 2);
  CHECK(r.err.find("expected 'mel'") != std::string::npos);

  // A manifest that differs from the training one is rejected.
  // The copy lives next to the original so its segment paths still resolve.
  std::string edited = slurp(root / "run_mel" / "manifest.csv");
  const auto pos = edited.find("0.000000");
  REQUIRE(pos != std::string::npos);
  edited.replace(pos, 8, "0.100000");
  spit(root / "run_mel" / "edited_manifest.csv", edited);
  const fs::path cfg_mismatch = root / "mismatch.cfg";
  spit(cfg_mismatch,
       base_config(root, "run_mismatch") + "manifest = " +
           (root / "run_mel" / "edited_manifest.csv").string() + "\n" +
           "checkpoint_mel = " +
           (root / "run_mel" / "checkpoint.mfck").string() + "\n" +
           "checkpoint_leaf = " +
           (root / "run_leaf" / "checkpoint.mfck").string() + "\n" +
           "checkpoint_nnaudio = " +
           (root / "run_nnaudio" / "checkpoint.mfck").string() + "\n");
  r = run_cli("compare --config " + cfg_mismatch.string(), scratch);
  CHECK(r.code == 2);
  CHECK(r.err.find("identical test partitions") != std::string::npos);

  // --- exit codes ---------------------------------------------------------
  const fs::path cfg_bad = root / "bad.cfg";
  spit(cfg_bad, "no_such_key = 1\n");
  r = run_cli("train --config " + cfg_bad.string(), scratch);
  CHECK(r.code == 1);
  CHECK(r.err.find("unknown key") != std::string::npos);

  const fs::path cfg_missing = root / "missing.cfg";
  spit(cfg_missing, base_config(root, "run_missing") + shared_manifest);
  r = run_cli("eval --config " + cfg_missing.string(), scratch);
  CHECK(r.code == 2);  // no checkpoint was trained into run_missing

  const fs::path cfg_blowup = root / "blowup.cfg";
  std::string blowup_text = base_config(root, "run_blowup") + shared_manifest +
                            "frontend = mel\nepochs = 2\n";
  const auto lr_pos = blowup_text.find("lr = 0.001\n");
  REQUIRE(lr_pos != std::string::npos);
  blowup_text.replace(lr_pos, 11, "lr = 1e200\n");  // overflow -> exit 3
  spit(cfg_blowup, blowup_text);
  r = run_cli("train --config " + cfg_blowup.string(), scratch);
  CHECK(r.code == 3);

  r = run_cli("train", scratch);  // --config is required
  CHECK(r.code == 1);
  r = run_cli("--help", scratch);
  CHECK(r.code == 0);
  CHECK(r.out.find("preprocess") != std::string::npos);

  const fs::path cfg_nocorpus = root / "nocorpus.cfg";
  spit(cfg_nocorpus, "dataset = respiratory\ncorpus_dir = " +
                         (root / "absent").string() + "\noutput_dir = " +
                         (root / "run_nocorpus").string() + "\n");
  r = run_cli("preprocess --config " + cfg_nocorpus.string(), scratch);
  CHECK(r.code == 2);
  CHECK(r.err.find("does not exist") != std::string::npos);
}

TEST_CASE("respiratory and heartbeat corpora preprocess through the library") {
  const fs::path root = fs::temp_directory_path() / "medfront_cli_corpora";
  fs::remove_all(root);

  // Heartbeat-style: flat recordings + labels.csv, fixed-length chunking.
  {
    const fs::path corpus = root / "hb";
    fs::create_directories(corpus);
    std::string labels = "file,label\n";
    for (int i = 0; i < 12; ++i) {
      signal::Waveform w;
      w.sample_rate = 2000;
      w.samples.assign(4000, 0.0);  // 2 s
      for (std::size_t k = 0; k < w.samples.size(); ++k) {
        w.samples[k] = 0.3 * std::sin(2.0 * 3.141592653589793 * 60.0 *
                                      static_cast<double>(k) / 2000.0);
      }
      char name[32];
      std::snprintf(name, sizeof(name), "hb%02d.wav", i);
      datasets::write_wav((corpus / name).string(), w,
                          datasets::WavFormat::kPcm16);
      labels += std::string(name) + "," + (i % 2 ? "abnormal" : "normal") +
                "\n";
    }
    spit(corpus / "labels.csv", labels);

    RunConfig cfg;
    cfg.dataset = "heartbeat";
    cfg.corpus_dir = corpus.string();
    cfg.output_dir = (root / "hb_out").string();
    cfg.segment_s = 1.0;
    std::ostringstream out, err;
    cmd_preprocess(resolve(cfg), out, err);
    const auto manifest =
        datasets::read_manifest(root / "hb_out" / "manifest.csv");
    CHECK(manifest.entries.size() == 24);  // two 1 s chunks per recording
    const auto seg = datasets::load_wav(
        (root / "hb_out" / manifest.entries[0].segment_path).string());
    CHECK(seg.sample_rate == 4000);  // resampled from 2 kHz
    CHECK(seg.samples.size() == 4000);
  }

  // Respiratory-style: per-recording cycle annotations; a recording with a
  // corrupt sidecar lands in the error file and the run continues.
  {
    const fs::path corpus = root / "resp";
    fs::create_directories(corpus);
    for (int i = 0; i < 6; ++i) {
      signal::Waveform w;
      w.sample_rate = 4000;
      w.samples.assign(12000, 0.0);  // 3 s
      for (std::size_t k = 0; k < w.samples.size(); ++k) {
        w.samples[k] = 0.2 * std::sin(2.0 * 3.141592653589793 * 300.0 *
                                      static_cast<double>(k) / 4000.0);
      }
      char name[48];
      std::snprintf(name, sizeof(name), "1%02d_1b1_Al.wav", i);
      datasets::write_wav((corpus / name).string(), w,
                          datasets::WavFormat::kPcm16);
      const fs::path sidecar = corpus / (std::string(name).substr(
                                             0, std::string(name).size() - 4) +
                                         ".txt");
      if (i == 5) {
        spit(sidecar, "not annotations\n");
      } else {
        spit(sidecar, "0.0\t1.4\t0\t0\n1.4\t2.9\t1\t0\n");
      }
    }

    RunConfig cfg;
    cfg.dataset = "respiratory";
    cfg.corpus_dir = corpus.string();
    cfg.output_dir = (root / "resp_out").string();
    std::ostringstream out, err;
    cmd_preprocess(resolve(cfg), out, err);
    const auto manifest =
        datasets::read_manifest(root / "resp_out" / "manifest.csv");
    CHECK(manifest.entries.size() == 10);  // 5 good files x 2 cycles
    std::size_t abnormal = 0;
    for (const auto& e : manifest.entries) {
      if (e.label == datasets::Label::kAbnormal) ++abnormal;
      CHECK(e.patient_id.substr(0, 2) == "10");
    }
    CHECK(abnormal == 5);  // the crackle cycle of each good file
    const std::string errors =
        slurp(root / "resp_out" / "preprocess_errors.txt");
    CHECK(errors.find("105_1b1_Al.txt") != std::string::npos);
    CHECK(err.str().find("preprocess: error: 105_1b1_Al.wav") !=
          std::string::npos);
  }
}
