#include "medfront/model/bundle.hpp"

#include <fstream>

#include <json.hpp>

#include "medfront/autodiff/checkpoint.hpp"
#include "medfront/errors.hpp"

namespace medfront::model {

namespace {

using nlohmann::json;

constexpr const char* kBundleFormat = "medfront-bundle v1";

json model_cfg_to_json(const ModelConfig& cfg) {
  json blocks = json::array();
  for (const auto& b : cfg.conv_blocks) {
    blocks.push_back({b.channels, b.kernel, b.pool});
  }
  return {{"architecture", architecture_name(cfg.architecture)},
          {"conv_blocks", blocks},
          {"dense_units", cfg.dense_units},
          {"dropout_p", cfg.dropout_p},
          {"activation", activation_name(cfg.activation)},
          {"num_classes", cfg.num_classes}};
}

ModelConfig model_cfg_from_json(const json& j) {
  ModelConfig cfg;
  cfg.architecture = architecture_from_name(j.at("architecture"));
  for (const auto& b : j.at("conv_blocks")) {
    cfg.conv_blocks.push_back({b.at(0).get<std::size_t>(),
                               b.at(1).get<std::size_t>(),
                               b.at(2).get<std::size_t>()});
  }
  cfg.dense_units = j.at("dense_units").get<std::vector<std::size_t>>();
  cfg.dropout_p = j.at("dropout_p");
  cfg.activation = activation_from_name(j.at("activation"));
  cfg.num_classes = j.at("num_classes");
  return cfg;
}

json train_cfg_to_json(const TrainConfig& cfg) {
  return {{"epochs", cfg.epochs},
          {"batch_size", cfg.batch_size},
          {"lr", cfg.lr},
          {"seed", cfg.seed},
          {"frontend", frontends::frontend_name(cfg.frontend)},
          {"metrics_every", cfg.metrics_every},
          {"stop_at_val_ba", cfg.stop_at_val_ba}};
}

TrainConfig train_cfg_from_json(const json& j) {
  TrainConfig cfg;
  cfg.epochs = j.at("epochs");
  cfg.batch_size = j.at("batch_size");
  cfg.lr = j.at("lr");
  cfg.seed = j.at("seed");
  cfg.frontend = frontends::frontend_from_name(j.at("frontend"));
  cfg.metrics_every = j.at("metrics_every");
  cfg.stop_at_val_ba = j.at("stop_at_val_ba");
  return cfg;
}

json frontend_cfg_to_json(const frontends::FrontendConfig& cfg) {
  return {{"window_ms", cfg.window_ms},
          {"hop_ms", cfg.hop_ms},
          {"n_filters", cfg.n_filters},
          {"fmin_hz", cfg.fmin_hz},
          {"fmax_hz", cfg.fmax_hz},
          {"sample_rate", cfg.sample_rate},
          {"compression",
           cfg.compression == frontends::Compression::kPcen ? "pcen" : "log"},
          {"n_fft", cfg.n_fft},
          {"log_eps", cfg.log_eps},
          {"gabor_length", cfg.gabor_length},
          {"pcen_alpha", cfg.pcen_alpha},
          {"pcen_delta", cfg.pcen_delta},
          {"pcen_root", cfg.pcen_root},
          {"pcen_s", cfg.pcen_s},
          {"pcen_eps", cfg.pcen_eps}};
}

frontends::FrontendConfig frontend_cfg_from_json(const json& j) {
  frontends::FrontendConfig cfg;
  cfg.window_ms = j.at("window_ms");
  cfg.hop_ms = j.at("hop_ms");
  cfg.n_filters = j.at("n_filters");
  cfg.fmin_hz = j.at("fmin_hz");
  cfg.fmax_hz = j.at("fmax_hz");
  cfg.sample_rate = j.at("sample_rate");
  const std::string compression = j.at("compression");
  if (compression == "pcen") {
    cfg.compression = frontends::Compression::kPcen;
  } else if (compression == "log") {
    cfg.compression = frontends::Compression::kLog;
  } else {
    throw DataError("load_bundle: unknown compression '" + compression + "'");
  }
  cfg.n_fft = j.at("n_fft");
  cfg.log_eps = j.at("log_eps");
  cfg.gabor_length = j.at("gabor_length");
  cfg.pcen_alpha = j.at("pcen_alpha");
  cfg.pcen_delta = j.at("pcen_delta");
  cfg.pcen_root = j.at("pcen_root");
  cfg.pcen_s = j.at("pcen_s");
  cfg.pcen_eps = j.at("pcen_eps");
  return cfg;
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".json");
}

}  // namespace

void save_bundle(const std::filesystem::path& path, const Bundle& bundle) {
  autodiff::save_checkpoint(path.string(), bundle.params);

  const json j = {{"format", kBundleFormat},
                  {"manifest_digest", bundle.manifest_digest},
                  {"input",
                   {{"frames", bundle.input_frames},
                    {"filters", bundle.input_filters}}},
                  {"model", model_cfg_to_json(bundle.model_cfg)},
                  {"train", train_cfg_to_json(bundle.train_cfg)},
                  {"frontend_config", frontend_cfg_to_json(bundle.frontend_cfg)}};
  std::ofstream out(sidecar_path(path), std::ios::binary);
  if (!out) {
    throw DataError("save_bundle: cannot open " + sidecar_path(path).string());
  }
  out << j.dump(2) << '\n';
  if (!out) {
    throw DataError("save_bundle: failed writing " +
                    sidecar_path(path).string());
  }
}

Bundle load_bundle(const std::filesystem::path& path) {
  Bundle bundle;
  bundle.params = autodiff::load_checkpoint(path.string());

  std::ifstream in(sidecar_path(path), std::ios::binary);
  if (!in) {
    throw DataError("load_bundle: cannot open " + sidecar_path(path).string());
  }
  json j;
  try {
    in >> j;
    if (j.at("format") != kBundleFormat) {
      throw DataError("load_bundle: " + sidecar_path(path).string() +
                      " is not a '" + kBundleFormat + "' sidecar");
    }
    bundle.manifest_digest = j.at("manifest_digest");
    bundle.input_frames = j.at("input").at("frames");
    bundle.input_filters = j.at("input").at("filters");
    bundle.model_cfg = model_cfg_from_json(j.at("model"));
    bundle.train_cfg = train_cfg_from_json(j.at("train"));
    bundle.frontend_cfg = frontend_cfg_from_json(j.at("frontend_config"));
  } catch (const json::exception& e) {
    throw DataError("load_bundle: " + sidecar_path(path).string() + ": " +
                    e.what());
  }
  return bundle;
}

Standardizer restore_into(const Bundle& bundle, Model& model,
                          frontends::Frontend& frontend) {
  Standardizer stand;
  std::vector<std::pair<std::string, autodiff::Tensor>> weights;
  for (const auto& [name, tensor] : bundle.params) {
    if (name == "standardize.mean") {
      stand.mean = tensor;
    } else if (name == "standardize.std") {
      stand.std = tensor;
    } else {
      weights.emplace_back(name, tensor);
    }
  }
  if (!stand.mean.defined() || !stand.std.defined()) {
    throw DataError("load_bundle: checkpoint lacks standardization tensors");
  }
  auto target = model.parameters();
  for (const auto& p : frontend.parameters()) target.push_back(p);
  assign_parameters(target, weights);
  return stand;
}

}  // namespace medfront::model
