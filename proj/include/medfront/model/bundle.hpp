#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "medfront/autodiff/tensor.hpp"
#include "medfront/frontends/frontend.hpp"
#include "medfront/model/cnn.hpp"
#include "medfront/model/trainer.hpp"

namespace medfront::model {

// Everything needed to rebuild a trained classifier: the weight checkpoint
// (model + frontend + standardize.mean/std tensors) plus the configs that
// shaped them and the digest of the manifest it was trained on.
struct Bundle {
  ModelConfig model_cfg;
  TrainConfig train_cfg;
  frontends::FrontendConfig frontend_cfg;
  std::string manifest_digest;
  std::size_t input_frames = 0;
  std::size_t input_filters = 0;
  std::vector<std::pair<std::string, autodiff::Tensor>> params;
};

// Writes `path` in the binary checkpoint format and `path + ".json"` as the
// config sidecar. Both byte-deterministic for identical inputs.
void save_bundle(const std::filesystem::path& path, const Bundle& bundle);

// Reads both files back; malformed content throws DataError.
Bundle load_bundle(const std::filesystem::path& path);

// Splits bundle.params into the standardizer tensors and hands the rest to
// assign_parameters over the rebuilt model + frontend.
Standardizer restore_into(const Bundle& bundle, Model& model,
                          frontends::Frontend& frontend);

}  // namespace medfront::model
