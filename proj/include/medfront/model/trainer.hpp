#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "medfront/autodiff/tensor.hpp"
#include "medfront/datasets/types.hpp"
#include "medfront/frontends/frontend.hpp"
#include "medfront/model/cnn.hpp"
#include "medfront/signal/waveform.hpp"

namespace medfront::model {

struct TrainConfig {
  std::size_t epochs = 1;
  std::size_t batch_size = 64;
  double lr = 1e-5;
  std::uint64_t seed = 0;
  frontends::FrontendKind frontend = frontends::FrontendKind::kMel;
  std::size_t metrics_every = 1;  // epochs between validation passes
  double stop_at_val_ba = 2.0;    // stop once val BA reaches this; > 1 = never

  void validate() const;  // epochs >= 1, batch_size >= 1, metrics_every >= 1
};

// One preprocessed segment held in memory; `id` names it in error messages.
struct Example {
  signal::Waveform waveform;
  datasets::Label label = datasets::Label::kNormal;
  std::string id;
};

// Per-channel feature statistics, frozen from the frontend's initial output
// over the train split and stored in the checkpoint alongside the weights.
struct Standardizer {
  autodiff::Tensor mean;  // (channels)
  autodiff::Tensor std;   // (channels), clamped away from zero
};

Standardizer fit_standardizer(frontends::Frontend& frontend,
                              const std::vector<Example>& train_set);

// (feature - mean) / std per channel, on the tape.
autodiff::Tensor standardize(autodiff::Tape& tape, const Standardizer& s,
                             const autodiff::Tensor& feature);

struct EpochRow {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  bool validated = false;
  double val_balanced_accuracy = 0.0;
  double val_tpr = 0.0;
  double val_tnr = 0.0;
};

// CSV with header epoch,train_loss,val_balanced_accuracy,val_tpr,val_tnr;
// validation columns are empty on epochs the cadence skipped.
std::string training_log_csv(const std::vector<EpochRow>& log);

struct TrainResult {
  std::vector<EpochRow> log;
  // Deep copies of model + frontend parameters at the best validation
  // balanced accuracy (the retained checkpoint).
  std::vector<std::pair<std::string, autodiff::Tensor>> best_params;
  double best_val_ba = -1.0;
  std::size_t best_epoch = 0;
  std::size_t steps = 0;  // optimizer steps taken
};

// Seeded mini-batch training: per epoch, shuffle, mean cross-entropy per
// batch, backward, one Adam step over model + frontend parameters, then
// frontend clamping. Validation runs on the cadence epochs and the last
// epoch. A non-finite forward anywhere aborts with the batch's example ids.
TrainResult train(Model& model, frontends::Frontend& frontend,
                  const Standardizer& stand,
                  const std::vector<Example>& train_set,
                  const std::vector<Example>& val_set, const TrainConfig& tc);

struct Prediction {
  datasets::Label label = datasets::Label::kNormal;
  std::vector<double> probs;  // softmax over classes, sums to 1
};

// Deterministic eval-mode forward (dropout off, nothing taped).
Prediction predict_one(Model& model, frontends::Frontend& frontend,
                       const Standardizer& stand, const signal::Waveform& w);

std::vector<Prediction> predict(Model& model, frontends::Frontend& frontend,
                                const Standardizer& stand,
                                const std::vector<Example>& examples);

// Copies values of matching names from `source` into `target`; a missing
// name or shape mismatch throws std::invalid_argument.
void assign_parameters(
    const std::vector<std::pair<std::string, autodiff::Tensor>>& target,
    const std::vector<std::pair<std::string, autodiff::Tensor>>& source);

}  // namespace medfront::model
