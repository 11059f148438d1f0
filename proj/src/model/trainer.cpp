#include "medfront/model/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <unordered_map>

#include "medfront/autodiff/adam.hpp"
#include "medfront/autodiff/ops.hpp"
#include "medfront/errors.hpp"
#include "medfront/eval/metrics.hpp"

namespace medfront::model {

namespace od = autodiff::ops;
using autodiff::NoGradGuard;
using autodiff::Rng;
using autodiff::Tape;
using autodiff::Tensor;

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("train config: epochs must be >= 1");
  if (batch_size < 1) {
    throw std::invalid_argument("train config: batch_size must be >= 1");
  }
  if (metrics_every < 1) {
    throw std::invalid_argument("train config: metrics_every must be >= 1");
  }
  if (!(lr > 0.0)) throw std::invalid_argument("train config: lr must be > 0");
}

Standardizer fit_standardizer(frontends::Frontend& frontend,
                              const std::vector<Example>& train_set) {
  if (train_set.empty()) {
    throw std::invalid_argument("fit_standardizer: empty train split");
  }
  std::vector<double> sum;
  std::vector<double> sum_sq;
  std::size_t frames = 0;
  for (const auto& ex : train_set) {
    const auto map = frontend.extract(ex.waveform);
    if (sum.empty()) {
      sum.assign(map.channels, 0.0);
      sum_sq.assign(map.channels, 0.0);
    }
    for (std::size_t f = 0; f < map.frames; ++f) {
      for (std::size_t c = 0; c < map.channels; ++c) {
        const double v = map.at(f, c);
        sum[c] += v;
        sum_sq[c] += v * v;
      }
    }
    frames += map.frames;
  }
  Standardizer s;
  s.mean = Tensor::zeros({sum.size()});
  s.std = Tensor::zeros({sum.size()});
  const double n = static_cast<double>(frames);
  for (std::size_t c = 0; c < sum.size(); ++c) {
    const double mean = sum[c] / n;
    const double var = std::max(sum_sq[c] / n - mean * mean, 0.0);
    s.mean.values()[c] = mean;
    // Constant channels (e.g. silence at the log floor) get unit scale
    // instead of a blow-up.
    s.std.values()[c] = std::max(std::sqrt(var), 1e-6);
  }
  return s;
}

Tensor standardize(Tape& tape, const Standardizer& s, const Tensor& feature) {
  const std::size_t channels = s.mean.size();
  Tensor shift = Tensor::zeros({channels});
  Tensor scale = Tensor::zeros({channels});
  for (std::size_t c = 0; c < channels; ++c) {
    shift.values()[c] = -s.mean.values()[c];
    scale.values()[c] = 1.0 / s.std.values()[c];
  }
  return od::channel_affine(tape, feature, shift, scale);
}

std::string training_log_csv(const std::vector<EpochRow>& log) {
  std::string out = "epoch,train_loss,val_balanced_accuracy,val_tpr,val_tnr\n";
  char buf[160];
  for (const auto& row : log) {
    if (row.validated) {
      std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.6f,%.6f,%.6f\n", row.epoch,
                    row.train_loss, row.val_balanced_accuracy, row.val_tpr,
                    row.val_tnr);
    } else {
      std::snprintf(buf, sizeof(buf), "%zu,%.9g,,,\n", row.epoch,
                    row.train_loss);
    }
    out += buf;
  }
  return out;
}

namespace {

std::vector<datasets::Label> predicted_labels(
    Model& model, frontends::Frontend& frontend, const Standardizer& stand,
    const std::vector<Example>& examples) {
  std::vector<datasets::Label> labels;
  labels.reserve(examples.size());
  for (const auto& ex : examples) {
    labels.push_back(predict_one(model, frontend, stand, ex.waveform).label);
  }
  return labels;
}

std::string batch_ids(const std::vector<Example>& set,
                      const std::vector<std::size_t>& order, std::size_t lo,
                      std::size_t hi) {
  std::string ids;
  for (std::size_t i = lo; i < hi; ++i) {
    if (!ids.empty()) ids += ", ";
    ids += set[order[i]].id.empty() ? "#" + std::to_string(order[i])
                                    : set[order[i]].id;
  }
  return ids;
}

}  // namespace

TrainResult train(Model& model, frontends::Frontend& frontend,
                  const Standardizer& stand,
                  const std::vector<Example>& train_set,
                  const std::vector<Example>& val_set, const TrainConfig& tc) {
  tc.validate();
  if (train_set.empty() || val_set.empty()) {
    throw std::invalid_argument("train: train and val splits must be non-empty");
  }

  auto named_params = model.parameters();
  for (const auto& p : frontend.parameters()) named_params.push_back(p);
  autodiff::Adam optimizer({tc.lr, 0.9, 0.999, 1e-8});
  for (const auto& [name, tensor] : named_params) {
    optimizer.add_parameter(name, tensor);
  }

  Rng rng(tc.seed);
  TrainResult result;
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<datasets::Label> val_truth;
  val_truth.reserve(val_set.size());
  for (const auto& ex : val_set) val_truth.push_back(ex.label);

  for (std::size_t epoch = 1; epoch <= tc.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }

    double loss_sum = 0.0;
    for (std::size_t lo = 0; lo < order.size(); lo += tc.batch_size) {
      const std::size_t hi = std::min(lo + tc.batch_size, order.size());
      Tape tape;
      Tensor batch_loss;
      try {
        for (std::size_t i = lo; i < hi; ++i) {
          const Example& ex = train_set[order[i]];
          Tensor feature = frontend.forward(tape, ex.waveform);
          feature = standardize(tape, stand, feature);
          Tensor logits = model.forward(tape, feature, true, rng);
          Tensor loss = od::softmax_cross_entropy(
              tape, logits, static_cast<int>(ex.label));
          batch_loss =
              batch_loss.defined() ? od::add(tape, batch_loss, loss) : loss;
        }
        batch_loss =
            od::scale(tape, batch_loss, 1.0 / static_cast<double>(hi - lo));
        tape.backward(batch_loss);
      } catch (const NumericError& e) {
        throw NumericError("train: aborted in epoch " + std::to_string(epoch) +
                           " on batch [" + batch_ids(train_set, order, lo, hi) +
                           "]: " + e.what());
      }
      optimizer.step();
      frontend.clamp_parameters();
      ++result.steps;
      loss_sum += batch_loss.item() * static_cast<double>(hi - lo);
    }

    EpochRow row;
    row.epoch = epoch;
    row.train_loss = loss_sum / static_cast<double>(train_set.size());
    if (epoch % tc.metrics_every == 0 || epoch == tc.epochs) {
      const auto preds = predicted_labels(model, frontend, stand, val_set);
      const auto m =
          eval::compute_metrics(eval::count_confusion(preds, val_truth));
      row.validated = true;
      row.val_balanced_accuracy = m.balanced_accuracy;
      row.val_tpr = m.tpr;
      row.val_tnr = m.tnr;
      if (m.balanced_accuracy > result.best_val_ba) {
        result.best_val_ba = m.balanced_accuracy;
        result.best_epoch = epoch;
        result.best_params.clear();
        for (const auto& [name, tensor] : named_params) {
          result.best_params.emplace_back(name, tensor.clone());
        }
      }
    }
    result.log.push_back(row);
    if (row.validated && row.val_balanced_accuracy >= tc.stop_at_val_ba) break;
  }
  return result;
}

Prediction predict_one(Model& model, frontends::Frontend& frontend,
                       const Standardizer& stand, const signal::Waveform& w) {
  if (model.config().num_classes != 2) {
    throw std::invalid_argument(
        "predict: binary labels require num_classes == 2");
  }
  Tape tape;
  NoGradGuard guard(tape);
  Tensor feature = frontend.forward(tape, w);
  feature = standardize(tape, stand, feature);
  Rng unused(0);  // dropout is off in eval mode
  Tensor logits = model.forward(tape, feature, false, unused);
  Tensor probs = od::softmax(tape, logits);

  Prediction out;
  out.probs = probs.values();
  const auto best = std::max_element(out.probs.begin(), out.probs.end());
  out.label = static_cast<datasets::Label>(best - out.probs.begin());
  return out;
}

std::vector<Prediction> predict(Model& model, frontends::Frontend& frontend,
                                const Standardizer& stand,
                                const std::vector<Example>& examples) {
  std::vector<Prediction> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    out.push_back(predict_one(model, frontend, stand, ex.waveform));
  }
  return out;
}

void assign_parameters(
    const std::vector<std::pair<std::string, Tensor>>& target,
    const std::vector<std::pair<std::string, Tensor>>& source) {
  std::unordered_map<std::string, Tensor> by_name;
  for (const auto& [name, tensor] : source) by_name.emplace(name, tensor);
  for (const auto& [name, tensor] : target) {
    const auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw std::invalid_argument("assign_parameters: no value for '" + name +
                                  "'");
    }
    if (it->second.shape() != tensor.shape()) {
      throw std::invalid_argument(
          "assign_parameters: '" + name + "' is " +
          autodiff::shape_string(it->second.shape()) + ", expected " +
          autodiff::shape_string(tensor.shape()));
    }
    tensor.values() = it->second.values();
  }
}

}  // namespace medfront::model
