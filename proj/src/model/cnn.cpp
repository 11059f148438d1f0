#include "medfront/model/cnn.hpp"

#include <cmath>
#include <stdexcept>

#include "medfront/autodiff/ops.hpp"

namespace medfront::model {

namespace od = autodiff::ops;
using autodiff::Rng;
using autodiff::Tape;
using autodiff::Tensor;

std::string architecture_name(Architecture a) {
  switch (a) {
    case Architecture::kCompact:
      return "compact";
    case Architecture::kVggStyle:
      return "vgg_style";
  }
  throw std::invalid_argument("architecture_name: unknown architecture");
}

Architecture architecture_from_name(const std::string& name) {
  if (name == "compact") return Architecture::kCompact;
  if (name == "vgg_style") return Architecture::kVggStyle;
  throw std::invalid_argument("architecture_from_name: unknown architecture '" +
                              name + "'");
}

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::kRelu:
      return "relu";
    case Activation::kSwish:
      return "swish";
  }
  throw std::invalid_argument("activation_name: unknown activation");
}

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "swish") return Activation::kSwish;
  throw std::invalid_argument("activation_from_name: unknown activation '" +
                              name + "'");
}

ModelConfig ModelConfig::resolved() const {
  ModelConfig out = *this;
  if (out.conv_blocks.empty()) {
    if (architecture == Architecture::kCompact) {
      out.conv_blocks = {{8, 3, 2}, {16, 3, 2}};
    } else {
      out.conv_blocks = {{64, 3, 1},  {64, 3, 2},  {128, 3, 1}, {128, 3, 2},
                         {256, 3, 1}, {256, 3, 1}, {256, 3, 2}, {512, 3, 1},
                         {512, 3, 1}, {512, 3, 2}, {512, 3, 1}, {512, 3, 1},
                         {512, 3, 2}};
    }
  }
  if (out.dense_units.empty()) {
    out.dense_units =
        architecture == Architecture::kCompact
            ? std::vector<std::size_t>{32}
            : std::vector<std::size_t>{4096, 4096};
  }
  return out;
}

void ModelConfig::validate() const {
  const ModelConfig cfg = resolved();
  if (cfg.conv_blocks.empty()) {
    throw std::invalid_argument("model config: need at least one conv block");
  }
  for (const auto& b : cfg.conv_blocks) {
    if (b.channels == 0 || b.kernel == 0) {
      throw std::invalid_argument(
          "model config: conv block with zero channels or kernel");
    }
  }
  for (std::size_t u : cfg.dense_units) {
    if (u == 0) {
      throw std::invalid_argument("model config: zero-width dense layer");
    }
  }
  if (!(cfg.dropout_p >= 0.0 && cfg.dropout_p < 1.0)) {
    throw std::invalid_argument("model config: dropout_p must be in [0, 1)");
  }
  if (cfg.num_classes < 2) {
    throw std::invalid_argument("model config: num_classes must be >= 2");
  }
}

Model::Model(const ModelConfig& cfg, std::size_t frames, std::size_t filters,
             Rng& rng) {
  cfg.validate();
  cfg_ = cfg.resolved();
  frames_ = frames;
  filters_ = filters;
  if (frames == 0 || filters == 0) {
    throw std::invalid_argument("build_model: empty feature map");
  }

  auto he_tensor = [&](std::vector<std::size_t> shape, std::size_t fan_in) {
    Tensor t = Tensor::zeros(std::move(shape), true);
    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (double& v : t.values()) v = stddev * rng.normal();
    return t;
  };

  std::size_t c = 1;
  std::size_t h = frames;
  std::size_t w = filters;
  for (std::size_t i = 0; i < cfg_.conv_blocks.size(); ++i) {
    const auto& b = cfg_.conv_blocks[i];
    const std::size_t pad = b.kernel / 2;
    if (h + 2 * pad < b.kernel || w + 2 * pad < b.kernel) {
      throw std::invalid_argument(
          "build_model: " + std::to_string(h) + "x" + std::to_string(w) +
          " map is smaller than the " + std::to_string(b.kernel) +
          "-wide kernel of block " + std::to_string(i));
    }
    h = h + 2 * pad - b.kernel + 1;
    w = w + 2 * pad - b.kernel + 1;
    if (b.pool > 1) {
      if (h < b.pool || w < b.pool) {
        throw std::invalid_argument(
            "build_model: " + std::to_string(h) + "x" + std::to_string(w) +
            " map cannot be pooled by " + std::to_string(b.pool) +
            " at block " + std::to_string(i));
      }
      h = (h - b.pool) / b.pool + 1;
      w = (w - b.pool) / b.pool + 1;
    }
    ConvLayer layer;
    layer.kernel = he_tensor({b.channels, c, b.kernel, b.kernel},
                             c * b.kernel * b.kernel);
    layer.bias = Tensor::zeros({b.channels}, true);
    layer.pool = b.pool;
    conv_.push_back(std::move(layer));
    c = b.channels;
  }

  std::size_t in = c * h * w;
  std::vector<std::size_t> widths = cfg_.dense_units;
  widths.push_back(cfg_.num_classes);
  for (std::size_t units : widths) {
    DenseLayer layer;
    layer.weight = he_tensor({units, in}, in);
    layer.bias = Tensor::zeros({units}, true);
    dense_.push_back(std::move(layer));
    in = units;
  }
}

Tensor Model::activate(Tape& tape, const Tensor& x) const {
  return cfg_.activation == Activation::kRelu ? od::relu(tape, x)
                                              : od::swish(tape, x);
}

Tensor Model::forward(Tape& tape, const Tensor& feature, bool train,
                      Rng& rng) {
  if (feature.rank() != 2 || feature.shape()[0] != frames_ ||
      feature.shape()[1] != filters_) {
    throw std::invalid_argument(
        "model forward: feature map " + autodiff::shape_string(feature.shape()) +
        " does not match the built " + std::to_string(frames_) + "x" +
        std::to_string(filters_) + " input");
  }
  Tensor x = od::reshape(tape, feature, {1, frames_, filters_});
  for (const auto& layer : conv_) {
    const std::size_t k = layer.kernel.shape()[2];
    x = od::conv2d(tape, x, layer.kernel, layer.bias, 1, k / 2);
    x = activate(tape, x);
    if (layer.pool > 1) x = od::max_pool2d(tape, x, layer.pool, layer.pool);
  }
  x = od::reshape(tape, x, {x.size()});
  for (std::size_t i = 0; i < dense_.size(); ++i) {
    if (i + 2 >= dense_.size()) {
      x = od::dropout(tape, x, cfg_.dropout_p, train, rng);
    }
    x = od::dense(tape, x, dense_[i].weight, dense_[i].bias);
    if (i + 1 < dense_.size()) x = activate(tape, x);
  }
  return x;
}

std::vector<std::pair<std::string, Tensor>> Model::parameters() const {
  std::vector<std::pair<std::string, Tensor>> params;
  for (std::size_t i = 0; i < conv_.size(); ++i) {
    params.emplace_back("model.conv" + std::to_string(i) + ".kernel",
                        conv_[i].kernel);
    params.emplace_back("model.conv" + std::to_string(i) + ".bias",
                        conv_[i].bias);
  }
  for (std::size_t i = 0; i < dense_.size(); ++i) {
    params.emplace_back("model.dense" + std::to_string(i) + ".weight",
                        dense_[i].weight);
    params.emplace_back("model.dense" + std::to_string(i) + ".bias",
                        dense_[i].bias);
  }
  return params;
}

}  // namespace medfront::model
