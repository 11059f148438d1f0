#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "medfront/autodiff/rng.hpp"
#include "medfront/autodiff/tensor.hpp"

namespace medfront::model {

enum class Architecture { kCompact, kVggStyle };
enum class Activation { kRelu, kSwish };

std::string architecture_name(Architecture a);
Architecture architecture_from_name(const std::string& name);
std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

// One conv stage: `channels` output maps from a square `kernel` with same
// padding, then max pooling by `pool` (pool <= 1 skips the pooling).
struct ConvBlock {
  std::size_t channels = 0;
  std::size_t kernel = 3;
  std::size_t pool = 2;
};

struct ModelConfig {
  Architecture architecture = Architecture::kCompact;
  std::vector<ConvBlock> conv_blocks;      // empty = architecture preset
  std::vector<std::size_t> dense_units;    // hidden widths; empty = preset
  double dropout_p = 0.5;
  Activation activation = Activation::kRelu;
  std::size_t num_classes = 2;

  // Copy with the architecture's preset blocks/units filled in where the
  // explicit lists are empty. compact: 8@3 pool 2, 16@3 pool 2, dense 32.
  // vgg_style: the 13-conv/5-pool stack with dense 4096, 4096.
  ModelConfig resolved() const;

  // On the resolved config: >= 1 conv block, dropout_p in [0, 1),
  // num_classes >= 2, no zero-sized layer.
  void validate() const;
};

// Feature-map classifier: the (frames x filters) map is a one-channel image
// run through conv/pool blocks, flattened, then dense layers with dropout
// before each of the last two (the hidden layer feeding the logits and the
// logits layer itself).
class Model {
 public:
  // He-initializes all weights from `rng` and shape-propagates the input,
  // throwing std::invalid_argument when a block exhausts the feature map.
  Model(const ModelConfig& cfg, std::size_t frames, std::size_t filters,
        autodiff::Rng& rng);

  // feature: (frames x filters) -> logits (num_classes). Train mode applies
  // dropout using `rng`; eval mode is deterministic and ignores it.
  autodiff::Tensor forward(autodiff::Tape& tape,
                           const autodiff::Tensor& feature, bool train,
                           autodiff::Rng& rng);

  std::vector<std::pair<std::string, autodiff::Tensor>> parameters() const;

  const ModelConfig& config() const { return cfg_; }
  std::size_t input_frames() const { return frames_; }
  std::size_t input_filters() const { return filters_; }

 private:
  struct ConvLayer {
    autodiff::Tensor kernel;  // (c_out x c_in x k x k)
    autodiff::Tensor bias;    // (c_out)
    std::size_t pool = 1;
  };
  struct DenseLayer {
    autodiff::Tensor weight;  // (out x in)
    autodiff::Tensor bias;    // (out)
  };

  autodiff::Tensor activate(autodiff::Tape& tape,
                            const autodiff::Tensor& x) const;

  ModelConfig cfg_;  // resolved
  std::size_t frames_ = 0;
  std::size_t filters_ = 0;
  std::vector<ConvLayer> conv_;
  std::vector<DenseLayer> dense_;  // hidden layers then the logits layer
};

}  // namespace medfront::model
