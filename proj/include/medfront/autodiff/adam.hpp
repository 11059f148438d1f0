#pragma once

#include <string>
#include <utility>
#include <vector>

#include "medfront/autodiff/tensor.hpp"

namespace medfront::autodiff {

struct AdamConfig {
  double lr = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction over a registered set of named parameters.
// step() consumes and zeroes the gradients; a registered parameter whose
// gradient was never written is an error.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  void add_parameter(const std::string& name, Tensor t);

  void step();

  int step_count() const { return step_; }
  const AdamConfig& config() const { return cfg_; }
  const std::vector<std::pair<std::string, Tensor>>& parameters() const {
    return params_;
  }

 private:
  AdamConfig cfg_;
  int step_ = 0;
  std::vector<std::pair<std::string, Tensor>> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace medfront::autodiff
