#include "medfront/autodiff/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace medfront::autodiff {

void Adam::add_parameter(const std::string& name, Tensor t) {
  if (!t.defined() || !t.requires_grad()) {
    throw std::invalid_argument("adam: parameter '" + name +
                                "' does not require grad");
  }
  for (const auto& [existing, tensor] : params_) {
    if (existing == name) {
      throw std::invalid_argument("adam: duplicate parameter '" + name + "'");
    }
  }
  m_.emplace_back(t.size(), 0.0);
  v_.emplace_back(t.size(), 0.0);
  params_.emplace_back(name, std::move(t));
}

void Adam::step() {
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, step_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, step_);
  for (std::size_t p = 0; p < params_.size(); ++p) {
    auto& [name, t] = params_[p];
    if (!t.has_grad()) {
      throw std::invalid_argument("adam_step: parameter '" + name +
                                  "' has no gradient");
    }
    auto& vals = t.values();
    auto& grad = t.grad();
    auto& m = m_[p];
    auto& v = v_[p];
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double g = grad[i];
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      vals[i] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
    t.zero_grad();
  }
}

}  // namespace medfront::autodiff
