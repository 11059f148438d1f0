#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace medfront::autodiff {

// Dense row-major real tensor with shared storage. Copies are shallow:
// they alias the same values and gradient, which is what lets tape
// closures and optimizers hold the same parameter the caller sees.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<std::size_t> shape,
                      bool requires_grad = false);
  static Tensor full(std::vector<std::size_t> shape, double value,
                     bool requires_grad = false);
  static Tensor from_values(std::vector<std::size_t> shape,
                            std::vector<double> values,
                            bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(d_); }
  const std::vector<std::size_t>& shape() const { return d_->shape; }
  std::size_t rank() const { return d_->shape.size(); }
  std::size_t size() const { return d_->values.size(); }

  // Accessors are const because a Tensor is a shared handle (shared_ptr
  // semantics): a const handle still exposes mutable storage.
  std::vector<double>& values() const { return d_->values; }

  bool requires_grad() const { return d_->requires_grad; }

  // Gradient storage, allocated as zeros on first touch.
  std::vector<double>& grad() const;
  bool has_grad() const { return !d_->grad.empty(); }
  void zero_grad() const;

  // Value of a one-element tensor.
  double item() const;

  // Deep copy of the values (fresh storage, no grad).
  Tensor clone() const;

  bool same_storage(const Tensor& other) const { return d_ == other.d_; }

 private:
  struct Data {
    std::vector<std::size_t> shape;
    std::vector<double> values;
    std::vector<double> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Data> d_;
};

std::string shape_string(const std::vector<std::size_t>& shape);

// Append-only record of backward steps. Forward ops push one closure per
// recorded node, so the list is topologically ordered by construction and
// backward() replays it in exact reverse order. A tape and its tensors are
// a single-threaded unit of work.
class Tape {
 public:
  void record(std::function<void()> step);

  bool recording() const { return recording_; }
  void set_recording(bool on) { recording_ = on; }
  std::size_t size() const { return steps_.size(); }
  void clear() { steps_.clear(); }

  // Seeds d(loss)/d(loss) = 1, runs every recorded step newest-first to
  // populate grads, then consumes the tape. loss must be scalar.
  void backward(Tensor& loss);

 private:
  std::vector<std::function<void()>> steps_;
  bool recording_ = true;
};

// Scoped recording pause for eval-mode forward passes.
class NoGradGuard {
 public:
  explicit NoGradGuard(Tape& tape) : tape_(tape), prev_(tape.recording()) {
    tape_.set_recording(false);
  }
  ~NoGradGuard() { tape_.set_recording(prev_); }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  Tape& tape_;
  bool prev_;
};

}  // namespace medfront::autodiff
