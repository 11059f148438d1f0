#pragma once

#include <cstddef>

#include "medfront/autodiff/rng.hpp"
#include "medfront/autodiff/tensor.hpp"

// Differentiable forward ops. Each records a backward step on the tape when
// recording is on and any input requires grad; every output is checked for
// NaN/Inf (a non-finite value throws NumericError rather than propagating).
// Shape preconditions throw std::invalid_argument naming the op and shapes.
namespace medfront::autodiff::ops {

// Elementwise, same shape.
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);

// Elementwise against constants.
Tensor scale(Tape& tape, const Tensor& a, double c);
Tensor add_scalar(Tape& tape, const Tensor& a, double c);

// (m x k) . (k x n) -> (m x n).
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);

Tensor transpose(Tape& tape, const Tensor& a);  // 2-D only

// Same element count, new dims.
Tensor reshape(Tape& tape, const Tensor& a, std::vector<std::size_t> shape);

Tensor sum(Tape& tape, const Tensor& a);       // scalar
Tensor mean_all(Tape& tape, const Tensor& a);  // scalar

Tensor relu(Tape& tape, const Tensor& a);
Tensor sigmoid(Tape& tape, const Tensor& a);
Tensor swish(Tape& tape, const Tensor& a);  // x * sigmoid(x)

// log(x + eps); requires x + eps > 0 elementwise. Gradient at x = 0 is the
// finite 1/eps.
Tensor log_eps(Tape& tape, const Tensor& a, double eps = 1e-6);

// Elementwise x^r with a learnable scalar exponent; requires x > 0.
Tensor power(Tape& tape, const Tensor& x, const Tensor& r);

// Train mode zeroes each element independently with probability p and
// scales survivors by 1/(1-p); eval mode is the identity. p in [0, 1).
Tensor dropout(Tape& tape, const Tensor& a, double p, bool train, Rng& rng);

// x: (in), weight: (out x in), bias: (out) -> (out).
Tensor dense(Tape& tape, const Tensor& x, const Tensor& weight,
             const Tensor& bias);

// x: (c_in x len), kernel: (c_out x c_in x k) -> (c_out x len_out) with
// len_out = (len + 2*padding - k) / stride + 1.
Tensor conv1d(Tape& tape, const Tensor& x, const Tensor& kernel,
              std::size_t stride, std::size_t padding);

// x: (c_in x h x w), kernel: (c_out x c_in x kh x kw), bias: (c_out) or
// undefined for none -> (c_out x h_out x w_out).
Tensor conv2d(Tape& tape, const Tensor& x, const Tensor& kernel,
              const Tensor& bias, std::size_t stride, std::size_t padding);

// x: (c x h x w), square window k with the given stride.
Tensor max_pool2d(Tape& tape, const Tensor& x, std::size_t k,
                  std::size_t stride);

// x: (c x len), averaging window `kernel` with the given stride.
Tensor mean_pool1d(Tape& tape, const Tensor& x, std::size_t kernel,
                   std::size_t stride);

// x: (rows x c), shift/scale: (c) -> (x[r][c] + shift[c]) * scale[c].
// Standardization with shift = -mean and scale = 1/std.
Tensor channel_affine(Tape& tape, const Tensor& x, const Tensor& shift,
                      const Tensor& scale);

// logits: (classes) -> probabilities summing to 1.
Tensor softmax(Tape& tape, const Tensor& logits);

// Scalar cross-entropy of one sample: -log softmax(logits)[label].
Tensor softmax_cross_entropy(Tape& tape, const Tensor& logits, int label);

// Throws NumericError naming `op` if any value is NaN or Inf.
void check_finite_values(const char* op, const Tensor& t);

}  // namespace medfront::autodiff::ops
