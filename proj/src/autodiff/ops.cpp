#include "medfront/autodiff/ops.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "medfront/errors.hpp"

namespace medfront::autodiff::ops {

namespace {

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch (" +
                                shape_string(a.shape()) + " vs " +
                                shape_string(b.shape()) + ")");
  }
}

void require_rank(const char* op, const Tensor& t, std::size_t rank) {
  if (t.rank() != rank) {
    throw std::invalid_argument(std::string(op) + ": expected rank " +
                                std::to_string(rank) + " tensor, got shape " +
                                shape_string(t.shape()));
  }
}

bool track(const Tape& tape, std::initializer_list<const Tensor*> inputs) {
  if (!tape.recording()) return false;
  for (const Tensor* t : inputs) {
    if (t->defined() && t->requires_grad()) return true;
  }
  return false;
}

}  // namespace

void check_finite_values(const char* op, const Tensor& t) {
  const auto& v = t.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw NumericError(std::string(op) + ": non-finite output at index " +
                         std::to_string(i));
    }
  }
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  Tensor out = Tensor::zeros(a.shape(), track(tape, {&a, &b}));
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.values()[i] = a.values()[i] + b.values()[i];
  }
  check_finite_values("add", out);
  if (out.requires_grad()) {
    tape.record([a, b, out]() mutable {
      const auto& g = out.grad();
      if (a.requires_grad()) {
        auto& ga = a.grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        auto& gb = b.grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
      }
    });
  }
  return out;
}

Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  Tensor out = Tensor::zeros(a.shape(), track(tape, {&a, &b}));
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.values()[i] = a.values()[i] - b.values()[i];
  }
  check_finite_values("sub", out);
  if (out.requires_grad()) {
    tape.record([a, b, out]() mutable {
      const auto& g = out.grad();
      if (a.requires_grad()) {
        auto& ga = a.grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        auto& gb = b.grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
      }
    });
  }
  return out;
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  Tensor out = Tensor::zeros(a.shape(), track(tape, {&a, &b}));
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.values()[i] = a.values()[i] * b.values()[i];
  }
  check_finite_values("mul", out);
  if (out.requires_grad()) {
    tape.record([a, b, out]() mutable {
      const auto& g = out.grad();
      if (a.requires_grad()) {
        auto& ga = a.grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga[i] += g[i] * b.values()[i];
        }
      }
      if (b.requires_grad()) {
        auto& gb = b.grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
          gb[i] += g[i] * a.values()[i];
        }
      }
    });
  }
  return out;
}

Tensor scale(Tape& tape, const Tensor& a, double c) {
  Tensor out = Tensor::zeros(a.shape(), track(tape, {&a}));
  for (std::size_t i = 0; i < a.size(); ++i) out.values()[i] = a.values()[i] * c;
  check_finite_values("scale", out);
  if (out.requires_grad()) {
    tape.record([a, out, c]() mutable {
      const auto& g = out.grad();
      auto& ga = a.grad();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * c;
    });
  }
  return out;
}

Tensor add_scalar(Tape& tape, const Tensor& a, double c) {
  Tensor out = Tensor::zeros(a.shape(), track(tape, {&a}));
  for (std::size_t i = 0; i < a.size(); ++i) out.values()[i] = a.values()[i] + c;
  check_finite_values("add_scalar", out);
  if (out.requires_grad()) {
    tape.record([a, out]() mutable {
      const auto& g = out.grad();
      auto& ga = a.grad();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    });
  }
  return out;
}

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  const std::size_t m = a.shape()[0];
  const std::size_t k = a.shape()[1];
  const std::size_t n = b.shape()[1];
  if (b.shape()[0] != k) {
    throw std::invalid_argument("matmul: shape mismatch (" +
                                shape_string(a.shape()) + " vs " +
                                shape_string(b.shape()) + ")");
  }
  Tensor out = Tensor::zeros({m, n}, track(tape, {&a, &b}));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double av = a.values()[i * k + j];
      if (av == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) {
        out.values()[i * n + c] += av * b.values()[j * n + c];
      }
    }
  }
  check_finite_values("matmul", out);
  if (out.requires_grad()) {
    tape.record([a, b, out, m, k, n]() mutable {
      const auto& g = out.grad();
      if (a.requires_grad()) {
        auto& ga = a.grad();
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < k; ++j) {
            double acc = 0.0;
            for (std::size_t c = 0; c < n; ++c) {
              acc += g[i * n + c] * b.values()[j * n + c];
            }
            ga[i * k + j] += acc;
          }
        }
      }
      if (b.requires_grad()) {
        auto& gb = b.grad();
        for (std::size_t j = 0; j < k; ++j) {
          for (std::size_t c = 0; c < n; ++c) {
            double acc = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
              acc += a.values()[i * k + j] * g[i * n + c];
            }
            gb[j * n + c] += acc;
          }
        }
      }
    });
  }
  return out;
}

Tensor transpose(Tape& tape, const Tensor& a) {
  require_rank("transpose", a, 2);
  const std::size_t m = a.shape()[0];
  const std::size_t n = a.shape()[1];
  Tensor out = Tensor::zeros({n, m}, track(tape, {&a}));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out.values()[j * m + i] = a.values()[i * n + j];
    }
  }
  if (out.requires_grad()) {
    tape.record([a, out, m, n]() mutable {
      const auto& g = out.grad();
      auto& ga = a.grad();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          ga[i * n + j] += g[j * m + i];
        }
      }
    });
  }
  return out;
}

Tensor reshape(Tape& tape, const Tensor& a, std::vector<std::size_t> shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  if (n != a.size()) {
    throw std::invalid_argument("reshape: cannot reshape " +
                                shape_string(a.shape()) + " into " +
                                shape_string(shape));
  }
  Tensor out = Tensor::from_values(std::move(shape), a.values(),
                                   track(tape, {&a}));
  if (out.requires_grad()) {
    tape.record([a, out]() mutable {
      const auto& g = out.grad();
      auto& ga = a.grad();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    });
  }
  return out;
}

Tensor sum(Tape& tape, const Tensor& a) {
  double total = 0.0;
  for (double v : a.values()) total += v;
  Tensor out = Tensor::scalar(total, track(tape, {&a}));
  check_finite_values("sum", out);
  if (out.requires_grad()) {
    tape.record([a, out]() mutable {
      const double g = out.grad()[0];
      auto& ga = a.grad();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
    });
  }
  return out;
}

Tensor mean_all(Tape& tape, const Tensor& a) {
  double total = 0.0;
  for (double v : a.values()) total += v;
  const double inv = 1.0 / static_cast<double>(a.size());
  Tensor out = Tensor::scalar(total * inv, track(tape, {&a}));
  check_finite_values("mean_all", out);
  if (out.requires_grad()) {
    tape.record([a, out, inv]() mutable {
      const double g = out.grad()[0] * inv;
      auto& ga = a.grad();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
    });
  }
  return out;
}

Tensor relu(Tape& tape, const Tensor& a) {
  Tensor out = Tensor::zeros(a.shape(), track(tape, {&a}));
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.values()[i] = a.values()[i] > 0.0 ? a.values()[i] : 0.0;
  }
  check_finite_values("relu", out);
  if (out.requires_grad()) {
    tape.record([a, out]() mutable {
      const auto& g = out.grad();
      auto& ga = a.grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (a.values()[i] > 0.0) ga[i] += g[i];
      }
    });
  }
  return out;
}

Tensor sigmoid(Tape& tape, const Tensor& a) {
  Tensor out = Tensor::zeros(a.shape(), track(tape, {&a}));
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.values()[i] = 1.0 / (1.0 + std::exp(-a.values()[i]));
  }
  check_finite_values("sigmoid", out);
  if (out.requires_grad()) {
    tape.record([a, out]() mutable {
      const auto& g = out.grad();
      auto& ga = a.grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double s = out.values()[i];
        ga[i] += g[i] * s * (1.0 - s);
      }
    });
  }
  return out;
}

Tensor swish(Tape& tape, const Tensor& a) {
  Tensor out = Tensor::zeros(a.shape(), track(tape, {&a}));
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a.values()[i];
    out.values()[i] = x / (1.0 + std::exp(-x));
  }
  check_finite_values("swish", out);
  if (out.requires_grad()) {
    tape.record([a, out]() mutable {
      const auto& g = out.grad();
      auto& ga = a.grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = a.values()[i];
        const double s = 1.0 / (1.0 + std::exp(-x));
        ga[i] += g[i] * s * (1.0 + x * (1.0 - s));
      }
    });
  }
  return out;
}

Tensor log_eps(Tape& tape, const Tensor& a, double eps) {
  Tensor out = Tensor::zeros(a.shape(), track(tape, {&a}));
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double v = a.values()[i] + eps;
    if (v <= 0.0) {
      throw std::invalid_argument("log_eps: non-positive argument at index " +
                                  std::to_string(i));
    }
    out.values()[i] = std::log(v);
  }
  check_finite_values("log_eps", out);
  if (out.requires_grad()) {
    tape.record([a, out, eps]() mutable {
      const auto& g = out.grad();
      auto& ga = a.grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        ga[i] += g[i] / (a.values()[i] + eps);
      }
    });
  }
  return out;
}

Tensor power(Tape& tape, const Tensor& x, const Tensor& r) {
  if (r.size() != 1) {
    throw std::invalid_argument("power: exponent must be scalar, got shape " +
                                shape_string(r.shape()));
  }
  const double rv = r.values()[0];
  Tensor out = Tensor::zeros(x.shape(), track(tape, {&x, &r}));
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x.values()[i] <= 0.0) {
      throw std::invalid_argument("power: non-positive base at index " +
                                  std::to_string(i));
    }
    out.values()[i] = std::pow(x.values()[i], rv);
  }
  check_finite_values("power", out);
  if (out.requires_grad()) {
    tape.record([x, r, out, rv]() mutable {
      const auto& g = out.grad();
      if (x.requires_grad()) {
        auto& gx = x.grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
          gx[i] += g[i] * rv * std::pow(x.values()[i], rv - 1.0);
        }
      }
      if (r.requires_grad()) {
        double acc = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
          acc += g[i] * out.values()[i] * std::log(x.values()[i]);
        }
        r.grad()[0] += acc;
      }
    });
  }
  return out;
}

Tensor dropout(Tape& tape, const Tensor& a, double p, bool train, Rng& rng) {
  if (p < 0.0 || p >= 1.0) {
    throw std::invalid_argument("dropout: p must be in [0, 1), got " +
                                std::to_string(p));
  }
  if (!train || p == 0.0) return a;

  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> mask(a.size());
  for (double& m : mask) m = rng.uniform() < p ? 0.0 : keep_scale;

  Tensor out = Tensor::zeros(a.shape(), track(tape, {&a}));
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.values()[i] = a.values()[i] * mask[i];
  }
  check_finite_values("dropout", out);
  if (out.requires_grad()) {
    tape.record([a, out, mask = std::move(mask)]() mutable {
      const auto& g = out.grad();
      auto& ga = a.grad();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * mask[i];
    });
  }
  return out;
}

Tensor dense(Tape& tape, const Tensor& x, const Tensor& weight,
             const Tensor& bias) {
  require_rank("dense", x, 1);
  require_rank("dense", weight, 2);
  require_rank("dense", bias, 1);
  const std::size_t out_dim = weight.shape()[0];
  const std::size_t in_dim = weight.shape()[1];
  if (x.shape()[0] != in_dim || bias.shape()[0] != out_dim) {
    throw std::invalid_argument(
        "dense: shape mismatch (x " + shape_string(x.shape()) + ", weight " +
        shape_string(weight.shape()) + ", bias " + shape_string(bias.shape()) +
        ")");
  }
  Tensor out = Tensor::zeros({out_dim}, track(tape, {&x, &weight, &bias}));
  for (std::size_t o = 0; o < out_dim; ++o) {
    double acc = bias.values()[o];
    const double* wrow = weight.values().data() + o * in_dim;
    for (std::size_t i = 0; i < in_dim; ++i) acc += wrow[i] * x.values()[i];
    out.values()[o] = acc;
  }
  check_finite_values("dense", out);
  if (out.requires_grad()) {
    tape.record([x, weight, bias, out, out_dim, in_dim]() mutable {
      const auto& g = out.grad();
      if (weight.requires_grad()) {
        auto& gw = weight.grad();
        for (std::size_t o = 0; o < out_dim; ++o) {
          for (std::size_t i = 0; i < in_dim; ++i) {
            gw[o * in_dim + i] += g[o] * x.values()[i];
          }
        }
      }
      if (bias.requires_grad()) {
        auto& gb = bias.grad();
        for (std::size_t o = 0; o < out_dim; ++o) gb[o] += g[o];
      }
      if (x.requires_grad()) {
        auto& gx = x.grad();
        for (std::size_t o = 0; o < out_dim; ++o) {
          const double* wrow = weight.values().data() + o * in_dim;
          for (std::size_t i = 0; i < in_dim; ++i) gx[i] += g[o] * wrow[i];
        }
      }
    });
  }
  return out;
}

Tensor conv1d(Tape& tape, const Tensor& x, const Tensor& kernel,
              std::size_t stride, std::size_t padding) {
  require_rank("conv1d", x, 2);
  require_rank("conv1d", kernel, 3);
  if (stride == 0) throw std::invalid_argument("conv1d: stride must be > 0");
  const std::size_t c_in = x.shape()[0];
  const std::size_t len = x.shape()[1];
  const std::size_t c_out = kernel.shape()[0];
  const std::size_t k = kernel.shape()[2];
  if (kernel.shape()[1] != c_in) {
    throw std::invalid_argument("conv1d: shape mismatch (x " +
                                shape_string(x.shape()) + " vs kernel " +
                                shape_string(kernel.shape()) + ")");
  }
  if (len + 2 * padding < k) {
    throw std::invalid_argument("conv1d: kernel " + std::to_string(k) +
                                " wider than padded input " +
                                std::to_string(len + 2 * padding));
  }
  const std::size_t out_len = (len + 2 * padding - k) / stride + 1;
  Tensor out = Tensor::zeros({c_out, out_len}, track(tape, {&x, &kernel}));
  for (std::size_t co = 0; co < c_out; ++co) {
    for (std::size_t o = 0; o < out_len; ++o) {
      double acc = 0.0;
      for (std::size_t ci = 0; ci < c_in; ++ci) {
        const double* xrow = x.values().data() + ci * len;
        const double* krow = kernel.values().data() + (co * c_in + ci) * k;
        for (std::size_t kk = 0; kk < k; ++kk) {
          const std::ptrdiff_t i =
              static_cast<std::ptrdiff_t>(o * stride + kk) -
              static_cast<std::ptrdiff_t>(padding);
          if (i >= 0 && i < static_cast<std::ptrdiff_t>(len)) {
            acc += xrow[i] * krow[kk];
          }
        }
      }
      out.values()[co * out_len + o] = acc;
    }
  }
  check_finite_values("conv1d", out);
  if (out.requires_grad()) {
    tape.record([x, kernel, out, c_in, len, c_out, k, out_len, stride,
                 padding]() mutable {
      const auto& g = out.grad();
      for (std::size_t co = 0; co < c_out; ++co) {
        for (std::size_t o = 0; o < out_len; ++o) {
          const double go = g[co * out_len + o];
          if (go == 0.0) continue;
          for (std::size_t ci = 0; ci < c_in; ++ci) {
            for (std::size_t kk = 0; kk < k; ++kk) {
              const std::ptrdiff_t i =
                  static_cast<std::ptrdiff_t>(o * stride + kk) -
                  static_cast<std::ptrdiff_t>(padding);
              if (i < 0 || i >= static_cast<std::ptrdiff_t>(len)) continue;
              if (kernel.requires_grad()) {
                kernel.grad()[(co * c_in + ci) * k + kk] +=
                    go * x.values()[ci * len + i];
              }
              if (x.requires_grad()) {
                x.grad()[ci * len + i] +=
                    go * kernel.values()[(co * c_in + ci) * k + kk];
              }
            }
          }
        }
      }
    });
  }
  return out;
}

Tensor conv2d(Tape& tape, const Tensor& x, const Tensor& kernel,
              const Tensor& bias, std::size_t stride, std::size_t padding) {
  require_rank("conv2d", x, 3);
  require_rank("conv2d", kernel, 4);
  if (stride == 0) throw std::invalid_argument("conv2d: stride must be > 0");
  const std::size_t c_in = x.shape()[0];
  const std::size_t h = x.shape()[1];
  const std::size_t w = x.shape()[2];
  const std::size_t c_out = kernel.shape()[0];
  const std::size_t kh = kernel.shape()[2];
  const std::size_t kw = kernel.shape()[3];
  if (kernel.shape()[1] != c_in) {
    throw std::invalid_argument("conv2d: shape mismatch (x " +
                                shape_string(x.shape()) + " vs kernel " +
                                shape_string(kernel.shape()) + ")");
  }
  if (bias.defined() &&
      (bias.rank() != 1 || bias.shape()[0] != c_out)) {
    throw std::invalid_argument("conv2d: bias shape " +
                                shape_string(bias.shape()) +
                                " does not match " + std::to_string(c_out) +
                                " output channels");
  }
  if (h + 2 * padding < kh || w + 2 * padding < kw) {
    throw std::invalid_argument("conv2d: kernel " + shape_string({kh, kw}) +
                                " larger than padded input " +
                                shape_string({h + 2 * padding,
                                              w + 2 * padding}));
  }
  const std::size_t oh = (h + 2 * padding - kh) / stride + 1;
  const std::size_t ow = (w + 2 * padding - kw) / stride + 1;
  const bool needs_grad = bias.defined() ? track(tape, {&x, &kernel, &bias})
                                         : track(tape, {&x, &kernel});
  Tensor out = Tensor::zeros({c_out, oh, ow}, needs_grad);
  for (std::size_t co = 0; co < c_out; ++co) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        double acc = bias.defined() ? bias.values()[co] : 0.0;
        for (std::size_t ci = 0; ci < c_in; ++ci) {
          for (std::size_t ky = 0; ky < kh; ++ky) {
            const std::ptrdiff_t iy =
                static_cast<std::ptrdiff_t>(oy * stride + ky) -
                static_cast<std::ptrdiff_t>(padding);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
            const double* xrow = x.values().data() + (ci * h + iy) * w;
            const double* krow =
                kernel.values().data() + ((co * c_in + ci) * kh + ky) * kw;
            for (std::size_t kx = 0; kx < kw; ++kx) {
              const std::ptrdiff_t ix =
                  static_cast<std::ptrdiff_t>(ox * stride + kx) -
                  static_cast<std::ptrdiff_t>(padding);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
              acc += xrow[ix] * krow[kx];
            }
          }
        }
        out.values()[(co * oh + oy) * ow + ox] = acc;
      }
    }
  }
  check_finite_values("conv2d", out);
  if (out.requires_grad()) {
    tape.record([x, kernel, bias, out, c_in, h, w, c_out, kh, kw, oh, ow,
                 stride, padding]() mutable {
      const auto& g = out.grad();
      for (std::size_t co = 0; co < c_out; ++co) {
        for (std::size_t oy = 0; oy < oh; ++oy) {
          for (std::size_t ox = 0; ox < ow; ++ox) {
            const double go = g[(co * oh + oy) * ow + ox];
            if (go == 0.0) continue;
            if (bias.defined() && bias.requires_grad()) {
              bias.grad()[co] += go;
            }
            for (std::size_t ci = 0; ci < c_in; ++ci) {
              for (std::size_t ky = 0; ky < kh; ++ky) {
                const std::ptrdiff_t iy =
                    static_cast<std::ptrdiff_t>(oy * stride + ky) -
                    static_cast<std::ptrdiff_t>(padding);
                if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                for (std::size_t kx = 0; kx < kw; ++kx) {
                  const std::ptrdiff_t ix =
                      static_cast<std::ptrdiff_t>(ox * stride + kx) -
                      static_cast<std::ptrdiff_t>(padding);
                  if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                  const std::size_t xi = (ci * h + iy) * w + ix;
                  const std::size_t ki = ((co * c_in + ci) * kh + ky) * kw + kx;
                  if (kernel.requires_grad()) {
                    kernel.grad()[ki] += go * x.values()[xi];
                  }
                  if (x.requires_grad()) {
                    x.grad()[xi] += go * kernel.values()[ki];
                  }
                }
              }
            }
          }
        }
      }
    });
  }
  return out;
}

Tensor max_pool2d(Tape& tape, const Tensor& x, std::size_t k,
                  std::size_t stride) {
  require_rank("max_pool2d", x, 3);
  if (k == 0 || stride == 0) {
    throw std::invalid_argument("max_pool2d: k and stride must be > 0");
  }
  const std::size_t c = x.shape()[0];
  const std::size_t h = x.shape()[1];
  const std::size_t w = x.shape()[2];
  if (h < k || w < k) {
    throw std::invalid_argument("max_pool2d: window " + std::to_string(k) +
                                " larger than input " + shape_string({h, w}));
  }
  const std::size_t oh = (h - k) / stride + 1;
  const std::size_t ow = (w - k) / stride + 1;
  Tensor out = Tensor::zeros({c, oh, ow}, track(tape, {&x}));
  std::vector<std::size_t> argmax(out.size());
  for (std::size_t ci = 0; ci < c; ++ci) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        double best = -1e308;
        std::size_t best_idx = 0;
        for (std::size_t ky = 0; ky < k; ++ky) {
          for (std::size_t kx = 0; kx < k; ++kx) {
            const std::size_t idx =
                (ci * h + oy * stride + ky) * w + ox * stride + kx;
            if (x.values()[idx] > best) {
              best = x.values()[idx];
              best_idx = idx;
            }
          }
        }
        const std::size_t oi = (ci * oh + oy) * ow + ox;
        out.values()[oi] = best;
        argmax[oi] = best_idx;
      }
    }
  }
  check_finite_values("max_pool2d", out);
  if (out.requires_grad()) {
    tape.record([x, out, argmax = std::move(argmax)]() mutable {
      const auto& g = out.grad();
      auto& gx = x.grad();
      for (std::size_t i = 0; i < g.size(); ++i) gx[argmax[i]] += g[i];
    });
  }
  return out;
}

Tensor mean_pool1d(Tape& tape, const Tensor& x, std::size_t kernel,
                   std::size_t stride) {
  require_rank("mean_pool1d", x, 2);
  if (kernel == 0 || stride == 0) {
    throw std::invalid_argument("mean_pool1d: kernel and stride must be > 0");
  }
  const std::size_t c = x.shape()[0];
  const std::size_t len = x.shape()[1];
  if (len < kernel) {
    throw std::invalid_argument("mean_pool1d: window " +
                                std::to_string(kernel) +
                                " larger than input length " +
                                std::to_string(len));
  }
  const std::size_t out_len = (len - kernel) / stride + 1;
  const double inv = 1.0 / static_cast<double>(kernel);
  Tensor out = Tensor::zeros({c, out_len}, track(tape, {&x}));
  for (std::size_t ci = 0; ci < c; ++ci) {
    for (std::size_t o = 0; o < out_len; ++o) {
      double acc = 0.0;
      for (std::size_t kk = 0; kk < kernel; ++kk) {
        acc += x.values()[ci * len + o * stride + kk];
      }
      out.values()[ci * out_len + o] = acc * inv;
    }
  }
  check_finite_values("mean_pool1d", out);
  if (out.requires_grad()) {
    tape.record([x, out, c, len, out_len, kernel, stride, inv]() mutable {
      const auto& g = out.grad();
      auto& gx = x.grad();
      for (std::size_t ci = 0; ci < c; ++ci) {
        for (std::size_t o = 0; o < out_len; ++o) {
          const double go = g[ci * out_len + o] * inv;
          for (std::size_t kk = 0; kk < kernel; ++kk) {
            gx[ci * len + o * stride + kk] += go;
          }
        }
      }
    });
  }
  return out;
}

Tensor channel_affine(Tape& tape, const Tensor& x, const Tensor& shift,
                      const Tensor& scale) {
  require_rank("channel_affine", x, 2);
  const std::size_t rows = x.shape()[0];
  const std::size_t cols = x.shape()[1];
  if (shift.rank() != 1 || shift.size() != cols || scale.rank() != 1 ||
      scale.size() != cols) {
    throw std::invalid_argument(
        "channel_affine: shift " + shape_string(shift.shape()) + " and scale " +
        shape_string(scale.shape()) + " must both be (" +
        std::to_string(cols) + ")");
  }
  Tensor out = Tensor::zeros(x.shape(), track(tape, {&x, &shift, &scale}));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      out.values()[r * cols + c] =
          (x.values()[r * cols + c] + shift.values()[c]) * scale.values()[c];
    }
  }
  check_finite_values("channel_affine", out);
  if (out.requires_grad()) {
    tape.record([x, shift, scale, out, rows, cols]() mutable {
      const auto& g = out.grad();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          const double gv = g[r * cols + c];
          if (gv == 0.0) continue;
          const double sc = scale.values()[c];
          if (x.requires_grad()) x.grad()[r * cols + c] += gv * sc;
          if (shift.requires_grad()) shift.grad()[c] += gv * sc;
          if (scale.requires_grad()) {
            scale.grad()[c] +=
                gv * (x.values()[r * cols + c] + shift.values()[c]);
          }
        }
      }
    });
  }
  return out;
}

Tensor softmax(Tape& tape, const Tensor& logits) {
  require_rank("softmax", logits, 1);
  const std::size_t n = logits.size();
  double max_v = logits.values()[0];
  for (double v : logits.values()) max_v = std::max(max_v, v);
  Tensor out = Tensor::zeros(logits.shape(), track(tape, {&logits}));
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.values()[i] = std::exp(logits.values()[i] - max_v);
    total += out.values()[i];
  }
  for (std::size_t i = 0; i < n; ++i) out.values()[i] /= total;
  check_finite_values("softmax", out);
  if (out.requires_grad()) {
    tape.record([logits, out, n]() mutable {
      const auto& g = out.grad();
      auto& gl = logits.grad();
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += g[i] * out.values()[i];
      for (std::size_t i = 0; i < n; ++i) {
        gl[i] += out.values()[i] * (g[i] - dot);
      }
    });
  }
  return out;
}

Tensor softmax_cross_entropy(Tape& tape, const Tensor& logits, int label) {
  require_rank("softmax_cross_entropy", logits, 1);
  const std::size_t n = logits.size();
  if (label < 0 || static_cast<std::size_t>(label) >= n) {
    throw std::invalid_argument(
        "softmax_cross_entropy: label " + std::to_string(label) +
        " out of range for " + std::to_string(n) + " classes");
  }
  double max_v = logits.values()[0];
  for (double v : logits.values()) max_v = std::max(max_v, v);
  double total = 0.0;
  std::vector<double> probs(n);
  for (std::size_t i = 0; i < n; ++i) {
    probs[i] = std::exp(logits.values()[i] - max_v);
    total += probs[i];
  }
  for (std::size_t i = 0; i < n; ++i) probs[i] /= total;
  const double loss =
      -(logits.values()[static_cast<std::size_t>(label)] - max_v -
        std::log(total));
  Tensor out = Tensor::scalar(loss, track(tape, {&logits}));
  check_finite_values("softmax_cross_entropy", out);
  if (out.requires_grad()) {
    tape.record([logits, out, label, probs = std::move(probs)]() mutable {
      const double g = out.grad()[0];
      auto& gl = logits.grad();
      for (std::size_t i = 0; i < gl.size(); ++i) {
        const double indicator =
            i == static_cast<std::size_t>(label) ? 1.0 : 0.0;
        gl[i] += g * (probs[i] - indicator);
      }
    });
  }
  return out;
}

}  // namespace medfront::autodiff::ops
