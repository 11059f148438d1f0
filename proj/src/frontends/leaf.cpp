#include "medfront/frontends/leaf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "medfront/autodiff/ops.hpp"
#include "medfront/errors.hpp"

namespace medfront::frontends {

using autodiff::Tape;
using autodiff::Tensor;

namespace {

constexpr double kPi = 3.14159265358979323846;
// Full width at half maximum of a unit-sigma Gaussian: 2*sqrt(2*ln 2).
constexpr double kFwhmPerSigma = 2.3548200450309493;

}  // namespace

std::vector<std::pair<std::string, Tensor>> LeafParams::named() const {
  return {{"leaf.center_hz", center_hz},   {"leaf.bandwidth", bandwidth},
          {"leaf.pool_width", pool_width}, {"leaf.pcen_alpha", pcen_alpha},
          {"leaf.pcen_delta", pcen_delta}, {"leaf.pcen_root", pcen_root}};
}

void LeafParams::clamp(const FrontendConfig& cfg) {
  const double nyquist = cfg.sample_rate / 2.0;
  for (double& f : center_hz.values()) {
    f = std::clamp(f, 1e-2, nyquist - 1e-2);
  }
  for (double& b : bandwidth.values()) b = std::max(b, 1e-5);
  for (double& p : pool_width.values()) p = std::max(p, 1e-2);
  // Keep PCEN in the domain where the forward pass and its gradients stay
  // finite (root and delta must remain positive).
  for (double& a : pcen_alpha.values()) a = std::max(a, 0.0);
  for (double& d : pcen_delta.values()) d = std::max(d, 1e-6);
  for (double& r : pcen_root.values()) r = std::max(r, 1e-1);
}

LeafParams init_leaf(const FrontendConfig& cfg) {
  cfg.validate();
  const auto points = mel_points(cfg);
  LeafParams p;
  p.center_hz = Tensor::zeros({cfg.n_filters}, true);
  p.bandwidth = Tensor::zeros({cfg.n_filters}, true);
  p.pool_width =
      Tensor::full({cfg.n_filters}, cfg.window_samples() / 4.0, true);
  p.pcen_alpha = Tensor::full({cfg.n_filters}, cfg.pcen_alpha, true);
  p.pcen_delta = Tensor::full({cfg.n_filters}, cfg.pcen_delta, true);
  p.pcen_root = Tensor::full({cfg.n_filters}, cfg.pcen_root, true);
  p.pcen_s = cfg.pcen_s;
  p.pcen_eps = cfg.pcen_eps;
  for (std::size_t i = 0; i < cfg.n_filters; ++i) {
    p.center_hz.values()[i] = points[i + 1];
    // Gaussian envelope rate whose spectral FWHM equals the mel triangle's
    // base width: sigma_f = width / kFwhmPerSigma, and for an envelope
    // exp(-(t*b)^2/2) in samples, sigma_f = b * sample_rate / (2*pi).
    const double width_hz = points[i + 2] - points[i];
    p.bandwidth.values()[i] =
        2.0 * kPi * width_hz / (kFwhmPerSigma * cfg.sample_rate);
  }
  p.clamp(cfg);
  return p;
}

std::vector<std::complex<double>> gabor_kernel(double center_hz,
                                               double bandwidth,
                                               std::size_t length,
                                               int sample_rate) {
  if (!(center_hz > 0.0) || !(center_hz < sample_rate / 2.0)) {
    throw std::invalid_argument("gabor_kernel: center_hz must lie in (0, "
                                "Nyquist)");
  }
  if (!(bandwidth > 0.0)) {
    throw std::invalid_argument("gabor_kernel: bandwidth must be > 0");
  }
  const double mid = (static_cast<double>(length) - 1.0) / 2.0;
  const double omega = 2.0 * kPi * center_hz / sample_rate;
  std::vector<std::complex<double>> k(length);
  for (std::size_t j = 0; j < length; ++j) {
    const double t = static_cast<double>(j) - mid;
    const double env = std::exp(-0.5 * t * t * bandwidth * bandwidth);
    k[j] = {env * std::cos(omega * t), env * std::sin(omega * t)};
  }
  return k;
}

Tensor gabor_conv_power(Tape& tape, const std::vector<double>& x,
                        const Tensor& center_hz, const Tensor& bandwidth,
                        std::size_t kernel_length, int sample_rate) {
  if (center_hz.shape() != bandwidth.shape() || center_hz.rank() != 1) {
    throw std::invalid_argument(
        "gabor_conv_power: center_hz and bandwidth must be equal-length "
        "vectors, got " +
        autodiff::shape_string(center_hz.shape()) + " and " +
        autodiff::shape_string(bandwidth.shape()));
  }
  if (kernel_length % 2 == 0 || kernel_length == 0) {
    throw std::invalid_argument(
        "gabor_conv_power: kernel_length must be odd");
  }
  const std::size_t n_filters = center_hz.size();
  const std::size_t len = x.size();
  const std::size_t L = kernel_length;
  const std::ptrdiff_t delay = static_cast<std::ptrdiff_t>((L - 1) / 2);
  const double mid = (static_cast<double>(L) - 1.0) / 2.0;

  const bool needs_grad =
      tape.recording() && (center_hz.requires_grad() || bandwidth.requires_grad());
  Tensor out = Tensor::zeros({n_filters, len}, needs_grad);
  // Saved activations for the backward pass.
  std::vector<double> re_all, im_all;
  if (needs_grad) {
    re_all.assign(n_filters * len, 0.0);
    im_all.assign(n_filters * len, 0.0);
  }

  std::vector<double> kc(L), ks(L);
  for (std::size_t i = 0; i < n_filters; ++i) {
    const double f = center_hz.values()[i];
    const double b = bandwidth.values()[i];
    if (!(f > 0.0) || !(f < sample_rate / 2.0) || !(b > 0.0)) {
      throw std::invalid_argument(
          "gabor_conv_power: filter " + std::to_string(i) +
          " outside its domain (center " + std::to_string(f) + " Hz, "
          "bandwidth " + std::to_string(b) + ")");
    }
    const double omega = 2.0 * kPi * f / sample_rate;
    for (std::size_t j = 0; j < L; ++j) {
      const double t = static_cast<double>(j) - mid;
      const double env = std::exp(-0.5 * t * t * b * b);
      kc[j] = env * std::cos(omega * t);
      ks[j] = env * std::sin(omega * t);
    }
    for (std::size_t n = 0; n < len; ++n) {
      const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(n) - delay;
      const std::size_t j_lo =
          base < 0 ? static_cast<std::size_t>(-base) : 0;
      const std::size_t j_hi =
          std::min(L, static_cast<std::size_t>(
                          static_cast<std::ptrdiff_t>(len) - base));
      double re = 0.0, im = 0.0;
      for (std::size_t j = j_lo; j < j_hi; ++j) {
        const double xv = x[static_cast<std::size_t>(base + static_cast<std::ptrdiff_t>(j))];
        re += kc[j] * xv;
        im += ks[j] * xv;
      }
      out.values()[i * len + n] = re * re + im * im;
      if (needs_grad) {
        re_all[i * len + n] = re;
        im_all[i * len + n] = im;
      }
    }
  }
  autodiff::ops::check_finite_values("gabor_conv_power", out);

  if (needs_grad) {
    tape.record([x, center_hz, bandwidth, out, re_all = std::move(re_all),
                 im_all = std::move(im_all), n_filters, len, L, delay, mid,
                 sample_rate]() mutable {
      const auto& g = out.grad();
      std::vector<double> corr_re(L), corr_im(L);
      for (std::size_t i = 0; i < n_filters; ++i) {
        const double f = center_hz.values()[i];
        const double b = bandwidth.values()[i];
        const double omega = 2.0 * kPi * f / sample_rate;
        // corr_*[j] = sum_n dL/d(re|im)[n] * x[n - delay + j], the
        // correlation of the upstream signal gradient with the input.
        std::fill(corr_re.begin(), corr_re.end(), 0.0);
        std::fill(corr_im.begin(), corr_im.end(), 0.0);
        for (std::size_t n = 0; n < len; ++n) {
          const double gn = g[i * len + n];
          if (gn == 0.0) continue;
          const double dre = gn * 2.0 * re_all[i * len + n];
          const double dim = gn * 2.0 * im_all[i * len + n];
          const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(n) - delay;
          const std::size_t j_lo =
              base < 0 ? static_cast<std::size_t>(-base) : 0;
          const std::size_t j_hi =
              std::min(L, static_cast<std::size_t>(
                              static_cast<std::ptrdiff_t>(len) - base));
          for (std::size_t j = j_lo; j < j_hi; ++j) {
            const double xv =
                x[static_cast<std::size_t>(base + static_cast<std::ptrdiff_t>(j))];
            corr_re[j] += dre * xv;
            corr_im[j] += dim * xv;
          }
        }
        double df = 0.0, db = 0.0;
        for (std::size_t j = 0; j < L; ++j) {
          const double t = static_cast<double>(j) - mid;
          const double env = std::exp(-0.5 * t * t * b * b);
          const double c = std::cos(omega * t);
          const double s = std::sin(omega * t);
          const double dscale = 2.0 * kPi * t / sample_rate;
          df += corr_re[j] * (-env * s * dscale) +
                corr_im[j] * (env * c * dscale);
          db += corr_re[j] * (-t * t * b * env * c) +
                corr_im[j] * (-t * t * b * env * s);
        }
        if (center_hz.requires_grad()) center_hz.grad()[i] += df;
        if (bandwidth.requires_grad()) bandwidth.grad()[i] += db;
      }
    });
  }
  return out;
}

Tensor gaussian_pool(Tape& tape, const Tensor& x, const Tensor& pool_width,
                     std::size_t width, std::size_t stride) {
  if (x.rank() != 2) {
    throw std::invalid_argument("gaussian_pool: expected (channels x len), "
                                "got " + autodiff::shape_string(x.shape()));
  }
  const std::size_t c = x.shape()[0];
  const std::size_t len = x.shape()[1];
  if (pool_width.rank() != 1 || pool_width.size() != c) {
    throw std::invalid_argument("gaussian_pool: pool_width shape " +
                                autodiff::shape_string(pool_width.shape()) +
                                " does not match " + std::to_string(c) +
                                " channels");
  }
  if (width == 0 || stride == 0 || len < width) {
    throw std::invalid_argument("gaussian_pool: invalid width/stride for "
                                "input length " + std::to_string(len));
  }
  const std::size_t frames = (len - width) / stride + 1;
  const double mid = (static_cast<double>(width) - 1.0) / 2.0;

  const bool needs_grad =
      tape.recording() && (x.requires_grad() || pool_width.requires_grad());
  Tensor out = Tensor::zeros({c, frames}, needs_grad);
  std::vector<double> kernel(width);
  for (std::size_t ci = 0; ci < c; ++ci) {
    const double sigma = pool_width.values()[ci];
    if (!(sigma > 0.0)) {
      throw std::invalid_argument("gaussian_pool: non-positive sigma on "
                                  "channel " + std::to_string(ci));
    }
    double total = 0.0;
    for (std::size_t k = 0; k < width; ++k) {
      const double d = (static_cast<double>(k) - mid) / sigma;
      kernel[k] = std::exp(-0.5 * d * d);
      total += kernel[k];
    }
    for (std::size_t k = 0; k < width; ++k) kernel[k] /= total;
    for (std::size_t t = 0; t < frames; ++t) {
      double acc = 0.0;
      const double* row = x.values().data() + ci * len + t * stride;
      for (std::size_t k = 0; k < width; ++k) acc += kernel[k] * row[k];
      out.values()[ci * frames + t] = acc;
    }
  }
  autodiff::ops::check_finite_values("gaussian_pool", out);

  if (needs_grad) {
    tape.record([x, pool_width, out, c, len, width, frames, stride,
                 mid]() mutable {
      const auto& g = out.grad();
      std::vector<double> e(width), de(width);
      for (std::size_t ci = 0; ci < c; ++ci) {
        const double sigma = pool_width.values()[ci];
        double total = 0.0, dtotal = 0.0;
        for (std::size_t k = 0; k < width; ++k) {
          const double d = static_cast<double>(k) - mid;
          e[k] = std::exp(-0.5 * d * d / (sigma * sigma));
          de[k] = e[k] * d * d / (sigma * sigma * sigma);
          total += e[k];
          dtotal += de[k];
        }
        double dsigma = 0.0;
        for (std::size_t t = 0; t < frames; ++t) {
          const double gt = g[ci * frames + t];
          if (gt == 0.0) continue;
          const double* row = x.values().data() + ci * len + t * stride;
          const double pooled = out.values()[ci * frames + t];
          if (pool_width.requires_grad()) {
            double num = 0.0;
            for (std::size_t k = 0; k < width; ++k) num += de[k] * row[k];
            dsigma += gt * (num - dtotal * pooled) / total;
          }
          if (x.requires_grad()) {
            auto& gx = x.grad();
            for (std::size_t k = 0; k < width; ++k) {
              gx[ci * len + t * stride + k] += gt * e[k] / total;
            }
          }
        }
        if (pool_width.requires_grad()) pool_width.grad()[ci] += dsigma;
      }
    });
  }
  return out;
}

Tensor pcen(Tape& tape, const Tensor& energy, const Tensor& alpha,
            const Tensor& delta, const Tensor& root, double s, double eps) {
  if (energy.rank() != 2) {
    throw std::invalid_argument("pcen: expected (channels x t), got " +
                                autodiff::shape_string(energy.shape()));
  }
  const std::size_t c = energy.shape()[0];
  const std::size_t t_len = energy.shape()[1];
  for (const Tensor* p : {&alpha, &delta, &root}) {
    if (p->rank() != 1 || p->size() != c) {
      throw std::invalid_argument("pcen: parameter shape " +
                                  autodiff::shape_string(p->shape()) +
                                  " does not match " + std::to_string(c) +
                                  " channels");
    }
  }
  for (std::size_t i = 0; i < energy.size(); ++i) {
    if (energy.values()[i] < 0.0) {
      throw std::invalid_argument("pcen: negative input at index " +
                                  std::to_string(i));
    }
  }

  const bool needs_grad =
      tape.recording() &&
      (energy.requires_grad() || alpha.requires_grad() ||
       delta.requires_grad() || root.requires_grad());
  Tensor out = Tensor::zeros({c, t_len}, needs_grad);
  std::vector<double> m_all(c * t_len), g_all(c * t_len);
  for (std::size_t ci = 0; ci < c; ++ci) {
    const double a = alpha.values()[ci];
    const double d = delta.values()[ci];
    const double q = 1.0 / root.values()[ci];
    const double dq = d > 0.0 ? std::pow(d, q) : 0.0;
    double m = 0.0;
    for (std::size_t t = 0; t < t_len; ++t) {
      const double e = energy.values()[ci * t_len + t];
      m = t == 0 ? e : (1.0 - s) * m + s * e;
      const double gain = e / std::pow(eps + m, a);
      m_all[ci * t_len + t] = m;
      g_all[ci * t_len + t] = gain;
      out.values()[ci * t_len + t] = std::pow(gain + d, q) - dq;
    }
  }
  autodiff::ops::check_finite_values("pcen", out);

  if (needs_grad) {
    tape.record([energy, alpha, delta, root, out, s, eps, c, t_len,
                 m_all = std::move(m_all), g_all = std::move(g_all)]() {
      const auto& g = out.grad();
      // Backward through the smoother: h_t = dL/dM_t accumulates the direct
      // contribution at t plus (1-s) times the contribution from t+1.
      std::vector<double> gg(t_len);
      for (std::size_t ci = 0; ci < c; ++ci) {
        const double a = alpha.values()[ci];
        const double d = delta.values()[ci];
        const double r = root.values()[ci];
        const double q = 1.0 / r;
        double da = 0.0, dd = 0.0, dr = 0.0;
        const double dq_pow = d > 0.0 ? std::pow(d, q - 1.0) : 0.0;
        const double dq_log = d > 0.0 ? std::pow(d, q) * std::log(d) : 0.0;
        for (std::size_t t = 0; t < t_len; ++t) {
          const std::size_t idx = ci * t_len + t;
          const double gain = g_all[idx];
          const double u = gain + d;
          const double u_pow = u > 0.0 ? std::pow(u, q - 1.0) : 0.0;
          gg[t] = g[idx] * q * u_pow;  // dL/d(gain)
          const double m = m_all[idx];
          if (alpha.requires_grad()) {
            da += gg[t] * (-gain * std::log(eps + m));
          }
          if (delta.requires_grad()) {
            dd += g[idx] * q * (u_pow - dq_pow);
          }
          if (root.requires_grad()) {
            const double u_log = u > 0.0 ? std::pow(u, q) * std::log(u) : 0.0;
            dr += g[idx] * (-(u_log - dq_log) / (r * r));
          }
        }
        if (alpha.requires_grad()) alpha.grad()[ci] += da;
        if (delta.requires_grad()) delta.grad()[ci] += dd;
        if (root.requires_grad()) root.grad()[ci] += dr;
        if (energy.requires_grad()) {
          auto& ge = energy.grad();
          double h = 0.0;  // dL/dM_t, accumulated newest-first
          for (std::size_t t = t_len; t-- > 0;) {
            const std::size_t idx = ci * t_len + t;
            const double m = m_all[idx];
            const double e = energy.values()[idx];
            const double denom = std::pow(eps + m, a);
            // dGain/dM = -a * E * (eps+M)^(-a-1)
            h = (t + 1 < t_len ? (1.0 - s) * h : 0.0) +
                gg[t] * (-a * e / (denom * (eps + m)));
            const double direct = gg[t] / denom;
            if (t == 0) {
              ge[idx] += direct + h;  // M_0 = E_0 feeds the smoother fully
            } else {
              ge[idx] += direct + s * h;
            }
          }
        }
      }
    });
  }
  return out;
}

}  // namespace medfront::frontends
