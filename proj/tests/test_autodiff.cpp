#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "grad_check.hpp"
#include "medfront/autodiff/adam.hpp"
#include "medfront/autodiff/checkpoint.hpp"
#include "medfront/autodiff/ops.hpp"
#include "medfront/autodiff/rng.hpp"
#include "medfront/autodiff/tensor.hpp"
#include "medfront/errors.hpp"

using namespace medfront;
using namespace medfront::autodiff;
namespace od = medfront::autodiff::ops;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double lo,
                     double hi, bool requires_grad = true) {
  Tensor t = Tensor::zeros(std::move(shape), requires_grad);
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

}  // namespace

TEST_CASE("rng is deterministic and splittable") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng parent(7);
  Rng child = parent.split();
  Rng parent2(7);
  parent2.next_u64();  // split consumed one draw
  bool all_equal = true;
  for (int i = 0; i < 100; ++i) {
    if (child.next_u64() != parent2.next_u64()) all_equal = false;
  }
  CHECK_FALSE(all_equal);

  Rng u(3);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
}

TEST_CASE("rng normal has standard moments") {
  Rng rng(11);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.03);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("tensor construction and validation") {
  Tensor t = Tensor::from_values({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t.size() == 6);
  CHECK(t.rank() == 2);
  CHECK_FALSE(t.requires_grad());
  CHECK_THROWS_AS(Tensor::from_values({2, 2}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Tensor::zeros({0}), std::invalid_argument);
  CHECK(Tensor::scalar(3.5).item() == 3.5);
  CHECK_THROWS_AS(t.item(), std::invalid_argument);

  Tensor alias = t;
  alias.values()[0] = 9.0;
  CHECK(t.values()[0] == 9.0);  // copies share storage

  Tensor deep = t.clone();
  deep.values()[0] = -1.0;
  CHECK(t.values()[0] == 9.0);
}

TEST_CASE("forward op values match closed forms") {
  Tape tape;
  Tensor x = Tensor::from_values({3}, {-1.0, 0.0, 2.0});
  auto r = od::relu(tape, x);
  CHECK(r.values() == std::vector<double>{0.0, 0.0, 2.0});

  CHECK(od::swish(tape, Tensor::scalar(0.0)).item() == 0.0);
  CHECK(od::sigmoid(tape, Tensor::scalar(0.0)).item() == 0.5);
  CHECK(od::log_eps(tape, Tensor::scalar(0.0), 1e-6).item() ==
        doctest::Approx(std::log(1e-6)));

  Tensor a = Tensor::from_values({2, 2}, {1, 2, 3, 4});
  Tensor b = Tensor::from_values({2, 2}, {5, 6, 7, 8});
  CHECK(od::matmul(tape, a, b).values() ==
        std::vector<double>{19, 22, 43, 50});
  CHECK(od::transpose(tape, a).values() == std::vector<double>{1, 3, 2, 4});
  CHECK(od::add(tape, a, b).values() == std::vector<double>{6, 8, 10, 12});
  CHECK(od::mul(tape, a, b).values() == std::vector<double>{5, 12, 21, 32});
  CHECK(od::sum(tape, a).item() == 10.0);
  CHECK(od::mean_all(tape, a).item() == 2.5);
}

TEST_CASE("conv2d with a ones kernel computes local sums") {
  Tape tape;
  Tensor x = Tensor::from_values({1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  Tensor k = Tensor::full({1, 1, 2, 2}, 1.0);
  Tensor none;
  auto y = od::conv2d(tape, x, k, none, 1, 0);
  CHECK(y.shape() == std::vector<std::size_t>{1, 2, 2});
  CHECK(y.values() == std::vector<double>{12, 16, 24, 28});
}

TEST_CASE("pooling ops match hand-evaluated windows") {
  Tape tape;
  Tensor x =
      Tensor::from_values({1, 4, 4}, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12,
                                      13, 14, 15, 16});
  auto mp = od::max_pool2d(tape, x, 2, 2);
  CHECK(mp.values() == std::vector<double>{6, 8, 14, 16});

  Tensor x1 = Tensor::from_values({2, 4}, {1, 2, 3, 4, 10, 20, 30, 40});
  auto ap = od::mean_pool1d(tape, x1, 2, 2);
  CHECK(ap.values() == std::vector<double>{1.5, 3.5, 15.0, 35.0});
}

TEST_CASE("softmax and cross entropy agree with direct evaluation") {
  Tape tape;
  Tensor logits = Tensor::from_values({2}, {0.0, 0.0});
  auto p = od::softmax(tape, logits);
  CHECK(p.values()[0] == doctest::Approx(0.5));
  CHECK(p.values()[1] == doctest::Approx(0.5));

  auto loss = od::softmax_cross_entropy(tape, logits, 0);
  CHECK(loss.item() == doctest::Approx(std::log(2.0)));

  Tensor big = Tensor::from_values({3}, {1000.0, 1000.0, 1000.0});
  CHECK(od::softmax_cross_entropy(tape, big, 2).item() ==
        doctest::Approx(std::log(3.0)));  // stable under large logits

  CHECK_THROWS_AS(od::softmax_cross_entropy(tape, logits, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(od::softmax_cross_entropy(tape, logits, -1),
                  std::invalid_argument);
}

TEST_CASE("shape mismatches name the op and both shapes") {
  Tape tape;
  Tensor a = Tensor::zeros({2, 3});
  Tensor b = Tensor::zeros({3, 2});
  CHECK_THROWS_WITH_AS(od::add(tape, a, b),
                       "add: shape mismatch (2x3 vs 3x2)",
                       std::invalid_argument);
  CHECK_THROWS_AS(od::matmul(tape, a, a), std::invalid_argument);
  CHECK_THROWS_AS(od::reshape(tape, a, {4, 2}), std::invalid_argument);
}

TEST_CASE("non-finite op output raises a numeric error") {
  Tape tape;
  Tensor a = Tensor::scalar(1e308);
  Tensor b = Tensor::scalar(1e308);
  CHECK_THROWS_AS(od::add(tape, a, b), NumericError);
  CHECK_THROWS_AS(od::power(tape, Tensor::scalar(-1.0), Tensor::scalar(2.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(od::log_eps(tape, Tensor::scalar(-1.0), 1e-6),
                  std::invalid_argument);
}

TEST_CASE("backward computes d(sum(x^2)) = 2x") {
  Tape tape;
  Tensor x = Tensor::from_values({2}, {1.0, 2.0}, true);
  Tensor loss = od::sum(tape, od::mul(tape, x, x));
  tape.backward(loss);
  CHECK(x.grad()[0] == doctest::Approx(2.0));
  CHECK(x.grad()[1] == doctest::Approx(4.0));
  CHECK(tape.size() == 0);  // consumed
}

TEST_CASE("backward rejects non-scalar loss and empty tape") {
  Tape tape;
  Tensor x = Tensor::from_values({2}, {1.0, 2.0}, true);
  Tensor y = od::mul(tape, x, x);
  CHECK_THROWS_AS(tape.backward(y), std::invalid_argument);

  Tape empty;
  Tensor s = Tensor::scalar(1.0, true);
  CHECK_THROWS_AS(empty.backward(s), std::invalid_argument);
}

TEST_CASE("gradient of log(x + eps) at x = 0 is 1/eps") {
  Tape tape;
  Tensor x = Tensor::scalar(0.0, true);
  Tensor loss = od::log_eps(tape, x, 1e-6);
  tape.backward(loss);
  CHECK(x.grad()[0] == doctest::Approx(1e6).epsilon(1e-9));
}

TEST_CASE("every op passes central finite differences") {
  Rng rng(2024);
  const int kConfigs = 10;
  for (int trial = 0; trial < kConfigs; ++trial) {
    // Elementwise and reduction ops. Inputs stay away from the relu kink
    // and the power/log domain edges.
    {
      Tensor a = random_tensor({2, 3}, rng, 0.2, 2.0);
      Tensor b = random_tensor({2, 3}, rng, 0.2, 2.0);
      auto f = [&](Tape& t) {
        Tensor s1 = od::mul(t, od::add(t, a, b), od::sub(t, a, b));
        Tensor s2 = od::relu(t, od::scale(t, s1, 0.7));
        Tensor s3 = od::swish(t, od::add_scalar(t, s2, 0.1));
        Tensor s4 = od::sigmoid(t, s3);
        Tensor s5 = od::log_eps(t, s4, 1e-6);
        return od::mean_all(t, s5);
      };
      CHECK(grad_check::max_rel_error(f, {a, b}) < 1e-3);
    }
    {
      Tensor x = random_tensor({4}, rng, 0.3, 2.0);
      Tensor r = Tensor::scalar(rng.uniform(0.5, 3.0), true);
      auto f = [&](Tape& t) { return od::sum(t, od::power(t, x, r)); };
      CHECK(grad_check::max_rel_error(f, {x, r}) < 1e-3);
    }
    {
      Tensor a = random_tensor({3, 4}, rng, -1.0, 1.0);
      Tensor b = random_tensor({4, 2}, rng, -1.0, 1.0);
      auto f = [&](Tape& t) {
        Tensor y = od::matmul(t, a, b);
        Tensor z = od::transpose(t, y);
        return od::sum(t, od::mul(t, z, z));
      };
      CHECK(grad_check::max_rel_error(f, {a, b}) < 1e-3);
    }
    {
      Tensor x = random_tensor({6}, rng, -1.0, 1.0);
      Tensor w = random_tensor({3, 6}, rng, -1.0, 1.0);
      Tensor bias = random_tensor({3}, rng, -0.5, 0.5);
      auto f = [&](Tape& t) {
        Tensor y = od::dense(t, x, w, bias);
        return od::softmax_cross_entropy(t, y, trial % 3);
      };
      CHECK(grad_check::max_rel_error(f, {x, w, bias}) < 1e-3);
    }
    {
      Tensor x = random_tensor({2, 9}, rng, -1.0, 1.0);
      Tensor k = random_tensor({3, 2, 3}, rng, -1.0, 1.0);
      auto f = [&](Tape& t) {
        Tensor y = od::conv1d(t, x, k, 2, 1);
        return od::mean_all(t, od::mul(t, y, y));
      };
      CHECK(grad_check::max_rel_error(f, {x, k}) < 1e-3);
    }
    {
      Tensor x = random_tensor({2, 5, 6}, rng, -1.0, 1.0);
      Tensor k = random_tensor({3, 2, 3, 3}, rng, -1.0, 1.0);
      Tensor bias = random_tensor({3}, rng, -0.5, 0.5);
      auto f = [&](Tape& t) {
        Tensor y = od::conv2d(t, x, k, bias, 1, 1);
        Tensor p = od::max_pool2d(t, y, 2, 2);
        return od::mean_all(t, od::mul(t, p, p));
      };
      CHECK(grad_check::max_rel_error(f, {x, k, bias}) < 1e-3);
    }
    {
      Tensor x = random_tensor({2, 8}, rng, -1.0, 1.0);
      auto f = [&](Tape& t) {
        Tensor y = od::mean_pool1d(t, x, 3, 2);
        return od::sum(t, od::mul(t, y, y));
      };
      CHECK(grad_check::max_rel_error(f, {x}) < 1e-3);
    }
    {
      Tensor logits = random_tensor({4}, rng, -2.0, 2.0);
      Tensor weights = random_tensor({4}, rng, 0.1, 1.0, false);
      auto f = [&](Tape& t) {
        Tensor p = od::softmax(t, logits);
        return od::sum(t, od::mul(t, p, weights));
      };
      CHECK(grad_check::max_rel_error(f, {logits}) < 1e-3);
    }
    {
      // Dropout with a fixed mask (same seed every call).
      Tensor x = random_tensor({8}, rng, 0.5, 1.5);
      const std::uint64_t mask_seed = 100 + trial;
      auto f = [&, mask_seed](Tape& t) {
        Rng mask_rng(mask_seed);
        Tensor y = od::dropout(t, x, 0.5, true, mask_rng);
        return od::sum(t, od::mul(t, y, y));
      };
      CHECK(grad_check::max_rel_error(f, {x}) < 1e-3);
    }
    {
      Tensor x = random_tensor({3, 4}, rng, -1.0, 1.0);
      auto f = [&](Tape& t) {
        Tensor y = od::reshape(t, x, {4, 3});
        Tensor z = od::sub(t, y, od::scale(t, y, 0.25));
        return od::mean_all(t, od::mul(t, z, z));
      };
      CHECK(grad_check::max_rel_error(f, {x}) < 1e-3);
    }
  }
}

TEST_CASE("dropout preserves expectation at train time") {
  Rng rng(55);
  Tape tape;
  tape.set_recording(false);
  Tensor x = Tensor::scalar(1.0);
  double total = 0.0;
  const int trials = 100000;
  for (int i = 0; i < trials; ++i) {
    total += od::dropout(tape, x, 0.5, true, rng).item();
  }
  CHECK(total / trials == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("dropout at eval time is the identity") {
  Rng rng(55);
  Tape tape;
  Tensor x = Tensor::from_values({3}, {1.0, 2.0, 3.0}, true);
  Tensor y = od::dropout(tape, x, 0.5, false, rng);
  CHECK(y.same_storage(x));
  CHECK_THROWS_AS(od::dropout(tape, x, 1.0, true, rng),
                  std::invalid_argument);
}

TEST_CASE("identical seeds give bitwise-identical forward and gradients") {
  const auto run = [](std::uint64_t seed) {
    Rng rng(seed);
    Tensor x = random_tensor({2, 5, 6}, rng, -1.0, 1.0);
    Tensor k = random_tensor({3, 2, 3, 3}, rng, -1.0, 1.0);
    Tensor bias = random_tensor({3}, rng, -0.5, 0.5);
    Tape tape;
    Tensor y = od::conv2d(tape, x, k, bias, 1, 1);
    Tensor drop = od::dropout(tape, y, 0.3, true, rng);
    Tensor loss = od::mean_all(tape, od::mul(tape, drop, drop));
    tape.backward(loss);
    std::vector<double> out = {loss.item()};
    for (double g : k.grad()) out.push_back(g);
    return out;
  };
  CHECK(run(99) == run(99));
}

TEST_CASE("adam takes the textbook first step") {
  Tensor p = Tensor::scalar(0.0, true);
  p.grad()[0] = 1.0;
  AdamConfig cfg;
  cfg.lr = 1e-5;
  Adam opt(cfg);
  opt.add_parameter("p", p);
  opt.step();
  // Bias-corrected m_hat = v_hat = 1, so the step is lr / (1 + eps).
  CHECK(p.values()[0] == doctest::Approx(-1e-5).epsilon(1e-6));
  CHECK(opt.step_count() == 1);
  CHECK(p.grad()[0] == 0.0);  // grads zeroed after the step
}

TEST_CASE("adam leaves a zero-gradient parameter unchanged") {
  Tensor p = Tensor::scalar(1.5, true);
  p.grad();  // allocate zeros
  Adam opt;
  opt.add_parameter("p", p);
  opt.step();
  CHECK(p.values()[0] == 1.5);
}

TEST_CASE("adam moves monotonically under a constant gradient") {
  Tensor p = Tensor::scalar(0.0, true);
  Adam opt(AdamConfig{1e-3, 0.9, 0.999, 1e-8});
  opt.add_parameter("p", p);
  double prev = 0.0;
  for (int i = 0; i < 2; ++i) {
    p.grad()[0] = 1.0;
    opt.step();
    CHECK(p.values()[0] < prev);
    prev = p.values()[0];
  }
}

TEST_CASE("adam rejects unregistered gradients and duplicates") {
  Tensor p = Tensor::scalar(0.0, true);
  Adam opt;
  opt.add_parameter("p", p);
  CHECK_THROWS_AS(opt.add_parameter("p", p), std::invalid_argument);
  CHECK_THROWS_AS(opt.step(), std::invalid_argument);  // no grad written

  Tensor frozen = Tensor::scalar(0.0, false);
  Adam opt2;
  CHECK_THROWS_AS(opt2.add_parameter("q", frozen), std::invalid_argument);
}

TEST_CASE("checkpoint round-trips parameters bit-for-bit") {
  const std::string path = "test_checkpoint.mfck";
  Rng rng(31);
  Tensor a = random_tensor({3, 4}, rng, -5.0, 5.0);
  Tensor b = random_tensor({7}, rng, -1e-12, 1e12);
  b.values()[0] = 0.1 + 0.2;  // exercise non-representable decimals
  save_checkpoint(path, {{"layer.weight", a}, {"layer.bias", b}});

  auto loaded = load_checkpoint(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].first == "layer.weight");
  CHECK(loaded[0].second.shape() == a.shape());
  CHECK(loaded[0].second.values() == a.values());
  CHECK(loaded[1].first == "layer.bias");
  CHECK(loaded[1].second.values() == b.values());
  std::filesystem::remove(path);
}

TEST_CASE("checkpoint rejects corrupt files") {
  const std::string path = "test_checkpoint_bad.mfck";
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOPE";
  }
  CHECK_THROWS_AS(load_checkpoint(path), DataError);
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "MFCK";  // truncated before the version field
  }
  CHECK_THROWS_AS(load_checkpoint(path), DataError);
  CHECK_THROWS_AS(load_checkpoint("does_not_exist.mfck"), DataError);
  std::filesystem::remove(path);
}
