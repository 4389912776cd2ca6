#include "doctest.h"

#include <cmath>
#include <random>

#include "galclean/nn.hpp"

using namespace galclean;

TEST_CASE("mlp_forward basics") {
  SUBCASE("zero weights and biases give zero output") {
    auto rng = make_rng(1, 0);
    MlpParams p = MlpParams::init(3, 4, 2, rng);
    p.zero();
    DenseMatrix x(5, 3);
    for (double& v : x.data()) v = 1.0;
    auto f = mlp_forward(p, x);
    for (double v : f.out.data()) CHECK(v == 0.0);
  }
  SUBCASE("relu clamps a negative pre-activation") {
    MlpParams p;
    p.w_in = DenseMatrix::filled(1, 1, 1.0);
    p.b_in = {0.0};
    p.w_out = DenseMatrix::filled(1, 1, 1.0);
    p.b_out = {0.0};
    DenseMatrix x(1, 1);
    x(0, 0) = -1.0;
    auto f = mlp_forward(p, x);
    CHECK(f.hidden(0, 0) == 0.0);
    CHECK(f.out(0, 0) == 0.0);
  }
  SUBCASE("output shape follows the weights") {
    auto rng = make_rng(2, 0);
    MlpParams p = MlpParams::init(3, 8, 6, rng);
    DenseMatrix x = gaussian_matrix(4, 3, 1.0, rng);
    auto f = mlp_forward(p, x);
    CHECK(f.out.rows() == 4);
    CHECK(f.out.cols() == 6);
    DenseMatrix bad = gaussian_matrix(4, 5, 1.0, rng);
    CHECK_THROWS(mlp_forward(p, bad));
  }
}

TEST_CASE("softmax_rows") {
  SUBCASE("uniform logits give 1/C") {
    DenseMatrix m = DenseMatrix::filled(2, 5, 3.7);
    auto s = softmax_rows(m);
    for (double v : s.data()) CHECK(v == doctest::Approx(0.2));
  }
  SUBCASE("large logits do not overflow") {
    DenseMatrix m(1, 2);
    m(0, 0) = 1000.0;
    m(0, 1) = 0.0;
    auto s = softmax_rows(m);
    CHECK(s(0, 0) == doctest::Approx(1.0));
    CHECK(s(0, 1) == doctest::Approx(0.0));
    CHECK(std::isfinite(s(0, 0)));
  }
  SUBCASE("single column is all ones") {
    DenseMatrix m(3, 1);
    m(0, 0) = -4.0;
    auto s = softmax_rows(m);
    for (double v : s.data()) CHECK(v == 1.0);
  }
  SUBCASE("rows sum to one for magnitudes up to 1e4") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-1e4, 1e4);
    DenseMatrix m(20, 7);
    for (double& v : m.data()) v = d(rng);
    auto s = softmax_rows(m);
    for (int i = 0; i < 20; ++i) {
      double sum = 0.0;
      for (int j = 0; j < 7; ++j) sum += s(i, j);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("cross_entropy") {
  SUBCASE("perfect prediction is zero") {
    DenseMatrix p(2, 3);
    p(0, 1) = 1.0;
    p(1, 0) = 1.0;
    std::vector<int> t{1, 0};
    CHECK(cross_entropy(p, t) == doctest::Approx(0.0));
  }
  SUBCASE("uniform prediction is ln C") {
    DenseMatrix p = DenseMatrix::filled(4, 5, 0.2);
    std::vector<int> t{0, 1, 2, 3};
    CHECK(cross_entropy(p, t) == doctest::Approx(std::log(5.0)));
  }
  SUBCASE("two rows at half probability give ln 2") {
    DenseMatrix p = DenseMatrix::filled(2, 2, 0.5);
    std::vector<int> t{0, 1};
    CHECK(cross_entropy(p, t) == doctest::Approx(std::log(2.0)));
  }
  SUBCASE("one-hot target matrix variant agrees") {
    DenseMatrix p(2, 2);
    p(0, 0) = 0.25;
    p(0, 1) = 0.75;
    p(1, 0) = 0.5;
    p(1, 1) = 0.5;
    DenseMatrix t(2, 2);
    t(0, 0) = 1.0;
    t(1, 1) = 1.0;
    std::vector<int> ti{0, 1};
    CHECK(cross_entropy(p, t) == doctest::Approx(cross_entropy(p, ti)));
  }
  SUBCASE("non-negative always, zero only at one-hot") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> d(0.01, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      DenseMatrix logits(3, 4);
      for (double& v : logits.data()) v = d(rng) * 10;
      auto probs = softmax_rows(logits);
      std::vector<int> t{trial % 4, (trial + 1) % 4, (trial + 2) % 4};
      CHECK(cross_entropy(probs, t) >= 0.0);
    }
  }
  SUBCASE("shape mismatch throws") {
    DenseMatrix p(2, 2);
    std::vector<int> t{0};
    CHECK_THROWS(cross_entropy(p, t));
  }
}

TEST_CASE("cosine") {
  std::vector<double> u{1.0, 2.0, -3.0};
  std::vector<double> zero{0.0, 0.0, 0.0};
  CHECK(cosine(u, u) == doctest::Approx(1.0));
  std::vector<double> ex{1.0, 0.0, 0.0};
  std::vector<double> ey{0.0, 1.0, 0.0};
  CHECK(cosine(ex, ey) == doctest::Approx(0.0));
  CHECK(cosine(zero, u) == 0.0);
  CHECK(cosine(u, zero) == 0.0);
}

TEST_CASE("adam") {
  SUBCASE("zero gradient with zero decay leaves params unchanged") {
    std::vector<double> p{1.0, -2.0, 3.0};
    std::vector<double> g{0.0, 0.0, 0.0};
    AdamConfig cfg;
    cfg.weight_decay = 0.0;
    std::vector<std::span<double>> pv{{p.data(), p.size()}};
    Adam opt(cfg, pv);
    opt.step(pv, {{g.data(), g.size()}});
    CHECK(p[0] == 1.0);
    CHECK(p[1] == -2.0);
    CHECK(p[2] == 3.0);
  }
  SUBCASE("first step moves each param against the gradient sign") {
    std::vector<double> p{1.0, 1.0};
    std::vector<double> g{0.5, -0.25};
    AdamConfig cfg;
    cfg.weight_decay = 0.0;
    std::vector<std::span<double>> pv{{p.data(), p.size()}};
    Adam opt(cfg, pv);
    opt.step(pv, {{g.data(), g.size()}});
    CHECK(p[0] < 1.0);
    CHECK(p[1] > 1.0);
  }
  SUBCASE("decoupled decay shrinks the parameter norm under zero gradients") {
    std::vector<double> p{1.0, -2.0};
    const double norm0 = std::sqrt(p[0] * p[0] + p[1] * p[1]);
    std::vector<double> g{0.0, 0.0};
    AdamConfig cfg;
    cfg.weight_decay = 0.1;
    std::vector<std::span<double>> pv{{p.data(), p.size()}};
    Adam opt(cfg, pv);
    opt.step(pv, {{g.data(), g.size()}});
    const double norm1 = std::sqrt(p[0] * p[0] + p[1] * p[1]);
    opt.step(pv, {{g.data(), g.size()}});
    const double norm2 = std::sqrt(p[0] * p[0] + p[1] * p[1]);
    CHECK(norm1 < norm0);
    CHECK(norm2 < norm1);
  }
  SUBCASE("deterministic given identical inputs") {
    auto run = [] {
      std::vector<double> p{0.3, 0.7};
      std::vector<double> g{0.1, -0.2};
      std::vector<std::span<double>> pv{{p.data(), p.size()}};
      Adam opt(AdamConfig{}, pv);
      for (int i = 0; i < 10; ++i) opt.step(pv, {{g.data(), g.size()}});
      return p;
    };
    CHECK(run() == run());
  }
}

TEST_CASE("grad_check on closed-form cases") {
  SUBCASE("quadratic loss") {
    std::vector<double> p{0.5, -1.5, 2.0};
    auto loss = [&] {
      double s = 0.0;
      for (double v : p) s += v * v;
      return s;
    };
    std::vector<double> analytic{2 * p[0], 2 * p[1], 2 * p[2]};
    const double err = grad_check(loss, {{p.data(), p.size()}}, {{analytic.data(), analytic.size()}}, 1e-5);
    CHECK(err < 1e-6);
  }
  SUBCASE("softmax + cross-entropy chain over 3 classes") {
    DenseMatrix logits(2, 3);
    logits(0, 0) = 0.2;
    logits(0, 1) = -0.4;
    logits(0, 2) = 1.1;
    logits(1, 0) = -0.7;
    logits(1, 1) = 0.3;
    logits(1, 2) = 0.05;
    std::vector<int> targets{2, 0};
    auto loss = [&] { return cross_entropy(softmax_rows(logits), targets); };
    // analytic: (softmax - onehot) / rows
    auto probs = softmax_rows(logits);
    DenseMatrix analytic(2, 3);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 3; ++j) analytic(i, j) = (probs(i, j) - (j == targets[i] ? 1.0 : 0.0)) / 2.0;
    const double err = grad_check(loss, {logits.data()}, {analytic.data()}, 1e-6);
    CHECK(err < 1e-5);
  }
}
