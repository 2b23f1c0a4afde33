#include <doctest.h>

#include <cmath>

#include "drr/error.hpp"
#include "drr/nn.hpp"

using namespace drr;
using namespace drr::nn;

namespace {

Matrix rows(std::initializer_list<std::initializer_list<double>> r) {
  Matrix m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, RngStream& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

// Fixed random projection of an output, turning any layer into a scalar loss.
double project(const Matrix& y, const Matrix& g) { return (y.array() * g.array()).sum(); }

}  // namespace

TEST_CASE("dense forward and backward") {
  ParamSet p;
  auto& w = p[p.add("w", ParamRole::Weight, 2, 2)];
  auto& b = p[p.add("b", ParamRole::Bias, 1, 2)];
  w.value = rows({{2, 0}, {0, 3}});
  CHECK(dense_forward(rows({{1, 0}}), w, b) == rows({{2, 0}}));
  b.value = rows({{1, 1}});
  CHECK(dense_forward(rows({{0, 0}}), w, b) == rows({{1, 1}}));

  p.zero_grad();
  const Matrix g = rows({{0.5, -2}});
  const Matrix dx = dense_backward(rows({{1, 0}}), g, w, b);
  CHECK(w.grad.row(0) == g.row(0));
  CHECK(w.grad.row(1).isZero());
  CHECK(b.grad == g);
  CHECK(dx == rows({{1, -6}}));
}

TEST_CASE("relu") {
  CHECK(relu_forward(rows({{-1, 0, 2}})) == rows({{0, 0, 2}}));
  CHECK(relu_forward(rows({{-1, -2}})).isZero());
  CHECK(relu_backward(rows({{-1, -2}}), rows({{5, 5}})).isZero());
  CHECK(relu_backward(rows({{1, 2}}), rows({{5, -3}})) == rows({{5, -3}}));
  CHECK(relu_backward(rows({{0}}), rows({{1}}))(0, 0) == 0.0);
}

TEST_CASE("layer norm forward values") {
  ParamSet p;
  auto& g = p[p.add("g", ParamRole::NormGain, 1, 3)];
  auto& b = p[p.add("b", ParamRole::NormBias, 1, 3)];
  g.value.setOnes();
  // mean 2, biased variance 2/3
  const double s = 1.0 / std::sqrt(2.0 / 3.0 + kLayerNormEps);
  const Matrix y = layer_norm_forward(rows({{1, 2, 3}}), g, b);
  CHECK(y(0, 0) == doctest::Approx(-s).epsilon(1e-12));
  CHECK(y(0, 1) == doctest::Approx(0.0));
  CHECK(y(0, 2) == doctest::Approx(1.2247).epsilon(1e-3));

  b.value = rows({{0.5, -1, 2}});
  CHECK(layer_norm_forward(rows({{7, 7, 7}}), g, b) == b.value);
  g.value.setZero();
  CHECK(layer_norm_forward(rows({{1, 5, -3}}), g, b) == b.value);
}

TEST_CASE("layer norm output has zero mean and unit variance per row") {
  ParamSet p;
  auto& g = p[p.add("g", ParamRole::NormGain, 1, 40)];
  auto& b = p[p.add("b", ParamRole::NormBias, 1, 40)];
  g.value.setOnes();
  RngStream rng(3);
  const Matrix x = random_matrix(25, 40, rng, 10.0);
  const Matrix y = layer_norm_forward(x, g, b);
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const double mean = y.row(i).mean();
    const double var = (y.row(i).array() - mean).square().mean();
    CHECK(std::abs(mean) < 1e-12);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-5));
  }
}

TEST_CASE("dropout") {
  RngStream rng(1);
  const Matrix x = rows({{1, 2, 3, 4}});
  DropoutMask mask;
  CHECK(dropout_forward(x, 0.0, rng, true, mask) == x);
  CHECK(mask.identity());
  CHECK(rng.counter() == 0);
  CHECK(dropout_forward(x, 0.9, rng, false, mask) == x);
  CHECK(rng.counter() == 0);
  CHECK_THROWS_AS(dropout_forward(x, 1.0, rng, true, mask), ConfigError);
  CHECK_THROWS_AS(dropout_forward(x, -0.1, rng, true, mask), ConfigError);

  const Matrix y = dropout_forward(x, 0.5, rng, true, mask);
  for (Eigen::Index j = 0; j < 4; ++j) CHECK((y(0, j) == 0.0 || y(0, j) == 2 * x(0, j)));
  CHECK(dropout_backward(rows({{1, 1, 1, 1}}), mask) == mask.scale);
}

TEST_CASE("dropout is unbiased (Monte Carlo)") {
  // Each output is x/(1-p) with probability 1-p, else 0: mean x, std x*sqrt(p/(1-p)).
  const double p = 0.5;
  const int n = 10000;
  const Matrix x = rows({{1.0, -2.0, 0.25}});
  RngStream rng(77);
  Matrix sum = Matrix::Zero(1, 3);
  DropoutMask mask;
  for (int i = 0; i < n; ++i) sum += dropout_forward(x, p, rng, true, mask);
  for (Eigen::Index j = 0; j < 3; ++j) {
    const double sigma = std::abs(x(0, j)) * std::sqrt(p / (1 - p)) / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(sum(0, j) / n - x(0, j)) < 3 * sigma);
  }
}

TEST_CASE("softmax cross-entropy") {
  const std::vector<Label> f = {Label::Factual}, o = {Label::Opinion};
  const auto r = softmax_xent(rows({{0, 0, 0}}), f);
  for (Eigen::Index j = 0; j < 3; ++j) CHECK(r.probs(0, j) == doctest::Approx(1.0 / 3));
  CHECK(r.loss == doctest::Approx(std::log(3.0)));

  const auto big = softmax_xent(rows({{100, 0, 0}}), f);
  CHECK(std::isfinite(big.loss));
  CHECK(big.loss == doctest::Approx(0.0).epsilon(1e-12));
  const auto huge = softmax_xent(rows({{1000, -1000, 0}}), o);
  CHECK(huge.loss == doctest::Approx(2000.0));

  const Matrix d = softmax_xent_backward(r.probs, o);
  CHECK(d(0, 0) == doctest::Approx(1.0 / 3));
  CHECK(d(0, 1) == doctest::Approx(-2.0 / 3));
  CHECK(d(0, 2) == doctest::Approx(1.0 / 3));
}

TEST_CASE("l2 penalty covers weights only") {
  ParamSet p;
  auto& w = p[p.add("w", ParamRole::Weight, 1, 1)];
  auto& b = p[p.add("b", ParamRole::Bias, 1, 1)];
  w.value(0, 0) = 1.0;
  b.value(0, 0) = 5.0;
  p.zero_grad();
  CHECK(l2_penalty(p, 0.14) == doctest::Approx(0.14));
  CHECK(w.grad(0, 0) == doctest::Approx(0.28));
  CHECK(b.grad(0, 0) == 0.0);
  CHECK(l2_value(p, 0.14) == doctest::Approx(0.14));
  p.zero_grad();
  CHECK(l2_penalty(p, 0.0) == 0.0);
  CHECK(w.grad(0, 0) == 0.0);
  w.value.setZero();
  CHECK(l2_penalty(p, 0.14) == 0.0);
}

TEST_CASE("warmup schedule") {
  const LRSchedule s{6e-3, 500};
  CHECK(lr_at(s, 0) == 1.2e-5);
  CHECK(lr_at(s, 249) == 3e-3);
  CHECK(lr_at(s, 499) == 6e-3);
  CHECK(lr_at(s, 699) == 6e-3);
  for (int e = 1; e < 499; ++e) CHECK(lr_at(s, e) > lr_at(s, e - 1));
  CHECK(lr_at({1e-3, 0}, 0) == 1e-3);
}

TEST_CASE("adam") {
  ParamSet p;
  auto& w = p[p.add("w", ParamRole::Weight, 1, 1)];
  AdamState st(p);
  w.grad(0, 0) = 1.0;
  adam_step(st, p, 1e-3);
  const double d1 = w.value(0, 0);
  CHECK(d1 == doctest::Approx(-1e-3).epsilon(1e-5));
  CHECK(std::abs(d1 + 1e-3) < 1e-8);
  CHECK(w.grad(0, 0) == 0.0);
  w.grad(0, 0) = 1.0;
  adam_step(st, p, 1e-3);
  CHECK(std::abs(w.value(0, 0) - d1) <= std::abs(d1) + 1e-9);

  ParamSet q;
  auto& z = q[q.add("z", ParamRole::Weight, 2, 2)];
  z.value.setConstant(0.3);
  AdamState sq(q);
  for (int i = 0; i < 5; ++i) adam_step(sq, q, 1e-2);
  CHECK((z.value.array() == 0.3).all());

  z.grad(1, 1) = std::nan("");
  CHECK_THROWS_AS(adam_step(sq, q, 1e-2), NumericError);
}

TEST_CASE("gradient check per layer") {
  RngStream rng(21);
  const Matrix x = random_matrix(4, 5, rng);
  const std::vector<Label> y = {Label::Factual, Label::Socializing, Label::Opinion, Label::Opinion};

  SUBCASE("dense + softmax cross-entropy") {
    ParamSet p;
    auto& w = p[p.add("w", ParamRole::Weight, 5, 3)];
    auto& b = p[p.add("b", ParamRole::Bias, 1, 3)];
    w.value = random_matrix(5, 3, rng, 0.5);
    b.value = random_matrix(1, 3, rng, 0.5);
    auto objective = [&](bool grad) {
      const Matrix logits = dense_forward(x, w, b);
      const auto r = softmax_xent(logits, y);
      if (grad) dense_backward(x, softmax_xent_backward(r.probs, y), w, b);
      return r.loss;
    };
    const auto res = grad_check(p, objective);
    CHECK(res.coordinates == 18);
    CHECK(res.max_rel_error < 1e-5);

    // A corrupted bias gradient must be caught.
    auto broken = [&](bool grad) {
      const double l = objective(grad);
      if (grad) b.grad(0, 1) += 0.05;
      return l;
    };
    CHECK(grad_check(p, broken).max_rel_error > 1e-2);
  }

  SUBCASE("layer norm") {
    ParamSet p;
    auto& g = p[p.add("g", ParamRole::NormGain, 1, 5)];
    auto& b = p[p.add("b", ParamRole::NormBias, 1, 5)];
    g.value = random_matrix(1, 5, rng).array() + 1.0;
    b.value = random_matrix(1, 5, rng);
    const Matrix proj = random_matrix(4, 5, rng);
    // Check the input gradient too by treating x as a parameter.
    auto& xp = p[p.add("x", ParamRole::Weight, 4, 5)];
    xp.value = x;
    auto objective = [&](bool grad) {
      LayerNormCache cache;
      const Matrix out = layer_norm_forward(xp.value, g, b, &cache);
      if (grad) xp.grad += layer_norm_backward(proj, cache, g, b);
      return project(out, proj);
    };
    CHECK(grad_check(p, objective).max_rel_error < 1e-5);
  }

  SUBCASE("relu and residual add") {
    ParamSet p;
    auto& xp = p[p.add("x", ParamRole::Weight, 4, 5)];
    xp.value = x;
    const Matrix proj = random_matrix(4, 5, rng);
    auto objective = [&](bool grad) {
      const Matrix out = relu_forward(xp.value) + xp.value;
      if (grad) xp.grad += relu_backward(xp.value, proj) + proj;
      return project(out, proj);
    };
    CHECK(grad_check(p, objective).max_rel_error < 1e-5);
  }

  SUBCASE("l2 penalty") {
    ParamSet p;
    auto& w = p[p.add("w", ParamRole::Weight, 3, 3)];
    w.value = random_matrix(3, 3, rng);
    auto objective = [&](bool grad) { return grad ? l2_penalty(p, 0.14) : l2_value(p, 0.14); };
    CHECK(grad_check(p, objective).max_rel_error < 1e-5);
  }
}

TEST_CASE("argmax ties go to the lowest index") {
  const std::vector<double> a = {0.2, 0.4, 0.4}, b = {1, 1, 1}, c = {0, 0, 3};
  CHECK(argmax(a) == 1);
  CHECK(argmax(b) == 0);
  CHECK(argmax(c) == 2);
}
