#include <doctest.h>

#include <cmath>
#include <numeric>

#include "benchpress/errors.hpp"
#include "benchpress/predictor.hpp"
#include "benchpress/rng.hpp"
#include "oracles.hpp"

using namespace benchpress;

namespace {

ScoreMatrix design(const std::vector<std::vector<std::uint8_t>>& rows) {
  std::vector<std::string> m;
  std::vector<std::string> s;
  for (std::size_t i = 0; i < rows.size(); ++i) m.push_back("m" + std::to_string(i));
  for (std::size_t j = 0; j < rows.front().size(); ++j) s.push_back("f" + std::to_string(j));
  std::vector<std::uint8_t> cells;
  for (const auto& r : rows) cells.insert(cells.end(), r.begin(), r.end());
  return ScoreMatrix(m, s, cells);
}

}  // namespace

TEST_CASE("score map on identity-line data") {
  const std::vector<double> s{0.1, 0.3, 0.5, 0.9};
  const ScoreMapModel m = fit_score_map(s, s);
  CHECK(m.predict(0.3) == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(predict_score_map(m, 0.42) == doctest::Approx(0.42).epsilon(1e-6));
}

TEST_CASE("score map constant and degenerate inputs") {
  Rng rng(3);
  std::vector<double> s;
  std::vector<double> y;
  for (int i = 0; i < 40; ++i) {
    s.push_back(rng.uniform());
    y.push_back(0.7);
  }
  const ScoreMapModel m = fit_score_map(s, y);
  for (double x : {0.0, 0.13, 0.5, 0.99, 1.0}) CHECK(std::abs(m.predict(x) - 0.7) < 1e-9);

  const std::vector<double> same{0.5, 0.5};
  const std::vector<double> targets{0.2, 0.8};
  const ScoreMapModel c = fit_score_map(same, targets);
  CHECK(c.kind() == ScoreMapModel::Kind::constant);
  CHECK(c.predict(0.1) == doctest::Approx(0.5));
  CHECK(ScoreMapModel::constant(0.25).predict(0.9) == 0.25);

  const std::vector<double> one{0.5};
  CHECK_THROWS_AS(fit_score_map(one, one), ValidationError);
  const std::vector<double> out_of_range{0.1, 1.5};
  CHECK_THROWS_AS(fit_score_map(out_of_range, same), ValidationError);
}

TEST_CASE("few pairs use the least-squares line") {
  const std::vector<double> s{0.1, 0.4, 0.5, 0.8};
  const std::vector<double> y{0.2, 0.3, 0.6, 0.7};
  const ScoreMapModel m = fit_score_map(s, y);
  CHECK(m.kind() == ScoreMapModel::Kind::linear);
  const auto [slope, intercept] = oracle::ls_line(s, y);
  for (double x : {0.0, 0.3, 1.0}) CHECK(m.predict(x) == doctest::Approx(slope * x + intercept).epsilon(1e-12));
}

TEST_CASE("spline reduces to the least-squares line under a huge penalty") {
  Rng rng(5);
  std::vector<double> s;
  std::vector<double> y;
  for (int i = 0; i < 60; ++i) {
    const double x = rng.uniform();
    s.push_back(x);
    y.push_back(std::clamp(0.2 + 0.5 * x + 0.1 * std::sin(8 * x), 0.0, 1.0));
  }
  ScoreMapOptions opt;
  opt.smoothing_penalty = 1e9;
  const ScoreMapModel m = fit_score_map(s, y, opt);
  const auto [slope, intercept] = oracle::ls_line(s, y);
  for (double x = 0.0; x <= 1.0; x += 0.05) CHECK(std::abs(m.predict(x) - (slope * x + intercept)) < 1e-5);
}

TEST_CASE("zero penalty reproduces monotone training data") {
  // Fewer distinct abscissae than basis functions: the unpenalized fit interpolates.
  const std::vector<double> s{0.05, 0.1, 0.2, 0.35, 0.5, 0.6, 0.75, 0.9};
  const std::vector<double> y{0.02, 0.15, 0.22, 0.3, 0.55, 0.61, 0.8, 0.95};
  ScoreMapOptions opt;
  opt.smoothing_penalty = 0.0;
  const ScoreMapModel exact = fit_score_map(s, y, opt);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(exact.predict(s[i]) == doctest::Approx(y[i]).epsilon(1e-8));

  // With the default penalty the residuals stay below the spread of the data.
  const ScoreMapModel smooth = fit_score_map(s, y);
  std::vector<double> pred;
  for (double x : s) pred.push_back(smooth.predict(x));
  const auto [slope, intercept] = oracle::ls_line(s, y);
  std::vector<double> line_pred;
  for (double x : s) line_pred.push_back(slope * x + intercept);
  CHECK(oracle::rmse(pred, y) <= oracle::rmse(line_pred, y) + 1e-12);
}

TEST_CASE("score map predictions are finite everywhere") {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> s;
    std::vector<double> y;
    const int n = 8 + static_cast<int>(rng.below(60));
    for (int i = 0; i < n; ++i) {
      s.push_back(static_cast<double>(rng.below(11)) / 10.0);
      y.push_back(rng.uniform());
    }
    const ScoreMapModel m = fit_score_map(s, y);
    for (double x = -0.5; x <= 1.5; x += 0.01) REQUIRE(std::isfinite(m.predict(x)));
    const ScoreMapModel again = fit_score_map(s, y);
    CHECK(again.coefficients() == m.coefficients());
  }
}

TEST_CASE("b-spline basis is a partition of unity") {
  const std::vector<double> knots{0, 0, 0, 0, 0.2, 0.5, 0.7, 1, 1, 1, 1};
  for (double x = 0.0; x <= 1.0; x += 0.0625) {
    const auto b = bspline_basis(knots, x);
    CHECK(b.size() == 7);
    CHECK(std::accumulate(b.begin(), b.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (double v : b) CHECK(v >= -1e-15);
  }
}

TEST_CASE("rmse") {
  const std::vector<double> a{0.5, 0.7};
  const std::vector<double> b{0.5, 0.5};
  CHECK(rmse(a, a) == 0.0);
  CHECK(rmse(a, b) == doctest::Approx(std::sqrt(0.02)).epsilon(1e-12));
  CHECK(rmse(a, b) == rmse(b, a));
  const std::vector<double> zero{0.0};
  const std::vector<double> one{1.0};
  CHECK(rmse(zero, one) == 1.0);
}

TEST_CASE("attribution on a single linear feature") {
  std::vector<std::vector<std::uint8_t>> rows;
  std::vector<double> y;
  for (int i = 0; i < 20; ++i) {
    const std::uint8_t x = i % 3 == 0 ? 1 : 0;
    rows.push_back({x});
    y.push_back(0.2 + 0.6 * x);
  }
  const AttributionModel m = fit_attribution_model(design(rows), y);
  std::vector<double> pred;
  for (const auto& r : rows) pred.push_back(m.predict(r));
  CHECK(oracle::rmse(pred, y) < 1e-6);
  CHECK(m.shape_norms[0] > 0.0);
  // Closed form: the shape levels are the centred group means.
  const double frac = 7.0 / 20.0;
  CHECK(m.shape_levels[0][1] - m.shape_levels[0][0] == doctest::Approx(0.6).epsilon(1e-6));
  CHECK(m.shape_norms[0] == doctest::Approx(0.6 * std::sqrt(frac * (1 - frac))).epsilon(1e-6));
}

TEST_CASE("constant feature has a zero shape") {
  std::vector<std::vector<std::uint8_t>> rows;
  std::vector<double> y;
  for (int i = 0; i < 10; ++i) {
    rows.push_back({0, static_cast<std::uint8_t>(i % 2)});
    y.push_back(0.1 * i);
  }
  const AttributionModel m = fit_attribution_model(design(rows), y);
  CHECK(m.shape_levels[0][0] == 0.0);
  CHECK(m.shape_norms[0] == 0.0);
  CHECK(m.feature_ids == std::vector<std::string>{"f0", "f1"});
}

TEST_CASE("irrelevant feature fades as cycles grow") {
  Rng rng(2);
  std::vector<std::vector<std::uint8_t>> rows;
  std::vector<double> y;
  for (int i = 0; i < 64; ++i) {
    const std::uint8_t a = rng.bernoulli(0.5) ? 1 : 0;
    const std::uint8_t b = rng.bernoulli(0.5) ? 1 : 0;
    rows.push_back({a, b});
    y.push_back(0.3 + 0.4 * a);
  }
  const ScoreMatrix x = design(rows);
  double previous = 1.0;
  for (std::size_t cycles : {5, 50, 500}) {
    AttributionOptions opt;
    opt.cycles = cycles;
    const AttributionModel m = fit_attribution_model(x, y, opt);
    CHECK(m.shape_norms[0] > m.shape_norms[1]);
    CHECK(m.shape_norms[1] <= previous + 1e-15);
    previous = m.shape_norms[1];
  }
  CHECK(previous < 1e-9);
}

TEST_CASE("attribution matches exact least squares on binary designs") {
  Rng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t p = 1 + rng.below(8);
    const std::size_t n = 32 + rng.below(40);
    std::vector<std::vector<std::uint8_t>> rows(n, std::vector<std::uint8_t>(p));
    std::vector<double> y(n);
    for (auto& r : rows) {
      for (auto& v : r) v = rng.bernoulli(0.5) ? 1 : 0;
    }
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = 0.1 * rng.uniform();
      for (std::size_t j = 0; j < p; ++j) y[i] += 0.08 * static_cast<double>(rows[i][j]) * static_cast<double>(j + 1) / p;
    }
    const std::vector<double> beta = oracle::ls_fit(rows, y);
    const AttributionModel m = fit_attribution_model(design(rows), y);

    // Shape levels are centred, so the mean shape over the rows vanishes.
    for (std::size_t j = 0; j < p; ++j) {
      double total = 0.0;
      for (const auto& r : rows) total += m.shape_levels[j][r[j]];
      CHECK(std::abs(total) < 1e-9);
      CHECK(std::abs((m.shape_levels[j][1] - m.shape_levels[j][0]) - beta[j + 1]) < 1e-4);
    }
    for (const auto& r : rows) {
      double ls = beta[0];
      for (std::size_t j = 0; j < p; ++j) ls += beta[j + 1] * r[j];
      CHECK(std::abs(m.predict(r) - ls) < 1e-4);
    }
  }
}
