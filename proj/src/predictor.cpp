#include "benchpress/predictor.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "benchpress/errors.hpp"

namespace benchpress {

namespace {

constexpr int kDegree = 3;

struct Line {
  double slope;
  double intercept;
};

Line least_squares_line(std::span<const double> s, std::span<const double> y) {
  const auto n = static_cast<double>(s.size());
  const double ms = std::accumulate(s.begin(), s.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    sxy += (s[i] - ms) * (y[i] - my);
    sxx += (s[i] - ms) * (s[i] - ms);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return {slope, my - slope * ms};
}

// Index of the knot span containing x, restricted to non-degenerate spans.
std::size_t find_span(const std::vector<double>& t, std::size_t n_basis, double x) {
  if (x >= t[n_basis]) return n_basis - 1;
  if (x <= t[kDegree]) return kDegree;
  auto it = std::upper_bound(t.begin() + kDegree, t.begin() + static_cast<std::ptrdiff_t>(n_basis) + 1, x);
  return static_cast<std::size_t>(it - t.begin()) - 1;
}

// Cox-de Boor: fills the kDegree + 1 non-zero basis values on `span`.
void basis_funs(const std::vector<double>& t, std::size_t span, double x, double* out) {
  double left[kDegree + 1];
  double right[kDegree + 1];
  out[0] = 1.0;
  for (int j = 1; j <= kDegree; ++j) {
    left[j] = x - t[span + 1 - static_cast<std::size_t>(j)];
    right[j] = t[span + static_cast<std::size_t>(j)] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = out[r] / (right[r + 1] + left[j - r]);
      out[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out[j] = saved;
  }
}

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

ScoreMapModel ScoreMapModel::constant(double value) {
  ScoreMapModel m;
  m.kind_ = Kind::constant;
  m.intercept_ = value;
  return m;
}

ScoreMapModel ScoreMapModel::linear(double slope, double intercept) {
  ScoreMapModel m;
  m.kind_ = Kind::linear;
  m.slope_ = slope;
  m.intercept_ = intercept;
  return m;
}

double ScoreMapModel::spline_value(double x) const {
  const std::size_t n_basis = coef_.size();
  const std::size_t span = find_span(knots_, n_basis, x);
  double b[kDegree + 1];
  basis_funs(knots_, span, x, b);
  double v = 0.0;
  for (int r = 0; r <= kDegree; ++r) v += b[r] * coef_[span - kDegree + static_cast<std::size_t>(r)];
  return v;
}

double ScoreMapModel::predict(double s) const {
  switch (kind_) {
    case Kind::constant:
      return intercept_;
    case Kind::linear:
      return slope_ * s + intercept_;
    case Kind::spline:
      if (s < lo_) return coef_.front() + lo_slope_ * (s - lo_);
      if (s > hi_) return coef_.back() + hi_slope_ * (s - hi_);
      return spline_value(s);
  }
  return intercept_;
}

std::vector<double> ScoreMapModel::predict(std::span<const double> s) const {
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = predict(s[i]);
  return out;
}

std::vector<double> bspline_basis(const std::vector<double>& knots, double x) {
  const std::size_t n_basis = knots.size() - kDegree - 1;
  std::vector<double> out(n_basis, 0.0);
  const std::size_t span = find_span(knots, n_basis, x);
  double b[kDegree + 1];
  basis_funs(knots, span, x, b);
  for (int r = 0; r <= kDegree; ++r) out[span - kDegree + static_cast<std::size_t>(r)] = b[r];
  return out;
}

ScoreMapModel fit_score_map(std::span<const double> s, std::span<const double> y, const ScoreMapOptions& options) {
  if (s.size() != y.size()) throw ValidationError("score map needs equally many subset and full accuracies");
  if (s.size() < 2) throw ValidationError("score map needs at least two training pairs");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s[i] >= 0.0 && s[i] <= 1.0 && y[i] >= 0.0 && y[i] <= 1.0)) throw ValidationError("score map inputs must lie in [0, 1]");
  }
  if (!(options.smoothing_penalty >= 0.0)) throw ValidationError("smoothing penalty must be non-negative");

  const auto [lo_it, hi_it] = std::minmax_element(s.begin(), s.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (hi - lo <= 0.0) return ScoreMapModel::constant(std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size()));

  const Line line = least_squares_line(s, y);
  if (s.size() < options.min_pairs_for_spline) return ScoreMapModel::linear(line.slope, line.intercept);

  std::vector<double> sorted(s.begin(), s.end());
  std::sort(sorted.begin(), sorted.end());
  const double tol = 1e-9 * (hi - lo);
  std::vector<double> knots(kDegree + 1, lo);
  for (std::size_t j = 1; j <= options.interior_knots; ++j) {
    const double q = quantile(sorted, static_cast<double>(j) / static_cast<double>(options.interior_knots + 1));
    if (q > knots.back() + tol && q < hi - tol) knots.push_back(q);
  }
  knots.insert(knots.end(), kDegree + 1, hi);
  const std::size_t n_basis = knots.size() - kDegree - 1;

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_basis), static_cast<Eigen::Index>(n_basis));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_basis));
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::size_t span = find_span(knots, n_basis, s[i]);
    double b[kDegree + 1];
    basis_funs(knots, span, s[i], b);
    const std::size_t first = span - kDegree;
    for (int r = 0; r <= kDegree; ++r) {
      const auto ri = static_cast<Eigen::Index>(first + static_cast<std::size_t>(r));
      rhs(ri) += b[r] * y[i];
      for (int c = 0; c <= kDegree; ++c) gram(ri, static_cast<Eigen::Index>(first + static_cast<std::size_t>(c))) += b[r] * b[c];
    }
  }

  // Second divided differences over Greville abscissae.
  std::vector<double> greville(n_basis);
  for (std::size_t i = 0; i < n_basis; ++i) greville[i] = (knots[i + 1] + knots[i + 2] + knots[i + 3]) / kDegree;
  const double mean_gap = (greville.back() - greville.front()) / static_cast<double>(n_basis - 1);
  const Eigen::Index n_pen = n_basis >= 3 ? static_cast<Eigen::Index>(n_basis - 2) : 0;
  Eigen::MatrixXd diff = Eigen::MatrixXd::Zero(n_pen, static_cast<Eigen::Index>(n_basis));
  for (Eigen::Index i = 0; i < n_pen; ++i) {
    const auto u = static_cast<std::size_t>(i);
    const double g0 = greville[u + 1] - greville[u];
    const double g1 = greville[u + 2] - greville[u + 1];
    diff(i, i) = mean_gap / g0;
    diff(i, i + 1) = -mean_gap / g0 - mean_gap / g1;
    diff(i, i + 2) = mean_gap / g1;
  }

  Eigen::VectorXd coef;
  const Eigen::MatrixXd system = gram + options.smoothing_penalty * diff.transpose() * diff;
  Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() == Eigen::Success) coef = llt.solve(rhs);
  if (llt.info() != Eigen::Success || !coef.allFinite()) {
    // Rank-deficient system (e.g. zero penalty with fewer distinct abscissae than basis
    // functions): minimum-norm least squares on the stacked design.
    Eigen::MatrixXd stacked = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.size()) + n_pen, static_cast<Eigen::Index>(n_basis));
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto row = bspline_basis(knots, s[i]);
      for (std::size_t c = 0; c < n_basis; ++c) stacked(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = row[c];
    }
    stacked.bottomRows(n_pen) = std::sqrt(options.smoothing_penalty) * diff;
    Eigen::VectorXd target = Eigen::VectorXd::Zero(stacked.rows());
    for (std::size_t i = 0; i < y.size(); ++i) target(static_cast<Eigen::Index>(i)) = y[i];
    coef = stacked.completeOrthogonalDecomposition().solve(target);
  }

  ScoreMapModel m;
  m.kind_ = ScoreMapModel::Kind::spline;
  m.lo_ = lo;
  m.hi_ = hi;
  m.knots_ = std::move(knots);
  m.coef_.assign(coef.data(), coef.data() + coef.size());
  m.penalty_ = options.smoothing_penalty;
  m.slope_ = line.slope;
  m.intercept_ = line.intercept;
  const auto& t = m.knots_;
  const auto& c = m.coef_;
  const std::size_t nb = c.size();
  m.lo_slope_ = kDegree * (c[1] - c[0]) / (t[kDegree + 1] - t[1]);
  m.hi_slope_ = kDegree * (c[nb - 1] - c[nb - 2]) / (t[nb + kDegree - 1] - t[nb - 1]);
  return m;
}

double predict_score_map(const ScoreMapModel& model, double s) { return model.predict(s); }

double rmse(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) throw ValidationError("rmse needs vectors of equal length");
  if (predicted.empty()) throw ValidationError("rmse needs at least one element");
  double ss = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - actual[i];
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(predicted.size()));
}

double AttributionModel::predict(std::span<const std::uint8_t> row) const {
  double v = intercept;
  for (std::size_t j = 0; j < shape_levels.size(); ++j) v += shape_levels[j][row[j]];
  return v;
}

AttributionModel fit_attribution_model(const ScoreMatrix& rows, std::span<const double> targets,
                                       const AttributionOptions& options) {
  const std::size_t n = rows.n_models();
  const std::size_t p = rows.n_samples();
  if (targets.size() != n) throw ValidationError("attribution targets must align with the training rows");
  if (!(options.learning_rate > 0.0 && options.learning_rate <= 1.0)) throw ValidationError("learning rate must lie in (0, 1]");

  // Column-major copy so each feature step streams one contiguous column.
  std::vector<std::uint8_t> x(n * p);
  std::vector<std::size_t> ones(p, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = rows.row(i);
    for (std::size_t j = 0; j < p; ++j) {
      x[j * n + i] = r[j];
      ones[j] += r[j];
    }
  }

  AttributionModel model;
  model.feature_ids = rows.sample_ids();
  model.intercept = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(n);
  model.shape_levels.assign(p, {0.0, 0.0});
  std::vector<double> residual(n);
  for (std::size_t i = 0; i < n; ++i) residual[i] = targets[i] - model.intercept;

  const double lr = options.learning_rate;
  for (std::size_t cycle = 0; cycle < options.cycles; ++cycle) {
    for (std::size_t j = 0; j < p; ++j) {
      const std::size_t n1 = ones[j];
      const std::size_t n0 = n - n1;
      if (n1 == 0 || n0 == 0) continue;  // constant feature: absorbed by the intercept
      const std::uint8_t* col = x.data() + j * n;
      double sum[2] = {0.0, 0.0};
      for (std::size_t i = 0; i < n; ++i) sum[col[i]] += residual[i];
      const double step[2] = {lr * sum[0] / static_cast<double>(n0), lr * sum[1] / static_cast<double>(n1)};
      model.shape_levels[j][0] += step[0];
      model.shape_levels[j][1] += step[1];
      for (std::size_t i = 0; i < n; ++i) residual[i] -= step[col[i]];
    }
  }

  model.shape_norms.assign(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    auto& f = model.shape_levels[j];
    const auto n1 = static_cast<double>(ones[j]);
    const auto n0 = static_cast<double>(n - ones[j]);
    if (ones[j] == 0 || ones[j] == n) {
      f = {0.0, 0.0};
      continue;
    }
    const double mean = (n0 * f[0] + n1 * f[1]) / static_cast<double>(n);
    f[0] -= mean;
    f[1] -= mean;
    model.intercept += mean;
    model.shape_norms[j] = std::sqrt((n0 * f[0] * f[0] + n1 * f[1] * f[1]) / static_cast<double>(n));
  }
  return model;
}

}  // namespace benchpress
