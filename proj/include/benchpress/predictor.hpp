#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "benchpress/score_matrix.hpp"

namespace benchpress {

struct ScoreMapOptions {
  std::size_t interior_knots = 10;
  double smoothing_penalty = 1.0;
  /// Below this many training pairs the least-squares line is used instead of the spline.
  std::size_t min_pairs_for_spline = 8;
};

/// Univariate map from subset accuracy to full-benchmark accuracy.
///
/// Spline fits are clamped cubic B-splines with knots at training quantiles and a penalty on
/// second divided differences of the coefficients taken over their Greville abscissae, scaled
/// by the mean abscissa spacing. On uniform knots this is the usual second-difference
/// P-spline penalty; on any knot layout its null space is exactly the straight lines, so a
/// very large penalty reproduces the least-squares line.
class ScoreMapModel {
 public:
  enum class Kind { constant, linear, spline };

  ScoreMapModel() = default;
  static ScoreMapModel constant(double value);
  static ScoreMapModel linear(double slope, double intercept);

  Kind kind() const { return kind_; }
  /// Finite for every finite input; linear extrapolation outside the training range.
  double predict(double s) const;
  std::vector<double> predict(std::span<const double> s) const;

  double domain_min() const { return lo_; }
  double domain_max() const { return hi_; }
  /// Full clamped knot vector (boundary knots repeated four times).
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& coefficients() const { return coef_; }
  double smoothing_penalty() const { return penalty_; }
  double fallback_slope() const { return slope_; }
  double fallback_intercept() const { return intercept_; }

 private:
  friend ScoreMapModel fit_score_map(std::span<const double>, std::span<const double>, const ScoreMapOptions&);

  double spline_value(double x) const;

  Kind kind_ = Kind::constant;
  double lo_ = 0.0;
  double hi_ = 1.0;
  std::vector<double> knots_;
  std::vector<double> coef_;
  double penalty_ = 0.0;
  double slope_ = 0.0;
  double intercept_ = 0.0;
  double lo_slope_ = 0.0;
  double hi_slope_ = 0.0;
};

/// Deterministic penalized least squares. Needs at least two pairs with values in [0, 1].
/// Identical abscissae give the constant model at mean(y); fewer than
/// options.min_pairs_for_spline pairs give the least-squares line.
ScoreMapModel fit_score_map(std::span<const double> s, std::span<const double> y, const ScoreMapOptions& options = {});
double predict_score_map(const ScoreMapModel& model, double s);

double rmse(std::span<const double> predicted, std::span<const double> actual);

/// Clamped cubic B-spline basis values at x for the given full knot vector. Exposed for tests.
std::vector<double> bspline_basis(const std::vector<double>& knots, double x);

struct AttributionOptions {
  std::size_t cycles = 200;
  double learning_rate = 0.2;
};

/// Additive model over binary features. Each shape function has two levels and is centred to
/// zero mean over the training rows; `shape_norms[j]` is the RMS of f_j over those rows.
struct AttributionModel {
  std::vector<std::string> feature_ids;
  double intercept = 0.0;
  std::vector<std::array<double, 2>> shape_levels;  // {f_j(0), f_j(1)}
  std::vector<double> shape_norms;

  double predict(std::span<const std::uint8_t> row) const;
};

/// Cyclic boosting: `cycles` round-robin passes over the features, each step moving f_j towards
/// the per-level mean of the current residuals by `learning_rate`. Features are the matrix
/// columns, rows are training examples.
AttributionModel fit_attribution_model(const ScoreMatrix& rows, std::span<const double> targets,
                                       const AttributionOptions& options = {});

}  // namespace benchpress
