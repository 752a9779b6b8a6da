#include "benchpress/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "benchpress/errors.hpp"
#include "benchpress/predictor.hpp"

namespace benchpress {

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b, std::size_t min_len) {
  if (a.size() != b.size()) throw ValidationError("metric inputs differ in length");
  if (a.size() < min_len) throw ValidationError("metric needs at least " + std::to_string(min_len) + " elements");
}

// Indices sorted by descending value, ties by ascending index.
std::vector<std::size_t> descending_order(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });
  return order;
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

std::vector<double> descending_ranks(std::span<const double> x) {
  const auto order = descending_order(x);
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y, 2);
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw ValidationError("correlation of a constant vector is undefined");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y, 2);
  const auto rx = descending_ranks(x);
  const auto ry = descending_ranks(y);
  return pearson(rx, ry);
}

double kendall(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y, 2);
  const std::size_t n = x.size();
  double concordant = 0.0;
  double discordant = 0.0;
  double tied_x = 0.0;
  double tied_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const int sx = sign(x[i] - x[j]);
      const int sy = sign(y[i] - y[j]);
      if (sx == 0) tied_x += 1.0;
      if (sy == 0) tied_y += 1.0;
      if (sx * sy > 0) concordant += 1.0;
      if (sx * sy < 0) discordant += 1.0;
    }
  }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  const double denom = std::sqrt((pairs - tied_x) * (pairs - tied_y));
  if (denom == 0.0) throw ValidationError("kendall tau is undefined when an input is entirely tied");
  return (concordant - discordant) / denom;
}

double rank_stability(std::span<const double> true_ranks, std::span<const double> pred_ranks) {
  require_same_length(true_ranks, pred_ranks, 1);
  const auto n = static_cast<double>(true_ranks.size());
  double total = 0.0;
  for (std::size_t i = 0; i < true_ranks.size(); ++i) total += std::abs(true_ranks[i] - pred_ranks[i]) / n;
  return 1.0 - total / n;
}

double pair_accuracy(std::span<const double> y_true, std::span<const double> y_pred) {
  require_same_length(y_true, y_pred, 2);
  const std::size_t n = y_true.size();
  std::size_t preserved = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (sign(y_true[i] - y_true[j]) == sign(y_pred[i] - y_pred[j])) ++preserved;
    }
  }
  return static_cast<double>(preserved) / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

double ndcg_at_k(std::span<const double> y_true, std::span<const double> y_pred, std::size_t k) {
  require_same_length(y_true, y_pred, 1);
  if (k < 1 || k > y_true.size()) throw ValidationError("ndcg cutoff must lie in [1, n]");
  const auto by_pred = descending_order(y_pred);
  const auto by_true = descending_order(y_true);
  double dcg = 0.0;
  double ideal = 0.0;
  for (std::size_t r = 0; r < k; ++r) {
    const double discount = std::log2(static_cast<double>(r) + 2.0);
    dcg += y_true[by_pred[r]] / discount;
    ideal += y_true[by_true[r]] / discount;
  }
  if (ideal == 0.0) return 1.0;
  return dcg / ideal;
}

double topk_accuracy(std::span<const double> y_true, std::span<const double> y_pred, std::size_t k) {
  require_same_length(y_true, y_pred, 1);
  if (k < 1 || k > y_true.size()) throw ValidationError("top-k cutoff must lie in [1, n]");
  auto top_true = descending_order(y_true);
  auto top_pred = descending_order(y_pred);
  top_true.resize(k);
  top_pred.resize(k);
  std::sort(top_true.begin(), top_true.end());
  std::sort(top_pred.begin(), top_pred.end());
  std::vector<std::size_t> common;
  std::set_intersection(top_true.begin(), top_true.end(), top_pred.begin(), top_pred.end(), std::back_inserter(common));
  return static_cast<double>(common.size()) / static_cast<double>(2 * k - common.size());
}

double ranking_error_within(std::span<const double> true_ranks, std::span<const double> pred_ranks, double percent) {
  require_same_length(true_ranks, pred_ranks, 1);
  if (!(percent > 0.0 && percent <= 100.0)) throw ValidationError("tolerance percent must lie in (0, 100]");
  const auto n = static_cast<double>(true_ranks.size());
  const double tolerance = std::ceil(percent * n / 100.0 - 1e-9);
  std::size_t within = 0;
  for (std::size_t i = 0; i < true_ranks.size(); ++i) {
    if (std::abs(true_ranks[i] - pred_ranks[i]) <= tolerance) ++within;
  }
  return static_cast<double>(within) / n;
}

MetricSuite compute_suite(std::span<const double> y_true, std::span<const double> y_pred, std::size_t k_top) {
  require_same_length(y_true, y_pred, 2);
  MetricSuite m;
  m.n = y_true.size();
  m.rmse = rmse(y_pred, y_true);
  m.pearson = pearson(y_true, y_pred);
  m.spearman = spearman(y_true, y_pred);
  m.kendall = kendall(y_true, y_pred);
  m.true_ranks = descending_ranks(y_true);
  m.pred_ranks = descending_ranks(y_pred);
  m.rank_stability = rank_stability(m.true_ranks, m.pred_ranks);
  m.pair_accuracy = pair_accuracy(y_true, y_pred);
  m.k_top = std::clamp<std::size_t>(k_top, 1, m.n);
  m.ndcg_at_k = ndcg_at_k(y_true, y_pred, m.k_top);
  m.topk_accuracy = topk_accuracy(y_true, y_pred, m.k_top);
  for (int p : {1, 2, 5, 10}) m.ranking_error_within[p] = ranking_error_within(m.true_ranks, m.pred_ranks, p);
  m.rank_shifts.resize(m.n);
  std::map<double, std::size_t> counts;
  for (std::size_t i = 0; i < m.n; ++i) {
    m.rank_shifts[i] = m.pred_ranks[i] - m.true_ranks[i];
    ++counts[m.rank_shifts[i]];
  }
  m.shift_histogram.assign(counts.begin(), counts.end());
  return m;
}

}  // namespace benchpress
