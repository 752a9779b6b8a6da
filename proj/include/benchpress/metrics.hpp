#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace benchpress {

/// Ranking-fidelity statistics between true accuracies and accuracies predicted from a subset.
/// Rank 1 is the highest score; tied scores share their average rank.
struct MetricSuite {
  std::size_t n = 0;
  double rmse = 0.0;
  double pearson = 0.0;
  double spearman = 0.0;
  double kendall = 0.0;
  double rank_stability = 0.0;
  double pair_accuracy = 0.0;
  std::size_t k_top = 0;
  double ndcg_at_k = 0.0;
  double topk_accuracy = 0.0;
  /// Tolerance percent -> fraction of models within ceil(p * n / 100) rank positions.
  std::map<int, double> ranking_error_within;
  std::vector<double> true_ranks;
  std::vector<double> pred_ranks;
  /// Per-model pred_rank - true_rank.
  std::vector<double> rank_shifts;
  /// (shift, count) pairs over rank_shifts, ascending by shift.
  std::vector<std::pair<double, std::size_t>> shift_histogram;
};

/// Average ranks, 1 = largest value.
std::vector<double> descending_ranks(std::span<const double> x);

double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);
/// Tau-b.
double kendall(std::span<const double> x, std::span<const double> y);
double rank_stability(std::span<const double> true_ranks, std::span<const double> pred_ranks);
/// Fraction of pairs whose order (including ties) agrees.
double pair_accuracy(std::span<const double> y_true, std::span<const double> y_pred);
/// Gain is the raw true score; returns 1 when every true score is zero.
double ndcg_at_k(std::span<const double> y_true, std::span<const double> y_pred, std::size_t k);
/// Intersection over union of the true and predicted top-k sets, ties broken by index.
double topk_accuracy(std::span<const double> y_true, std::span<const double> y_pred, std::size_t k);
double ranking_error_within(std::span<const double> true_ranks, std::span<const double> pred_ranks, double percent);

/// Every statistic above. k_top is clamped to n.
MetricSuite compute_suite(std::span<const double> y_true, std::span<const double> y_pred, std::size_t k_top = 50);

}  // namespace benchpress
