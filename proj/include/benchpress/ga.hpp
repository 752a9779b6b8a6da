#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "benchpress/mask.hpp"
#include "benchpress/predictor.hpp"
#include "benchpress/rng.hpp"
#include "benchpress/score_matrix.hpp"

namespace benchpress {

/// How a candidate subset is scored. `spline` fits the score map on the fit models and measures
/// RMSE on the val models; `identity` skips the fit and compares subset accuracy to full
/// accuracy on the val models directly (used by exhaustive-search oracles).
enum class PredictorMode { spline, identity };

struct GaConfig {
  std::size_t population_size = 100;
  std::size_t elite_count = 10;
  std::size_t generations = 1000;
  std::size_t tournament_size = 3;
  std::uint64_t seed = 0;
  /// Optional positive per-position sampling weights for the initial population.
  std::vector<double> init_bias;
  PredictorMode predictor = PredictorMode::spline;
  ScoreMapOptions score_map;

  void validate() const;
};

/// Scores masks over a fixed universe of score-matrix columns (a "pool"). Rows are packed to
/// bitsets so a subset accuracy is one popcount per 64 columns.
class FitnessEvaluator {
 public:
  FitnessEvaluator(const ScoreMatrix& matrix, const AccuracyVector& y, const ModelSplit& split, PredictorMode mode,
                   ScoreMapOptions score_map = {});
  /// Universe restricted to `columns` of `matrix`, in that order.
  FitnessEvaluator(const ScoreMatrix& matrix, std::span<const std::size_t> columns, const AccuracyVector& y,
                   const ModelSplit& split, PredictorMode mode, ScoreMapOptions score_map = {});

  std::size_t universe_size() const { return universe_; }
  /// Validation RMSE of the mask; always >= 0. Non-finite fits score +infinity.
  double error(const Mask& mask) const;
  double fitness(const Mask& mask) const { return -error(mask); }
  /// (1/k) * S * m over every model row.
  std::vector<double> subset_accuracy(const Mask& mask) const;

 private:
  double subset_accuracy(std::size_t row, std::span<const std::uint64_t> mask_words, double k) const;

  std::size_t universe_ = 0;
  std::size_t words_ = 0;
  std::size_t n_rows_ = 0;
  std::vector<std::uint64_t> packed_;
  std::vector<double> y_;
  std::vector<std::size_t> fit_;
  std::vector<std::size_t> val_;
  std::vector<double> y_fit_;
  std::vector<double> y_val_;
  PredictorMode mode_;
  ScoreMapOptions score_map_;
};

double evaluate_fitness(const Mask& mask, const ScoreMatrix& matrix, const AccuracyVector& y, const ModelSplit& split,
                        PredictorMode mode = PredictorMode::spline);

struct GaResult {
  Mask best_mask;
  double best_error = 0.0;
  /// Top elite_count masks of the final generation, best first, with their errors.
  std::vector<Mask> elites;
  std::vector<double> elite_errors;
  /// Global best error after each generation.
  std::vector<double> history;
  std::size_t evaluations = 0;
};

std::vector<Mask> init_population(std::size_t universe, std::size_t k, const GaConfig& cfg);
/// Uniform k-subset, or weighted sampling without replacement when weights are given.
Mask random_mask(std::size_t universe, std::size_t k, Rng& rng, std::span<const double> weights = {});

/// Index of the fittest of `tournament_size` uniform draws with replacement; ties go to the
/// lowest population index.
std::size_t tournament_select(std::span<const double> fitnesses, std::size_t tournament_size, Rng& rng);

/// Uniform crossover: child_j = a_j where xi_j is set, b_j elsewhere.
Mask crossover(const Mask& a, const Mask& b, const Mask& xi);
Mask crossover(const Mask& a, const Mask& b, Rng& rng);

/// Flips each bit independently with probability 1/k.
Mask mutate(const Mask& m, std::size_t k, Rng& rng);

/// Clears (or sets) uniformly chosen bits until exactly k are set.
Mask adjust(const Mask& m, std::size_t k, Rng& rng);

GaResult run_ga(const FitnessEvaluator& evaluator, std::size_t k, const GaConfig& cfg);
GaResult run_ga(const ScoreMatrix& matrix, const AccuracyVector& y, const ModelSplit& split, std::size_t k,
                const GaConfig& cfg);

}  // namespace benchpress
