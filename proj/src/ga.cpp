#include "benchpress/ga.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "benchpress/errors.hpp"

namespace benchpress {

namespace {

constexpr std::uint64_t kInitStream = 0x494e4954ULL;

double finite_or_inf(double e) { return std::isfinite(e) ? e : std::numeric_limits<double>::infinity(); }

}  // namespace

void GaConfig::validate() const {
  if (population_size < 2) throw ValidationError("population_size must be at least 2");
  if (elite_count < 1 || elite_count >= population_size) throw ValidationError("elite_count must lie in [1, population_size)");
  if (generations < 1) throw ValidationError("generations must be at least 1");
  if (tournament_size < 2 || tournament_size > population_size)
    throw ValidationError("tournament_size must lie in [2, population_size]");
  for (double w : init_bias) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("init_bias weights must be finite and non-negative");
  }
}

FitnessEvaluator::FitnessEvaluator(const ScoreMatrix& matrix, const AccuracyVector& y, const ModelSplit& split,
                                   PredictorMode mode, ScoreMapOptions score_map)
    : FitnessEvaluator(matrix,
                       [&] {
                         std::vector<std::size_t> all(matrix.n_samples());
                         std::iota(all.begin(), all.end(), 0);
                         return all;
                       }(),
                       y, split, mode, score_map) {}

FitnessEvaluator::FitnessEvaluator(const ScoreMatrix& matrix, std::span<const std::size_t> columns, const AccuracyVector& y,
                                   const ModelSplit& split, PredictorMode mode, ScoreMapOptions score_map)
    : universe_(columns.size()),
      words_(words_for(columns.size())),
      n_rows_(matrix.n_models()),
      packed_(matrix.n_models() * words_for(columns.size()), 0),
      y_(y.values),
      fit_(split.fit_indices),
      val_(split.val_indices),
      mode_(mode),
      score_map_(score_map) {
  if (y.size() != matrix.n_models()) throw ValidationError("accuracy vector does not match the score matrix rows");
  if (columns.empty()) throw ValidationError("fitness universe is empty");
  if (val_.empty()) throw InfeasibleError("degenerate split: no validation models");
  if (mode_ == PredictorMode::spline && fit_.size() < 2) throw InfeasibleError("degenerate split: fewer than two fit models");
  for (std::size_t r : fit_) {
    if (r >= n_rows_) throw ValidationError("split index out of range");
  }
  for (std::size_t r : val_) {
    if (r >= n_rows_) throw ValidationError("split index out of range");
  }
  for (std::size_t i = 0; i < n_rows_; ++i) {
    const auto row = matrix.row(i);
    std::uint64_t* dst = packed_.data() + i * words_;
    for (std::size_t p = 0; p < columns.size(); ++p) {
      if (columns[p] >= matrix.n_samples()) throw ValidationError("pool column out of range");
      if (row[columns[p]] != 0) dst[p >> 6] |= std::uint64_t{1} << (p & 63);
    }
  }
  for (std::size_t r : fit_) y_fit_.push_back(y_[r]);
  for (std::size_t r : val_) y_val_.push_back(y_[r]);
}

double FitnessEvaluator::subset_accuracy(std::size_t row, std::span<const std::uint64_t> mask_words, double k) const {
  const std::uint64_t* r = packed_.data() + row * words_;
  std::size_t hits = 0;
  for (std::size_t w = 0; w < words_; ++w) hits += static_cast<std::size_t>(std::popcount(r[w] & mask_words[w]));
  return static_cast<double>(hits) / k;
}

std::vector<double> FitnessEvaluator::subset_accuracy(const Mask& mask) const {
  if (mask.size() != universe_) throw ValidationError("mask universe does not match the evaluator");
  const auto k = static_cast<double>(mask.count());
  if (k == 0) throw ValidationError("mask selects no samples");
  std::vector<double> s(n_rows_);
  for (std::size_t i = 0; i < n_rows_; ++i) s[i] = subset_accuracy(i, mask.words(), k);
  return s;
}

double FitnessEvaluator::error(const Mask& mask) const {
  if (mask.size() != universe_) throw ValidationError("mask universe does not match the evaluator");
  const auto k = static_cast<double>(mask.count());
  if (k == 0) return std::numeric_limits<double>::infinity();
  const auto words = mask.words();

  std::vector<double> s_val(val_.size());
  for (std::size_t i = 0; i < val_.size(); ++i) s_val[i] = subset_accuracy(val_[i], words, k);
  if (mode_ == PredictorMode::identity) return finite_or_inf(rmse(s_val, y_val_));

  std::vector<double> s_fit(fit_.size());
  for (std::size_t i = 0; i < fit_.size(); ++i) s_fit[i] = subset_accuracy(fit_[i], words, k);
  const ScoreMapModel g = fit_score_map(s_fit, y_fit_, score_map_);
  double ss = 0.0;
  for (std::size_t i = 0; i < val_.size(); ++i) {
    const double d = g.predict(s_val[i]) - y_val_[i];
    ss += d * d;
  }
  return finite_or_inf(std::sqrt(ss / static_cast<double>(val_.size())));
}

double evaluate_fitness(const Mask& mask, const ScoreMatrix& matrix, const AccuracyVector& y, const ModelSplit& split,
                        PredictorMode mode) {
  return FitnessEvaluator(matrix, y, split, mode).fitness(mask);
}

Mask random_mask(std::size_t universe, std::size_t k, Rng& rng, std::span<const double> weights) {
  if (k > universe) throw InfeasibleError("k = " + std::to_string(k) + " exceeds the universe of " + std::to_string(universe));
  Mask m(universe);
  if (weights.empty()) {
    // Partial Fisher-Yates over the index range.
    std::vector<std::size_t> idx(universe);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t t = 0; t < k; ++t) {
      std::swap(idx[t], idx[t + rng.below(universe - t)]);
      m.set(idx[t]);
    }
    return m;
  }
  if (weights.size() != universe) throw ValidationError("init_bias length does not match the universe");
  // Weighted sampling without replacement via exponential keys: largest log(u)/w wins.
  std::vector<std::pair<double, std::size_t>> keys(universe);
  for (std::size_t i = 0; i < universe; ++i) {
    const double u = rng.uniform_open_zero();
    keys[i] = {weights[i] > 0.0 ? std::log(u) / weights[i] : -std::numeric_limits<double>::infinity(), i};
  }
  std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(k), keys.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  for (std::size_t t = 0; t < k; ++t) m.set(keys[t].second);
  return m;
}

std::vector<Mask> init_population(std::size_t universe, std::size_t k, const GaConfig& cfg) {
  if (k < 1 || k > universe) throw InfeasibleError("k must lie in [1, " + std::to_string(universe) + "]");
  const Rng root(cfg.seed);
  std::vector<Mask> pop;
  pop.reserve(cfg.population_size);
  for (std::size_t slot = 0; slot < cfg.population_size; ++slot) {
    Rng rng = root.derive({kInitStream, slot});
    pop.push_back(random_mask(universe, k, rng, cfg.init_bias));
  }
  return pop;
}

std::size_t tournament_select(std::span<const double> fitnesses, std::size_t tournament_size, Rng& rng) {
  if (fitnesses.empty()) throw ValidationError("tournament over an empty population");
  std::size_t best = fitnesses.size();
  for (std::size_t t = 0; t < tournament_size; ++t) {
    const std::size_t c = rng.below(fitnesses.size());
    if (best == fitnesses.size() || fitnesses[c] > fitnesses[best] || (fitnesses[c] == fitnesses[best] && c < best)) best = c;
  }
  return best;
}

Mask crossover(const Mask& a, const Mask& b, const Mask& xi) {
  if (a.size() != b.size() || a.size() != xi.size()) throw ValidationError("crossover parents span different universes");
  Mask child(a.size());
  auto out = child.words();
  for (std::size_t w = 0; w < out.size(); ++w) out[w] = (a.words()[w] & xi.words()[w]) | (b.words()[w] & ~xi.words()[w]);
  return child;
}

Mask crossover(const Mask& a, const Mask& b, Rng& rng) {
  if (a.size() != b.size()) throw ValidationError("crossover parents span different universes");
  Mask xi(a.size());
  for (auto& w : xi.words()) w = rng();
  xi.trim();
  return crossover(a, b, xi);
}

Mask mutate(const Mask& m, std::size_t k, Rng& rng) {
  if (k == 0) throw ValidationError("mutation rate 1/k needs k >= 1");
  Mask out = m;
  const std::size_t n = m.size();
  if (k == 1) {
    for (std::size_t i = 0; i < n; ++i) out.flip(i);
    return out;
  }
  // Geometric gaps between flips: same law as n independent Bernoulli(1/k) draws.
  const double log_q = std::log1p(-1.0 / static_cast<double>(k));
  std::size_t pos = 0;
  for (;;) {
    const double gap = std::floor(std::log(rng.uniform_open_zero()) / log_q);
    if (gap >= static_cast<double>(n - pos)) break;
    pos += static_cast<std::size_t>(gap);
    out.flip(pos);
    ++pos;
    if (pos >= n) break;
  }
  return out;
}

Mask adjust(const Mask& m, std::size_t k, Rng& rng) {
  if (k > m.size()) throw InfeasibleError("k = " + std::to_string(k) + " exceeds the universe of " + std::to_string(m.size()));
  Mask out = m;
  const std::size_t c = m.count();
  if (c > k) {
    auto idx = m.indices();
    for (std::size_t t = 0; t < c - k; ++t) {
      std::swap(idx[t], idx[t + rng.below(idx.size() - t)]);
      out.reset(idx[t]);
    }
  } else if (c < k) {
    auto idx = m.clear_indices();
    for (std::size_t t = 0; t < k - c; ++t) {
      std::swap(idx[t], idx[t + rng.below(idx.size() - t)]);
      out.set(idx[t]);
    }
  }
  return out;
}

GaResult run_ga(const FitnessEvaluator& evaluator, std::size_t k, const GaConfig& cfg) {
  cfg.validate();
  const std::size_t universe = evaluator.universe_size();
  if (k < 1 || k > universe) {
    throw InfeasibleError("k = " + std::to_string(k) + " is infeasible for a pool of " + std::to_string(universe) + " samples");
  }
  if (!cfg.init_bias.empty() && cfg.init_bias.size() != universe) throw ValidationError("init_bias length does not match the pool");

  const Rng root(cfg.seed);
  std::vector<Mask> pop = init_population(universe, k, cfg);
  std::vector<double> err(pop.size(), std::numeric_limits<double>::quiet_NaN());

  GaResult result;
  result.best_error = std::numeric_limits<double>::infinity();
  result.history.reserve(cfg.generations);
  std::vector<std::size_t> order(pop.size());
  std::vector<double> fitness(pop.size());

  for (std::size_t gen = 0; gen < cfg.generations; ++gen) {
    const auto n = static_cast<std::ptrdiff_t>(pop.size());
    std::size_t evaluated = 0;
#pragma omp parallel for schedule(dynamic, 4) reduction(+ : evaluated)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto u = static_cast<std::size_t>(i);
      if (std::isnan(err[u])) {
        err[u] = evaluator.error(pop[u]);
        ++evaluated;
      }
    }
    result.evaluations += evaluated;
    for (const auto& m : pop) {
      if (m.count() != k) throw std::logic_error("GA individual lost its cardinality");
    }

    // Best first; equal errors keep population order (elites sit at the front).
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return err[a] < err[b]; });
    if (err[order[0]] < result.best_error || result.best_mask.size() == 0) {
      result.best_error = err[order[0]];
      result.best_mask = pop[order[0]];
    }
    result.history.push_back(result.best_error);
    if (gen + 1 == cfg.generations) break;

    for (std::size_t i = 0; i < pop.size(); ++i) fitness[i] = -err[i];
    std::vector<Mask> next;
    std::vector<double> next_err;
    next.reserve(pop.size());
    next_err.reserve(pop.size());
    for (std::size_t e = 0; e < cfg.elite_count; ++e) {
      next.push_back(pop[order[e]]);
      next_err.push_back(err[order[e]]);
    }
    for (std::size_t slot = cfg.elite_count; slot < cfg.population_size; ++slot) {
      Rng rng = root.derive({gen + 1, slot});
      const std::size_t a = tournament_select(fitness, cfg.tournament_size, rng);
      const std::size_t b = tournament_select(fitness, cfg.tournament_size, rng);
      Mask child = crossover(pop[a], pop[b], rng);
      child = mutate(child, k, rng);
      next.push_back(adjust(child, k, rng));
      next_err.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    pop = std::move(next);
    err = std::move(next_err);
  }

  for (std::size_t e = 0; e < cfg.elite_count; ++e) {
    result.elites.push_back(pop[order[e]]);
    result.elite_errors.push_back(err[order[e]]);
  }
  return result;
}

GaResult run_ga(const ScoreMatrix& matrix, const AccuracyVector& y, const ModelSplit& split, std::size_t k,
                const GaConfig& cfg) {
  return run_ga(FitnessEvaluator(matrix, y, split, cfg.predictor, cfg.score_map), k, cfg);
}

}  // namespace benchpress
