#include "benchpress/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "benchpress/errors.hpp"

namespace benchpress {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::size_t group_size(double retention_ratio, std::size_t pool) {
  return static_cast<std::size_t>(std::ceil(retention_ratio * static_cast<double>(pool) - 1e-9));
}

GaResult search(const ScoreMatrix& matrix, std::span<const std::size_t> columns, const AccuracyVector& y,
                const ModelSplit& split, std::size_t k, const GaConfig& cfg) {
  const FitnessEvaluator evaluator(matrix, columns, y, split, cfg.predictor, cfg.score_map);
  return run_ga(evaluator, k, cfg);
}

std::vector<std::size_t> to_columns(const Mask& mask, std::span<const std::size_t> pool) {
  std::vector<std::size_t> out;
  for (std::size_t i : mask.indices()) out.push_back(pool[i]);
  return out;
}

constexpr std::uint64_t kPartitionTag = 0x5452495041525431ULL;

}  // namespace

GaConfig PipelineConfig::effective_group_ga() const {
  if (group_ga) return *group_ga;
  GaConfig g = ga;
  g.generations = std::max<std::size_t>(1, ga.generations / 3);
  return g;
}

void PipelineConfig::validate() const {
  if (rounds_max < 1) throw ValidationError("rounds_max must be at least 1");
  if (!(retention_ratio > 0.0 && retention_ratio < 1.0)) throw ValidationError("retention_ratio must lie in (0, 1)");
  if (!(sampling_temperature > 0.0)) throw ValidationError("sampling_temperature must be positive");
  if (k < 1) throw ValidationError("k must be at least 1");
  if (k_top < 1) throw ValidationError("k_top must be at least 1");
  if (min_model_accuracy < 0.0 || min_model_accuracy >= 1.0) throw ValidationError("min_model_accuracy must lie in [0, 1)");
  if (min_sample_variance < 0.0) throw ValidationError("min_sample_variance must be non-negative");
  ga.validate();
  effective_group_ga().validate();
}

const char* phase_name(SearchPhase phase) {
  switch (phase) {
    case SearchPhase::main: return "main";
    case SearchPhase::high: return "high";
    case SearchPhase::low: return "low";
    case SearchPhase::random: return "random";
  }
  return "main";
}

std::uint64_t search_seed(std::uint64_t seed, std::size_t round, SearchPhase phase) {
  return mix_seed(mix_seed(seed, round), static_cast<std::uint64_t>(phase));
}

AttributionVector aggregate_attribution(std::span<const Mask> elites, const ScoreMatrix& matrix, const AccuracyVector& y,
                                        const ModelSplit& split, const AttributionOptions& options) {
  if (elites.empty()) throw ValidationError("attribution needs at least one elite mask");
  const std::size_t n = matrix.n_samples();
  for (const auto& m : elites) {
    if (m.size() != n) throw ValidationError("elite masks must cover the attribution pool");
  }
  if (y.size() != matrix.n_models()) throw ValidationError("accuracy vector does not match the score matrix");

  const ScoreMatrix fit_rows = row_select(matrix, split.fit_indices);
  std::vector<double> targets;
  for (std::size_t i : split.fit_indices) targets.push_back(y[i]);

  std::vector<double> sum(n, 0.0);
  AttributionVector out;
  out.coverage_count.assign(n, 0);
  for (const auto& m : elites) {
    const auto cols = m.indices();
    if (cols.empty()) continue;
    const AttributionModel model = fit_attribution_model(column_select(fit_rows, cols), targets, options);
    for (std::size_t t = 0; t < cols.size(); ++t) {
      sum[cols[t]] += model.shape_norms[t];
      ++out.coverage_count[cols[t]];
    }
  }
  out.values.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (out.coverage_count[j] > 0) out.values[j] = sum[j] / static_cast<double>(out.coverage_count[j]);
  }
  return out;
}

TriPartition tri_partition(const AttributionVector& attr, std::span<const std::size_t> pool, double retention_ratio,
                           std::size_t k, Rng& rng) {
  const std::size_t n = pool.size();
  if (attr.values.size() != n) throw ValidationError("attribution vector does not match the pool");
  if (!(retention_ratio > 0.0 && retention_ratio <= 1.0)) throw ValidationError("retention_ratio must lie in (0, 1]");
  const std::size_t q = group_size(retention_ratio, n);
  if (q < k) {
    throw InfeasibleError("group size " + std::to_string(q) + " is smaller than k = " + std::to_string(k));
  }

  // Missing attribution counts as the lowest possible value.
  const double floor = -std::numeric_limits<double>::infinity();
  auto value = [&](std::size_t i) { return attr.values[i].value_or(floor); };
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  TriPartition out;
  auto take = [&](std::vector<std::size_t>& group) {
    for (std::size_t t = 0; t < q; ++t) group.push_back(pool[order[t]]);
    std::sort(group.begin(), group.end());
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value(a) > value(b); });
  take(out.high);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value(a) < value(b); });
  take(out.low);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t t = 0; t < q; ++t) std::swap(order[t], order[t + rng.below(n - t)]);
  take(out.random);
  return out;
}

std::vector<double> attribution_weights(const AttributionVector& attr, std::span<const std::size_t> positions,
                                        double temperature) {
  if (!(temperature > 0.0)) throw ValidationError("sampling temperature must be positive");
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t p : positions) {
    if (attr.values.at(p)) top = std::max(top, *attr.values[p]);
  }
  std::vector<double> w(positions.size(), 1.0);
  if (std::isinf(top)) return std::vector<double>(positions.size(), 1.0 / static_cast<double>(positions.size()));

  double smallest = 1.0;
  for (std::size_t t = 0; t < positions.size(); ++t) {
    const auto& a = attr.values[positions[t]];
    if (a) {
      w[t] = std::exp((*a - top) / temperature);
      smallest = std::min(smallest, w[t]);
    }
  }
  double total = 0.0;
  for (std::size_t t = 0; t < positions.size(); ++t) {
    if (!attr.values[positions[t]]) w[t] = smallest;
    total += w[t];
  }
  for (double& x : w) x /= total;
  return w;
}

RoundResult run_round(std::span<const std::size_t> pool, const ScoreMatrix& matrix, const AccuracyVector& y,
                      const ModelSplit& split, const PipelineConfig& cfg, std::size_t round) {
  if (pool.size() <= cfg.k) throw InfeasibleError("a refinement round needs a pool larger than k");

  RoundResult out;
  GaConfig main_cfg = cfg.ga;
  main_cfg.seed = search_seed(cfg.seed, round, SearchPhase::main);
  out.main = search(matrix, pool, y, split, cfg.k, main_cfg);

  out.attribution = aggregate_attribution(out.main.elites, column_select(matrix, pool), y, split, cfg.attribution);

  std::vector<std::size_t> positions(pool.size());
  std::iota(positions.begin(), positions.end(), 0);
  Rng rng = Rng(cfg.seed).derive({kPartitionTag, round});
  const TriPartition parts = tri_partition(out.attribution, positions, cfg.retention_ratio, cfg.k, rng);

  const std::array<const std::vector<std::size_t>*, 3> by_phase{&parts.high, &parts.low, &parts.random};
  const std::array<SearchPhase, 3> phases{SearchPhase::high, SearchPhase::low, SearchPhase::random};
  const GaConfig group_base = cfg.effective_group_ga();
  std::array<std::vector<std::size_t>, 3> columns;
  std::size_t chosen = 0;
  for (std::size_t g = 0; g < 3; ++g) {
    for (std::size_t p : *by_phase[g]) columns[g].push_back(pool[p]);
    GaConfig gcfg = group_base;
    gcfg.seed = search_seed(cfg.seed, round, phases[g]);
    gcfg.init_bias = attribution_weights(out.attribution, *by_phase[g], cfg.sampling_temperature);
    out.group_results[g] = search(matrix, columns[g], y, split, cfg.k, gcfg);
    if (out.group_results[g].best_error < out.group_results[chosen].best_error) chosen = g;
  }
  out.groups = {columns[0], columns[1], columns[2]};
  out.chosen = phases[chosen];
  out.next_pool = columns[chosen];
  return out;
}

EvaluationResult evaluate_subset(const ScoreMatrix& matrix, const AccuracyVector& y, const ModelSplit& split,
                                 std::span<const std::size_t> columns, const ScoreMapOptions& score_map,
                                 std::size_t k_top) {
  if (columns.empty()) throw ValidationError("cannot evaluate an empty subset");
  if (y.size() != matrix.n_models()) throw ValidationError("accuracy vector does not match the score matrix");
  for (std::size_t c : columns) {
    if (c >= matrix.n_samples()) throw ValidationError("subset column out of range");
  }
  auto subset_acc = [&](std::size_t row) {
    std::size_t hits = 0;
    for (std::size_t c : columns) hits += matrix.at(row, c);
    return static_cast<double>(hits) / static_cast<double>(columns.size());
  };
  std::vector<double> s_fit;
  std::vector<double> y_fit;
  for (const auto* part : {&split.fit_indices, &split.val_indices}) {
    for (std::size_t i : *part) {
      s_fit.push_back(subset_acc(i));
      y_fit.push_back(y[i]);
    }
  }
  const ScoreMapModel model = fit_score_map(s_fit, y_fit, score_map);

  EvaluationResult out;
  for (std::size_t i : split.test_indices) {
    out.test_model_ids.push_back(matrix.model_ids()[i]);
    out.test_true.push_back(y[i]);
    out.test_predicted.push_back(model.predict(subset_acc(i)));
  }
  out.metrics = compute_suite(out.test_true, out.test_predicted, k_top);
  return out;
}

PreparedBenchmark prepare_benchmark(const ScoreMatrix& matrix, const EmbeddingSet* emb, const RedundancyConfig& rcfg,
                                    const PipelineConfig& pcfg) {
  rcfg.validate();
  PreparedBenchmark out;
  out.matrix = preprocess(matrix, pcfg.min_model_accuracy, pcfg.min_sample_variance);
  out.source_columns = column_positions(matrix, out.matrix.sample_ids());
  out.y = accuracy(out.matrix);
  if (emb != nullptr) {
    const EmbeddingSet aligned = emb->align_to(out.matrix.sample_ids());
    out.filter = coarse_filter(out.matrix, &aligned, rcfg);
  } else {
    out.filter = coarse_filter(out.matrix, nullptr, rcfg);
  }
  return out;
}

CompressionReport compress(const PreparedBenchmark& prepared, const PipelineConfig& pcfg) {
  pcfg.validate();
  const auto start = Clock::now();
  const ScoreMatrix& matrix = prepared.matrix;
  const std::size_t k = pcfg.k;

  CompressionReport report;
  report.seed = pcfg.seed;
  report.models = matrix.n_models();
  report.preprocessed_samples = matrix.n_samples();
  report.filtered_samples = prepared.filter.kept_indices.size();
  report.split = stratified_split(prepared.y, pcfg.split);
  if (report.split.test_indices.size() < 2) {
    throw InfeasibleError("the split leaves " + std::to_string(report.split.test_indices.size()) +
                          " test models; at least 2 are needed to score the result");
  }

  std::vector<std::size_t> pool = prepared.filter.kept_indices;
  if (k > pool.size()) {
    throw InfeasibleError("k = " + std::to_string(k) + " exceeds the " + std::to_string(pool.size()) +
                          " samples left after filtering");
  }

  std::vector<std::size_t> best_columns;
  double best_error = std::numeric_limits<double>::infinity();
  auto offer = [&](const GaResult& r, std::span<const std::size_t> universe, SearchPhase phase, std::size_t round) {
    if (r.best_error < best_error || best_columns.empty()) {
      best_error = r.best_error;
      best_columns = to_columns(r.best_mask, universe);
      report.best_phase = phase;
      report.best_round = round;
    }
    report.evaluations += r.evaluations;
  };

  for (std::size_t round = 0; round < pcfg.rounds_max; ++round) {
    const auto round_start = Clock::now();
    RoundTrace trace;
    trace.round = round;
    trace.pool_size = pool.size();
    const std::size_t before = report.evaluations;
    const bool refine = round + 1 < pcfg.rounds_max && pool.size() > k &&
                        group_size(pcfg.retention_ratio, pool.size()) >= k;
    if (!refine) {
      GaConfig cfg = pcfg.ga;
      cfg.seed = search_seed(pcfg.seed, round, SearchPhase::main);
      const GaResult main = search(matrix, pool, prepared.y, report.split, k, cfg);
      offer(main, pool, SearchPhase::main, round);
      trace.main_error = main.best_error;
    } else {
      RoundResult rr = run_round(pool, matrix, prepared.y, report.split, pcfg, round);
      offer(rr.main, pool, SearchPhase::main, round);
      trace.main_error = rr.main.best_error;
      const std::array<SearchPhase, 3> phases{SearchPhase::high, SearchPhase::low, SearchPhase::random};
      const std::array<const std::vector<std::size_t>*, 3> groups{&rr.groups.high, &rr.groups.low, &rr.groups.random};
      for (std::size_t g = 0; g < 3; ++g) {
        offer(rr.group_results[g], *groups[g], phases[g], round);
        trace.group_errors.push_back(rr.group_results[g].best_error);
      }
      trace.chosen = rr.chosen;
      pool = std::move(rr.next_pool);
    }
    trace.best_error = best_error;
    trace.evaluations = report.evaluations - before;
    report.rounds.push_back(std::move(trace));
    report.timings["round_" + std::to_string(round)] = seconds_since(round_start);
    if (!refine) break;
  }

  std::sort(best_columns.begin(), best_columns.end());
  report.final_error = best_error;
  for (std::size_t c : best_columns) {
    report.selected_columns.push_back(prepared.source_columns[c]);
    report.selected_sample_ids.push_back(matrix.sample_ids()[c]);
  }
  const auto eval_start = Clock::now();
  report.evaluation = evaluate_subset(matrix, prepared.y, report.split, best_columns, pcfg.ga.score_map, pcfg.k_top);
  report.timings["evaluate"] = seconds_since(eval_start);
  report.timings["search"] = seconds_since(start);
  return report;
}

CompressionReport compress(const ScoreMatrix& matrix, const EmbeddingSet* emb, const RedundancyConfig& rcfg,
                           const PipelineConfig& pcfg) {
  pcfg.validate();
  const auto start = Clock::now();
  const PreparedBenchmark prepared = prepare_benchmark(matrix, emb, rcfg, pcfg);
  const double prepare_seconds = seconds_since(start);
  CompressionReport report = compress(prepared, pcfg);
  report.input_samples = matrix.n_samples();
  report.timings["prepare"] = prepare_seconds;
  return report;
}

Mask baseline_select(const ScoreMatrix& matrix, std::size_t k, BaselineMethod method,
                     std::span<const double> external_scores, std::uint64_t seed) {
  const std::size_t n = matrix.n_samples();
  if (k < 1 || k > n) throw InfeasibleError("k = " + std::to_string(k) + " is infeasible for " + std::to_string(n) + " samples");
  if (method == BaselineMethod::random) {
    Rng rng(seed);
    return random_mask(n, k, rng);
  }
  if (external_scores.empty()) throw ValidationError("score_ranked selection needs external scores");
  if (external_scores.size() != n) throw ValidationError("external scores must have one value per sample");
  for (double s : external_scores) {
    if (!std::isfinite(s)) throw ValidationError("external scores must be finite");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return external_scores[a] > external_scores[b]; });
  order.resize(k);
  return Mask::from_indices(n, order);
}

}  // namespace benchpress
