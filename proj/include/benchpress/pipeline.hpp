#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "benchpress/ga.hpp"
#include "benchpress/mask.hpp"
#include "benchpress/metrics.hpp"
#include "benchpress/predictor.hpp"
#include "benchpress/redundancy.hpp"
#include "benchpress/rng.hpp"
#include "benchpress/score_matrix.hpp"

namespace benchpress {

struct PipelineConfig {
  std::size_t rounds_max = 5;
  /// Share of the pool each attribution group keeps.
  double retention_ratio = 0.5;
  /// Softmax temperature over attributions when seeding group searches; infinity disables the bias.
  double sampling_temperature = 1.0;
  std::size_t k = 100;
  /// Main search settings. Its seed is ignored; every search seed derives from `seed`.
  GaConfig ga;
  /// Group search settings. When absent, `ga` with a third of its generations.
  std::optional<GaConfig> group_ga;
  AttributionOptions attribution;
  double min_model_accuracy = 0.0;
  double min_sample_variance = 0.0;
  SplitOptions split;
  std::size_t k_top = 50;
  std::uint64_t seed = 0;

  GaConfig effective_group_ga() const;
  void validate() const;
};

enum class SearchPhase { main, high, low, random };
const char* phase_name(SearchPhase phase);

/// Seed of the search run in `round` during `phase`.
std::uint64_t search_seed(std::uint64_t seed, std::size_t round, SearchPhase phase);

/// Per-sample elite-averaged shape norm. `values[j]` is empty for samples no elite contains.
struct AttributionVector {
  std::vector<std::optional<double>> values;
  std::vector<std::size_t> coverage_count;
};

/// `matrix` columns are the pool; every elite is a mask over those columns. One attribution
/// model is fitted per elite on the fit-split rows restricted to the elite's samples.
AttributionVector aggregate_attribution(std::span<const Mask> elites, const ScoreMatrix& matrix, const AccuracyVector& y,
                                        const ModelSplit& split, const AttributionOptions& options = {});

struct TriPartition {
  /// Entries of the partitioned pool, ascending.
  std::vector<std::size_t> high;
  std::vector<std::size_t> low;
  std::vector<std::size_t> random;
};

/// Group size is ceil(retention_ratio * |pool|). `attr` is aligned with `pool`. Samples without
/// attribution sort below every covered sample; ties keep pool order. The random group draws
/// from the whole pool. Throws InfeasibleError when the group size is below k.
TriPartition tri_partition(const AttributionVector& attr, std::span<const std::size_t> pool, double retention_ratio,
                           std::size_t k, Rng& rng);

/// exp(A_j / temperature) normalised to sum 1; samples without attribution take the group's
/// smallest weight.
std::vector<double> attribution_weights(const AttributionVector& attr, std::span<const std::size_t> positions,
                                        double temperature);

struct RoundResult {
  GaResult main;
  AttributionVector attribution;
  TriPartition groups;
  /// Indexed high, low, random.
  std::array<GaResult, 3> group_results;
  SearchPhase chosen = SearchPhase::high;
  /// Matrix columns of the chosen group.
  std::vector<std::size_t> next_pool;
};

/// One refinement round over `pool` (matrix columns). Requires |pool| > k.
RoundResult run_round(std::span<const std::size_t> pool, const ScoreMatrix& matrix, const AccuracyVector& y,
                      const ModelSplit& split, const PipelineConfig& cfg, std::size_t round);

struct RoundTrace {
  std::size_t round = 0;
  std::size_t pool_size = 0;
  double main_error = 0.0;
  /// Empty when the round stopped after the main search.
  std::vector<double> group_errors;
  std::optional<SearchPhase> chosen;
  double best_error = 0.0;
  std::size_t evaluations = 0;
};

struct EvaluationResult {
  MetricSuite metrics;
  std::vector<std::string> test_model_ids;
  std::vector<double> test_true;
  std::vector<double> test_predicted;
};

/// Fits the score map on every non-test model (fit and val) and scores its predictions on the
/// test models. `columns` index `matrix`.
EvaluationResult evaluate_subset(const ScoreMatrix& matrix, const AccuracyVector& y, const ModelSplit& split,
                                 std::span<const std::size_t> columns, const ScoreMapOptions& score_map = {},
                                 std::size_t k_top = 50);

/// Preprocessed and coarse-filtered input, reusable across seeds.
struct PreparedBenchmark {
  ScoreMatrix matrix;
  /// Input-matrix column of every preprocessed column.
  std::vector<std::size_t> source_columns;
  AccuracyVector y;
  FilterResult filter;
};

PreparedBenchmark prepare_benchmark(const ScoreMatrix& matrix, const EmbeddingSet* emb, const RedundancyConfig& rcfg,
                                    const PipelineConfig& pcfg);

struct CompressionReport {
  std::vector<std::string> selected_sample_ids;
  /// Input-matrix columns, ascending.
  std::vector<std::size_t> selected_columns;
  double final_error = 0.0;
  SearchPhase best_phase = SearchPhase::main;
  std::size_t best_round = 0;
  std::vector<RoundTrace> rounds;
  EvaluationResult evaluation;
  ModelSplit split;
  std::size_t input_samples = 0;
  std::size_t preprocessed_samples = 0;
  std::size_t filtered_samples = 0;
  std::size_t models = 0;
  std::size_t evaluations = 0;
  std::uint64_t seed = 0;
  /// Wall-clock seconds per phase; not covered by determinism.
  std::map<std::string, double> timings;
};

CompressionReport compress(const PreparedBenchmark& prepared, const PipelineConfig& pcfg);
CompressionReport compress(const ScoreMatrix& matrix, const EmbeddingSet* emb, const RedundancyConfig& rcfg,
                           const PipelineConfig& pcfg);

enum class BaselineMethod { random, score_ranked };

/// Uniform k-subset, or the k highest external scores (ties to the lower index).
Mask baseline_select(const ScoreMatrix& matrix, std::size_t k, BaselineMethod method,
                     std::span<const double> external_scores, std::uint64_t seed);

}  // namespace benchpress
