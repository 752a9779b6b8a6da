#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "benchpress/score_matrix.hpp"

namespace benchpress {

/// One embedding vector per sample, rows stored contiguously. Rows are scaled to unit norm on
/// construction unless `normalize` is false, so inner products are cosine similarities.
class EmbeddingSet {
 public:
  EmbeddingSet() = default;
  EmbeddingSet(std::vector<std::string> sample_ids, std::size_t dim, std::vector<double> values, bool normalize = true);

  std::size_t size() const { return sample_ids_.size(); }
  std::size_t dim() const { return dim_; }
  bool normalized() const { return normalized_; }
  const std::vector<std::string>& sample_ids() const { return sample_ids_; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
  const std::vector<double>& values() const { return values_; }

  /// Rows reordered (and restricted) to match `sample_ids`; throws on IDs missing here.
  EmbeddingSet align_to(std::span<const std::string> sample_ids) const;

 private:
  std::vector<std::string> sample_ids_;
  std::size_t dim_ = 0;
  std::vector<double> values_;
  bool normalized_ = false;
};

/// CSV rows `sample_id,v1,...,vd` (an optional header row whose second field is not numeric is
/// skipped), or raw little-endian float32 with a `<path>.json` sidecar holding
/// {"sample_ids": [...], "dim": d}. Chosen by the `.csv` extension.
EmbeddingSet load_embeddings(const std::filesystem::path& path);
EmbeddingSet parse_embeddings_csv(std::istream& in);
void save_embeddings_csv(const EmbeddingSet& emb, const std::filesystem::path& path);
void save_embeddings_binary(const EmbeddingSet& emb, const std::filesystem::path& path);

enum class Correlation { pearson, spearman, r_squared };

/// kept_only compares a candidate against earlier kept samples; all_earlier against every
/// earlier sample, discarded or not.
enum class FilterMode { kept_only, all_earlier };

struct RedundancyConfig {
  double tau_text = 0.95;
  double tau_ranking = 0.95;
  Correlation correlation = Correlation::pearson;
  FilterMode mode = FilterMode::kept_only;

  /// Looser thresholds for curriculum-style suites whose items are naturally similar.
  static RedundancyConfig lenient();
  void validate() const;
};

enum class DiscardReason { text, ranking };

struct Discard {
  std::size_t index = 0;
  std::string sample_id;
  DiscardReason reason = DiscardReason::text;
  std::size_t trigger_index = 0;
  std::string trigger_id;
  double value = 0.0;
};

struct FilterResult {
  std::vector<std::size_t> kept_indices;
  std::vector<std::string> kept_sample_ids;
  std::vector<Discard> discarded;
};

double text_pair_redundancy(const EmbeddingSet& emb, std::size_t i, std::size_t j);
double text_sample_redundancy(const EmbeddingSet& emb, std::size_t i);
/// All per-sample text redundancies in O(N * d).
std::vector<double> text_sample_redundancies(const EmbeddingSet& emb);
double dataset_text_redundancy(const EmbeddingSet& emb);

/// Correlation of score columns i and j across models. For r_squared this is pearson squared.
/// Throws ValidationError when either column is constant.
double ranking_pair_redundancy(const ScoreMatrix& matrix, std::size_t i, std::size_t j, Correlation correlation);
double ranking_sample_redundancy(const ScoreMatrix& matrix, std::size_t i, Correlation correlation);
std::vector<double> ranking_sample_redundancies(const ScoreMatrix& matrix, Correlation correlation);
double dataset_ranking_redundancy(const ScoreMatrix& matrix, Correlation correlation);

/// Sequential keep-first filter. Sample i survives iff no earlier sample it is compared with
/// has text similarity above tau_text or |ranking correlation| above tau_ranking.
/// Constant score columns have no defined correlation and never trigger the ranking rule.
FilterResult coarse_filter(const ScoreMatrix& matrix, const EmbeddingSet* emb, const RedundancyConfig& cfg);

/// Column transform behind the ranking redundancies: every non-constant column is centred and
/// scaled so that the correlation of two columns is their dot product.
class ColumnCorrelator {
 public:
  ColumnCorrelator(const ScoreMatrix& matrix, Correlation correlation);

  std::size_t size() const { return constant_.size(); }
  bool constant(std::size_t j) const { return constant_[j] != 0; }
  /// Signed correlation, or pearson squared for r_squared. Requires both columns non-constant.
  double operator()(std::size_t i, std::size_t j) const;

 private:
  Correlation correlation_;
  std::size_t n_rows_;
  std::vector<double> z_;  // column-major standardized values
  std::vector<unsigned char> constant_;
};

}  // namespace benchpress
