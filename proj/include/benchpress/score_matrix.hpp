#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "benchpress/mask.hpp"

namespace benchpress {

/// Dense binary models x samples correctness matrix. Row i, column j holds whether model i
/// answered sample j correctly. Immutable after construction.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  /// Validates shape, binary cells and ID uniqueness. `cells` is row-major.
  ScoreMatrix(std::vector<std::string> model_ids, std::vector<std::string> sample_ids, std::vector<std::uint8_t> cells);

  std::size_t n_models() const { return model_ids_.size(); }
  std::size_t n_samples() const { return sample_ids_.size(); }

  const std::vector<std::string>& model_ids() const { return model_ids_; }
  const std::vector<std::string>& sample_ids() const { return sample_ids_; }
  const std::vector<std::uint8_t>& cells() const { return cells_; }

  std::uint8_t at(std::size_t model, std::size_t sample) const { return cells_[model * n_samples() + sample]; }
  std::span<const std::uint8_t> row(std::size_t model) const {
    return {cells_.data() + model * n_samples(), n_samples()};
  }

  bool operator==(const ScoreMatrix&) const = default;

 private:
  std::vector<std::string> model_ids_;
  std::vector<std::string> sample_ids_;
  std::vector<std::uint8_t> cells_;
};

/// Per-model fraction of samples answered correctly.
struct AccuracyVector {
  std::vector<double> values;
  std::vector<std::string> model_ids;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

/// Disjoint model-row index lists. `test` is the held-out reporting split; the GA fits its
/// score map on `fit` and scores candidates on `val`.
struct ModelSplit {
  std::vector<std::size_t> fit_indices;
  std::vector<std::size_t> val_indices;
  std::vector<std::size_t> test_indices;
  std::uint64_t seed = 0;
};

struct SplitOptions {
  double test_fraction = 0.1;
  std::size_t n_strata = 10;
  /// Share of the non-test models held out to score candidate subsets.
  double val_fraction_of_train = 0.5;
  std::uint64_t seed = 0;
};

ScoreMatrix parse_score_matrix(std::istream& in);
ScoreMatrix load_score_matrix(const std::filesystem::path& path);
void write_score_matrix(const ScoreMatrix& matrix, std::ostream& out);
void save_score_matrix(const ScoreMatrix& matrix, const std::filesystem::path& path);

AccuracyVector accuracy(const ScoreMatrix& matrix);

/// Drops models with accuracy < min_accuracy, then samples whose Bernoulli variance
/// p(1-p) < min_variance, repeating until neither rule removes anything.
ScoreMatrix preprocess(const ScoreMatrix& matrix, double min_accuracy, double min_variance);

/// Score-stratified model split. Models are sorted by accuracy (ascending, ties by index) and
/// cut into contiguous strata; lower strata take the extra member when sizes are uneven.
/// Per stratum, round-half-up(test_fraction * size) models go to test, and of the rest
/// round-half-up(val_fraction_of_train * rest) go to val.
ModelSplit stratified_split(const AccuracyVector& y, const SplitOptions& options);

ScoreMatrix column_select(const ScoreMatrix& matrix, const Mask& mask);
ScoreMatrix column_select(const ScoreMatrix& matrix, std::span<const std::size_t> columns);
ScoreMatrix row_select(const ScoreMatrix& matrix, std::span<const std::size_t> rows);

/// Maps sample IDs to column positions; throws ValidationError on unknown IDs.
std::vector<std::size_t> column_positions(const ScoreMatrix& matrix, std::span<const std::string> sample_ids);

}  // namespace benchpress
