#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "benchpress/ga.hpp"
#include "benchpress/mask.hpp"
#include "benchpress/redundancy.hpp"
#include "benchpress/score_matrix.hpp"

namespace benchpress {

/// `copies` extra columns cloned from base column `source`, each cell flipped with
/// `flip_probability`. The copies' embeddings are the source embedding plus Gaussian noise
/// scaled by the same probability.
struct DuplicateGroup {
  std::size_t source = 0;
  std::size_t copies = 1;
  double flip_probability = 0.0;
};

struct SynthSpec {
  std::size_t n_models = 150;
  /// Base items; duplicate copies are appended after them.
  std::size_t n_samples = 2000;
  double skill_mean = 0.0;
  double skill_spread = 1.0;
  double difficulty_mean = 0.0;
  double difficulty_spread = 1.0;
  /// Per-item slope on (skill - difficulty). A spread of 0 gives every item slope `mean`.
  double discrimination_mean = 1.0;
  double discrimination_spread = 0.0;
  std::vector<DuplicateGroup> duplicates;
  std::size_t embedding_dim = 16;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticBenchmark {
  ScoreMatrix matrix;
  EmbeddingSet embeddings;
  /// Copy column -> source column.
  std::map<std::size_t, std::size_t> duplicate_of;
  std::vector<double> skills;
  std::vector<double> difficulties;
  std::vector<double> discriminations;
};

/// Cell (i, j) is Bernoulli(sigmoid(a_j * (skill_i - difficulty_j))) with a_j the item's
/// discrimination. Deterministic per seed.
SyntheticBenchmark generate(const SynthSpec& spec);

double sigmoid(double x);

/// Exhaustive minimiser of the search fitness over all k-subsets; the first subset in
/// lexicographic order wins ties. Refuses more than `max_subsets` candidates.
std::pair<Mask, double> brute_force_best_subset(const ScoreMatrix& matrix, const AccuracyVector& y,
                                                const ModelSplit& split, std::size_t k, PredictorMode mode,
                                                std::size_t max_subsets = 1000000);

/// C(n, k), saturating at the largest std::size_t.
std::size_t binomial(std::size_t n, std::size_t k);

}  // namespace benchpress
