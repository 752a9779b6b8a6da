#include "benchpress/synth.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "benchpress/errors.hpp"
#include "benchpress/rng.hpp"

namespace benchpress {

namespace {

std::string numbered(const char* prefix, std::size_t i, std::size_t total) {
  const int width = static_cast<int>(std::to_string(total > 0 ? total - 1 : 0).size());
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

}  // namespace

void SynthSpec::validate() const {
  if (n_models < 2) throw ValidationError("a synthetic benchmark needs at least 2 models");
  if (n_samples < 1) throw ValidationError("a synthetic benchmark needs at least 1 sample");
  if (!(skill_spread >= 0.0) || !(difficulty_spread >= 0.0)) throw ValidationError("spreads must be non-negative");
  if (!(discrimination_spread >= 0.0)) throw ValidationError("spreads must be non-negative");
  if (!std::isfinite(skill_mean) || !std::isfinite(difficulty_mean) || !std::isfinite(discrimination_mean)) {
    throw ValidationError("means must be finite");
  }
  if (embedding_dim < 1) throw ValidationError("embedding_dim must be at least 1");
  for (const auto& g : duplicates) {
    if (g.source >= n_samples) throw ValidationError("duplicate source must be a base sample");
    if (!(g.flip_probability >= 0.0 && g.flip_probability <= 1.0)) throw ValidationError("flip_probability must lie in [0, 1]");
  }
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

SyntheticBenchmark generate(const SynthSpec& spec) {
  spec.validate();
  const Rng root(spec.seed);
  SyntheticBenchmark out;

  std::size_t total = spec.n_samples;
  for (const auto& g : spec.duplicates) total += g.copies;

  Rng skill_rng = root.derive(1);
  for (std::size_t i = 0; i < spec.n_models; ++i) out.skills.push_back(spec.skill_mean + spec.skill_spread * skill_rng.normal());
  Rng diff_rng = root.derive(2);
  for (std::size_t j = 0; j < spec.n_samples; ++j) {
    out.difficulties.push_back(spec.difficulty_mean + spec.difficulty_spread * diff_rng.normal());
  }

  Rng disc_rng = root.derive(6);
  for (std::size_t j = 0; j < spec.n_samples; ++j) {
    const double a = spec.discrimination_spread > 0.0 ? spec.discrimination_spread * disc_rng.normal() : 0.0;
    out.discriminations.push_back(spec.discrimination_mean + a);
  }

  std::vector<std::uint8_t> cells(spec.n_models * total, 0);
  Rng cell_rng = root.derive(3);
  for (std::size_t i = 0; i < spec.n_models; ++i) {
    for (std::size_t j = 0; j < spec.n_samples; ++j) {
      cells[i * total + j] = cell_rng.bernoulli(sigmoid(out.discriminations[j] * (out.skills[i] - out.difficulties[j]))) ? 1 : 0;
    }
  }

  std::vector<double> emb(total * spec.embedding_dim);
  Rng emb_rng = root.derive(4);
  for (std::size_t j = 0; j < spec.n_samples; ++j) {
    for (std::size_t d = 0; d < spec.embedding_dim; ++d) emb[j * spec.embedding_dim + d] = emb_rng.normal();
  }
  // Rows are normalised by EmbeddingSet, so copies only need the perturbed source direction.
  auto unit = [&](std::size_t j) {
    double norm = 0.0;
    for (std::size_t d = 0; d < spec.embedding_dim; ++d) norm += emb[j * spec.embedding_dim + d] * emb[j * spec.embedding_dim + d];
    return std::sqrt(norm);
  };

  Rng dup_rng = root.derive(5);
  std::size_t col = spec.n_samples;
  for (const auto& g : spec.duplicates) {
    const double src_norm = unit(g.source);
    for (std::size_t c = 0; c < g.copies; ++c, ++col) {
      out.duplicate_of[col] = g.source;
      for (std::size_t i = 0; i < spec.n_models; ++i) {
        std::uint8_t v = cells[i * total + g.source];
        if (g.flip_probability > 0.0 && dup_rng.bernoulli(g.flip_probability)) v ^= 1;
        cells[i * total + col] = v;
      }
      for (std::size_t d = 0; d < spec.embedding_dim; ++d) {
        const double base = emb[g.source * spec.embedding_dim + d] / src_norm;
        const double noise = g.flip_probability > 0.0 ? g.flip_probability * dup_rng.normal() : 0.0;
        emb[col * spec.embedding_dim + d] = base + noise;
      }
    }
  }

  std::vector<std::string> model_ids;
  for (std::size_t i = 0; i < spec.n_models; ++i) model_ids.push_back(numbered("model_", i, spec.n_models));
  std::vector<std::string> sample_ids;
  for (std::size_t j = 0; j < total; ++j) sample_ids.push_back(numbered("item_", j, total));
  out.matrix = ScoreMatrix(std::move(model_ids), sample_ids, std::move(cells));
  out.embeddings = EmbeddingSet(std::move(sample_ids), spec.embedding_dim, std::move(emb));
  return out;
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 c = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    c = c * (n - k + i) / i;
    if (c > std::numeric_limits<std::size_t>::max()) return std::numeric_limits<std::size_t>::max();
  }
  return static_cast<std::size_t>(c);
}

std::pair<Mask, double> brute_force_best_subset(const ScoreMatrix& matrix, const AccuracyVector& y,
                                                const ModelSplit& split, std::size_t k, PredictorMode mode,
                                                std::size_t max_subsets) {
  const std::size_t n = matrix.n_samples();
  if (k < 1 || k > n) throw InfeasibleError("k = " + std::to_string(k) + " is infeasible for " + std::to_string(n) + " samples");
  const std::size_t count = binomial(n, k);
  if (count > max_subsets) {
    throw InfeasibleError(std::to_string(n) + " choose " + std::to_string(k) + " subsets exceed the enumeration limit of " +
                          std::to_string(max_subsets));
  }
  const FitnessEvaluator evaluator(matrix, y, split, mode);

  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  Mask best;
  double best_error = std::numeric_limits<double>::infinity();
  while (true) {
    const Mask m = Mask::from_indices(n, idx);
    const double e = evaluator.error(m);
    if (e < best_error || best.size() == 0) {
      best_error = e;
      best = m;
    }
    // Next combination in lexicographic order.
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t t = i; t < k; ++t) idx[t] = idx[t - 1] + 1;
  }
  return {best, best_error};
}

}  // namespace benchpress
