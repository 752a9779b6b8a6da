#include <doctest.h>

#include <cmath>

#include "benchpress/errors.hpp"
#include "benchpress/synth.hpp"

using namespace benchpress;

TEST_CASE("exact duplicates are column copies") {
  SynthSpec spec;
  spec.n_models = 30;
  spec.n_samples = 50;
  spec.duplicates = {{3, 2, 0.0}, {10, 1, 0.0}};
  spec.seed = 4;
  const SyntheticBenchmark b = generate(spec);
  CHECK(b.matrix.n_samples() == 53);
  CHECK(b.duplicate_of.size() == 3);
  CHECK(b.duplicate_of.at(50) == 3);
  CHECK(b.duplicate_of.at(51) == 3);
  CHECK(b.duplicate_of.at(52) == 10);
  for (const auto& [copy, source] : b.duplicate_of) {
    for (std::size_t i = 0; i < spec.n_models; ++i) CHECK(b.matrix.at(i, copy) == b.matrix.at(i, source));
    double dot = 0.0;
    for (std::size_t d = 0; d < spec.embedding_dim; ++d) dot += b.embeddings.row(copy)[d] * b.embeddings.row(source)[d];
    CHECK(dot == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(b.matrix.sample_ids().front() == "item_00");
  CHECK(b.matrix.model_ids().back() == "model_29");
}

TEST_CASE("near duplicates differ by roughly the flip rate") {
  SynthSpec spec;
  spec.n_models = 2000;
  spec.n_samples = 5;
  spec.duplicates = {{1, 1, 0.1}};
  const SyntheticBenchmark b = generate(spec);
  int differ = 0;
  for (std::size_t i = 0; i < spec.n_models; ++i) differ += b.matrix.at(i, 5) != b.matrix.at(i, 1);
  const double se = std::sqrt(0.1 * 0.9 / 2000.0);
  CHECK(std::abs(differ / 2000.0 - 0.1) < 3 * se);
}

TEST_CASE("saturated skills give an all-ones matrix") {
  SynthSpec spec;
  spec.n_models = 10;
  spec.n_samples = 20;
  spec.skill_mean = 60.0;
  spec.skill_spread = 0.1;
  spec.difficulty_spread = 0.1;
  const SyntheticBenchmark b = generate(spec);
  for (auto c : b.matrix.cells()) CHECK(c == 1);
}

TEST_CASE("model accuracy matches the generating probabilities") {
  SynthSpec spec;
  spec.n_models = 20;
  spec.n_samples = 5000;
  spec.discrimination_spread = 0.5;
  spec.seed = 9;
  const SyntheticBenchmark b = generate(spec);
  const AccuracyVector y = accuracy(b.matrix);
  for (std::size_t i = 0; i < spec.n_models; ++i) {
    double mean = 0.0;
    double var = 0.0;
    for (std::size_t j = 0; j < spec.n_samples; ++j) {
      const double p = 1.0 / (1.0 + std::exp(-b.discriminations[j] * (b.skills[i] - b.difficulties[j])));
      mean += p;
      var += p * (1 - p);
    }
    mean /= spec.n_samples;
    const double se = std::sqrt(var) / spec.n_samples;
    CHECK(std::abs(y[i] - mean) < 3 * se);
  }
}

TEST_CASE("generation is deterministic per seed") {
  SynthSpec spec;
  spec.n_models = 15;
  spec.n_samples = 40;
  spec.seed = 12;
  const SyntheticBenchmark a = generate(spec);
  const SyntheticBenchmark b = generate(spec);
  CHECK(a.matrix == b.matrix);
  CHECK(a.embeddings.values() == b.embeddings.values());
  spec.seed = 13;
  CHECK_FALSE(generate(spec).matrix == a.matrix);

  // The default discrimination reproduces the plain logistic model exactly.
  SynthSpec plain = spec;
  for (double d : generate(plain).discriminations) CHECK(d == 1.0);

  SynthSpec bad;
  bad.duplicates = {{bad.n_samples, 1, 0.0}};
  CHECK_THROWS_AS(generate(bad), ValidationError);
}

TEST_CASE("exhaustive search") {
  SynthSpec spec;
  spec.n_models = 40;
  spec.n_samples = 6;
  spec.seed = 2;
  const ScoreMatrix s = generate(spec).matrix;
  const AccuracyVector y = accuracy(s);
  SplitOptions opt;
  opt.n_strata = 4;
  const ModelSplit split = stratified_split(y, opt);

  const auto [full, full_error] = brute_force_best_subset(s, y, split, 6, PredictorMode::identity);
  CHECK(full == Mask::full(6));
  CHECK(full_error == 0.0);

  const auto [best, error] = brute_force_best_subset(s, y, split, 3, PredictorMode::identity);
  CHECK(best.count() == 3);
  const FitnessEvaluator ev(s, y, split, PredictorMode::identity);
  CHECK(ev.error(best) == error);
  int enumerated = 0;
  for (unsigned bits = 0; bits < 64; ++bits) {
    if (__builtin_popcount(bits) != 3) continue;
    Mask m(6);
    for (std::size_t j = 0; j < 6; ++j) {
      if ((bits >> j) & 1U) m.set(j);
    }
    CHECK(ev.error(m) >= error);
    ++enumerated;
  }
  CHECK(enumerated == 20);

  CHECK(binomial(12, 4) == 495);
  CHECK(binomial(3, 5) == 0);
  CHECK_THROWS_AS(brute_force_best_subset(s, y, split, 3, PredictorMode::identity, 10), InfeasibleError);
}

TEST_CASE("oracle never loses to the search") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SynthSpec spec;
    spec.n_models = 40;
    spec.n_samples = 10;
    spec.seed = seed;
    const ScoreMatrix s = generate(spec).matrix;
    const AccuracyVector y = accuracy(s);
    SplitOptions opt;
    opt.seed = seed;
    opt.n_strata = 4;
    const ModelSplit split = stratified_split(y, opt);
    GaConfig cfg;
    cfg.population_size = 10;
    cfg.elite_count = 2;
    cfg.generations = 5;
    cfg.seed = seed;
    const double oracle = brute_force_best_subset(s, y, split, 4, PredictorMode::spline).second;
    CHECK(oracle <= run_ga(s, y, split, 4, cfg).best_error);
  }
}
