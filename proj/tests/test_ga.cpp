#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "benchpress/errors.hpp"
#include "benchpress/ga.hpp"
#include "benchpress/synth.hpp"

using namespace benchpress;

namespace {

ScoreMatrix from_rows(const std::vector<std::vector<std::uint8_t>>& rows) {
  std::vector<std::string> m;
  std::vector<std::string> s;
  for (std::size_t i = 0; i < rows.size(); ++i) m.push_back("m" + std::to_string(i));
  for (std::size_t j = 0; j < rows.front().size(); ++j) s.push_back("q" + std::to_string(j));
  std::vector<std::uint8_t> cells;
  for (const auto& r : rows) cells.insert(cells.end(), r.begin(), r.end());
  return ScoreMatrix(m, s, cells);
}

struct Instance {
  ScoreMatrix matrix;
  AccuracyVector y;
  ModelSplit split;
};

Instance small_instance(std::size_t models, std::size_t samples, std::uint64_t seed) {
  SynthSpec spec;
  spec.n_models = models;
  spec.n_samples = samples;
  spec.seed = seed;
  Instance in;
  in.matrix = generate(spec).matrix;
  in.y = accuracy(in.matrix);
  SplitOptions opt;
  opt.seed = seed;
  opt.n_strata = 5;
  in.split = stratified_split(in.y, opt);
  return in;
}

}  // namespace

TEST_CASE("init population") {
  GaConfig cfg;
  cfg.population_size = 8;
  cfg.seed = 4;
  for (const Mask& m : init_population(5, 5, cfg)) CHECK(m == Mask::full(5));
  const auto a = init_population(40, 7, cfg);
  const auto b = init_population(40, 7, cfg);
  CHECK(a == b);
  for (const Mask& m : a) CHECK(m.count() == 7);
  CHECK_THROWS_AS(init_population(4, 5, cfg), InfeasibleError);
}

TEST_CASE("uniform initialisation frequencies") {
  GaConfig cfg;
  cfg.population_size = 10000;
  cfg.elite_count = 1;
  cfg.seed = 12;
  std::vector<int> hits(3, 0);
  for (const Mask& m : init_population(3, 1, cfg)) ++hits[m.indices()[0]];
  for (int h : hits) CHECK(std::abs(h / 10000.0 - 1.0 / 3.0) < 0.02);
}

TEST_CASE("biased initialisation favours heavy positions") {
  GaConfig cfg;
  cfg.population_size = 4000;
  cfg.elite_count = 1;
  cfg.init_bias = {1.0, 1.0, 8.0, 0.0};
  std::vector<int> hits(4, 0);
  for (const Mask& m : init_population(4, 1, cfg)) ++hits[m.indices()[0]];
  CHECK(hits[3] == 0);
  CHECK(std::abs(hits[2] / 4000.0 - 0.8) < 0.03);
}

TEST_CASE("fitness hand cases") {
  // Fit models read s = y exactly, so the fallback line is the identity.
  const ScoreMatrix s = from_rows({
      {1, 0, 0, 0, 0, 1, 0, 0, 0, 0},
      {1, 1, 1, 1, 0, 1, 1, 1, 1, 0},
      {1, 1, 1, 0, 0, 1, 1, 1, 0, 0},
      {1, 1, 0, 0, 0, 1, 1, 1, 1, 0},
  });
  const AccuracyVector y = accuracy(s);
  ModelSplit split;
  split.fit_indices = {0, 1};
  split.val_indices = {2, 3};
  const Mask half = Mask::from_string("1111100000");
  CHECK(evaluate_fitness(half, s, y, split) == doctest::Approx(-std::sqrt(0.02)).epsilon(1e-12));
  CHECK(std::abs(evaluate_fitness(Mask::full(10), s, y, split)) < 1e-9);
  CHECK(std::abs(evaluate_fitness(Mask::full(10), s, y, split, PredictorMode::identity)) < 1e-15);

  const ScoreMatrix flat = from_rows({{1, 0, 1, 0}, {0, 1, 0, 1}, {1, 1, 0, 0}, {0, 0, 1, 1}});
  const AccuracyVector fy = accuracy(flat);
  for (const char* bits : {"1100", "1010", "0110", "1000"}) {
    CHECK(std::abs(evaluate_fitness(Mask::from_string(bits), flat, fy, split)) < 1e-9);
  }
}

TEST_CASE("tournament selection") {
  Rng rng(1);
  const std::vector<double> f{-0.3, -0.1, -0.7, -0.2};
  // Drawing many times with replacement covers the population.
  CHECK(tournament_select(f, 200, rng) == 1);
  const std::vector<double> single{-0.4};
  CHECK(tournament_select(single, 3, rng) == 0);
  const std::vector<double> pair{-0.5, -0.1};
  for (int t = 0; t < 50; ++t) {
    Rng r(static_cast<std::uint64_t>(t));
    const std::size_t pick = tournament_select(pair, 2, r);
    Rng replay(static_cast<std::uint64_t>(t));
    const std::size_t d1 = replay.below(2);
    const std::size_t d2 = replay.below(2);
    CHECK(pick == (d1 == 1 || d2 == 1 ? 1u : 0u));
  }
}

TEST_CASE("crossover") {
  const Mask a = Mask::from_string("1100");
  const Mask b = Mask::from_string("0011");
  // (1100 & 1010) | (0011 & 0101)
  CHECK(crossover(a, b, Mask::from_string("1010")) == Mask::from_string("1001"));
  CHECK(crossover(a, b, Mask::full(4)) == a);
  Rng rng(3);
  for (int t = 0; t < 20; ++t) CHECK(crossover(a, a, rng) == a);
  CHECK_THROWS_AS(crossover(a, Mask(5), rng), ValidationError);
}

TEST_CASE("mutation flip counts") {
  Rng rng(5);
  const std::size_t n = 200;
  const std::size_t k = 20;
  const Mask m(n);
  const int trials = 10000;
  double total = 0.0;
  std::vector<int> per_bit(n, 0);
  for (int t = 0; t < trials; ++t) {
    const Mask out = mutate(m, k, rng);
    total += static_cast<double>(out.count());
    for (std::size_t i : out.indices()) ++per_bit[i];
  }
  const double p = 1.0 / static_cast<double>(k);
  const double se = std::sqrt(static_cast<double>(n) * p * (1 - p) / trials);
  CHECK(std::abs(total / trials - static_cast<double>(n) * p) < 3 * se);
  // Every position is equally likely to flip.
  for (int c : per_bit) CHECK(std::abs(c / static_cast<double>(trials) - p) < 5 * std::sqrt(p * (1 - p) / trials));

  // k = M: each bit flips with probability 1/M.
  const std::size_t small = 8;
  double flips = 0.0;
  for (int t = 0; t < trials; ++t) flips += static_cast<double>(mutate(Mask(small), small, rng).count());
  CHECK(std::abs(flips / trials - 1.0) < 3 * std::sqrt(small * (1.0 / small) * (1 - 1.0 / small) / trials));
}

TEST_CASE("adjust") {
  Rng rng(9);
  const Mask ok = Mask::from_string("0110");
  CHECK(adjust(ok, 2, rng) == ok);

  std::map<std::string, int> seen;
  const int trials = 9000;
  for (int t = 0; t < trials; ++t) ++seen[adjust(Mask::from_string("1110"), 2, rng).to_string()];
  CHECK(seen.size() == 3);
  for (const char* s : {"1100", "1010", "0110"}) CHECK(std::abs(seen[s] / static_cast<double>(trials) - 1.0 / 3.0) < 0.02);

  std::set<std::string> grown;
  for (int t = 0; t < 2000; ++t) {
    const Mask g = adjust(Mask(4), 2, rng);
    CHECK(g.count() == 2);
    grown.insert(g.to_string());
  }
  CHECK(grown.size() == 6);
}

TEST_CASE("single generation returns the best initial individual") {
  const Instance in = small_instance(30, 40, 2);
  GaConfig cfg;
  cfg.population_size = 20;
  cfg.elite_count = 2;
  cfg.generations = 1;
  cfg.seed = 8;
  const FitnessEvaluator ev(in.matrix, in.y, in.split, cfg.predictor);
  const GaResult r = run_ga(ev, 6, cfg);
  double best = INFINITY;
  for (const Mask& m : init_population(40, 6, cfg)) best = std::min(best, ev.error(m));
  CHECK(r.best_error == best);
  CHECK(r.history.size() == 1);
  CHECK(r.evaluations == 20);
}

TEST_CASE("ga finds the exhaustive optimum on a 12-sample pool") {
  int matched = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Instance in = small_instance(50, 12, seed);
    GaConfig cfg;
    cfg.population_size = 60;
    cfg.elite_count = 6;
    cfg.generations = 300;
    cfg.seed = seed;
    cfg.predictor = PredictorMode::identity;
    const auto [mask, oracle] = brute_force_best_subset(in.matrix, in.y, in.split, 4, PredictorMode::identity);
    CHECK(binomial(12, 4) == 495);
    const GaResult r = run_ga(in.matrix, in.y, in.split, 4, cfg);
    CHECK(r.best_error >= oracle - 1e-12);
    if (std::abs(r.best_error - oracle) <= 1e-9) ++matched;
  }
  CHECK(matched == 5);
}

TEST_CASE("ga bookkeeping") {
  const Instance in = small_instance(40, 80, 3);
  GaConfig cfg;
  cfg.population_size = 30;
  cfg.elite_count = 4;
  cfg.generations = 40;
  cfg.seed = 21;
  const FitnessEvaluator ev(in.matrix, in.y, in.split, cfg.predictor);
  const GaResult r = run_ga(ev, 10, cfg);
  REQUIRE(r.history.size() == 40);
  for (std::size_t g = 1; g < r.history.size(); ++g) CHECK(r.history[g] <= r.history[g - 1]);
  CHECK(r.best_error == r.history.back());
  CHECK(r.best_mask.count() == 10);
  CHECK(ev.error(r.best_mask) == r.best_error);
  REQUIRE(r.elites.size() == 4);
  for (std::size_t e = 0; e < 4; ++e) {
    CHECK(r.elites[e].count() == 10);
    CHECK(ev.error(r.elites[e]) == r.elite_errors[e]);
    if (e > 0) CHECK(r.elite_errors[e] >= r.elite_errors[e - 1]);
  }
  CHECK(r.elite_errors[0] == r.best_error);
  // Elites are carried over without re-evaluation.
  CHECK(r.evaluations == 30 + 39 * 26);

  const GaResult again = run_ga(ev, 10, cfg);
  CHECK(again.best_mask == r.best_mask);
  CHECK(again.history == r.history);
}

TEST_CASE("ga config validation") {
  GaConfig cfg;
  cfg.elite_count = cfg.population_size;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  cfg.tournament_size = 1;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  cfg.generations = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  const Instance in = small_instance(20, 10, 1);
  CHECK_THROWS_AS(run_ga(in.matrix, in.y, in.split, 11, GaConfig{}), InfeasibleError);
}
