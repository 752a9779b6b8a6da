#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "benchpress/errors.hpp"
#include "benchpress/redundancy.hpp"
#include "benchpress/rng.hpp"
#include "oracles.hpp"

using namespace benchpress;

namespace {

EmbeddingSet vectors2(std::vector<double> values) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < values.size() / 2; ++i) ids.push_back("q" + std::to_string(i));
  return EmbeddingSet(ids, 2, std::move(values));
}

ScoreMatrix from_columns(const std::vector<std::vector<std::uint8_t>>& cols) {
  const std::size_t rows = cols.front().size();
  std::vector<std::string> m;
  std::vector<std::string> s;
  for (std::size_t i = 0; i < rows; ++i) m.push_back("m" + std::to_string(i));
  for (std::size_t j = 0; j < cols.size(); ++j) s.push_back("q" + std::to_string(j));
  std::vector<std::uint8_t> cells;
  for (std::size_t i = 0; i < rows; ++i) {
    for (const auto& c : cols) cells.push_back(c[i]);
  }
  return ScoreMatrix(m, s, cells);
}

std::vector<double> column(const ScoreMatrix& s, std::size_t j) {
  std::vector<double> out;
  for (std::size_t i = 0; i < s.n_models(); ++i) out.push_back(s.at(i, j));
  return out;
}

ScoreMatrix random_matrix(std::size_t models, std::size_t samples, Rng& rng) {
  std::vector<std::vector<std::uint8_t>> cols(samples);
  for (auto& c : cols) {
    do {
      c.assign(models, 0);
      for (auto& v : c) v = rng.bernoulli(0.5) ? 1 : 0;
    } while (std::count(c.begin(), c.end(), 1) == 0 || std::count(c.begin(), c.end(), 0) == 0);
  }
  return from_columns(cols);
}

}  // namespace

TEST_CASE("text pair redundancy") {
  const EmbeddingSet e = vectors2({1, 0, 1, 0, 0, 1, 0.6, 0.8, 0.8, 0.6});
  CHECK(text_pair_redundancy(e, 0, 1) == doctest::Approx(1.0));
  CHECK(text_pair_redundancy(e, 0, 2) == doctest::Approx(0.0));
  CHECK(text_pair_redundancy(e, 3, 4) == doctest::Approx(0.96).epsilon(1e-12));
}

TEST_CASE("embeddings are normalised on construction") {
  const EmbeddingSet e = vectors2({3, 4, 0, 2});
  CHECK(e.row(0)[0] == doctest::Approx(0.6));
  CHECK(e.row(1)[1] == doctest::Approx(1.0));
  CHECK_THROWS_AS(vectors2({0, 0, 1, 0}), ValidationError);
}

TEST_CASE("text sample and dataset redundancy") {
  const EmbeddingSet same = vectors2({1, 1, 1, 1, 1, 1});
  CHECK(text_sample_redundancy(same, 1) == doctest::Approx(1.0));
  CHECK(dataset_text_redundancy(same) == doctest::Approx(1.0));

  const EmbeddingSet ortho(std::vector<std::string>{"a", "b", "c"}, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  for (std::size_t i = 0; i < 3; ++i) CHECK(text_sample_redundancy(ortho, i) == doctest::Approx(0.0));
  CHECK(dataset_text_redundancy(ortho) == doctest::Approx(0.0));

  const EmbeddingSet tri = vectors2({1, 0, 0, 1, 0.6, 0.8});
  CHECK(text_sample_redundancy(tri, 0) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(text_sample_redundancy(tri, 1) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(text_sample_redundancy(tri, 2) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(dataset_text_redundancy(tri) == doctest::Approx(1.4 / 3.0).epsilon(1e-12));
  const auto all = text_sample_redundancies(tri);
  for (std::size_t i = 0; i < 3; ++i) CHECK(all[i] == doctest::Approx(text_sample_redundancy(tri, i)).epsilon(1e-12));
}

TEST_CASE("ranking pair redundancy") {
  const ScoreMatrix s = from_columns({{1, 1, 0, 0}, {1, 1, 0, 0}, {0, 0, 1, 1}, {1, 0, 1, 0}});
  CHECK(ranking_pair_redundancy(s, 0, 1, Correlation::pearson) == doctest::Approx(1.0));
  CHECK(ranking_pair_redundancy(s, 0, 2, Correlation::pearson) == doctest::Approx(-1.0));
  CHECK(ranking_pair_redundancy(s, 0, 3, Correlation::pearson) == doctest::Approx(0.0));
  CHECK(ranking_pair_redundancy(s, 0, 2, Correlation::r_squared) == doctest::Approx(1.0));

  const ScoreMatrix flat = from_columns({{1, 1, 1, 1}, {1, 0, 1, 0}});
  CHECK_THROWS_AS(ranking_pair_redundancy(flat, 0, 1, Correlation::pearson), ValidationError);
}

TEST_CASE("ranking correlations agree with a naive reference") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const ScoreMatrix s = random_matrix(9, 6, rng);
    for (std::size_t i = 0; i < 6; ++i) {
      for (std::size_t j = 0; j < 6; ++j) {
        const auto a = column(s, i);
        const auto b = column(s, j);
        CHECK(ranking_pair_redundancy(s, i, j, Correlation::pearson) == doctest::Approx(oracle::pearson(a, b)).epsilon(1e-12));
        CHECK(ranking_pair_redundancy(s, i, j, Correlation::spearman) == doctest::Approx(oracle::spearman(a, b)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("ranking sample redundancy") {
  const ScoreMatrix same = from_columns({{1, 0, 1}, {1, 0, 1}, {1, 0, 1}});
  CHECK(ranking_sample_redundancy(same, 0, Correlation::pearson) == doctest::Approx(1.0));
  CHECK(dataset_ranking_redundancy(same, Correlation::pearson) == doctest::Approx(1.0));

  const ScoreMatrix anti = from_columns({{1, 0}, {0, 1}});
  CHECK(ranking_sample_redundancy(anti, 0, Correlation::pearson) == doctest::Approx(1.0));

  // Brute-force search for three non-constant 4-row columns with zero pairwise correlation.
  std::vector<std::vector<std::uint8_t>> pool;
  for (int bits = 1; bits < 15; ++bits) {
    pool.push_back({static_cast<std::uint8_t>(bits & 1), static_cast<std::uint8_t>((bits >> 1) & 1),
                    static_cast<std::uint8_t>((bits >> 2) & 1), static_cast<std::uint8_t>((bits >> 3) & 1)});
  }
  auto r = [](const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
    return oracle::pearson(std::vector<double>(a.begin(), a.end()), std::vector<double>(b.begin(), b.end()));
  };
  std::vector<std::vector<std::uint8_t>> found;
  for (std::size_t a = 0; a < pool.size() && found.empty(); ++a) {
    for (std::size_t b = a + 1; b < pool.size() && found.empty(); ++b) {
      for (std::size_t c = b + 1; c < pool.size() && found.empty(); ++c) {
        if (std::abs(r(pool[a], pool[b])) < 1e-12 && std::abs(r(pool[a], pool[c])) < 1e-12 &&
            std::abs(r(pool[b], pool[c])) < 1e-12) {
          found = {pool[a], pool[b], pool[c]};
        }
      }
    }
  }
  REQUIRE(found.size() == 3);
  const ScoreMatrix uncorrelated = from_columns(found);
  for (std::size_t i = 0; i < 3; ++i) CHECK(ranking_sample_redundancy(uncorrelated, i, Correlation::pearson) == doctest::Approx(0.0));
}

TEST_CASE("coarse filter hand cases") {
  const ScoreMatrix s = from_columns({{1, 0, 1, 0}, {0, 0, 1, 1}, {1, 1, 0, 0}});
  // Sample 1 and 2 are nearly parallel, every other pair is far apart.
  const double t = std::acos(0.99);
  const EmbeddingSet e(std::vector<std::string>{"q0", "q1", "q2"}, 3,
                       {1, 0, 0, std::cos(t), std::sin(t), 0, 0, 0, 1});
  RedundancyConfig cfg;
  cfg.tau_text = 0.95;
  cfg.tau_ranking = 1.0;
  const FilterResult r = coarse_filter(s, &e, cfg);
  CHECK(r.kept_indices == std::vector<std::size_t>{0, 2});
  REQUIRE(r.discarded.size() == 1);
  CHECK(r.discarded[0].index == 1);
  CHECK(r.discarded[0].reason == DiscardReason::text);
  CHECK(r.discarded[0].trigger_index == 0);
  CHECK(r.discarded[0].trigger_id == "q0");
  CHECK(r.discarded[0].value == doctest::Approx(0.99));

  RedundancyConfig vacuous;
  vacuous.tau_text = 1.0;
  vacuous.tau_ranking = 1.0;
  Rng rng(4);
  const ScoreMatrix random = random_matrix(30, 40, rng);
  CHECK(coarse_filter(random, nullptr, vacuous).discarded.empty());
}

TEST_CASE("exact duplicate column is discarded, first occurrence kept") {
  Rng rng(8);
  ScoreMatrix base = random_matrix(40, 6, rng);
  std::vector<std::vector<std::uint8_t>> cols;
  for (std::size_t j = 0; j < 6; ++j) {
    std::vector<std::uint8_t> c;
    for (std::size_t i = 0; i < 40; ++i) c.push_back(base.at(i, j));
    cols.push_back(c);
  }
  cols[4] = cols[1];
  const ScoreMatrix s = from_columns(cols);
  RedundancyConfig cfg;
  cfg.tau_ranking = 0.999;
  const FilterResult r = coarse_filter(s, nullptr, cfg);
  REQUIRE(r.discarded.size() == 1);
  CHECK(r.discarded[0].index == 4);
  CHECK(r.discarded[0].trigger_index == 1);
  CHECK(r.discarded[0].reason == DiscardReason::ranking);
}

TEST_CASE("no kept pair exceeds a threshold") {
  Rng rng(21);
  for (int trial = 0; trial < 15; ++trial) {
    const ScoreMatrix s = random_matrix(8, 30, rng);
    std::vector<double> values(30 * 4);
    for (auto& v : values) v = rng.normal();
    std::vector<std::string> ids = s.sample_ids();
    const EmbeddingSet e(ids, 4, values);
    for (const FilterMode mode : {FilterMode::kept_only, FilterMode::all_earlier}) {
      RedundancyConfig cfg;
      cfg.tau_text = 0.6;
      cfg.tau_ranking = 0.5;
      cfg.mode = mode;
      const FilterResult r = coarse_filter(s, &e, cfg);
      CHECK(r.kept_indices.size() + r.discarded.size() == 30);
      for (std::size_t a = 0; a < r.kept_indices.size(); ++a) {
        for (std::size_t b = 0; b < a; ++b) {
          const std::size_t i = r.kept_indices[a];
          const std::size_t j = r.kept_indices[b];
          CHECK(text_pair_redundancy(e, j, i) <= 0.6);
          CHECK(std::abs(ranking_pair_redundancy(s, j, i, Correlation::pearson)) <= 0.5);
        }
      }
    }
  }
}

TEST_CASE("embedding alignment and io") {
  const EmbeddingSet e(std::vector<std::string>{"a", "b", "c"}, 2, {1, 0, 0, 1, 0.6, 0.8});
  const std::vector<std::string> order{"c", "a"};
  const EmbeddingSet aligned = e.align_to(order);
  CHECK(aligned.sample_ids() == order);
  CHECK(aligned.row(0)[1] == doctest::Approx(0.8));
  const std::vector<std::string> missing{"z"};
  CHECK_THROWS_AS(e.align_to(missing), ValidationError);

  const auto dir = std::filesystem::temp_directory_path() / "benchpress_redundancy_test";
  std::filesystem::create_directories(dir);
  save_embeddings_csv(e, dir / "e.csv");
  const EmbeddingSet back = load_embeddings(dir / "e.csv");
  CHECK(back.sample_ids() == e.sample_ids());
  CHECK(back.row(2)[0] == doctest::Approx(0.6));
  save_embeddings_binary(e, dir / "e.bin");
  const EmbeddingSet bin = load_embeddings(dir / "e.bin");
  CHECK(bin.sample_ids() == e.sample_ids());
  CHECK(bin.row(2)[1] == doctest::Approx(0.8).epsilon(1e-6));
  CHECK_THROWS_AS(load_embeddings(dir / "missing.csv"), IoError);
  std::filesystem::remove_all(dir);

  RedundancyConfig bad;
  bad.tau_ranking = 1.5;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK(RedundancyConfig::lenient().tau_ranking > RedundancyConfig{}.tau_ranking);
}
