#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "benchpress/errors.hpp"
#include "benchpress/rng.hpp"
#include "benchpress/score_matrix.hpp"

using namespace benchpress;

namespace {

ScoreMatrix make(std::size_t models, std::size_t samples, std::vector<std::uint8_t> cells) {
  std::vector<std::string> m;
  std::vector<std::string> s;
  for (std::size_t i = 0; i < models; ++i) m.push_back("m" + std::to_string(i));
  for (std::size_t j = 0; j < samples; ++j) s.push_back("q" + std::to_string(j));
  return ScoreMatrix(m, s, std::move(cells));
}

ScoreMatrix random_matrix(std::size_t models, std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::uint8_t> cells(models * samples);
  for (auto& c : cells) c = rng.bernoulli(0.5) ? 1 : 0;
  return make(models, samples, cells);
}

}  // namespace

TEST_CASE("csv round trip") {
  std::istringstream in("model,q1,q2\nA,1,0\nB,1,1\n");
  const ScoreMatrix s = parse_score_matrix(in);
  CHECK(s.n_models() == 2);
  CHECK(s.n_samples() == 2);
  CHECK(s.at(0, 1) == 0);
  CHECK(s.at(1, 1) == 1);
  std::ostringstream out;
  write_score_matrix(s, out);
  std::istringstream back(out.str());
  CHECK(parse_score_matrix(back) == s);
}

TEST_CASE("non-binary cell names the offending cell") {
  std::istringstream in("model,q1,q2\nA,1,0\nB,2,1\n");
  try {
    parse_score_matrix(in);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 3);
    CHECK(e.column() == 2);
    CHECK(std::string(e.what()).find("'2'") != std::string::npos);
  }
}

TEST_CASE("duplicate sample ID is rejected") {
  std::istringstream in("model,q7,q7\nA,1,0\n");
  CHECK_THROWS_AS(parse_score_matrix(in), ValidationError);
  std::istringstream rows("model,a,b\nA,1,0\nA,0,0\n");
  CHECK_THROWS_AS(parse_score_matrix(rows), ValidationError);
  std::istringstream ragged("model,a,b\nA,1\n");
  CHECK_THROWS_AS(parse_score_matrix(ragged), ParseError);
  CHECK_THROWS_AS(load_score_matrix("/nonexistent/file.csv"), IoError);
}

TEST_CASE("accuracy") {
  CHECK(accuracy(make(2, 2, {1, 0, 1, 1})).values == std::vector<double>{0.5, 1.0});
  CHECK(accuracy(make(3, 4, std::vector<std::uint8_t>(12, 1))).values == std::vector<double>{1, 1, 1});
  CHECK(accuracy(make(1, 5, {1, 0, 1, 0, 1})).values[0] == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("preprocess") {
  // Column 0 is all zeros.
  const ScoreMatrix s = make(3, 3, {0, 1, 0, 0, 0, 1, 0, 1, 1});
  const ScoreMatrix p = preprocess(s, 0.0, 0.01);
  CHECK(p.sample_ids() == std::vector<std::string>{"q1", "q2"});
  CHECK(preprocess(s, 0.0, 0.0) == s);

  // Ten samples, accuracies 0.1, 0.4, 0.6, 0.9.
  std::vector<std::uint8_t> cells;
  for (int correct : {1, 4, 6, 9}) {
    for (int j = 0; j < 10; ++j) cells.push_back(j < correct ? 1 : 0);
  }
  const ScoreMatrix q = preprocess(make(4, 10, cells), 0.25, 0.0);
  CHECK(q.model_ids() == std::vector<std::string>{"m1", "m2", "m3"});
}

TEST_CASE("preprocess is idempotent") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    std::vector<std::uint8_t> cells(12 * 30);
    for (auto& c : cells) c = rng.bernoulli(0.3 + 0.4 * rng.uniform()) ? 1 : 0;
    const ScoreMatrix s = make(12, 30, cells);
    const ScoreMatrix once = preprocess(s, 0.2, 0.15);
    CHECK(preprocess(once, 0.2, 0.15) == once);
  }
}

TEST_CASE("stratified split sizes") {
  AccuracyVector y;
  for (int i = 0; i < 100; ++i) y.values.push_back((i * 37 % 100) / 100.0);
  SplitOptions opt;
  opt.seed = 5;
  const ModelSplit split = stratified_split(y, opt);
  CHECK(split.test_indices.size() == 10);
  std::set<int> strata;
  for (std::size_t i : split.test_indices) strata.insert(static_cast<int>(y.values[i] * 10));
  CHECK(strata.size() == 10);

  AccuracyVector ten;
  for (int i = 0; i < 10; ++i) ten.values.push_back(i / 10.0);
  SplitOptions one;
  one.n_strata = 1;
  CHECK(stratified_split(ten, one).test_indices.size() == 1);
}

TEST_CASE("stratified split is a reproducible partition") {
  AccuracyVector y;
  Rng rng(3);
  for (int i = 0; i < 57; ++i) y.values.push_back(rng.uniform());
  for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
    SplitOptions opt;
    opt.seed = seed;
    const ModelSplit a = stratified_split(y, opt);
    const ModelSplit b = stratified_split(y, opt);
    CHECK(a.fit_indices == b.fit_indices);
    CHECK(a.val_indices == b.val_indices);
    CHECK(a.test_indices == b.test_indices);
    std::vector<std::size_t> all;
    for (const auto* part : {&a.fit_indices, &a.val_indices, &a.test_indices}) all.insert(all.end(), part->begin(), part->end());
    std::sort(all.begin(), all.end());
    REQUIRE(all.size() == 57);
    for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);
  }
  SplitOptions bad;
  bad.n_strata = 60;
  CHECK_THROWS_AS(stratified_split(y, bad), InfeasibleError);
  bad = {};
  bad.test_fraction = 0.0;
  CHECK_THROWS_AS(stratified_split(y, bad), ValidationError);
}

TEST_CASE("column select") {
  const ScoreMatrix s = random_matrix(4, 6, 1);
  CHECK(column_select(s, Mask::full(6)) == s);
  CHECK(accuracy(column_select(s, Mask::full(6))).values == accuracy(s).values);

  const ScoreMatrix one = make(1, 3, {1, 0, 1});
  const ScoreMatrix sel = column_select(one, Mask::from_string("101"));
  CHECK(sel.cells() == std::vector<std::uint8_t>{1, 1});
  CHECK(sel.sample_ids() == std::vector<std::string>{"q0", "q2"});

  CHECK_THROWS_AS(column_select(s, Mask::full(5)), ValidationError);
  const std::vector<std::string> ids{"q4", "q1"};
  CHECK(column_positions(s, ids) == std::vector<std::size_t>{4, 1});
  const std::vector<std::string> bad{"nope"};
  CHECK_THROWS_AS(column_positions(s, bad), ValidationError);
}
