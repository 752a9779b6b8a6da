#include "benchpress/score_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "benchpress/csv.hpp"
#include "benchpress/errors.hpp"
#include "benchpress/rng.hpp"

namespace benchpress {

namespace {

void require_unique(const std::vector<std::string>& ids, const char* what) {
  std::unordered_set<std::string> seen;
  seen.reserve(ids.size());
  for (const auto& id : ids) {
    if (!seen.insert(id).second) throw ValidationError(std::string("duplicate ") + what + " ID '" + id + "'");
  }
}

std::size_t round_half_up(double x) {
  // Absorbs representation error such as 0.35 * 10 = 3.4999999999999996.
  return static_cast<std::size_t>(std::floor(x + 0.5 + 1e-9));
}

}  // namespace

ScoreMatrix::ScoreMatrix(std::vector<std::string> model_ids, std::vector<std::string> sample_ids,
                         std::vector<std::uint8_t> cells)
    : model_ids_(std::move(model_ids)), sample_ids_(std::move(sample_ids)), cells_(std::move(cells)) {
  if (model_ids_.empty() || sample_ids_.empty()) throw ValidationError("score matrix needs at least one model and one sample");
  if (cells_.size() != model_ids_.size() * sample_ids_.size())
    throw ValidationError("score matrix cell count does not match " + std::to_string(model_ids_.size()) + " x " +
                          std::to_string(sample_ids_.size()));
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    if (cells_[i] > 1) {
      throw ValidationError("non-binary cell at model '" + model_ids_[i / sample_ids_.size()] + "', sample '" +
                            sample_ids_[i % sample_ids_.size()] + "'");
    }
  }
  require_unique(model_ids_, "model");
  require_unique(sample_ids_, "sample");
}

ScoreMatrix parse_score_matrix(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!csv::is_blank(line)) {
      header = csv::split(line, line_no);
      break;
    }
  }
  if (header.size() < 2) throw ParseError("header must name at least one sample after the model-ID column", line_no, 1);

  std::vector<std::string> sample_ids(header.begin() + 1, header.end());
  for (std::size_t j = 0; j < sample_ids.size(); ++j) {
    if (sample_ids[j].empty()) throw ParseError("empty sample ID", line_no, j + 2);
  }
  require_unique(sample_ids, "sample");

  std::vector<std::string> model_ids;
  std::vector<std::uint8_t> cells;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::is_blank(line)) continue;
    auto fields = csv::split(line, line_no);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()),
                       line_no, std::min(fields.size(), header.size()) + 1);
    }
    if (fields[0].empty()) throw ParseError("empty model ID", line_no, 1);
    model_ids.push_back(fields[0]);
    for (std::size_t j = 1; j < fields.size(); ++j) {
      const std::string& f = fields[j];
      if (f == "0" || f == "0.0") {
        cells.push_back(0);
      } else if (f == "1" || f == "1.0") {
        cells.push_back(1);
      } else {
        throw ParseError("non-binary cell '" + f + "' for model '" + fields[0] + "', sample '" + sample_ids[j - 1] + "'",
                         line_no, j + 1);
      }
    }
  }
  if (model_ids.empty()) throw ParseError("no model rows", line_no, 1);
  require_unique(model_ids, "model");
  return ScoreMatrix(std::move(model_ids), std::move(sample_ids), std::move(cells));
}

ScoreMatrix load_score_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open score matrix '" + path.string() + "'");
  return parse_score_matrix(in);
}

void write_score_matrix(const ScoreMatrix& matrix, std::ostream& out) {
  out << "model";
  for (const auto& id : matrix.sample_ids()) out << ',' << csv::quote(id);
  out << '\n';
  for (std::size_t i = 0; i < matrix.n_models(); ++i) {
    out << csv::quote(matrix.model_ids()[i]);
    for (auto c : matrix.row(i)) out << ',' << static_cast<int>(c);
    out << '\n';
  }
}

void save_score_matrix(const ScoreMatrix& matrix, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  write_score_matrix(matrix, out);
}

AccuracyVector accuracy(const ScoreMatrix& matrix) {
  AccuracyVector y;
  y.model_ids = matrix.model_ids();
  y.values.resize(matrix.n_models());
  const auto n = static_cast<double>(matrix.n_samples());
  for (std::size_t i = 0; i < matrix.n_models(); ++i) {
    const auto row = matrix.row(i);
    const std::size_t correct = std::accumulate(row.begin(), row.end(), std::size_t{0});
    y.values[i] = static_cast<double>(correct) / n;
  }
  return y;
}

ScoreMatrix preprocess(const ScoreMatrix& matrix, double min_accuracy, double min_variance) {
  if (!(min_accuracy >= 0.0 && min_accuracy < 1.0)) throw ValidationError("min_accuracy must lie in [0, 1)");
  if (!(min_variance >= 0.0)) throw ValidationError("min_variance must be non-negative");

  std::vector<std::size_t> rows(matrix.n_models());
  std::vector<std::size_t> cols(matrix.n_samples());
  std::iota(rows.begin(), rows.end(), 0);
  std::iota(cols.begin(), cols.end(), 0);

  for (;;) {
    std::vector<std::size_t> kept_rows;
    for (std::size_t r : rows) {
      std::size_t correct = 0;
      for (std::size_t c : cols) correct += matrix.at(r, c);
      if (static_cast<double>(correct) / static_cast<double>(cols.size()) >= min_accuracy) kept_rows.push_back(r);
    }
    if (kept_rows.empty()) throw ValidationError("preprocessing removed every model");

    std::vector<std::size_t> kept_cols;
    for (std::size_t c : cols) {
      std::size_t correct = 0;
      for (std::size_t r : kept_rows) correct += matrix.at(r, c);
      const double p = static_cast<double>(correct) / static_cast<double>(kept_rows.size());
      if (p * (1.0 - p) >= min_variance) kept_cols.push_back(c);
    }
    if (kept_cols.empty()) throw ValidationError("preprocessing removed every sample");

    const bool stable = kept_rows.size() == rows.size() && kept_cols.size() == cols.size();
    rows = std::move(kept_rows);
    cols = std::move(kept_cols);
    if (stable) break;
  }
  if (rows.size() < 2 || cols.size() < 2) {
    throw ValidationError("preprocessing left " + std::to_string(rows.size()) + " models x " + std::to_string(cols.size()) +
                          " samples; at least 2 x 2 required");
  }
  if (rows.size() == matrix.n_models() && cols.size() == matrix.n_samples()) return matrix;
  return column_select(row_select(matrix, rows), cols);
}

ModelSplit stratified_split(const AccuracyVector& y, const SplitOptions& options) {
  const std::size_t n = y.size();
  if (options.n_strata < 1) throw ValidationError("n_strata must be at least 1");
  if (!(options.test_fraction > 0.0 && options.test_fraction < 1.0)) throw ValidationError("test_fraction must lie in (0, 1)");
  if (!(options.val_fraction_of_train >= 0.0 && options.val_fraction_of_train < 1.0))
    throw ValidationError("val_fraction_of_train must lie in [0, 1)");
  if (n < options.n_strata)
    throw InfeasibleError("cannot cut " + std::to_string(n) + " models into " + std::to_string(options.n_strata) + " strata");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y.values[a] < y.values[b]; });

  ModelSplit split;
  split.seed = options.seed;
  const Rng root(options.seed);
  const std::size_t base = n / options.n_strata;
  const std::size_t extra = n % options.n_strata;
  std::size_t start = 0;
  for (std::size_t s = 0; s < options.n_strata; ++s) {
    const std::size_t size = base + (s < extra ? 1 : 0);
    std::vector<std::size_t> members(order.begin() + static_cast<std::ptrdiff_t>(start),
                                     order.begin() + static_cast<std::ptrdiff_t>(start + size));
    start += size;

    // A seeded Fisher-Yates shuffle; the leading members go to test, then val.
    Rng rng = root.derive({0x5354524154ULL, s});
    for (std::size_t i = 0; i + 1 < members.size(); ++i) std::swap(members[i], members[i + rng.below(members.size() - i)]);

    const std::size_t n_test = std::min(size, round_half_up(options.test_fraction * static_cast<double>(size)));
    const std::size_t rest = size - n_test;
    const std::size_t n_val = std::min(rest, round_half_up(options.val_fraction_of_train * static_cast<double>(rest)));
    if (rest - n_val == 0) {
      throw InfeasibleError("stratum " + std::to_string(s) + " of size " + std::to_string(size) + " has no models left for fitting");
    }
    split.test_indices.insert(split.test_indices.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.val_indices.insert(split.val_indices.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test),
                             members.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
    split.fit_indices.insert(split.fit_indices.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), members.end());
  }
  std::sort(split.fit_indices.begin(), split.fit_indices.end());
  std::sort(split.val_indices.begin(), split.val_indices.end());
  std::sort(split.test_indices.begin(), split.test_indices.end());
  return split;
}

ScoreMatrix column_select(const ScoreMatrix& matrix, const Mask& mask) {
  if (mask.size() != matrix.n_samples()) {
    throw ValidationError("mask universe of size " + std::to_string(mask.size()) + " does not match " +
                          std::to_string(matrix.n_samples()) + " samples");
  }
  const auto cols = mask.indices();
  return column_select(matrix, cols);
}

ScoreMatrix column_select(const ScoreMatrix& matrix, std::span<const std::size_t> columns) {
  std::vector<std::string> ids;
  ids.reserve(columns.size());
  for (std::size_t c : columns) {
    if (c >= matrix.n_samples()) throw ValidationError("column index " + std::to_string(c) + " out of range");
    ids.push_back(matrix.sample_ids()[c]);
  }
  std::vector<std::uint8_t> cells;
  cells.reserve(matrix.n_models() * columns.size());
  for (std::size_t i = 0; i < matrix.n_models(); ++i) {
    const auto row = matrix.row(i);
    for (std::size_t c : columns) cells.push_back(row[c]);
  }
  return ScoreMatrix(matrix.model_ids(), std::move(ids), std::move(cells));
}

ScoreMatrix row_select(const ScoreMatrix& matrix, std::span<const std::size_t> rows) {
  std::vector<std::string> ids;
  std::vector<std::uint8_t> cells;
  cells.reserve(rows.size() * matrix.n_samples());
  for (std::size_t r : rows) {
    if (r >= matrix.n_models()) throw ValidationError("row index " + std::to_string(r) + " out of range");
    ids.push_back(matrix.model_ids()[r]);
    const auto row = matrix.row(r);
    cells.insert(cells.end(), row.begin(), row.end());
  }
  return ScoreMatrix(std::move(ids), matrix.sample_ids(), std::move(cells));
}

std::vector<std::size_t> column_positions(const ScoreMatrix& matrix, std::span<const std::string> sample_ids) {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(matrix.n_samples());
  for (std::size_t j = 0; j < matrix.n_samples(); ++j) index.emplace(matrix.sample_ids()[j], j);
  std::vector<std::size_t> out;
  out.reserve(sample_ids.size());
  for (const auto& id : sample_ids) {
    auto it = index.find(id);
    if (it == index.end()) throw ValidationError("unknown sample ID '" + id + "'");
    out.push_back(it->second);
  }
  return out;
}

}  // namespace benchpress
