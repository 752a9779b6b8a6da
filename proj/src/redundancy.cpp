#include "benchpress/redundancy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "benchpress/csv.hpp"
#include "benchpress/errors.hpp"
#include "json.hpp"

namespace benchpress {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double clamp_unit(double r) { return std::clamp(r, -1.0, 1.0); }

// Average ranks (1-based, ascending). Direction does not matter for correlations.
std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

void check_index(const EmbeddingSet& emb, std::size_t i) {
  if (i >= emb.size()) throw ValidationError("sample index " + std::to_string(i) + " out of range");
}

void require_normalized(const EmbeddingSet& emb) {
  if (!emb.normalized()) throw ValidationError("text redundancy needs unit-normalized embeddings");
}

}  // namespace

EmbeddingSet::EmbeddingSet(std::vector<std::string> sample_ids, std::size_t dim, std::vector<double> values, bool normalize)
    : sample_ids_(std::move(sample_ids)), dim_(dim), values_(std::move(values)) {
  if (dim_ == 0) throw ValidationError("embedding dimension must be positive");
  if (values_.size() != sample_ids_.size() * dim_) throw ValidationError("embedding value count does not match rows x dim");
  for (double v : values_) {
    if (!std::isfinite(v)) throw ValidationError("embedding contains a non-finite value");
  }
  if (normalize) {
    for (std::size_t i = 0; i < sample_ids_.size(); ++i) {
      double* r = values_.data() + i * dim_;
      double norm = 0.0;
      for (std::size_t d = 0; d < dim_; ++d) norm += r[d] * r[d];
      norm = std::sqrt(norm);
      if (norm == 0.0) throw ValidationError("embedding for sample '" + sample_ids_[i] + "' is the zero vector");
      for (std::size_t d = 0; d < dim_; ++d) r[d] /= norm;
    }
    normalized_ = true;
  } else {
    normalized_ = true;
    for (std::size_t i = 0; i < sample_ids_.size() && normalized_; ++i) {
      normalized_ = std::abs(std::sqrt(dot(row(i), row(i))) - 1.0) <= 1e-6;
    }
  }
}

EmbeddingSet EmbeddingSet::align_to(std::span<const std::string> sample_ids) const {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) index.emplace(sample_ids_[i], i);
  std::vector<double> values;
  values.reserve(sample_ids.size() * dim_);
  for (const auto& id : sample_ids) {
    auto it = index.find(id);
    if (it == index.end()) throw ValidationError("no embedding for sample '" + id + "'");
    const auto r = row(it->second);
    values.insert(values.end(), r.begin(), r.end());
  }
  EmbeddingSet out;
  out.sample_ids_.assign(sample_ids.begin(), sample_ids.end());
  out.dim_ = dim_;
  out.values_ = std::move(values);
  out.normalized_ = normalized_;
  return out;
}

EmbeddingSet parse_embeddings_csv(std::istream& in) {
  std::vector<std::string> ids;
  std::vector<double> values;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::is_blank(line)) continue;
    auto fields = csv::split(line, line_no);
    if (fields.size() < 2) throw ParseError("embedding row needs an ID and at least one value", line_no, 1);
    std::vector<double> row;
    row.reserve(fields.size() - 1);
    bool numeric = true;
    for (std::size_t f = 1; f < fields.size() && numeric; ++f) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(fields[f], &used));
        if (used != fields[f].size()) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
      if (!numeric && !first) throw ParseError("non-numeric embedding value '" + fields[f] + "'", line_no, f + 1);
    }
    if (!numeric) {  // header row
      first = false;
      continue;
    }
    first = false;
    if (dim == 0) dim = row.size();
    if (row.size() != dim) throw ParseError("expected " + std::to_string(dim) + " embedding values", line_no, fields.size());
    ids.push_back(fields[0]);
    values.insert(values.end(), row.begin(), row.end());
  }
  if (ids.empty()) throw ParseError("no embedding rows", line_no, 1);
  return EmbeddingSet(std::move(ids), dim, std::move(values));
}

EmbeddingSet load_embeddings(const std::filesystem::path& path) {
  if (path.extension() == ".csv") {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open embeddings '" + path.string() + "'");
    return parse_embeddings_csv(in);
  }
  const std::filesystem::path sidecar = path.string() + ".json";
  std::ifstream meta_in(sidecar);
  if (!meta_in) throw IoError("cannot open embedding sidecar '" + sidecar.string() + "'");
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed embedding sidecar: " + std::string(e.what()));
  }
  if (!meta.contains("sample_ids") || !meta.contains("dim")) throw ValidationError("embedding sidecar needs 'sample_ids' and 'dim'");
  auto ids = meta.at("sample_ids").get<std::vector<std::string>>();
  const auto dim = meta.at("dim").get<std::size_t>();

  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embeddings '" + path.string() + "'");
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (raw.size() != ids.size() * dim * 4) {
    throw ValidationError("binary embedding file holds " + std::to_string(raw.size()) + " bytes, expected " +
                          std::to_string(ids.size() * dim * 4));
  }
  std::vector<double> values(ids.size() * dim);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 3; b >= 0; --b) bits = (bits << 8) | static_cast<unsigned char>(raw[i * 4 + static_cast<std::size_t>(b)]);
    float f;
    std::memcpy(&f, &bits, sizeof f);
    values[i] = f;
  }
  return EmbeddingSet(std::move(ids), dim, std::move(values));
}

void save_embeddings_csv(const EmbeddingSet& emb, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.precision(17);
  for (std::size_t i = 0; i < emb.size(); ++i) {
    out << csv::quote(emb.sample_ids()[i]);
    for (double v : emb.row(i)) out << ',' << v;
    out << '\n';
  }
}

void save_embeddings_binary(const EmbeddingSet& emb, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  for (double v : emb.values()) {
    const auto f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    for (int b = 0; b < 4; ++b) out.put(static_cast<char>((bits >> (8 * b)) & 0xFF));
  }
  std::ofstream meta(path.string() + ".json");
  if (!meta) throw IoError("cannot write sidecar for '" + path.string() + "'");
  meta << nlohmann::json{{"sample_ids", emb.sample_ids()}, {"dim", emb.dim()}}.dump(2) << '\n';
}

RedundancyConfig RedundancyConfig::lenient() {
  RedundancyConfig cfg;
  cfg.tau_text = 0.98;
  cfg.tau_ranking = 0.98;
  return cfg;
}

void RedundancyConfig::validate() const {
  if (!(tau_text >= -1.0 && tau_text <= 1.0)) throw ValidationError("tau_text must lie in [-1, 1]");
  if (!(tau_ranking >= 0.0 && tau_ranking <= 1.0)) throw ValidationError("tau_ranking must lie in [0, 1]");
}

double text_pair_redundancy(const EmbeddingSet& emb, std::size_t i, std::size_t j) {
  require_normalized(emb);
  check_index(emb, i);
  check_index(emb, j);
  return clamp_unit(dot(emb.row(i), emb.row(j)));
}

std::vector<double> text_sample_redundancies(const EmbeddingSet& emb) {
  require_normalized(emb);
  const std::size_t n = emb.size();
  if (n < 2) throw ValidationError("text redundancy needs at least two samples");
  // sum_{j != i} <e_i, e_j> = <e_i, sum_j e_j> - <e_i, e_i>
  std::vector<double> total(emb.dim(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = emb.row(i);
    for (std::size_t d = 0; d < emb.dim(); ++d) total[d] += r[d];
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (dot(emb.row(i), total) - dot(emb.row(i), emb.row(i))) / static_cast<double>(n - 1);
  }
  return out;
}

double text_sample_redundancy(const EmbeddingSet& emb, std::size_t i) {
  require_normalized(emb);
  check_index(emb, i);
  if (emb.size() < 2) throw ValidationError("text redundancy needs at least two samples");
  double s = 0.0;
  for (std::size_t j = 0; j < emb.size(); ++j) {
    if (j != i) s += dot(emb.row(i), emb.row(j));
  }
  return s / static_cast<double>(emb.size() - 1);
}

double dataset_text_redundancy(const EmbeddingSet& emb) {
  const auto per_sample = text_sample_redundancies(emb);
  return std::accumulate(per_sample.begin(), per_sample.end(), 0.0) / static_cast<double>(per_sample.size());
}

ColumnCorrelator::ColumnCorrelator(const ScoreMatrix& matrix, Correlation correlation)
    : correlation_(correlation), n_rows_(matrix.n_models()), z_(matrix.n_models() * matrix.n_samples()),
      constant_(matrix.n_samples(), 0) {
  std::vector<double> col(n_rows_);
  for (std::size_t j = 0; j < matrix.n_samples(); ++j) {
    for (std::size_t i = 0; i < n_rows_; ++i) col[i] = matrix.at(i, j);
    if (correlation_ == Correlation::spearman) col = average_ranks(col);
    const double mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(n_rows_);
    double ss = 0.0;
    for (double v : col) ss += (v - mean) * (v - mean);
    double* z = z_.data() + j * n_rows_;
    if (ss == 0.0) {
      constant_[j] = 1;
      std::fill(z, z + n_rows_, 0.0);
      continue;
    }
    const double scale = 1.0 / std::sqrt(ss);
    for (std::size_t i = 0; i < n_rows_; ++i) z[i] = (col[i] - mean) * scale;
  }
}

double ColumnCorrelator::operator()(std::size_t i, std::size_t j) const {
  const double r = clamp_unit(dot({z_.data() + i * n_rows_, n_rows_}, {z_.data() + j * n_rows_, n_rows_}));
  return correlation_ == Correlation::r_squared ? r * r : r;
}

double ranking_pair_redundancy(const ScoreMatrix& matrix, std::size_t i, std::size_t j, Correlation correlation) {
  if (i >= matrix.n_samples() || j >= matrix.n_samples()) throw ValidationError("sample index out of range");
  const std::vector<std::size_t> cols = i == j ? std::vector<std::size_t>{i} : std::vector<std::size_t>{i, j};
  const ColumnCorrelator corr(column_select(matrix, cols), correlation);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (corr.constant(c)) {
      throw ValidationError("sample '" + matrix.sample_ids()[cols[c]] +
                            "' has zero variance across models; remove it during preprocessing");
    }
  }
  return corr(0, cols.size() - 1);
}

std::vector<double> ranking_sample_redundancies(const ScoreMatrix& matrix, Correlation correlation) {
  const std::size_t n = matrix.n_samples();
  if (n < 2) throw ValidationError("ranking redundancy needs at least two samples");
  const ColumnCorrelator corr(matrix, correlation);
  for (std::size_t j = 0; j < n; ++j) {
    if (corr.constant(j)) {
      throw ValidationError("sample '" + matrix.sample_ids()[j] + "' has zero variance across models; remove it during preprocessing");
    }
  }
  std::vector<double> sums(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double r = std::abs(corr(i, j));
      sums[i] += r;
      sums[j] += r;
    }
  }
  for (double& s : sums) s /= static_cast<double>(n - 1);
  return sums;
}

double ranking_sample_redundancy(const ScoreMatrix& matrix, std::size_t i, Correlation correlation) {
  if (i >= matrix.n_samples()) throw ValidationError("sample index out of range");
  if (matrix.n_samples() < 2) throw ValidationError("ranking redundancy needs at least two samples");
  double s = 0.0;
  for (std::size_t j = 0; j < matrix.n_samples(); ++j) {
    if (j != i) s += std::abs(ranking_pair_redundancy(matrix, i, j, correlation));
  }
  return s / static_cast<double>(matrix.n_samples() - 1);
}

double dataset_ranking_redundancy(const ScoreMatrix& matrix, Correlation correlation) {
  const auto per_sample = ranking_sample_redundancies(matrix, correlation);
  return std::accumulate(per_sample.begin(), per_sample.end(), 0.0) / static_cast<double>(per_sample.size());
}

FilterResult coarse_filter(const ScoreMatrix& matrix, const EmbeddingSet* emb, const RedundancyConfig& cfg) {
  cfg.validate();
  const std::size_t n = matrix.n_samples();
  if (emb != nullptr) {
    if (emb->size() != n) {
      throw ValidationError("embeddings cover " + std::to_string(emb->size()) + " samples but the score matrix has " +
                            std::to_string(n));
    }
    if (emb->sample_ids() != matrix.sample_ids()) throw ValidationError("embedding sample order does not match the score matrix");
    require_normalized(*emb);
  }
  // Similarities are clamped to [-1, 1], so thresholds at or above 1 can never fire.
  const bool use_text = emb != nullptr && cfg.tau_text < 1.0;
  const bool use_ranking = cfg.tau_ranking < 1.0;
  std::optional<ColumnCorrelator> corr;
  if (use_ranking) corr.emplace(matrix, cfg.correlation);

  FilterResult result;
  std::vector<std::size_t> all_indices(n);
  std::iota(all_indices.begin(), all_indices.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::span<const std::size_t> earlier =
        cfg.mode == FilterMode::kept_only ? std::span<const std::size_t>(result.kept_indices)
                                          : std::span<const std::size_t>(all_indices.data(), i);
    std::optional<Discard> hit;
    for (std::size_t j : earlier) {
      if (use_text) {
        const double sim = clamp_unit(dot(emb->row(j), emb->row(i)));
        if (sim > cfg.tau_text) {
          hit = Discard{i, matrix.sample_ids()[i], DiscardReason::text, j, matrix.sample_ids()[j], sim};
          break;
        }
      }
      if (use_ranking && !corr->constant(i) && !corr->constant(j)) {
        const double r = (*corr)(j, i);
        if (std::abs(r) > cfg.tau_ranking) {
          hit = Discard{i, matrix.sample_ids()[i], DiscardReason::ranking, j, matrix.sample_ids()[j], r};
          break;
        }
      }
    }
    if (hit) {
      result.discarded.push_back(std::move(*hit));
    } else {
      result.kept_indices.push_back(i);
      result.kept_sample_ids.push_back(matrix.sample_ids()[i]);
    }
  }
  return result;
}

}  // namespace benchpress
