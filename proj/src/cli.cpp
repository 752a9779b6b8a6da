#include "benchpress/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "benchpress/csv.hpp"
#include "benchpress/errors.hpp"
#include "benchpress/synth.hpp"

namespace benchpress {

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr const char* kThreadsEnv = "BENCHPRESS_THREADS";

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

void write_json(const std::string& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

std::string sibling_path(const std::string& path, const std::string& suffix) {
  const auto dot = path.find_last_of('.');
  const auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + suffix;
  return path.substr(0, dot) + suffix;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json meta_block(const std::map<std::string, double>& timings = {}) {
  Json t = Json::object();
  for (const auto& [k, v] : timings) t[k] = v;
  return {{"generated_at", utc_timestamp()}, {"threads", omp_get_max_threads()}, {"version", kVersion}, {"timings_seconds", t}};
}

std::optional<EmbeddingSet> maybe_embeddings(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return load_embeddings(path);
}

ModelSplit all_models_split(const ModelSplit& split, std::size_t n_models) {
  ModelSplit s = split;
  s.test_indices.resize(n_models);
  for (std::size_t i = 0; i < n_models; ++i) s.test_indices[i] = i;
  return s;
}

// Flags shared by every command. Values are applied only when the flag was given.
struct CommonFlags {
  std::string config;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;

  void add(CLI::App* app) {
    app->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
    seed_opt = app->add_option("--seed", seed, "global seed");
    threads_opt = app->add_option("--threads", threads, "worker thread cap (also " + std::string(kThreadsEnv) + ")");
  }
};

struct RedundancyFlags {
  double tau_text = 0.0;
  double tau_ranking = 0.0;
  std::string correlation;
  std::string mode;
  std::string preset;
  CLI::Option* tau_text_opt = nullptr;
  CLI::Option* tau_ranking_opt = nullptr;

  void add(CLI::App* app) {
    tau_text_opt = app->add_option("--tau-text", tau_text, "text redundancy threshold; 1 disables the rule");
    tau_ranking_opt = app->add_option("--tau-ranking", tau_ranking, "ranking redundancy threshold; 1 disables the rule");
    app->add_option("--correlation", correlation, "pearson, spearman or r_squared");
    app->add_option("--filter-mode", mode, "kept_only or all_earlier");
    app->add_option("--preset", preset, "default or lenient thresholds");
  }

  void apply(RedundancyConfig& r) const {
    if (!preset.empty()) r = redundancy_from_json(Json{{"preset", preset}}, r);
    if (tau_text_opt->count() > 0) r.tau_text = tau_text;
    if (tau_ranking_opt->count() > 0) r.tau_ranking = tau_ranking;
    if (!correlation.empty()) r.correlation = parse_correlation(correlation);
    if (!mode.empty()) r.mode = parse_filter_mode(mode);
  }
};

struct PipelineFlags {
  std::size_t k = 0;
  std::size_t rounds = 0;
  std::size_t generations = 0;
  std::size_t group_generations = 0;
  std::size_t population = 0;
  std::size_t elites = 0;
  double alpha = 0.0;
  double beta = 0.0;
  double min_model_accuracy = 0.0;
  double min_sample_variance = 0.0;
  std::size_t k_top = 0;
  bool all_models = false;
  std::map<std::string, CLI::Option*> opts;

  void add(CLI::App* app, bool search) {
    if (search) {
      opts["k"] = app->add_option("--k", k, "subset size");
      opts["rounds"] = app->add_option("--rounds", rounds, "maximum refinement rounds");
      opts["generations"] = app->add_option("--generations", generations, "main search generations");
      opts["group_generations"] = app->add_option("--group-generations", group_generations, "group search generations");
      opts["population"] = app->add_option("--population", population, "population size");
      opts["elites"] = app->add_option("--elites", elites, "elite count");
      opts["alpha"] = app->add_option("--retention", alpha, "share of the pool each group keeps");
      opts["beta"] = app->add_option("--temperature", beta, "attribution sampling temperature");
    }
    opts["min_model_accuracy"] = app->add_option("--min-model-accuracy", min_model_accuracy, "drop weaker models first");
    opts["min_sample_variance"] = app->add_option("--min-sample-variance", min_sample_variance, "drop low-variance samples first");
    opts["k_top"] = app->add_option("--k-top", k_top, "cutoff for NDCG and top-k overlap");
    app->add_flag("--all-models", all_models, "score metrics on every model rather than the test split");
  }

  bool given(const char* name) const {
    auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }

  void apply(RunConfig& c) const {
    PipelineConfig& p = c.pipeline;
    if (given("k")) p.k = k;
    if (given("rounds")) p.rounds_max = rounds;
    if (given("generations")) p.ga.generations = generations;
    if (given("group_generations")) {
      GaConfig g = p.effective_group_ga();
      g.generations = group_generations;
      p.group_ga = g;
    }
    if (given("population")) {
      p.ga.population_size = population;
      if (p.group_ga) p.group_ga->population_size = population;
    }
    if (given("elites")) {
      p.ga.elite_count = elites;
      if (p.group_ga) p.group_ga->elite_count = elites;
    }
    if (given("alpha")) p.retention_ratio = alpha;
    if (given("beta")) p.sampling_temperature = beta;
    if (given("min_model_accuracy")) p.min_model_accuracy = min_model_accuracy;
    if (given("min_sample_variance")) p.min_sample_variance = min_sample_variance;
    if (given("k_top")) p.k_top = k_top;
    if (all_models) c.metrics_all_models = true;
  }
};

RunConfig resolve_config(const CommonFlags& common) {
  RunConfig c;
  if (!common.config.empty()) c = run_config_from_json(load_json(common.config));
  if (common.seed_opt->count() > 0) c.seed = common.seed;
  if (common.threads_opt->count() > 0) {
    c.threads = common.threads;
  } else if (c.threads == 0) {
    if (const char* env = std::getenv(kThreadsEnv); env != nullptr && *env != '\0') {
      char* end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (*end != '\0' || v < 0) throw ValidationError(std::string(kThreadsEnv) + " must be a non-negative integer");
      c.threads = static_cast<std::size_t>(v);
    }
  }
  c.sync_seeds();
  if (c.threads > 0) omp_set_num_threads(static_cast<int>(c.threads));
  return c;
}

std::vector<double> read_sample_scores(const std::string& path, const ScoreMatrix& matrix) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::map<std::string, double> by_id;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::is_blank(line)) continue;
    const auto fields = csv::split(line, line_no);
    if (fields.size() != 2) throw ParseError("expected 'sample_id,score'", line_no, 1);
    char* end = nullptr;
    const std::string value = csv::trim(fields[1]);
    const double v = std::strtod(value.c_str(), &end);
    if (value.empty() || *end != '\0') {
      if (by_id.empty() && line_no == 1) continue;  // header
      throw ParseError("score '" + value + "' is not a number", line_no, 2);
    }
    if (!by_id.emplace(csv::trim(fields[0]), v).second) throw ParseError("duplicate sample id '" + fields[0] + "'", line_no, 1);
  }
  std::vector<double> scores;
  for (const auto& id : matrix.sample_ids()) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw ValidationError("scores file has no entry for sample '" + id + "'");
    scores.push_back(it->second);
  }
  return scores;
}

int cmd_filter(const CommonFlags& common, const RedundancyFlags& rflags, const PipelineFlags& pflags, const std::string& scores,
               const std::string& embeddings, const std::string& out_path, std::string ids_path, std::ostream& out) {
  RunConfig c = resolve_config(common);
  rflags.apply(c.redundancy);
  pflags.apply(c);
  const bool text_requested = rflags.tau_text_opt->count() > 0 && c.redundancy.tau_text < 1.0;
  if (text_requested && embeddings.empty()) {
    throw ValidationError("text filtering was requested with --tau-text but no --embeddings were given");
  }
  const ScoreMatrix matrix = load_score_matrix(scores);
  const auto emb = maybe_embeddings(embeddings);
  const PreparedBenchmark prepared = prepare_benchmark(matrix, emb ? &*emb : nullptr, c.redundancy, c.pipeline);

  std::size_t text = 0;
  for (const auto& d : prepared.filter.discarded) text += d.reason == DiscardReason::text;
  Json report = {{"config", to_json(c)},
                 {"samples", {{"input", matrix.n_samples()}, {"preprocessed", prepared.matrix.n_samples()}}},
                 {"result", to_json(prepared.filter)},
                 {"meta", meta_block()}};
  write_json(out_path, report);
  if (ids_path.empty()) ids_path = sibling_path(out_path, ".kept.txt");
  write_id_list(ids_path, prepared.filter.kept_sample_ids);
  out << "kept " << prepared.filter.kept_indices.size() << ", discarded " << prepared.filter.discarded.size() << " (text "
      << text << ", ranking " << prepared.filter.discarded.size() - text << ")\n";
  return 0;
}

int cmd_compress(const CommonFlags& common, const RedundancyFlags& rflags, const PipelineFlags& pflags,
                 const std::string& scores, const std::string& embeddings, const std::string& out_path, std::string ids_path,
                 std::ostream& out) {
  RunConfig c = resolve_config(common);
  rflags.apply(c.redundancy);
  pflags.apply(c);
  c.pipeline.validate();
  const ScoreMatrix matrix = load_score_matrix(scores);
  const auto emb = maybe_embeddings(embeddings);

  const auto start = std::chrono::steady_clock::now();
  const PreparedBenchmark prepared = prepare_benchmark(matrix, emb ? &*emb : nullptr, c.redundancy, c.pipeline);
  const double prepare_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CompressionReport report = compress(prepared, c.pipeline);
  report.input_samples = matrix.n_samples();
  report.timings["prepare"] = prepare_seconds;
  if (c.metrics_all_models) {
    const auto cols = column_positions(prepared.matrix, report.selected_sample_ids);
    report.evaluation = evaluate_subset(prepared.matrix, prepared.y, all_models_split(report.split, prepared.matrix.n_models()),
                                        cols, c.pipeline.ga.score_map, c.pipeline.k_top);
  }

  Json j = {{"config", to_json(c)}, {"result", to_json(report, prepared.matrix)}, {"meta", meta_block(report.timings)}};
  write_json(out_path, j);
  if (ids_path.empty()) ids_path = sibling_path(out_path, ".subset.txt");
  write_id_list(ids_path, report.selected_sample_ids);
  out << "selected " << report.selected_sample_ids.size() << " of " << matrix.n_samples() << " samples; validation rmse "
      << report.final_error << ", test rmse " << report.evaluation.metrics.rmse << ", test kendall "
      << report.evaluation.metrics.kendall << "\n";
  return 0;
}

int cmd_evaluate(const CommonFlags& common, const PipelineFlags& pflags, const std::string& scores, const std::string& subset,
                 const std::string& out_path, const std::string& shifts_path, std::ostream& out) {
  RunConfig c = resolve_config(common);
  pflags.apply(c);
  const ScoreMatrix matrix = load_score_matrix(scores);
  const ScoreMatrix pre = preprocess(matrix, c.pipeline.min_model_accuracy, c.pipeline.min_sample_variance);
  const AccuracyVector y = accuracy(pre);
  ModelSplit split = stratified_split(y, c.pipeline.split);
  const auto ids = read_id_list(subset);
  if (ids.empty()) throw ValidationError("subset file '" + subset + "' lists no samples");
  if (std::set<std::string>(ids.begin(), ids.end()).size() != ids.size()) throw ValidationError("subset file repeats a sample id");
  const auto cols = column_positions(pre, ids);
  if (c.metrics_all_models) split = all_models_split(split, pre.n_models());
  const EvaluationResult result = evaluate_subset(pre, y, split, cols, c.pipeline.ga.score_map, c.pipeline.k_top);

  Json j = {{"config", to_json(c)},
            {"subset_size", ids.size()},
            {"split", to_json(split, pre)},
            {"result", to_json(result)},
            {"meta", meta_block()}};
  write_json(out_path, j);
  if (!shifts_path.empty()) {
    std::ostringstream csv_out;
    csv_out << "model_id,true_accuracy,predicted_accuracy,true_rank,predicted_rank,rank_shift\n";
    csv_out.precision(17);
    for (std::size_t i = 0; i < result.test_model_ids.size(); ++i) {
      csv_out << csv::quote(result.test_model_ids[i]) << ',' << result.test_true[i] << ',' << result.test_predicted[i] << ','
              << result.metrics.true_ranks[i] << ',' << result.metrics.pred_ranks[i] << ',' << result.metrics.rank_shifts[i]
              << '\n';
    }
    write_text(shifts_path, csv_out.str());
  }
  out << "rmse " << result.metrics.rmse << ", spearman " << result.metrics.spearman << ", kendall " << result.metrics.kendall
      << " over " << result.metrics.n << " models\n";
  return 0;
}

int cmd_baseline(const CommonFlags& common, const std::string& scores, std::size_t k, const std::string& method,
                 const std::string& sample_scores, const std::string& out_path, std::ostream& out) {
  RunConfig c = resolve_config(common);
  BaselineMethod m;
  if (method == "random") {
    m = BaselineMethod::random;
  } else if (method == "score_ranked") {
    m = BaselineMethod::score_ranked;
    if (sample_scores.empty()) throw ValidationError("score_ranked needs --sample-scores");
  } else {
    throw ValidationError("unknown method '" + method + "' (expected random or score_ranked)");
  }
  const ScoreMatrix matrix = load_score_matrix(scores);
  std::vector<double> ext;
  if (m == BaselineMethod::score_ranked) ext = read_sample_scores(sample_scores, matrix);
  const Mask mask = baseline_select(matrix, k, m, ext, c.seed);
  std::vector<std::string> ids;
  for (std::size_t j : mask.indices()) ids.push_back(matrix.sample_ids()[j]);
  write_id_list(out_path, ids);
  out << "selected " << ids.size() << " samples by " << method << "\n";
  return 0;
}

Json square(std::size_t n, const std::function<double(std::size_t, std::size_t)>& f) {
  Json rows = Json::array();
  for (std::size_t a = 0; a < n; ++a) {
    Json row = Json::array();
    for (std::size_t b = 0; b < n; ++b) row.push_back(number(f(a, b)));
    rows.push_back(row);
  }
  return rows;
}

int cmd_redundancy(const CommonFlags& common, const RedundancyFlags& rflags, const std::string& scores,
                   const std::string& embeddings, std::size_t heatmap_flag, CLI::Option* heatmap_opt,
                   const std::string& out_path, std::ostream& out) {
  RunConfig c = resolve_config(common);
  rflags.apply(c.redundancy);
  if (heatmap_opt->count() > 0) c.heatmap_samples = heatmap_flag;
  const ScoreMatrix matrix = load_score_matrix(scores);
  // Constant columns have no ranking correlation; they are reported and left out.
  const ScoreMatrix varied = preprocess(matrix, 0.0, 1e-12);
  const auto emb = maybe_embeddings(embeddings);
  std::optional<EmbeddingSet> aligned;
  if (emb) aligned = emb->align_to(varied.sample_ids());

  const auto ranking = ranking_sample_redundancies(varied, c.redundancy.correlation);
  std::vector<double> text;
  if (aligned) text = text_sample_redundancies(*aligned);
  const std::size_t n = varied.n_samples();

  Json per_sample = Json::array();
  double ranking_total = 0.0;
  double text_total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    Json row = {{"sample_id", varied.sample_ids()[j]}, {"ranking", number(ranking[j])}};
    ranking_total += ranking[j];
    if (aligned) {
      row["text"] = number(text[j]);
      text_total += text[j];
    }
    per_sample.push_back(row);
  }

  // Heatmap rows are a seeded sample of the samples, listed in matrix order.
  const std::size_t h = std::min(c.heatmap_samples, n);
  Rng rng(c.seed);
  Mask picked = h > 0 ? random_mask(n, h, rng) : Mask(n);
  const auto idx = picked.indices();
  Json heat_ids = Json::array();
  for (std::size_t i : idx) heat_ids.push_back(varied.sample_ids()[i]);
  Json heatmap = {{"sample_ids", heat_ids}};
  heatmap["ranking"] = square(idx.size(), [&](std::size_t a, std::size_t b) {
    return ranking_pair_redundancy(varied, idx[a], idx[b], c.redundancy.correlation);
  });
  if (aligned) {
    heatmap["text"] = square(idx.size(), [&](std::size_t a, std::size_t b) { return text_pair_redundancy(*aligned, idx[a], idx[b]); });
  }

  Json overall = {{"ranking", number(ranking_total / static_cast<double>(n))}};
  if (aligned) overall["text"] = number(text_total / static_cast<double>(n));
  Json excluded = Json::array();
  std::set<std::string> kept(varied.sample_ids().begin(), varied.sample_ids().end());
  for (const auto& id : matrix.sample_ids()) {
    if (kept.count(id) == 0) excluded.push_back(id);
  }
  Json j = {{"config", to_json(c)},
            {"overall", overall},
            {"constant_samples_excluded", excluded},
            {"per_sample", per_sample},
            {"heatmap", heatmap},
            {"meta", meta_block()}};
  write_json(out_path, j);
  out << "ranking redundancy " << overall["ranking"].dump();
  if (aligned) out << ", text redundancy " << overall["text"].dump();
  out << " over " << n << " samples\n";
  return 0;
}

int cmd_synth(const CommonFlags& common, const std::string& spec_path, const std::map<std::string, CLI::Option*>& opts,
              std::size_t models, std::size_t samples, std::size_t exact_duplicates, std::size_t dim,
              const std::string& scores_out, const std::string& emb_out, const std::string& truth_out, std::ostream& out) {
  RunConfig c = resolve_config(common);
  SynthSpec spec;
  if (!spec_path.empty()) spec = synth_spec_from_json(load_json(spec_path));
  auto given = [&](const char* name) { return opts.at(name)->count() > 0; };
  if (common.seed_opt->count() > 0 || spec_path.empty()) spec.seed = c.seed;
  if (given("models")) spec.n_models = models;
  if (given("samples")) spec.n_samples = samples;
  if (given("dim")) spec.embedding_dim = dim;
  if (given("duplicates")) {
    for (std::size_t i = 0; i < exact_duplicates; ++i) spec.duplicates.push_back({i % std::max<std::size_t>(spec.n_samples, 1), 1, 0.0});
  }
  const SyntheticBenchmark bench = generate(spec);
  save_score_matrix(bench.matrix, scores_out);
  if (!emb_out.empty()) {
    if (emb_out.size() >= 4 && emb_out.substr(emb_out.size() - 4) == ".csv") {
      save_embeddings_csv(bench.embeddings, emb_out);
    } else {
      save_embeddings_binary(bench.embeddings, emb_out);
    }
  }
  if (!truth_out.empty()) {
    Json dups = Json::array();
    for (const auto& [copy, source] : bench.duplicate_of) {
      dups.push_back({{"copy", bench.matrix.sample_ids()[copy]}, {"source", bench.matrix.sample_ids()[source]}});
    }
    Json skills = Json::object();
    for (std::size_t i = 0; i < bench.skills.size(); ++i) skills[bench.matrix.model_ids()[i]] = bench.skills[i];
    Json difficulties = Json::object();
    for (std::size_t j = 0; j < bench.difficulties.size(); ++j) difficulties[bench.matrix.sample_ids()[j]] = bench.difficulties[j];
    write_json(truth_out, {{"spec", to_json(spec)}, {"duplicates", dups}, {"skills", skills}, {"difficulties", difficulties}});
  }
  out << "wrote " << bench.matrix.n_models() << " models x " << bench.matrix.n_samples() << " samples ("
      << bench.duplicate_of.size() << " planted copies)\n";
  return 0;
}

}  // namespace

void RunConfig::sync_seeds() {
  pipeline.seed = seed;
  if (!split_seed_set) pipeline.split.seed = seed;
}

RunConfig run_config_from_json(const Json& j, RunConfig base) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  static const std::set<std::string> known{"seed",  "threads",     "k",           "preprocess", "split",   "redundancy",
                                           "ga",    "group_ga",    "score_map",   "attribution", "pipeline", "metrics",
                                           "redundancy_report", "effective_group_generations"};
  // effective_group_generations is derived; reports echo it so it is accepted and ignored.
  for (const auto& item : j.items()) {
    if (known.count(item.key()) == 0) throw ValidationError("unknown config key '" + item.key() + "'");
  }
  try {
    if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) base.threads = j.at("threads").get<std::size_t>();
    if (j.contains("k")) base.pipeline.k = j.at("k").get<std::size_t>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("seed, threads and k must be non-negative integers");
  }
  PipelineConfig& p = base.pipeline;
  if (j.contains("preprocess")) {
    const Json& pre = j.at("preprocess");
    if (!pre.is_object()) throw ValidationError("preprocess must be a JSON object");
    for (const auto& item : pre.items()) {
      if (item.key() == "min_model_accuracy" && item.value().is_number()) {
        p.min_model_accuracy = item.value().get<double>();
      } else if (item.key() == "min_sample_variance" && item.value().is_number()) {
        p.min_sample_variance = item.value().get<double>();
      } else {
        throw ValidationError("bad preprocess key '" + item.key() + "'");
      }
    }
  }
  if (j.contains("split")) {
    p.split = split_options_from_json(j.at("split"), p.split);
    base.split_seed_set = base.split_seed_set || j.at("split").contains("seed");
  }
  if (j.contains("redundancy")) base.redundancy = redundancy_from_json(j.at("redundancy"), base.redundancy);
  if (j.contains("score_map")) p.ga.score_map = score_map_from_json(j.at("score_map"), p.ga.score_map);
  if (j.contains("ga")) p.ga = ga_config_from_json(j.at("ga"), p.ga);
  if (j.contains("group_ga")) {
    if (j.at("group_ga").is_null()) {
      p.group_ga.reset();
    } else {
      p.group_ga = ga_config_from_json(j.at("group_ga"), p.effective_group_ga());
    }
  }
  if (p.group_ga) p.group_ga->score_map = p.ga.score_map;
  if (j.contains("attribution")) p.attribution = attribution_from_json(j.at("attribution"), p.attribution);
  if (j.contains("pipeline")) {
    const Json& pl = j.at("pipeline");
    if (!pl.is_object()) throw ValidationError("pipeline must be a JSON object");
    for (const auto& item : pl.items()) {
      const Json& v = item.value();
      if (item.key() == "rounds_max" && v.is_number_unsigned()) {
        p.rounds_max = v.get<std::size_t>();
      } else if (item.key() == "retention_ratio" && v.is_number()) {
        p.retention_ratio = v.get<double>();
      } else if (item.key() == "sampling_temperature" && v.is_number()) {
        p.sampling_temperature = v.get<double>();
      } else if (item.key() == "sampling_temperature" && v.is_string() && v.get<std::string>() == "inf") {
        p.sampling_temperature = std::numeric_limits<double>::infinity();
      } else {
        throw ValidationError("bad pipeline key '" + item.key() + "'");
      }
    }
  }
  if (j.contains("metrics")) {
    const Json& m = j.at("metrics");
    if (!m.is_object()) throw ValidationError("metrics must be a JSON object");
    for (const auto& item : m.items()) {
      if (item.key() == "k_top" && item.value().is_number_unsigned()) {
        p.k_top = item.value().get<std::size_t>();
      } else if (item.key() == "all_models" && item.value().is_boolean()) {
        base.metrics_all_models = item.value().get<bool>();
      } else {
        throw ValidationError("bad metrics key '" + item.key() + "'");
      }
    }
  }
  if (j.contains("redundancy_report")) {
    const Json& r = j.at("redundancy_report");
    if (!r.is_object() || r.size() != 1 || !r.contains("heatmap_samples") || !r.at("heatmap_samples").is_number_unsigned()) {
      throw ValidationError("redundancy_report must hold only heatmap_samples");
    }
    base.heatmap_samples = r.at("heatmap_samples").get<std::size_t>();
  }
  base.sync_seeds();
  return base;
}

Json to_json(const RunConfig& c) {
  const PipelineConfig& p = c.pipeline;
  Json group = p.group_ga ? to_json(*p.group_ga) : Json(nullptr);
  return {{"seed", c.seed},
          {"k", p.k},
          {"preprocess", {{"min_model_accuracy", p.min_model_accuracy}, {"min_sample_variance", p.min_sample_variance}}},
          {"split", to_json(p.split)},
          {"redundancy", to_json(c.redundancy)},
          {"ga", to_json(p.ga)},
          {"group_ga", group},
          {"effective_group_generations", p.effective_group_ga().generations},
          {"score_map", to_json(p.ga.score_map)},
          {"attribution", to_json(p.attribution)},
          {"pipeline",
           {{"rounds_max", p.rounds_max},
            {"retention_ratio", p.retention_ratio},
            {"sampling_temperature", std::isinf(p.sampling_temperature) ? Json("inf") : Json(p.sampling_temperature)}}},
          {"metrics", {{"k_top", p.k_top}, {"all_models", c.metrics_all_models}}},
          {"redundancy_report", {{"heatmap_samples", c.heatmap_samples}}}};
}

std::vector<std::string> read_id_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!csv::is_blank(line)) ids.push_back(csv::trim(line));
  }
  return ids;
}

void write_id_list(const std::string& path, const std::vector<std::string>& ids) {
  std::string text;
  for (const auto& id : ids) text += id + "\n";
  write_text(path, text);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Benchmark compression: pick a small sample subset that reproduces full-benchmark model accuracies."};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CommonFlags common;
  RedundancyFlags rflags;
  PipelineFlags pflags;
  std::string scores;
  std::string embeddings;
  std::string out_path;
  std::string ids_path;

  auto* filter = app.add_subcommand("filter", "coarse redundancy filter");
  common.add(filter);
  rflags.add(filter);
  pflags.add(filter, false);
  filter->add_option("--scores", scores, "score matrix CSV")->required();
  filter->add_option("--embeddings", embeddings, "sample embeddings (.csv, or float32 with a .json sidecar)");
  filter->add_option("--out", out_path, "report JSON")->required();
  filter->add_option("--ids", ids_path, "kept sample IDs (default: <out>.kept.txt)");

  CommonFlags c_common;
  RedundancyFlags c_rflags;
  PipelineFlags c_pflags;
  auto* comp = app.add_subcommand("compress", "select a k-sample subset");
  c_common.add(comp);
  c_rflags.add(comp);
  c_pflags.add(comp, true);
  comp->add_option("--scores", scores, "score matrix CSV")->required();
  comp->add_option("--embeddings", embeddings, "sample embeddings (.csv, or float32 with a .json sidecar)");
  comp->add_option("--out", out_path, "report JSON")->required();
  comp->add_option("--ids", ids_path, "selected sample IDs (default: <out>.subset.txt)");

  CommonFlags e_common;
  PipelineFlags e_pflags;
  std::string subset;
  std::string shifts;
  auto* eval = app.add_subcommand("evaluate", "score an arbitrary subset");
  e_common.add(eval);
  e_pflags.add(eval, false);
  eval->add_option("--scores", scores, "score matrix CSV")->required();
  eval->add_option("--subset", subset, "newline-delimited sample IDs")->required();
  eval->add_option("--out", out_path, "metrics JSON")->required();
  eval->add_option("--shifts", shifts, "per-model rank shift CSV");

  CommonFlags b_common;
  std::size_t k = 0;
  std::string method = "random";
  std::string sample_scores;
  auto* base = app.add_subcommand("baseline", "random or score-ranked selection");
  b_common.add(base);
  base->add_option("--scores", scores, "score matrix CSV")->required();
  base->add_option("--k", k, "subset size")->required();
  base->add_option("--method", method, "random or score_ranked");
  base->add_option("--sample-scores", sample_scores, "CSV of sample_id,score for score_ranked");
  base->add_option("--out", out_path, "selected sample IDs")->required();

  CommonFlags r_common;
  RedundancyFlags r_rflags;
  std::size_t heatmap = 10;
  auto* red = app.add_subcommand("redundancy", "text and ranking redundancy report");
  r_common.add(red);
  r_rflags.add(red);
  red->add_option("--scores", scores, "score matrix CSV")->required();
  red->add_option("--embeddings", embeddings, "sample embeddings");
  auto* heat_opt = red->add_option("--heatmap-samples", heatmap, "samples in the pairwise heatmap");
  red->add_option("--out", out_path, "report JSON")->required();

  CommonFlags s_common;
  std::string spec_path;
  std::size_t models = 0;
  std::size_t samples = 0;
  std::size_t dups = 0;
  std::size_t dim = 0;
  std::string emb_out;
  std::string truth_out;
  std::map<std::string, CLI::Option*> s_opts;
  auto* synth = app.add_subcommand("synth", "generate a synthetic benchmark");
  s_common.add(synth);
  synth->add_option("--spec", spec_path, "JSON generator spec")->check(CLI::ExistingFile);
  s_opts["models"] = synth->add_option("--models", models, "number of models");
  s_opts["samples"] = synth->add_option("--samples", samples, "number of base samples");
  s_opts["duplicates"] = synth->add_option("--exact-duplicates", dups, "append exact copies of the first samples");
  s_opts["dim"] = synth->add_option("--embedding-dim", dim, "embedding dimension");
  synth->add_option("--out-scores", scores, "score matrix CSV")->required();
  synth->add_option("--out-embeddings", emb_out, "embeddings (.csv or float32 + sidecar)");
  synth->add_option("--out-truth", truth_out, "planted structure JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*filter) return cmd_filter(common, rflags, pflags, scores, embeddings, out_path, ids_path, out);
    if (*comp) return cmd_compress(c_common, c_rflags, c_pflags, scores, embeddings, out_path, ids_path, out);
    if (*eval) return cmd_evaluate(e_common, e_pflags, scores, subset, out_path, shifts, out);
    if (*base) return cmd_baseline(b_common, scores, k, method, sample_scores, out_path, out);
    if (*red) return cmd_redundancy(r_common, r_rflags, scores, embeddings, heatmap, heat_opt, out_path, out);
    if (*synth) return cmd_synth(s_common, spec_path, s_opts, models, samples, dups, dim, scores, emb_out, truth_out, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 1;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"benchpress"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace benchpress
