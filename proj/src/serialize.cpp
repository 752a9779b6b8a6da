#include "benchpress/serialize.hpp"

#include <cmath>
#include <initializer_list>
#include <limits>
#include <string>

#include "benchpress/errors.hpp"

namespace benchpress {

namespace {

void require_object(const Json& j, const char* what, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ValidationError(std::string(what) + " must be a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || item.key() == k;
    if (!known) throw ValidationError("unknown key '" + item.key() + "' in " + what);
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(std::string("config key '") + key + "' has the wrong type");
  }
}

void read_count(const Json& j, const char* key, std::size_t& out) {
  if (!j.contains(key)) return;
  const Json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ValidationError(std::string("config key '") + key + "' must be a non-negative integer");
  }
  out = v.get<std::size_t>();
}

void read_real(const Json& j, const char* key, double& out) {
  if (!j.contains(key)) return;
  const Json& v = j.at(key);
  if (v.is_number()) {
    out = v.get<double>();
  } else if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity")) {
    out = std::numeric_limits<double>::infinity();
  } else {
    throw ValidationError(std::string("config key '") + key + "' must be a number");
  }
}

}  // namespace

Json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

Json to_json(const ScoreMapOptions& o) {
  return {{"interior_knots", o.interior_knots},
          {"smoothing_penalty", o.smoothing_penalty},
          {"min_pairs_for_spline", o.min_pairs_for_spline}};
}

ScoreMapOptions score_map_from_json(const Json& j, ScoreMapOptions base) {
  require_object(j, "score_map", {"interior_knots", "smoothing_penalty", "min_pairs_for_spline"});
  read_count(j, "interior_knots", base.interior_knots);
  read_real(j, "smoothing_penalty", base.smoothing_penalty);
  read_count(j, "min_pairs_for_spline", base.min_pairs_for_spline);
  return base;
}

Json to_json(const AttributionOptions& o) { return {{"cycles", o.cycles}, {"learning_rate", o.learning_rate}}; }

AttributionOptions attribution_from_json(const Json& j, AttributionOptions base) {
  require_object(j, "attribution", {"cycles", "learning_rate"});
  read_count(j, "cycles", base.cycles);
  read_real(j, "learning_rate", base.learning_rate);
  return base;
}

const char* predictor_name(PredictorMode m) { return m == PredictorMode::spline ? "spline" : "identity"; }

PredictorMode parse_predictor(const std::string& s) {
  if (s == "spline") return PredictorMode::spline;
  if (s == "identity") return PredictorMode::identity;
  throw ValidationError("unknown predictor '" + s + "' (expected spline or identity)");
}

Json to_json(const GaConfig& c) {
  return {{"population_size", c.population_size},
          {"elite_count", c.elite_count},
          {"generations", c.generations},
          {"tournament_size", c.tournament_size},
          {"predictor", predictor_name(c.predictor)}};
}

GaConfig ga_config_from_json(const Json& j, GaConfig base) {
  require_object(j, "ga", {"population_size", "elite_count", "generations", "tournament_size", "predictor"});
  read_count(j, "population_size", base.population_size);
  read_count(j, "elite_count", base.elite_count);
  read_count(j, "generations", base.generations);
  read_count(j, "tournament_size", base.tournament_size);
  std::string predictor = predictor_name(base.predictor);
  read(j, "predictor", predictor);
  base.predictor = parse_predictor(predictor);
  return base;
}

const char* correlation_name(Correlation c) {
  switch (c) {
    case Correlation::pearson: return "pearson";
    case Correlation::spearman: return "spearman";
    case Correlation::r_squared: return "r_squared";
  }
  return "pearson";
}

Correlation parse_correlation(const std::string& s) {
  if (s == "pearson") return Correlation::pearson;
  if (s == "spearman") return Correlation::spearman;
  if (s == "r_squared" || s == "r2") return Correlation::r_squared;
  throw ValidationError("unknown correlation '" + s + "' (expected pearson, spearman or r_squared)");
}

const char* filter_mode_name(FilterMode m) { return m == FilterMode::kept_only ? "kept_only" : "all_earlier"; }

FilterMode parse_filter_mode(const std::string& s) {
  if (s == "kept_only") return FilterMode::kept_only;
  if (s == "all_earlier") return FilterMode::all_earlier;
  throw ValidationError("unknown filter mode '" + s + "' (expected kept_only or all_earlier)");
}

Json to_json(const RedundancyConfig& c) {
  return {{"tau_text", c.tau_text},
          {"tau_ranking", c.tau_ranking},
          {"correlation", correlation_name(c.correlation)},
          {"mode", filter_mode_name(c.mode)}};
}

RedundancyConfig redundancy_from_json(const Json& j, RedundancyConfig base) {
  require_object(j, "redundancy", {"preset", "tau_text", "tau_ranking", "correlation", "mode"});
  if (j.contains("preset")) {
    std::string preset;
    read(j, "preset", preset);
    if (preset == "lenient") {
      base.tau_text = RedundancyConfig::lenient().tau_text;
      base.tau_ranking = RedundancyConfig::lenient().tau_ranking;
    } else if (preset != "default") {
      throw ValidationError("unknown redundancy preset '" + preset + "' (expected default or lenient)");
    }
  }
  read_real(j, "tau_text", base.tau_text);
  read_real(j, "tau_ranking", base.tau_ranking);
  std::string corr = correlation_name(base.correlation);
  read(j, "correlation", corr);
  base.correlation = parse_correlation(corr);
  std::string mode = filter_mode_name(base.mode);
  read(j, "mode", mode);
  base.mode = parse_filter_mode(mode);
  return base;
}

Json to_json(const SplitOptions& o) {
  return {{"test_fraction", o.test_fraction},
          {"n_strata", o.n_strata},
          {"val_fraction_of_train", o.val_fraction_of_train},
          {"seed", o.seed}};
}

SplitOptions split_options_from_json(const Json& j, SplitOptions base) {
  require_object(j, "split", {"test_fraction", "n_strata", "val_fraction_of_train", "seed"});
  read_real(j, "test_fraction", base.test_fraction);
  read_count(j, "n_strata", base.n_strata);
  read_real(j, "val_fraction_of_train", base.val_fraction_of_train);
  read(j, "seed", base.seed);
  return base;
}

Json to_json(const SynthSpec& s) {
  Json dups = Json::array();
  for (const auto& g : s.duplicates) {
    dups.push_back({{"source", g.source}, {"copies", g.copies}, {"flip_probability", g.flip_probability}});
  }
  return {{"n_models", s.n_models},
          {"n_samples", s.n_samples},
          {"skill_mean", s.skill_mean},
          {"skill_spread", s.skill_spread},
          {"difficulty_mean", s.difficulty_mean},
          {"difficulty_spread", s.difficulty_spread},
          {"discrimination_mean", s.discrimination_mean},
          {"discrimination_spread", s.discrimination_spread},
          {"duplicates", dups},
          {"embedding_dim", s.embedding_dim},
          {"seed", s.seed}};
}

SynthSpec synth_spec_from_json(const Json& j, SynthSpec base) {
  require_object(j, "synth spec",
                 {"n_models", "n_samples", "skill_mean", "skill_spread", "difficulty_mean", "difficulty_spread",
                  "discrimination_mean", "discrimination_spread", "duplicates", "embedding_dim", "seed"});
  read_count(j, "n_models", base.n_models);
  read_count(j, "n_samples", base.n_samples);
  read_real(j, "skill_mean", base.skill_mean);
  read_real(j, "skill_spread", base.skill_spread);
  read_real(j, "difficulty_mean", base.difficulty_mean);
  read_real(j, "difficulty_spread", base.difficulty_spread);
  read_real(j, "discrimination_mean", base.discrimination_mean);
  read_real(j, "discrimination_spread", base.discrimination_spread);
  read_count(j, "embedding_dim", base.embedding_dim);
  read(j, "seed", base.seed);
  if (j.contains("duplicates")) {
    if (!j.at("duplicates").is_array()) throw ValidationError("duplicates must be an array");
    base.duplicates.clear();
    for (const auto& d : j.at("duplicates")) {
      require_object(d, "duplicate group", {"source", "copies", "flip_probability"});
      DuplicateGroup g;
      read_count(d, "source", g.source);
      read_count(d, "copies", g.copies);
      read_real(d, "flip_probability", g.flip_probability);
      base.duplicates.push_back(g);
    }
  }
  return base;
}

Json to_json(const ModelSplit& split, const ScoreMatrix& matrix) {
  auto ids = [&](const std::vector<std::size_t>& rows) {
    Json a = Json::array();
    for (std::size_t r : rows) a.push_back(matrix.model_ids().at(r));
    return a;
  };
  return {{"seed", split.seed}, {"fit", ids(split.fit_indices)}, {"val", ids(split.val_indices)}, {"test", ids(split.test_indices)}};
}

Json to_json(const FilterResult& r) {
  Json discarded = Json::array();
  for (const auto& d : r.discarded) {
    discarded.push_back({{"sample_id", d.sample_id},
                         {"index", d.index},
                         {"reason", d.reason == DiscardReason::text ? "text" : "ranking"},
                         {"trigger_id", d.trigger_id},
                         {"trigger_index", d.trigger_index},
                         {"value", number(d.value)}});
  }
  return {{"kept_count", r.kept_indices.size()},
          {"discarded_count", r.discarded.size()},
          {"kept_sample_ids", r.kept_sample_ids},
          {"discarded", discarded}};
}

Json to_json(const MetricSuite& m) {
  Json within = Json::object();
  for (const auto& [p, v] : m.ranking_error_within) within[std::to_string(p)] = number(v);
  Json hist = Json::array();
  for (const auto& [shift, count] : m.shift_histogram) hist.push_back({number(shift), count});
  return {{"n", m.n},
          {"rmse", number(m.rmse)},
          {"pearson", number(m.pearson)},
          {"spearman", number(m.spearman)},
          {"kendall", number(m.kendall)},
          {"rank_stability", number(m.rank_stability)},
          {"pair_accuracy", number(m.pair_accuracy)},
          {"k_top", m.k_top},
          {"ndcg_at_k", number(m.ndcg_at_k)},
          {"topk_accuracy", number(m.topk_accuracy)},
          {"ranking_error_within", within},
          {"rank_shift_histogram", hist}};
}

Json to_json(const EvaluationResult& e) {
  Json models = Json::array();
  for (std::size_t i = 0; i < e.test_model_ids.size(); ++i) {
    models.push_back({{"model_id", e.test_model_ids[i]},
                      {"true_accuracy", number(e.test_true[i])},
                      {"predicted_accuracy", number(e.test_predicted[i])},
                      {"true_rank", number(e.metrics.true_ranks.at(i))},
                      {"predicted_rank", number(e.metrics.pred_ranks.at(i))},
                      {"rank_shift", number(e.metrics.rank_shifts.at(i))}});
  }
  return {{"metrics", to_json(e.metrics)}, {"models", models}};
}

Json to_json(const RoundTrace& t) {
  Json groups = Json::array();
  for (double e : t.group_errors) groups.push_back(number(e));
  return {{"round", t.round},
          {"pool_size", t.pool_size},
          {"main_error", number(t.main_error)},
          {"group_errors", groups},
          {"chosen_group", t.chosen ? Json(phase_name(*t.chosen)) : Json(nullptr)},
          {"best_error", number(t.best_error)},
          {"evaluations", t.evaluations}};
}

Json to_json(const CompressionReport& r, const ScoreMatrix& preprocessed) {
  Json rounds = Json::array();
  for (const auto& t : r.rounds) rounds.push_back(to_json(t));
  return {{"seed", r.seed},
          {"k", r.selected_sample_ids.size()},
          {"selected_sample_ids", r.selected_sample_ids},
          {"selected_columns", r.selected_columns},
          {"final_error", number(r.final_error)},
          {"best_phase", phase_name(r.best_phase)},
          {"best_round", r.best_round},
          {"rounds", rounds},
          {"evaluations", r.evaluations},
          {"samples", {{"input", r.input_samples}, {"preprocessed", r.preprocessed_samples}, {"filtered", r.filtered_samples}}},
          {"models", r.models},
          {"split", to_json(r.split, preprocessed)},
          {"evaluation", to_json(r.evaluation)}};
}

}  // namespace benchpress
