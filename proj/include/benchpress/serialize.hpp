#pragma once

#include <json.hpp>

#include "benchpress/ga.hpp"
#include "benchpress/metrics.hpp"
#include "benchpress/pipeline.hpp"
#include "benchpress/predictor.hpp"
#include "benchpress/redundancy.hpp"
#include "benchpress/score_matrix.hpp"
#include "benchpress/synth.hpp"

namespace benchpress {

using Json = nlohmann::ordered_json;

// Readers start from `base` and override only the keys present. Unknown keys and wrong types
// raise ValidationError.

Json to_json(const ScoreMapOptions& o);
ScoreMapOptions score_map_from_json(const Json& j, ScoreMapOptions base = {});

Json to_json(const AttributionOptions& o);
AttributionOptions attribution_from_json(const Json& j, AttributionOptions base = {});

/// The seed and init_bias are not part of the JSON form.
Json to_json(const GaConfig& c);
GaConfig ga_config_from_json(const Json& j, GaConfig base = {});

Json to_json(const RedundancyConfig& c);
RedundancyConfig redundancy_from_json(const Json& j, RedundancyConfig base = {});

Json to_json(const SplitOptions& o);
SplitOptions split_options_from_json(const Json& j, SplitOptions base = {});

Json to_json(const SynthSpec& s);
SynthSpec synth_spec_from_json(const Json& j, SynthSpec base = {});

const char* correlation_name(Correlation c);
Correlation parse_correlation(const std::string& s);
const char* filter_mode_name(FilterMode m);
FilterMode parse_filter_mode(const std::string& s);
const char* predictor_name(PredictorMode m);
PredictorMode parse_predictor(const std::string& s);

/// Split as model-ID lists.
Json to_json(const ModelSplit& split, const ScoreMatrix& matrix);
Json to_json(const FilterResult& r);
Json to_json(const MetricSuite& m);
Json to_json(const EvaluationResult& e);
Json to_json(const RoundTrace& t);
/// Everything except the timings, which callers place under `meta`.
Json to_json(const CompressionReport& r, const ScoreMatrix& preprocessed);

/// Non-finite numbers become null so the output stays valid JSON.
Json number(double x);

}  // namespace benchpress
