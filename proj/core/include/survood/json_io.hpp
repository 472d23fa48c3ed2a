#pragma once
// JSON forms of configuration and report records.
//
// The *_from_json readers start from `base` (defaults unless given), override
// the keys present, and reject unknown keys with InputError.

#include <nlohmann/json.hpp>

#include "survood/metrics.hpp"
#include "survood/mtlr.hpp"
#include "survood/ood.hpp"
#include "survood/partition.hpp"
#include "survood/synth.hpp"

namespace survood {

nlohmann::json to_json(const TrainingConfig& config);
TrainingConfig training_config_from_json(const nlohmann::json& j, TrainingConfig base = {});

nlohmann::json to_json(const TrainingReport& report);

nlohmann::json to_json(const ScorerParams& params);
ScorerParams scorer_params_from_json(const nlohmann::json& j, ScorerParams base = {});

nlohmann::json to_json(const ValueRange& range);
ValueRange value_range_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PartitionRule& rule);
PartitionRule partition_rule_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ShiftSpec& shift);
ShiftSpec shift_spec_from_json(const nlohmann::json& j, ShiftSpec base = {});

nlohmann::json to_json(const SynthConfig& config);
SynthConfig synth_config_from_json(const nlohmann::json& j, SynthConfig base = {});

nlohmann::json to_json(const ConcordanceResult& result);

}  // namespace survood
