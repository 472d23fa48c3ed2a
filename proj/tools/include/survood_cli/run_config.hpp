#pragma once
// Resolved configuration for one CLI run.
//
// The config document is a JSON object; scalar fields may be overridden on
// the command line. Precedence is flags > file > defaults. A section seed
// that is not given explicitly inherits the global seed.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "survood/cohort.hpp"
#include "survood/mtlr.hpp"
#include "survood/ood.hpp"
#include "survood/synth.hpp"

namespace survood::cli {

struct RunConfig {
    std::uint64_t seed = 0;
    std::filesystem::path out = "run";
    std::optional<std::filesystem::path> cohort;  // defaults to <out>/cohort.csv

    SynthConfig synth;

    std::string partition_parameter = "slice_thickness";
    std::size_t n_test = 100;
    std::uint64_t partition_seed = 0;
    bool allow_shortfall = false;

    std::size_t grid_intervals = 8;
    GridStrategy grid_strategy = GridStrategy::quantile;
    std::vector<double> grid_boundaries;  // nonempty overrides the derived grid
    // Derive m + 1 intervals and drop the last boundary, so the outcome past
    // the grid is observed as an event and its bias has a finite optimum.
    bool open_tail = true;
    TrainingConfig training;

    std::vector<ScorerKind> scorers{kAllScorerKinds.begin(), kAllScorerKinds.end()};
    ScorerParams scorer_params;
    std::size_t workers = 0;  // 0 = one per hardware thread

    std::vector<std::filesystem::path> eval_runs;  // other run directories for the correlation report

    std::filesystem::path cohort_path() const;

    // Everything that affects outputs, without the output directory itself,
    // so identical runs in different directories produce identical manifests.
    nlohmann::json resolved() const;
};

nlohmann::json load_config_document(const std::filesystem::path& path);

// Applies `key.path=value` to the document. The value is parsed as JSON when
// possible and kept as a string otherwise.
void apply_override(nlohmann::json& document, const std::string& assignment);

RunConfig resolve_config(const nlohmann::json& document);

}  // namespace survood::cli
