#pragma once
// The CLI commands. Each reads its inputs from the run directory (or the
// configured cohort path), writes its outputs there, and records them in
// manifest.<command>.json.
//
// Run directory layout:
//   cohort.csv, truth_model.json       synth
//   split.json, split.csv              partition
//   model.json, train_report.json      train
//   scores/<scorer>_<split>.csv        score   (split = id_test | ood_test)
//   metrics.csv, concordance.csv,
//   eval.json, correlation.csv         eval    (correlation only with >= 2 runs)
//   hazard_curves.csv, logit_profile.csv   report
//   experiment.json, experiment_*.csv  experiment

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "survood_cli/run_config.hpp"

namespace survood::cli {

struct CommandResult {
    std::filesystem::path manifest;
    std::vector<std::string> notes;  // human-readable summary lines
};

CommandResult cmd_synth(const RunConfig& config);
CommandResult cmd_partition(const RunConfig& config);
CommandResult cmd_train(const RunConfig& config);
CommandResult cmd_score(const RunConfig& config);
CommandResult cmd_eval(const RunConfig& config);
CommandResult cmd_report(const RunConfig& config);
CommandResult cmd_experiment(const RunConfig& config);

std::string score_file_name(ScorerKind kind, std::string_view split);

// One evaluated run, as needed by the correlation report.
struct RunSummary {
    std::string name;
    std::optional<double> delta_c_index;  // ID minus OOD; empty when a C-index is undefined
    std::map<std::string, double> auroc;  // by scorer name
};

RunSummary load_run_summary(const std::filesystem::path& run_dir);

struct CorrelationRow {
    std::string scorer;
    std::size_t runs = 0;
    std::optional<double> pearson;   // of delta C-index against AUROC; empty when undefined
    std::optional<double> spearman;
};

// One row per scorer evaluated in every run with a defined delta C-index.
std::vector<CorrelationRow> correlate_runs(const std::vector<RunSummary>& runs);
std::string correlation_csv(const std::vector<CorrelationRow>& rows);

// Parses arguments, runs the command, audits the run directory.
// Returns 0 on success, 1 on internal failure, 2 on configuration or input error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace survood::cli
