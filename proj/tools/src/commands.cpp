#include "survood_cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "survood/analysis.hpp"
#include "survood/errors.hpp"
#include "survood/io.hpp"
#include "survood/json_io.hpp"
#include "survood/metrics.hpp"
#include "survood/partition.hpp"
#include "survood_cli/manifest.hpp"

namespace survood::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 2> kTestSplits{"id_test", "ood_test"};

json optional_number(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

std::string optional_cell(const std::optional<double>& v) {
    return v ? io::format_double(*v) : "NA";
}

Cohort read_cohort(const RunConfig& config, ManifestBuilder& manifest) {
    const auto path = config.cohort_path();
    auto cohort = load_cohort(path);
    manifest.add_input(path);
    return cohort;
}

BenchmarkSplit read_split(const RunConfig& config, ManifestBuilder& manifest) {
    const auto path = config.out / "split.json";
    auto split = parse_split(io::read_file(path));
    manifest.add_input(path);
    return split;
}

SurvivalModel read_model(const RunConfig& config, ManifestBuilder& manifest) {
    const auto path = config.out / "model.json";
    auto model = load_model(path);
    manifest.add_input(path);
    return model;
}

const std::vector<std::string>& split_ids(const BenchmarkSplit& split, std::string_view name) {
    if (name == "train") return split.train_ids;
    if (name == "id_test") return split.id_test_ids;
    if (name == "ood_test") return split.ood_test_ids;
    throw Error("unknown split name '" + std::string(name) + "'");
}

std::optional<ConcordanceResult> try_concordance(const std::vector<RiskScore>& risks, const Cohort& cohort) {
    try {
        return concordance(risks, cohort);
    } catch (const UndefinedMetricError&) {
        return std::nullopt;
    }
}

json concordance_json(const std::optional<ConcordanceResult>& c) {
    return c ? to_json(*c) : json(nullptr);
}

std::vector<SampleScore> read_score_file(const fs::path& path, ScorerKind kind, std::string_view split,
                                         const std::vector<std::string>& expected_ids) {
    const auto text = io::read_file(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || io::split_csv_line(line) != std::vector<std::string>{"id", "score", "scorer", "split"}) {
        throw InputError(path.string() + ": expected header id,score,scorer,split");
    }
    std::vector<SampleScore> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = io::split_csv_line(line);
        const auto where = path.string() + ":" + std::to_string(line_no);
        if (cells.size() != 4) throw InputError(where + ": expected 4 cells");
        if (cells[2] != to_string(kind) || cells[3] != split) throw InputError(where + ": scorer or split mismatch");
        rows.push_back({cells[0], io::parse_double(cells[1], where)});
    }
    std::set<std::string> got;
    for (const auto& r : rows) got.insert(r.id);
    const std::set<std::string> want(expected_ids.begin(), expected_ids.end());
    if (got != want || rows.size() != expected_ids.size()) {
        throw InputError(path.string() + ": ids do not match the " + std::string(split) + " split");
    }
    return rows;
}

std::vector<double> score_values(const std::vector<SampleScore>& rows) {
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(r.score);
    return v;
}

std::string profiles_note(const std::vector<SplitProfile>& profiles) {
    std::ostringstream ss;
    ss << "mean |logit|:";
    for (const auto& p : profiles) ss << ' ' << p.split << '=' << io::format_double(p.mean_abs_logit);
    return ss.str();
}

TimeGrid training_grid(const RunConfig& config, const Cohort& train) {
    if (!config.grid_boundaries.empty()) return TimeGrid(config.grid_boundaries);
    if (!config.open_tail) return make_time_grid(train, config.grid_intervals, config.grid_strategy);
    auto boundaries = make_time_grid(train, config.grid_intervals + 1, config.grid_strategy).boundaries();
    boundaries.pop_back();
    return TimeGrid(std::move(boundaries));
}

}  // namespace

std::string score_file_name(ScorerKind kind, std::string_view split) {
    return std::string(to_string(kind)) + "_" + std::string(split) + ".csv";
}

CommandResult cmd_synth(const RunConfig& config) {
    ManifestBuilder manifest("synth", config.out, config.resolved());
    const auto data = generate(config.synth);
    const auto cohort = combined_cohort(data);
    manifest.write_output("cohort.csv", write_cohort(cohort));
    manifest.write_output("truth_model.json", serialize_model(data.truth));
    CommandResult result{manifest.finish(), {}};
    result.notes.push_back("synthesized " + std::to_string(data.id.size()) + " ID and " +
                           std::to_string(data.ood.size()) + " OOD samples (shift " +
                           std::string(to_string(config.synth.shift.kind)) + ")");
    return result;
}

CommandResult cmd_partition(const RunConfig& config) {
    ManifestBuilder manifest("partition", config.out, config.resolved());
    const auto cohort = read_cohort(config, manifest);
    const auto rule = derive_rule(cohort, config.partition_parameter, config.n_test, config.partition_seed);
    const auto split = build_split(cohort, rule, config.allow_shortfall);
    manifest.write_output("split.json", serialize_split(split));
    manifest.write_output("split.csv", split_csv(split));
    CommandResult result{manifest.finish(), {}};
    result.notes.push_back("train " + std::to_string(split.train_ids.size()) + ", ID test " +
                           std::to_string(split.id_test_ids.size()) + ", OOD test " +
                           std::to_string(split.ood_test_ids.size()) + ", excluded " +
                           std::to_string(split.excluded.size()));
    if (split.id_shortfall || split.ood_shortfall) {
        result.notes.push_back("test shortfall: ID " + std::to_string(split.id_shortfall) + ", OOD " +
                               std::to_string(split.ood_shortfall));
    }
    return result;
}

CommandResult cmd_train(const RunConfig& config) {
    ManifestBuilder manifest("train", config.out, config.resolved());
    const auto cohort = read_cohort(config, manifest);
    const auto split = read_split(config, manifest);
    if (split.train_ids.empty()) throw InputError("train set is empty after exclusions");
    const auto train = cohort.subset(split.train_ids);
    const TimeGrid grid = training_grid(config, train);
    const auto fitted = fit(train, grid, config.training);
    manifest.write_output("model.json", serialize_model(fitted.model));
    json report = to_json(fitted.report);
    report["train_size"] = train.size();
    report["grid"] = grid.boundaries();
    manifest.write_output("train_report.json", report.dump(2) + "\n");
    CommandResult result{manifest.finish(), {}};
    std::ostringstream ss;
    ss << "fitted on " << train.size() << " samples, " << grid.size() << " intervals: " << fitted.report.iterations
       << " iterations, nll " << io::format_double(fitted.report.final_nll) << ", grad norm "
       << io::format_double(fitted.report.final_grad_norm);
    result.notes.push_back(ss.str());
    if (!fitted.report.converged) {
        result.notes.push_back("warning: not converged within " + std::to_string(config.training.max_iters) +
                               " iterations");
    }
    return result;
}

CommandResult cmd_score(const RunConfig& config) {
    if (config.scorers.empty()) throw InputError("score: no scorers configured");
    ManifestBuilder manifest("score", config.out, config.resolved());
    const auto cohort = read_cohort(config, manifest);
    const auto split = read_split(config, manifest);
    const auto model = read_model(config, manifest);
    if (split.train_ids.empty()) throw InputError("train set is empty after exclusions");
    const auto train = cohort.subset(split.train_ids);
    const std::array<Cohort, 2> tests{cohort.subset(split.id_test_ids), cohort.subset(split.ood_test_ids)};

    // Scorers run on a worker pool; files are written afterwards in config order.
    const auto n = config.scorers.size();
    std::vector<std::array<std::vector<SampleScore>, 2>> results(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                const auto scorer = fit_scorer(config.scorers[i], config.scorer_params, model, train);
                for (std::size_t s = 0; s < tests.size(); ++s) results[i][s] = score_cohort(scorer, model, tests[s]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const auto workers = std::min(config.workers, n);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    for (std::size_t i = 0; i < n; ++i) {
        const auto name = std::string(to_string(config.scorers[i]));
        for (std::size_t s = 0; s < tests.size(); ++s) {
            std::string csv = "id,score,scorer,split\n";
            for (const auto& row : results[i][s]) {
                csv += row.id + "," + io::format_double(row.score) + "," + name + "," + std::string(kTestSplits[s]) + "\n";
            }
            manifest.write_output(fs::path("scores") / score_file_name(config.scorers[i], kTestSplits[s]), csv);
        }
    }
    CommandResult result{manifest.finish(), {}};
    result.notes.push_back("wrote " + std::to_string(manifest.outputs().size()) + " score files");
    return result;
}

CommandResult cmd_eval(const RunConfig& config) {
    if (config.scorers.empty()) throw InputError("eval: no scorers configured");
    ManifestBuilder manifest("eval", config.out, config.resolved());
    const auto cohort = read_cohort(config, manifest);
    const auto split = read_split(config, manifest);
    const auto model = read_model(config, manifest);

    json summary{{"c_index", json::object()}, {"scorers", json::object()}};
    std::string concordance_table = "split,c_index,comparable_pairs,concordant_pairs,tied_pairs\n";
    std::array<std::optional<ConcordanceResult>, 2> c_index;
    for (std::size_t s = 0; s < kTestSplits.size(); ++s) {
        const auto part = cohort.subset(split_ids(split, kTestSplits[s]));
        c_index[s] = try_concordance(risk_scores(model, part), part);
        summary["c_index"][std::string(kTestSplits[s])] = concordance_json(c_index[s]);
        concordance_table += std::string(kTestSplits[s]) + ",";
        if (c_index[s]) {
            concordance_table += io::format_double(c_index[s]->value) + "," + std::to_string(c_index[s]->comparable_pairs) +
                                 "," + std::to_string(c_index[s]->concordant_pairs) + "," +
                                 std::to_string(c_index[s]->tied_pairs) + "\n";
        } else {
            concordance_table += "NA,0,0,0\n";
        }
    }
    std::optional<double> delta;
    if (c_index[0] && c_index[1]) delta = c_index[0]->value - c_index[1]->value;
    summary["delta_c_index"] = optional_number(delta);

    RunSummary current{".", delta, {}};
    std::string metrics_table = "scorer,auroc,auprc,fpr95,auroc_inverted\n";
    for (const auto kind : config.scorers) {
        DetectionOutcome outcome;
        std::array<std::vector<double>*, 2> targets{&outcome.id_scores, &outcome.ood_scores};
        for (std::size_t s = 0; s < kTestSplits.size(); ++s) {
            const auto path = config.out / "scores" / score_file_name(kind, kTestSplits[s]);
            *targets[s] = score_values(read_score_file(path, kind, kTestSplits[s], split_ids(split, kTestSplits[s])));
            manifest.add_input(path);
        }
        const double a = auroc(outcome);
        const double p = auprc(outcome);
        const double f = fpr_at_tpr(outcome, 0.95);
        const auto name = std::string(to_string(kind));
        metrics_table += name + "," + io::format_double(a) + "," + io::format_double(p) + "," + io::format_double(f) + "," +
                         io::format_double(1.0 - a) + "\n";
        summary["scorers"][name] = {{"auroc", a}, {"auprc", p}, {"fpr95", f}, {"auroc_inverted", 1.0 - a}};
        current.auroc[name] = a;
    }
    manifest.write_output("metrics.csv", metrics_table);
    manifest.write_output("concordance.csv", concordance_table);
    manifest.write_output("eval.json", summary.dump(2) + "\n");

    CommandResult result{{}, {}};
    if (!config.eval_runs.empty()) {
        std::vector<RunSummary> runs{current};
        for (const auto& dir : config.eval_runs) {
            runs.push_back(load_run_summary(dir));
            manifest.add_input(dir / "eval.json");
        }
        const auto rows = correlate_runs(runs);
        manifest.write_output("correlation.csv", correlation_csv(rows));
        result.notes.push_back("correlation over " + std::to_string(runs.size()) + " runs");
    }
    result.manifest = manifest.finish();
    std::ostringstream ss;
    ss << "C-index ID " << (c_index[0] ? io::format_double(c_index[0]->value) : "NA") << ", OOD "
       << (c_index[1] ? io::format_double(c_index[1]->value) : "NA") << ", delta " << optional_cell(delta);
    result.notes.insert(result.notes.begin(), ss.str());
    return result;
}

CommandResult cmd_report(const RunConfig& config) {
    ManifestBuilder manifest("report", config.out, config.resolved());
    const auto cohort = read_cohort(config, manifest);
    const auto split = read_split(config, manifest);
    const auto model = read_model(config, manifest);
    std::vector<SplitProfile> profiles;
    for (const std::string_view name : {"train", "id_test", "ood_test"}) {
        const auto& ids = split_ids(split, name);
        if (ids.empty()) continue;
        profiles.push_back(profile_split(model, cohort.subset(ids), std::string(name)));
    }
    manifest.write_output("hazard_curves.csv", hazard_curves_csv(model.grid(), profiles));
    manifest.write_output("logit_profile.csv", logit_profile_csv(profiles));
    CommandResult result{manifest.finish(), {}};
    result.notes.push_back(profiles_note(profiles));
    return result;
}

CommandResult cmd_experiment(const RunConfig& config) {
    ManifestBuilder manifest("experiment", config.out, config.resolved());
    ExperimentConfig experiment{config.synth, config.training, config.n_test};
    const auto report = degradation_experiment(experiment);
    json doc{{"c_index", {{"id_test", to_json(report.id_concordance)}, {"ood_test", to_json(report.ood_concordance)}}},
             {"delta_c_index", report.delta_c_index},
             {"training", to_json(report.training)},
             {"theta_relative_error", report.theta_relative_error},
             {"train_size", report.train_size},
             {"grid", report.grid},
             {"split_rule", to_json(report.split.rule)}};
    json logits = json::object();
    for (const auto& p : report.profiles) logits[p.split] = p.mean_abs_logit;
    doc["mean_abs_logit"] = logits;
    manifest.write_output("experiment.json", doc.dump(2) + "\n");
    manifest.write_output("experiment_hazard_curves.csv", hazard_curves_csv(TimeGrid(report.grid), report.profiles));
    manifest.write_output("experiment_logit_profile.csv", logit_profile_csv(report.profiles));
    CommandResult result{manifest.finish(), {}};
    result.notes.push_back("C-index ID " + io::format_double(report.id_concordance.value) + ", OOD " +
                           io::format_double(report.ood_concordance.value) + ", delta " +
                           io::format_double(report.delta_c_index));
    result.notes.push_back(profiles_note(report.profiles));
    return result;
}

RunSummary load_run_summary(const fs::path& run_dir) {
    const auto path = run_dir / "eval.json";
    RunSummary summary{run_dir.generic_string(), std::nullopt, {}};
    try {
        const auto doc = json::parse(io::read_file(path));
        const auto& delta = doc.at("delta_c_index");
        if (!delta.is_null()) summary.delta_c_index = delta.get<double>();
        for (const auto& [name, metrics] : doc.at("scorers").items()) {
            summary.auroc[name] = metrics.at("auroc").get<double>();
        }
    } catch (const json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    return summary;
}

std::vector<CorrelationRow> correlate_runs(const std::vector<RunSummary>& runs) {
    std::vector<const RunSummary*> usable;
    for (const auto& r : runs) {
        if (r.delta_c_index) usable.push_back(&r);
    }
    std::vector<CorrelationRow> rows;
    if (usable.empty()) return rows;
    for (const auto& [scorer, unused] : usable.front()->auroc) {
        const bool everywhere = std::all_of(usable.begin(), usable.end(),
                                            [&](const RunSummary* r) { return r->auroc.count(scorer) > 0; });
        if (!everywhere) continue;
        std::vector<double> delta;
        std::vector<double> area;
        for (const auto* r : usable) {
            delta.push_back(*r->delta_c_index);
            area.push_back(r->auroc.at(scorer));
        }
        CorrelationRow row{scorer, usable.size(), std::nullopt, std::nullopt};
        if (usable.size() >= 2) {
            try {
                row.pearson = pearson(delta, area);
                row.spearman = spearman(delta, area);
            } catch (const UndefinedMetricError&) {
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string correlation_csv(const std::vector<CorrelationRow>& rows) {
    std::string out = "scorer,runs,pearson,spearman\n";
    for (const auto& r : rows) {
        out += r.scorer + "," + std::to_string(r.runs) + "," + optional_cell(r.pearson) + "," + optional_cell(r.spearman) + "\n";
    }
    return out;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Covariate-shift benchmark for discrete-time survival models"};
    app.name("survood");
    app.require_subcommand(1, 1);
    app.fallthrough();
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "JSON config document");
    auto* seed_opt = app.add_option("--seed", seed, "Global seed");
    auto* out_opt = app.add_option("--out", out_dir, "Run directory");
    app.add_option("--set", overrides, "Override a config field, key.path=value")
        ->expected(1)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

    using Command = CommandResult (*)(const RunConfig&);
    const std::vector<std::tuple<std::string, std::string, Command>> commands{
        {"synth", "Generate a synthetic cohort with acquisition metadata", cmd_synth},
        {"partition", "Split a cohort into train, ID test and OOD test sets", cmd_partition},
        {"train", "Fit the survival model on the train split", cmd_train},
        {"score", "Score ID and OOD test samples with every configured scorer", cmd_score},
        {"eval", "Detection metrics, C-index per split and the correlation report", cmd_eval},
        {"report", "Hazard curves and logit profiles per split", cmd_report},
        {"experiment", "Synthetic degradation experiment in one step", cmd_experiment},
    };
    for (const auto& [name, help, fn] : commands) app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    const auto name = app.get_subcommands().front()->get_name();
    try {
        json doc = config_path.empty() ? json::object() : load_config_document(config_path);
        if (!doc.is_object()) throw InputError("config: expected a JSON object");
        for (const auto& o : overrides) apply_override(doc, o);
        if (seed_opt->count()) doc["seed"] = seed;
        if (out_opt->count()) doc["out"] = out_dir;
        const auto config = resolve_config(doc);
        fs::create_directories(config.out);

        CommandResult result;
        for (const auto& [cmd, help, fn] : commands) {
            if (cmd == name) result = fn(config);
        }
        for (const auto& note : result.notes) out << note << '\n';
        out << "manifest: " << result.manifest.generic_string() << '\n';

        const auto findings = audit_run(config.out);
        if (!findings.empty()) {
            for (const auto& f : findings) err << "audit: " << f.path << ": " << f.problem << '\n';
            return 1;
        }
        return 0;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace survood::cli
