#include "survood_cli/run_config.hpp"

#include <set>
#include <thread>

#include "survood/errors.hpp"
#include "survood/io.hpp"
#include "survood/json_io.hpp"

namespace survood::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::string& what, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw InputError(what + ": expected an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        if (!keys.count(key)) throw InputError(what + ": unknown key '" + key + "'");
    }
}

template <class T>
T get(const json& j, const char* key, const std::string& what) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw InputError(what + ": bad value for '" + key + "'");
    }
}

json section(const json& doc, const char* key) {
    return doc.contains(key) ? doc.at(key) : json::object();
}

}  // namespace

std::filesystem::path RunConfig::cohort_path() const {
    return cohort ? *cohort : out / "cohort.csv";
}

json RunConfig::resolved() const {
    json scorer_names = json::array();
    for (const auto kind : scorers) scorer_names.push_back(std::string(to_string(kind)));
    json runs = json::array();
    for (const auto& r : eval_runs) runs.push_back(r.generic_string());
    json train = to_json(training);
    train["intervals"] = grid_intervals;
    train["strategy"] = std::string(to_string(grid_strategy));
    train["boundaries"] = grid_boundaries;
    train["open_tail"] = open_tail;
    json doc{{"seed", seed},
             {"synth", to_json(synth)},
             {"partition",
              {{"parameter", partition_parameter},
               {"n_test", n_test},
               {"seed", partition_seed},
               {"allow_shortfall", allow_shortfall}}},
             {"train", train},
             {"score", {{"scorers", scorer_names}, {"params", to_json(scorer_params)}}},
             {"eval", {{"runs", runs}}}};
    // Record the cohort location relative to the run directory when it lives there.
    if (cohort) {
        const auto rel = cohort->lexically_relative(out);
        const bool inside = !rel.empty() && *rel.begin() != "..";
        doc["cohort"] = inside ? rel.generic_string() : cohort->generic_string();
    }
    return doc;
}

json load_config_document(const std::filesystem::path& path) {
    const auto text = io::read_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError("config " + path.string() + ": " + e.what());
    }
}

void apply_override(json& document, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw InputError("override '" + assignment + "' must have the form key.path=value");
    }
    const auto key = assignment.substr(0, eq);
    const auto raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    if (value.is_object()) throw InputError("override '" + key + "' must be a scalar or list");
    json* node = &document;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const auto part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw InputError("override '" + key + "' has an empty path component");
        if (!node->is_object()) throw InputError("override '" + key + "' descends into a non-object");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

RunConfig resolve_config(const json& doc) {
    if (doc.is_null()) return resolve_config(json::object());
    reject_unknown(doc, "config", {"seed", "out", "cohort", "synth", "partition", "train", "score", "eval"});
    RunConfig c;
    if (doc.contains("seed")) c.seed = get<std::uint64_t>(doc, "seed", "config");
    if (doc.contains("out")) c.out = get<std::string>(doc, "out", "config");
    if (doc.contains("cohort")) {
        c.cohort = std::filesystem::path(get<std::string>(doc, "cohort", "config"));
    }

    auto synth = section(doc, "synth");
    if (!synth.is_object()) throw InputError("synth: expected an object");
    if (!synth.contains("seed")) synth["seed"] = c.seed;
    c.synth = synth_config_from_json(synth);

    const auto partition = section(doc, "partition");
    reject_unknown(partition, "partition", {"parameter", "n_test", "seed", "allow_shortfall"});
    c.partition_seed = c.seed;
    if (partition.contains("parameter")) c.partition_parameter = get<std::string>(partition, "parameter", "partition");
    if (partition.contains("n_test")) c.n_test = get<std::size_t>(partition, "n_test", "partition");
    if (partition.contains("seed")) c.partition_seed = get<std::uint64_t>(partition, "seed", "partition");
    if (partition.contains("allow_shortfall")) {
        c.allow_shortfall = get<bool>(partition, "allow_shortfall", "partition");
    }
    if (c.n_test == 0) throw InputError("partition: n_test must be positive");

    auto train = section(doc, "train");
    if (!train.is_object()) throw InputError("train: expected an object");
    if (train.contains("intervals")) c.grid_intervals = get<std::size_t>(train, "intervals", "train");
    if (train.contains("strategy")) c.grid_strategy = parse_grid_strategy(get<std::string>(train, "strategy", "train"));
    if (train.contains("boundaries")) c.grid_boundaries = get<std::vector<double>>(train, "boundaries", "train");
    if (train.contains("open_tail")) c.open_tail = get<bool>(train, "open_tail", "train");
    train.erase("open_tail");
    train.erase("intervals");
    train.erase("strategy");
    train.erase("boundaries");
    if (!train.contains("seed")) train["seed"] = c.seed;
    c.training = training_config_from_json(train);
    if (c.grid_intervals == 0) throw InputError("train: intervals must be positive");
    if (!c.grid_boundaries.empty()) {
        TimeGrid check(c.grid_boundaries);
        c.grid_intervals = check.size();
    }

    const auto score = section(doc, "score");
    reject_unknown(score, "score", {"scorers", "params", "workers"});
    if (score.contains("scorers")) {
        c.scorers.clear();
        for (const auto& name : get<std::vector<std::string>>(score, "scorers", "score")) {
            const auto kind = parse_scorer_kind(name);
            for (const auto seen : c.scorers) {
                if (seen == kind) throw InputError("score: scorer '" + name + "' listed twice");
            }
            c.scorers.push_back(kind);
        }
    }
    auto params = score.contains("params") ? score.at("params") : json::object();
    if (!params.is_object()) throw InputError("score.params: expected an object");
    if (!params.contains("seed")) params["seed"] = c.seed;
    c.scorer_params = scorer_params_from_json(params);
    if (score.contains("workers")) c.workers = get<std::size_t>(score, "workers", "score");
    if (c.workers == 0) c.workers = std::max(1u, std::thread::hardware_concurrency());

    const auto eval = section(doc, "eval");
    reject_unknown(eval, "eval", {"runs"});
    if (eval.contains("runs")) {
        for (const auto& r : get<std::vector<std::string>>(eval, "runs", "eval")) c.eval_runs.emplace_back(r);
    }
    return c;
}

}  // namespace survood::cli
