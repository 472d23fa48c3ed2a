#include "survood/json_io.hpp"

#include <set>

namespace survood {

namespace {

using nlohmann::json;

void require_object(const json& j, const char* what, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw InputError(std::string(what) + ": expected an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        if (!keys.count(key)) throw InputError(std::string(what) + ": unknown key '" + key + "'");
    }
}

template <class T>
void read(const json& j, const char* key, T& out, const char* what) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw InputError(std::string(what) + ": bad value for '" + key + "'");
    }
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, const char* what) {
    try {
        const auto rows = j.get<std::vector<std::vector<double>>>();
        if (rows.empty() || rows.front().empty()) throw InputError(std::string(what) + ": empty matrix");
        Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != rows.front().size()) throw InputError(std::string(what) + ": ragged matrix");
            for (std::size_t c = 0; c < rows[r].size(); ++c) {
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
            }
        }
        return m;
    } catch (const json::exception&) {
        throw InputError(std::string(what) + ": expected a matrix of numbers");
    }
}

}  // namespace

json to_json(const TrainingConfig& c) {
    return {{"c1", c.c1},
            {"c2", c.c2},
            {"learning_rate", c.learning_rate},
            {"max_iters", c.max_iters},
            {"grad_tolerance", c.grad_tolerance},
            {"seed", c.seed},
            {"backtracking", c.backtracking}};
}

TrainingConfig training_config_from_json(const json& j, TrainingConfig c) {
    constexpr const char* what = "training config";
    require_object(j, what, {"c1", "c2", "learning_rate", "max_iters", "grad_tolerance", "seed", "backtracking"});
    read(j, "c1", c.c1, what);
    read(j, "c2", c.c2, what);
    read(j, "learning_rate", c.learning_rate, what);
    read(j, "max_iters", c.max_iters, what);
    read(j, "grad_tolerance", c.grad_tolerance, what);
    read(j, "seed", c.seed, what);
    read(j, "backtracking", c.backtracking, what);
    c.validate();
    return c;
}

json to_json(const TrainingReport& r) {
    return {{"iterations", r.iterations},         {"initial_nll", r.initial_nll},
            {"final_nll", r.final_nll},           {"final_grad_norm", r.final_grad_norm},
            {"backtracks", r.backtracks},         {"converged", r.converged}};
}

json to_json(const ScorerParams& p) {
    return {{"energy_temperature", p.energy_temperature},
            {"gen_gamma", p.gen_gamma},
            {"odin_temperature", p.odin_temperature},
            {"odin_epsilon", p.odin_epsilon},
            {"scale_percentile", p.scale_percentile},
            {"ash_percentile", p.ash_percentile},
            {"dice_keep_percent", p.dice_keep_percent},
            {"dropout_rate", p.dropout_rate},
            {"dropout_trials", p.dropout_trials},
            {"seed", p.seed}};
}

ScorerParams scorer_params_from_json(const json& j, ScorerParams p) {
    constexpr const char* what = "scorer params";
    require_object(j, what,
                   {"energy_temperature", "gen_gamma", "odin_temperature", "odin_epsilon", "scale_percentile",
                    "ash_percentile", "dice_keep_percent", "dropout_rate", "dropout_trials", "seed"});
    read(j, "energy_temperature", p.energy_temperature, what);
    read(j, "gen_gamma", p.gen_gamma, what);
    read(j, "odin_temperature", p.odin_temperature, what);
    read(j, "odin_epsilon", p.odin_epsilon, what);
    read(j, "scale_percentile", p.scale_percentile, what);
    read(j, "ash_percentile", p.ash_percentile, what);
    read(j, "dice_keep_percent", p.dice_keep_percent, what);
    read(j, "dropout_rate", p.dropout_rate, what);
    read(j, "dropout_trials", p.dropout_trials, what);
    read(j, "seed", p.seed, what);
    p.validate();
    return p;
}

json to_json(const ValueRange& r) {
    if (r.is_set()) return {{"values", r.values}};
    return {{"lo", r.lo}, {"hi", r.hi}};
}

ValueRange value_range_from_json(const json& j) {
    require_object(j, "value range", {"lo", "hi", "values"});
    try {
        if (j.contains("values")) return ValueRange::value_set(j.at("values").get<std::vector<double>>());
        return ValueRange::interval(j.at("lo").get<double>(), j.at("hi").get<double>());
    } catch (const json::exception&) {
        throw InputError("value range: expected {lo, hi} or {values}");
    }
}

json to_json(const PartitionRule& r) {
    json j{{"parameter", r.parameter},
           {"id_range", to_json(r.id_range)},
           {"ood_range", to_json(r.ood_range)},
           {"n_test", r.n_test},
           {"seed", r.seed},
           {"id_group_size", r.id_group_size},
           {"ood_group_size", r.ood_group_size},
           {"tie_broken", r.tie_broken}};
    if (r.gap_lower) j["gap_lower"] = *r.gap_lower;
    if (r.gap_upper) j["gap_upper"] = *r.gap_upper;
    return j;
}

PartitionRule partition_rule_from_json(const json& j) {
    constexpr const char* what = "partition rule";
    require_object(j, what,
                   {"parameter", "id_range", "ood_range", "n_test", "seed", "id_group_size", "ood_group_size",
                    "tie_broken", "gap_lower", "gap_upper"});
    PartitionRule r;
    read(j, "parameter", r.parameter, what);
    if (!j.contains("id_range") || !j.contains("ood_range")) throw InputError("partition rule: ranges required");
    r.id_range = value_range_from_json(j.at("id_range"));
    r.ood_range = value_range_from_json(j.at("ood_range"));
    read(j, "n_test", r.n_test, what);
    read(j, "seed", r.seed, what);
    read(j, "id_group_size", r.id_group_size, what);
    read(j, "ood_group_size", r.ood_group_size, what);
    read(j, "tie_broken", r.tie_broken, what);
    if (j.contains("gap_lower")) r.gap_lower = j.at("gap_lower").get<double>();
    if (j.contains("gap_upper")) r.gap_upper = j.at("gap_upper").get<double>();
    r.validate();
    return r;
}

json to_json(const ShiftSpec& s) {
    return {{"kind", to_string(s.kind)}, {"magnitude", s.magnitude}, {"affected_dims", s.affected_dims}};
}

ShiftSpec shift_spec_from_json(const json& j, ShiftSpec s) {
    constexpr const char* what = "shift";
    require_object(j, what, {"kind", "magnitude", "affected_dims"});
    if (j.contains("kind")) {
        std::string kind;
        read(j, "kind", kind, what);
        s.kind = parse_shift_kind(kind);
    }
    read(j, "magnitude", s.magnitude, what);
    read(j, "affected_dims", s.affected_dims, what);
    return s;
}

json to_json(const SynthConfig& c) {
    json j{{"n", c.n},
           {"n_ood", c.n_ood},
           {"d", c.d},
           {"m", c.m},
           {"grid", c.grid},
           {"signal", c.signal},
           {"base_bias", c.base_bias},
           {"censor_rate", c.censor_rate},
           {"shift", to_json(c.shift)},
           {"seed", c.seed},
           {"acquisition_parameter", c.acquisition_parameter},
           {"id_acquisition_value", c.id_acquisition_value},
           {"ood_acquisition_value", c.ood_acquisition_value}};
    if (c.true_theta) j["true_theta"] = matrix_to_json(*c.true_theta);
    if (c.true_bias) j["true_bias"] = std::vector<double>(c.true_bias->data(), c.true_bias->data() + c.true_bias->size());
    return j;
}

SynthConfig synth_config_from_json(const json& j, SynthConfig c) {
    constexpr const char* what = "synth config";
    require_object(j, what,
                   {"n", "n_ood", "d", "m", "grid", "signal", "base_bias", "censor_rate", "shift", "seed",
                    "acquisition_parameter", "id_acquisition_value", "ood_acquisition_value", "true_theta",
                    "true_bias"});
    read(j, "n", c.n, what);
    read(j, "n_ood", c.n_ood, what);
    read(j, "d", c.d, what);
    read(j, "m", c.m, what);
    read(j, "grid", c.grid, what);
    read(j, "signal", c.signal, what);
    read(j, "base_bias", c.base_bias, what);
    read(j, "censor_rate", c.censor_rate, what);
    if (j.contains("shift")) c.shift = shift_spec_from_json(j.at("shift"), c.shift);
    read(j, "seed", c.seed, what);
    read(j, "acquisition_parameter", c.acquisition_parameter, what);
    read(j, "id_acquisition_value", c.id_acquisition_value, what);
    read(j, "ood_acquisition_value", c.ood_acquisition_value, what);
    if (j.contains("true_theta")) c.true_theta = matrix_from_json(j.at("true_theta"), "true_theta");
    if (j.contains("true_bias")) {
        std::vector<double> b;
        read(j, "true_bias", b, what);
        c.true_bias = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    }
    c.validate();
    return c;
}

json to_json(const ConcordanceResult& r) {
    return {{"value", r.value},
            {"comparable_pairs", r.comparable_pairs},
            {"concordant_pairs", r.concordant_pairs},
            {"tied_pairs", r.tied_pairs}};
}

}  // namespace survood
