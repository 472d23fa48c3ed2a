#include "survood/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "survood/random.hpp"

namespace survood {

namespace {

constexpr std::array<std::string_view, 5> kShiftNames{"none", "scale", "translate", "noise", "risk_coupled"};

// Stream tags.
constexpr std::uint64_t kTruthTag = 1;
constexpr std::uint64_t kIdTag = 2;
constexpr std::uint64_t kOodTag = 3;
constexpr std::uint64_t kShiftTag = 4;

std::string sample_id(std::string_view prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*s-%06zu", static_cast<int>(prefix.size()), prefix.data(), i + 1);
    return buf;
}

std::size_t draw_outcome(const SurvivalModel& truth, FeatureView x, double u) {
    const auto p = predict(truth, x);
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < p.outcome_probs.size(); ++k) {
        acc += p.outcome_probs[k];
        if (u < acc) return k;
    }
    return p.outcome_probs.size() - 1;
}

// Uniform event time inside outcome k's interval (t_k, t_{k+1}], t_0 = 0; the
// beyond-horizon outcome m gets (t_m, t_m + last width].
double event_time(const TimeGrid& grid, std::size_t k, double u) {
    const std::size_t m = grid.size();
    double lo = 0.0, hi = 0.0;
    if (k < m) {
        lo = k == 0 ? 0.0 : grid[k - 1];
        hi = grid[k];
    } else {
        lo = grid[m - 1];
        hi = lo + (m > 1 ? grid[m - 1] - grid[m - 2] : grid[0]);
    }
    return lo + (1.0 - u) * (hi - lo);
}

struct Draw {
    std::vector<double> x;
    double time = 0.0;
    bool event = true;
};

// Outcome, event time and censoring for features x, consuming three uniforms.
void draw_label(const SurvivalModel& truth, FeatureView x, double censor_rate, Stream& rng, Draw& out) {
    const std::size_t k = draw_outcome(truth, x, rng.uniform());
    out.time = event_time(truth.grid(), k, rng.uniform());
    const double cu = rng.uniform();
    const double ct = rng.uniform();
    out.event = !(cu < censor_rate);
    if (!out.event) out.time *= ct;
}

SurvivalModel make_truth(const SynthConfig& c) {
    const TimeGrid grid = c.time_grid();
    const auto m = static_cast<Eigen::Index>(grid.size());
    const auto d = static_cast<Eigen::Index>(c.d);
    Stream rng(derive_key(c.seed, kTruthTag));
    Eigen::MatrixXd theta(m, d);
    if (c.true_theta) {
        theta = *c.true_theta;
    } else {
        // A shared risk direction with small per-interval perturbations.
        Eigen::VectorXd direction(d);
        for (Eigen::Index j = 0; j < d; ++j) direction[j] = rng.normal();
        direction /= std::sqrt(static_cast<double>(d));
        for (Eigen::Index r = 0; r < m; ++r) {
            for (Eigen::Index j = 0; j < d; ++j) {
                theta(r, j) = c.signal * (direction[j] + 0.2 * rng.normal() / std::sqrt(static_cast<double>(d)));
            }
        }
    }
    Eigen::VectorXd bias = c.true_bias ? *c.true_bias : Eigen::VectorXd::Constant(m, c.base_bias);
    return SurvivalModel(grid, std::move(theta), std::move(bias));
}

std::vector<std::string> feature_names(std::size_t d) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
    return names;
}

}  // namespace

std::string_view to_string(ShiftKind kind) { return kShiftNames[static_cast<std::size_t>(kind)]; }

ShiftKind parse_shift_kind(std::string_view name) {
    for (std::size_t i = 0; i < kShiftNames.size(); ++i) {
        if (kShiftNames[i] == name) return static_cast<ShiftKind>(i);
    }
    throw InputError("unknown shift kind '" + std::string(name) + "'");
}

void ShiftSpec::validate(std::size_t d) const {
    if (!std::isfinite(magnitude)) throw InputError("shift: magnitude must be finite");
    for (std::size_t j : affected_dims) {
        if (j >= d) throw InputError("shift: affected dimension " + std::to_string(j) + " out of range");
    }
}

void SynthConfig::validate() const {
    if (n == 0 || n_ood == 0) throw InputError("synth: cohort sizes must be positive");
    if (d == 0) throw InputError("synth: feature dimension must be positive");
    if (!(censor_rate >= 0.0 && censor_rate < 1.0)) throw InputError("synth: censor_rate must lie in [0, 1)");
    const TimeGrid g = time_grid();
    if (true_theta && (static_cast<std::size_t>(true_theta->rows()) != g.size() ||
                       static_cast<std::size_t>(true_theta->cols()) != d)) {
        throw InputError("synth: true_theta must be m x d");
    }
    if (true_bias && static_cast<std::size_t>(true_bias->size()) != g.size()) {
        throw InputError("synth: true_bias must have length m");
    }
    if (id_acquisition_value == ood_acquisition_value) {
        throw InputError("synth: ID and OOD acquisition values must differ");
    }
    shift.validate(d);
}

TimeGrid SynthConfig::time_grid() const {
    if (!grid.empty()) return TimeGrid(grid);
    if (m == 0) throw InputError("synth: m must be positive");
    std::vector<double> b;
    for (std::size_t i = 1; i <= m; ++i) b.push_back(static_cast<double>(i));
    return TimeGrid(std::move(b));
}

SynthResult generate(const SynthConfig& config) {
    config.validate();
    const SurvivalModel truth = make_truth(config);
    const auto names = feature_names(config.d);
    std::vector<std::size_t> dims = config.shift.affected_dims;
    if (dims.empty()) {
        for (std::size_t j = 0; j < config.d; ++j) dims.push_back(j);
    }

    auto base_sample = [&](std::uint64_t tag, std::size_t i, std::string id, double acq) {
        Stream rng(derive_key(config.seed, tag, i));
        Draw draw;
        draw.x.resize(config.d);
        for (double& v : draw.x) v = rng.normal();
        draw_label(truth, draw.x, config.censor_rate, rng, draw);
        Sample s;
        s.id = std::move(id);
        s.features = std::move(draw.x);
        s.time = draw.time;
        s.event = draw.event;
        s.acquisition.emplace(config.acquisition_parameter, acq);
        return s;
    };

    std::vector<Sample> id_samples, ood_samples, reference;
    id_samples.reserve(config.n);
    for (std::size_t i = 0; i < config.n; ++i) {
        id_samples.push_back(base_sample(kIdTag, i, sample_id("id", i), config.id_acquisition_value));
    }
    for (std::size_t i = 0; i < config.n_ood; ++i) {
        Sample s = base_sample(kOodTag, i, sample_id("ood", i), config.ood_acquisition_value);
        reference.push_back(s);
        Stream rng(derive_key(config.seed, kShiftTag, i));
        const double mag = config.shift.magnitude;
        switch (config.shift.kind) {
            case ShiftKind::none: break;
            case ShiftKind::scale:
                for (std::size_t j : dims) s.features[j] *= mag;
                break;
            case ShiftKind::translate:
                for (std::size_t j : dims) s.features[j] += mag;
                break;
            case ShiftKind::noise:
                for (std::size_t j : dims) s.features[j] += mag * rng.normal();
                break;
            case ShiftKind::risk_coupled: {
                std::vector<double> latent = reference.back().features;
                for (std::size_t j : dims) s.features[j] += mag * rng.normal();
                for (std::size_t j : dims) latent[j] += mag * rng.normal();
                Draw draw;
                draw_label(truth, latent, config.censor_rate, rng, draw);
                s.time = draw.time;
                s.event = draw.event;
                break;
            }
        }
        ood_samples.push_back(std::move(s));
    }
    return {Cohort(std::move(id_samples), names), Cohort(std::move(ood_samples), names),
            Cohort(std::move(reference), names), truth};
}

Cohort combined_cohort(const SynthResult& result) {
    std::vector<Sample> all(result.id.samples());
    all.insert(all.end(), result.ood.samples().begin(), result.ood.samples().end());
    return Cohort(std::move(all), result.id.feature_names());
}

DegradationReport degradation_experiment(const ExperimentConfig& config) {
    const SynthResult data = generate(config.synth);
    const Cohort all = combined_cohort(data);
    const PartitionRule rule =
        derive_rule(all, config.synth.acquisition_parameter, config.n_test, config.synth.seed);

    if (!rule.id_range.contains(config.synth.id_acquisition_value)) {
        throw InputError("degradation_experiment: the ID cohort must be the larger acquisition group");
    }

    DegradationReport report;
    report.grid = data.truth.grid().boundaries();
    report.split = build_split(all, rule);
    const Cohort train = all.subset(report.split.train_ids);
    const Cohort id_test = all.subset(report.split.id_test_ids);
    const Cohort ood_test = all.subset(report.split.ood_test_ids);
    report.train_size = train.size();

    const FitResult fitted = fit(train, data.truth.grid(), config.training);
    report.training = fitted.report;
    report.theta_relative_error =
        (fitted.model.theta() - data.truth.theta()).norm() / std::max(data.truth.theta().norm(), 1e-300);

    report.id_concordance = concordance(risk_scores(fitted.model, id_test), id_test);
    report.ood_concordance = concordance(risk_scores(fitted.model, ood_test), ood_test);
    report.delta_c_index = report.id_concordance.value - report.ood_concordance.value;
    report.profiles.push_back(profile_split(fitted.model, id_test, "id_test"));
    report.profiles.push_back(profile_split(fitted.model, ood_test, "ood_test"));
    return report;
}

}  // namespace survood
