#include "survood/ood.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "survood/random.hpp"

namespace survood {

namespace {

constexpr std::array<std::string_view, 10> kNames{"HazardDev", "MSP",  "MLS", "Energy", "GEN",
                                                  "ODIN",      "SCALE", "ASH", "DICE",   "Dropout"};

double finite_or_throw(double v, std::string_view what) {
    if (!std::isfinite(v)) throw NumericError(std::string(what) + ": non-finite score");
    return v;
}

}  // namespace

std::string_view to_string(ScorerKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

ScorerKind parse_scorer_kind(std::string_view name) {
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (kNames[i] == name) return static_cast<ScorerKind>(i);
    }
    throw InputError("unknown scorer '" + std::string(name) + "'");
}

void ScorerParams::validate() const {
    auto bad = [](const std::string& what) { throw InputError("scorer params: " + what); };
    if (!(energy_temperature > 0.0)) bad("energy_temperature must be positive");
    if (!(gen_gamma > 0.0)) bad("gen_gamma must be positive");
    if (!(odin_temperature > 0.0)) bad("odin_temperature must be positive");
    if (!(odin_epsilon >= 0.0) || !std::isfinite(odin_epsilon)) bad("odin_epsilon must be >= 0");
    if (!(scale_percentile >= 0.0 && scale_percentile <= 100.0)) bad("scale_percentile must be in [0, 100]");
    if (!(ash_percentile >= 0.0 && ash_percentile <= 100.0)) bad("ash_percentile must be in [0, 100]");
    if (!(dice_keep_percent > 0.0 && dice_keep_percent <= 100.0)) bad("dice_keep_percent must be in (0, 100]");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) bad("dropout_rate must be in [0, 1)");
    if (dropout_trials == 0) bad("dropout_trials must be positive");
}

OodScorer::OodScorer(ScorerKind kind, ScorerParams params) : kind_(kind), params_(params) { params_.validate(); }

bool OodScorer::requires_fit(ScorerKind kind) noexcept {
    return kind == ScorerKind::hazard_dev || kind == ScorerKind::dice;
}

bool OodScorer::is_fitted() const noexcept {
    switch (kind_) {
        case ScorerKind::hazard_dev: return reference_hazard_.has_value();
        case ScorerKind::dice: return weight_mask_.has_value();
        default: return true;
    }
}

OodScorer fit_scorer(ScorerKind kind, const ScorerParams& params, const SurvivalModel& model, const Cohort& train) {
    OodScorer scorer(kind, params);
    if (!OodScorer::requires_fit(kind)) return scorer;
    if (train.empty()) throw InputError("fit_scorer: training cohort is empty");
    if (train.feature_dim() != model.feature_dim()) throw InputError("fit_scorer: feature dimension mismatch");

    if (kind == ScorerKind::hazard_dev) {
        scorer.reference_hazard_ = mean_hazard(model, train);
        return scorer;
    }

    // DICE: keep the largest |theta_jl * mean activation_l| contributions.
    const auto d = static_cast<Eigen::Index>(model.feature_dim());
    const auto m = static_cast<Eigen::Index>(model.intervals());
    Eigen::VectorXd mean_act = Eigen::VectorXd::Zero(d);
    for (const auto& s : train) {
        mean_act += Eigen::Map<const Eigen::VectorXd>(s.features.data(), d);
    }
    mean_act /= static_cast<double>(train.size());
    const Eigen::MatrixXd contrib = (model.theta().array().rowwise() * mean_act.transpose().array()).abs();

    const auto total = static_cast<std::size_t>(m * d);
    auto keep = static_cast<std::size_t>(std::ceil(params.dice_keep_percent / 100.0 * static_cast<double>(total)));
    keep = std::clamp<std::size_t>(keep, 1, total);
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), 0);
    // Row-major flat index; ties keep the lower index.
    auto value_at = [&](std::size_t idx) {
        return contrib(static_cast<Eigen::Index>(idx) / d, static_cast<Eigen::Index>(idx) % d);
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value_at(a) > value_at(b); });
    Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(m, d);
    for (std::size_t i = 0; i < keep; ++i) {
        mask(static_cast<Eigen::Index>(order[i]) / d, static_cast<Eigen::Index>(order[i]) % d) = 1.0;
    }
    scorer.weight_mask_ = std::move(mask);
    return scorer;
}

double max_softmax(const Eigen::VectorXd& logits) {
    const double mx = logits.maxCoeff();
    double z = 0.0;
    for (Eigen::Index k = 0; k < logits.size(); ++k) z += std::exp(logits[k] - mx);
    return 1.0 / z;  // the arg-max entry contributes exp(0) = 1 to the numerator
}

double msp_score(const Eigen::VectorXd& logits) { return -max_softmax(logits); }

double mls_score(const Eigen::VectorXd& logits) { return -logits.maxCoeff(); }

double energy_score(const Eigen::VectorXd& logits, double temperature) {
    const Eigen::VectorXd scaled = logits / temperature;
    const double mx = scaled.maxCoeff();
    double z = 0.0;
    for (Eigen::Index k = 0; k < scaled.size(); ++k) z += std::exp(scaled[k] - mx);
    return -temperature * (mx + std::log(z));
}

double gen_score(const Eigen::VectorXd& logits, double gamma) {
    // std::exp rather than Eigen's vectorized exp, which clamps instead of underflowing to 0.
    const double mx = logits.maxCoeff();
    Eigen::VectorXd p(logits.size());
    for (Eigen::Index k = 0; k < p.size(); ++k) p[k] = std::exp(logits[k] - mx);
    p /= p.sum();
    double g = 0.0;
    for (Eigen::Index k = 0; k < p.size(); ++k) g += std::pow(p[k], gamma) * std::pow(1.0 - p[k], gamma);
    return g;
}

double hazard_deviation(std::span<const double> test_hazard, std::span<const double> reference_hazard) {
    if (test_hazard.size() != reference_hazard.size()) throw InputError("hazard_deviation: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < test_hazard.size(); ++i) s += test_hazard[i] - reference_hazard[i];
    return s;
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw InputError("percentile: empty input");
    std::sort(values.begin(), values.end());
    const double h = p / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

std::vector<double> magnitudes(FeatureView x) {
    std::vector<double> a(x.size());
    std::transform(x.begin(), x.end(), a.begin(), [](double v) { return std::abs(v); });
    return a;
}

}  // namespace

double scale_exponent(FeatureView x, double percentile_p) {
    const auto a = magnitudes(x);
    const double threshold = percentile(a, percentile_p);
    double total = 0.0, top = 0.0;
    for (double v : a) {
        total += v;
        if (v >= threshold) top += v;
    }
    return top > 0.0 ? total / top : 1.0;
}

std::vector<double> ash_prune(FeatureView x, double percentile_p) {
    const auto a = magnitudes(x);
    const double threshold = percentile(a, percentile_p);
    std::vector<double> out(x.begin(), x.end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (a[i] < threshold) out[i] = 0.0;
    }
    return out;
}

std::vector<double> odin_perturb(const SurvivalModel& model, FeatureView x, double temperature, double epsilon) {
    const Eigen::VectorXd f = logits(model, x);
    const Eigen::Index m = f.size() - 1;
    Eigen::Index top = 0;
    f.maxCoeff(&top);
    const Eigen::VectorXd scaled = f / temperature;
    Eigen::VectorXd p = (scaled.array() - scaled.maxCoeff()).exp();
    p /= p.sum();

    // d f_k / dx = sum_{i>k} theta_i =: a_k (a_m = 0), so
    // d log softmax_top(f/T) / dx = (a_top - sum_k p_k a_k) / T.
    const Eigen::Index d = model.theta().cols();
    Eigen::VectorXd a_k = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd a_top = Eigen::VectorXd::Zero(d);
    for (Eigen::Index k = m; k >= 0; --k) {
        if (k < m) a_k += model.theta().row(k).transpose();
        expected += p[k] * a_k;
        if (k == top) a_top = a_k;
    }
    const Eigen::VectorXd grad = (a_top - expected) / temperature;
    std::vector<double> out(x.begin(), x.end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double g = grad[static_cast<Eigen::Index>(i)];
        const double sign = g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0);
        out[i] = x[i] + epsilon * sign;
    }
    return out;
}

double score(const OodScorer& scorer, const SurvivalModel& model, FeatureView x, std::uint64_t stream) {
    if (!scorer.is_fitted()) {
        throw InputError("score: scorer '" + std::string(to_string(scorer.kind())) + "' must be fitted first");
    }
    const ScorerParams& p = scorer.params();
    const std::string_view name = to_string(scorer.kind());
    switch (scorer.kind()) {
        case ScorerKind::hazard_dev: {
            const auto pred = predict(model, x);
            const auto& ref = scorer.reference_hazard()->values;
            if (ref.size() != pred.hazard.size()) throw InputError("score: reference hazard length mismatch");
            return finite_or_throw(hazard_deviation(pred.hazard, ref), name);
        }
        case ScorerKind::msp: return finite_or_throw(msp_score(logits(model, x)), name);
        case ScorerKind::mls: return finite_or_throw(mls_score(logits(model, x)), name);
        case ScorerKind::energy: return finite_or_throw(energy_score(logits(model, x), p.energy_temperature), name);
        case ScorerKind::gen: return finite_or_throw(gen_score(logits(model, x), p.gen_gamma), name);
        case ScorerKind::odin: {
            const auto xp = odin_perturb(model, x, p.odin_temperature, p.odin_epsilon);
            const Eigen::VectorXd f = logits(model, xp) / p.odin_temperature;
            return finite_or_throw(msp_score(f), name);
        }
        case ScorerKind::scale: {
            const double r = scale_exponent(x, p.scale_percentile);
            const double factor = std::exp(r);
            std::vector<double> xs(x.begin(), x.end());
            for (double& v : xs) v *= factor;
            return finite_or_throw(energy_score(logits(model, xs), p.energy_temperature), name);
        }
        case ScorerKind::ash:
            return finite_or_throw(energy_score(logits(model, ash_prune(x, p.ash_percentile)), p.energy_temperature),
                                   name);
        case ScorerKind::dice: {
            const Eigen::MatrixXd masked = model.theta().cwiseProduct(*scorer.weight_mask());
            return finite_or_throw(energy_score(logits(masked, model.bias(), x), p.energy_temperature), name);
        }
        case ScorerKind::dropout: {
            const double keep_scale = 1.0 / (1.0 - p.dropout_rate);
            std::vector<double> xd(x.size());
            double mean = 0.0;
            for (std::size_t t = 0; t < p.dropout_trials; ++t) {
                Stream rng(derive_key(p.seed, stream, t));
                for (std::size_t i = 0; i < x.size(); ++i) {
                    xd[i] = rng.uniform() < p.dropout_rate ? 0.0 : x[i] * keep_scale;
                }
                const double s = msp_score(logits(model, xd));
                // incremental mean keeps identical trials bit-identical to a single one
                mean = t == 0 ? s : mean + (s - mean) / static_cast<double>(t + 1);
            }
            return finite_or_throw(mean, name);
        }
    }
    throw Error("score: unhandled scorer kind");
}

std::vector<SampleScore> score_cohort(const OodScorer& scorer, const SurvivalModel& model, const Cohort& cohort) {
    std::vector<SampleScore> out;
    out.reserve(cohort.size());
    for (const auto& s : cohort) out.push_back({s.id, score(scorer, model, s.features, stable_hash(s.id))});
    return out;
}

}  // namespace survood
