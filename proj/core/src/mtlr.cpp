#include "survood/mtlr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "survood/io.hpp"
#include "survood/json_io.hpp"

namespace survood {

void TrainingConfig::validate() const {
    auto bad = [](const std::string& what) { throw InputError("training config: " + what); };
    if (!(c1 >= 0.0) || !std::isfinite(c1)) bad("c1 must be a finite nonnegative number");
    if (!(c2 >= 0.0) || !std::isfinite(c2)) bad("c2 must be a finite nonnegative number");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) bad("learning_rate must be positive");
    if (max_iters == 0) bad("max_iters must be positive");
    if (!(grad_tolerance > 0.0) || !std::isfinite(grad_tolerance)) bad("grad_tolerance must be positive");
}

SurvivalModel::SurvivalModel(TimeGrid grid, std::size_t feature_dim, TrainingConfig hyper)
    : SurvivalModel(grid, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.size()),
                                                 static_cast<Eigen::Index>(feature_dim)),
                    Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size())), hyper) {}

SurvivalModel::SurvivalModel(TimeGrid grid, Eigen::MatrixXd theta, Eigen::VectorXd bias, TrainingConfig hyper)
    : grid_(std::move(grid)), theta_(std::move(theta)), bias_(std::move(bias)), hyper_(hyper) {
    const auto m = static_cast<Eigen::Index>(grid_.size());
    if (theta_.rows() != m) throw InputError("survival model: theta must have one row per interval");
    if (theta_.cols() < 1) throw InputError("survival model: feature dimension must be positive");
    if (bias_.size() != m) throw InputError("survival model: bias must have one entry per interval");
    if (!theta_.allFinite() || !bias_.allFinite()) throw NumericError("survival model: non-finite parameter");
}

SurvivalModel SurvivalModel::with_parameters(Eigen::MatrixXd theta, Eigen::VectorXd bias) const {
    return SurvivalModel(grid_, std::move(theta), std::move(bias), hyper_);
}

Eigen::VectorXd logits(const Eigen::MatrixXd& theta, const Eigen::VectorXd& bias, FeatureView x) {
    if (static_cast<Eigen::Index>(x.size()) != theta.cols()) {
        throw InputError("logits: feature vector has length " + std::to_string(x.size()) + ", model expects " +
                         std::to_string(theta.cols()));
    }
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    const Eigen::Index m = theta.rows();
    Eigen::VectorXd f(m + 1);
    f[m] = 0.0;
    for (Eigen::Index k = m - 1; k >= 0; --k) f[k] = f[k + 1] + (theta.row(k).dot(xv) + bias[k]);
    return f;
}

Eigen::VectorXd logits(const SurvivalModel& model, FeatureView x) {
    return logits(model.theta(), model.bias(), x);
}

Eigen::VectorXd softmax(const Eigen::VectorXd& f) {
    if (f.size() == 0) throw InputError("softmax: empty logit vector");
    const Eigen::VectorXd e = (f.array() - f.maxCoeff()).exp();
    return e / e.sum();
}

namespace {

double log_sum_exp(const double* f, std::size_t n) {
    const double mx = *std::max_element(f, f + n);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += std::exp(f[k] - mx);
    return mx + std::log(s);
}

void check_inputs(const SurvivalModel& model, const Cohort& cohort, std::span<const LabelEncoding> labels) {
    if (cohort.empty()) throw InputError("nll: cohort is empty");
    if (labels.size() != cohort.size()) throw InputError("nll: labels do not align with cohort samples");
    if (cohort.feature_dim() != model.feature_dim()) throw InputError("nll: feature dimension mismatch");
    for (const auto& l : labels) {
        if (l.first_outcome() > model.intervals()) throw InputError("nll: label index outside [0, m]");
    }
}

double regularizer(const Eigen::MatrixXd& theta, const TrainingConfig& cfg) {
    double r = 0.5 * cfg.c1 * theta.squaredNorm();
    if (cfg.c2 != 0.0 && theta.rows() > 1) {
        const Eigen::Index m = theta.rows();
        r += 0.5 * cfg.c2 * (theta.bottomRows(m - 1) - theta.topRows(m - 1)).squaredNorm();
    }
    return r;
}

void add_regularizer_gradient(const Eigen::MatrixXd& theta, const TrainingConfig& cfg, Eigen::MatrixXd& g) {
    g += cfg.c1 * theta;
    if (cfg.c2 != 0.0 && theta.rows() > 1) {
        const Eigen::Index m = theta.rows();
        const Eigen::MatrixXd diff = theta.bottomRows(m - 1) - theta.topRows(m - 1);  // theta_{j+1} - theta_j
        g.bottomRows(m - 1) += cfg.c2 * diff;
        g.topRows(m - 1) -= cfg.c2 * diff;
    }
}

// Feature matrix and labels prepared once for repeated objective evaluations.
struct Design {
    Eigen::MatrixXd x;  // n x d
    std::vector<LabelEncoding> labels;
};

Design make_design(const Cohort& cohort, std::span<const LabelEncoding> labels) {
    Design d;
    d.x.resize(static_cast<Eigen::Index>(cohort.size()), static_cast<Eigen::Index>(cohort.feature_dim()));
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        const auto& feats = cohort[i].features;
        for (std::size_t j = 0; j < feats.size(); ++j) {
            d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = feats[j];
        }
    }
    d.labels.assign(labels.begin(), labels.end());
    return d;
}

// Objective value and, when `grad` is non-null, its gradient.
double evaluate(const Eigen::MatrixXd& theta, const Eigen::VectorXd& bias, const TrainingConfig& cfg,
                const Design& design, Gradient* grad) {
    const Eigen::Index n = design.x.rows();
    const Eigen::Index m = theta.rows();
    // s(i, j) = theta_{j+1} . x_i + b_{j+1}
    Eigen::MatrixXd s = design.x * theta.transpose();
    s.rowwise() += bias.transpose();

    Eigen::MatrixXd cum;  // cum(i, j) = sum_{k<=j} (pi_k - q_k)
    if (grad) cum.resize(n, m);
    std::vector<double> f(static_cast<std::size_t>(m) + 1);
    std::vector<double> e(f.size());
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        f[static_cast<std::size_t>(m)] = 0.0;
        for (Eigen::Index k = m - 1; k >= 0; --k) {
            f[static_cast<std::size_t>(k)] = f[static_cast<std::size_t>(k) + 1] + s(i, k);
        }
        const LabelEncoding& label = design.labels[static_cast<std::size_t>(i)];
        const std::size_t lo = label.first_outcome();
        const std::size_t hi = label.last_outcome(static_cast<std::size_t>(m));
        const double log_z = log_sum_exp(f.data(), f.size());
        const double log_num = label.is_censored() ? log_sum_exp(f.data() + lo, f.size() - lo) : f[lo];
        total += log_z - log_num;
        if (!grad) continue;

        const double mx = *std::max_element(f.begin(), f.end());
        double z = 0.0;
        for (std::size_t k = 0; k < f.size(); ++k) {
            e[k] = std::exp(f[k] - mx);
            z += e[k];
        }
        double z_num = 0.0;
        for (std::size_t k = lo; k <= hi; ++k) z_num += e[k];
        double acc = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto k = static_cast<std::size_t>(j);
            const double q = (k >= lo && k <= hi) ? e[k] / z_num : 0.0;
            acc += e[k] / z - q;
            cum(i, j) = acc;
        }
    }
    total += regularizer(theta, cfg);
    if (grad) {
        grad->theta = cum.transpose() * design.x;
        grad->bias = cum.colwise().sum().transpose();
        add_regularizer_gradient(theta, cfg, grad->theta);
    }
    return total;
}

}  // namespace

double Gradient::inf_norm() const {
    double v = theta.size() ? theta.cwiseAbs().maxCoeff() : 0.0;
    if (bias.size()) v = std::max(v, bias.cwiseAbs().maxCoeff());
    return v;
}

double nll(const SurvivalModel& model, const Cohort& cohort, std::span<const LabelEncoding> labels) {
    check_inputs(model, cohort, labels);
    return evaluate(model.theta(), model.bias(), model.hyper(), make_design(cohort, labels), nullptr);
}

Gradient nll_gradient(const SurvivalModel& model, const Cohort& cohort, std::span<const LabelEncoding> labels) {
    check_inputs(model, cohort, labels);
    Gradient g;
    evaluate(model.theta(), model.bias(), model.hyper(), make_design(cohort, labels), &g);
    return g;
}

FitResult fit(const Cohort& cohort, const TimeGrid& grid, const TrainingConfig& config) {
    config.validate();
    SurvivalModel model(grid, cohort.feature_dim(), config);
    const auto labels = encode_labels(cohort, grid);
    check_inputs(model, cohort, labels);
    const Design design = make_design(cohort, labels);
    const double inv_n = 1.0 / static_cast<double>(cohort.size());

    Eigen::MatrixXd theta = model.theta();
    Eigen::VectorXd bias = model.bias();
    Gradient grad;
    double value = evaluate(theta, bias, config, design, &grad);

    TrainingReport report;
    report.initial_nll = value;
    while (true) {
        report.final_grad_norm = grad.inf_norm() * inv_n;
        if (report.final_grad_norm < config.grad_tolerance) {
            report.converged = true;
            break;
        }
        if (report.iterations >= config.max_iters) break;

        const double grad_sq = grad.theta.squaredNorm() + grad.bias.squaredNorm();
        double step = config.learning_rate * inv_n;
        Eigen::MatrixXd next_theta;
        Eigen::VectorXd next_bias;
        double next_value = 0.0;
        bool accepted = false;
        for (int halvings = 0; halvings < 60; ++halvings) {
            next_theta = theta - step * grad.theta;
            next_bias = bias - step * grad.bias;
            next_value = evaluate(next_theta, next_bias, config, design, nullptr);
            if (!config.backtracking) {
                if (!std::isfinite(next_value)) {
                    throw NumericError("fit: non-finite objective " + io::format_double(next_value) +
                                       " at iteration " + std::to_string(report.iterations + 1));
                }
                accepted = true;
                break;
            }
            if (std::isfinite(next_value) && next_value <= value - 1e-4 * step * grad_sq) {
                accepted = true;
                break;
            }
            step *= 0.5;
            ++report.backtracks;
        }
        if (!accepted) break;  // no decrease possible at machine precision
        theta = std::move(next_theta);
        bias = std::move(next_bias);
        value = evaluate(theta, bias, config, design, &grad);
        ++report.iterations;
    }
    if (!std::isfinite(value)) {
        throw NumericError("fit: non-finite objective " + io::format_double(value) + " at iteration " +
                           std::to_string(report.iterations));
    }
    report.final_nll = value;
    return {model.with_parameters(std::move(theta), std::move(bias)), report};
}

SurvivalModel sgd_step_on_row(const SurvivalModel& model, FeatureView x, const LabelEncoding& label,
                              std::size_t j, double eta) {
    const std::size_t m = model.intervals();
    if (j < 1 || j > m) throw InputError("sgd_step_on_row: interval index must lie in [1, m]");
    if (label.first_outcome() > m) throw InputError("sgd_step_on_row: label index outside [0, m]");
    const Eigen::VectorXd f = logits(model, x);
    const double mx = f.maxCoeff();
    const Eigen::VectorXd e = (f.array() - mx).exp();
    const double z = e.sum();
    const std::size_t lo = label.first_outcome();
    const std::size_t hi = label.last_outcome(m);
    double z_num = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) z_num += e[static_cast<Eigen::Index>(k)];

    double early_mass = 0.0;  // sum_{k<j} pi_k
    double y = 0.0;           // sum_{k<j} q_k
    for (std::size_t k = 0; k < j; ++k) {
        early_mass += e[static_cast<Eigen::Index>(k)] / z;
        if (k >= lo && k <= hi) y += e[static_cast<Eigen::Index>(k)] / z_num;
    }
    const double coef = eta * (y - early_mass);
    Eigen::MatrixXd theta = model.theta();
    for (std::size_t c = 0; c < x.size(); ++c) theta(static_cast<Eigen::Index>(j - 1), static_cast<Eigen::Index>(c)) += coef * x[c];
    return model.with_parameters(std::move(theta), model.bias());
}

SurvivalPrediction predict(const SurvivalModel& model, FeatureView x) {
    const Eigen::VectorXd f = logits(model, x);
    const std::size_t m = model.intervals();
    const double mx = f.maxCoeff();
    std::vector<double> e(m + 1);
    for (std::size_t k = 0; k <= m; ++k) e[k] = std::exp(f[static_cast<Eigen::Index>(k)] - mx);
    // tail[k] = sum_{k' >= k} e_k'
    std::vector<double> tail(m + 2, 0.0);
    for (std::size_t k = m + 1; k-- > 0;) tail[k] = tail[k + 1] + e[k];

    SurvivalPrediction p;
    p.outcome_probs.resize(m + 1);
    p.survival.resize(m);
    p.hazard.resize(m);
    const double z = tail[0];
    for (std::size_t k = 0; k <= m; ++k) p.outcome_probs[k] = e[k] / z;
    for (std::size_t i = 0; i < m; ++i) {
        p.survival[i] = tail[i] / z;
        if (p.survival[i] < 1e-300) {
            p.hazard[i] = 0.0;
            p.degenerate_tail = true;
        } else {
            p.hazard[i] = e[i] / tail[i];
        }
    }
    return p;
}

HazardProfile mean_hazard(const SurvivalModel& model, const Cohort& cohort) {
    if (cohort.empty()) throw InputError("mean_hazard: cohort is empty");
    HazardProfile h{std::vector<double>(model.intervals(), 0.0)};
    for (const auto& s : cohort) {
        const auto p = predict(model, s.features);
        for (std::size_t i = 0; i < h.values.size(); ++i) h.values[i] += p.hazard[i];
    }
    for (double& v : h.values) v /= static_cast<double>(cohort.size());
    return h;
}

namespace {

constexpr std::string_view kModelFormat = "survood.mtlr/1";

nlohmann::json model_body(const SurvivalModel& model) {
    nlohmann::json theta = nlohmann::json::array();
    for (Eigen::Index r = 0; r < model.theta().rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < model.theta().cols(); ++c) row.push_back(model.theta()(r, c));
        theta.push_back(std::move(row));
    }
    nlohmann::json bias = nlohmann::json::array();
    for (Eigen::Index r = 0; r < model.bias().size(); ++r) bias.push_back(model.bias()[r]);
    return {{"format", kModelFormat},
            {"grid", model.grid().boundaries()},
            {"feature_dim", model.feature_dim()},
            {"theta", std::move(theta)},
            {"bias", std::move(bias)},
            {"training", to_json(model.hyper())}};
}

}  // namespace

std::string serialize_model(const SurvivalModel& model) {
    nlohmann::json doc = model_body(model);
    doc["checksum"] = io::sha256_hex(doc.dump());
    return doc.dump(2) + "\n";
}

SurvivalModel parse_model(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("model file: malformed document: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("checksum")) throw InputError("model file: missing checksum");
    const std::string stored = doc["checksum"].is_string() ? doc["checksum"].get<std::string>() : "";
    doc.erase("checksum");
    if (io::sha256_hex(doc.dump()) != stored) throw InputError("model file: checksum mismatch (file is corrupt)");
    try {
        if (doc.at("format").get<std::string>() != kModelFormat) throw InputError("model file: unknown format");
        TimeGrid grid(doc.at("grid").get<std::vector<double>>());
        const auto d = doc.at("feature_dim").get<std::size_t>();
        const auto& rows = doc.at("theta");
        Eigen::MatrixXd theta(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto row = rows[r].get<std::vector<double>>();
            if (row.size() != d) throw InputError("model file: theta row has wrong length");
            for (std::size_t c = 0; c < d; ++c) theta(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
        }
        const auto b = doc.at("bias").get<std::vector<double>>();
        Eigen::VectorXd bias = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
        return SurvivalModel(std::move(grid), std::move(theta), std::move(bias),
                             training_config_from_json(doc.at("training")));
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("model file: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const SurvivalModel& model) {
    io::write_file(path, serialize_model(model));
}

SurvivalModel load_model(const std::filesystem::path& path) { return parse_model(io::read_file(path)); }

}  // namespace survood
