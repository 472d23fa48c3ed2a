#pragma once
// Multi-task logistic regression over a discrete time grid.
//
// Outcome indices run k = 0..m: k < m is an event in interval k+1, k = m is
// "no event by t_m". The logit of outcome k is the suffix sum
//   f(x, k) = sum_{i=k+1..m} (theta_i . x + b_i),
// so f(x, m) = 0 always, and the outcome distribution is softmax(f).

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "survood/cohort.hpp"

namespace survood {

struct TrainingConfig {
    double c1 = 1e-2;             // l2 weight on theta
    double c2 = 1e-2;             // smoothness weight on consecutive theta rows
    double learning_rate = 1.0;   // step on the per-sample objective nll / N
    std::size_t max_iters = 5000;
    double grad_tolerance = 1e-6;  // on the infinity norm of grad(nll) / N
    std::uint64_t seed = 0;        // reserved; full-batch descent is seed independent
    bool backtracking = true;      // Armijo halving when a step fails to decrease nll

    void validate() const;
};

class SurvivalModel {
public:
    // Zero parameters: the uniform outcome distribution.
    SurvivalModel(TimeGrid grid, std::size_t feature_dim, TrainingConfig hyper = {});
    SurvivalModel(TimeGrid grid, Eigen::MatrixXd theta, Eigen::VectorXd bias, TrainingConfig hyper = {});

    const TimeGrid& grid() const noexcept { return grid_; }
    const Eigen::MatrixXd& theta() const noexcept { return theta_; }  // m x d, row j-1 is theta_j
    const Eigen::VectorXd& bias() const noexcept { return bias_; }
    const TrainingConfig& hyper() const noexcept { return hyper_; }
    std::size_t intervals() const noexcept { return grid_.size(); }
    std::size_t feature_dim() const noexcept { return static_cast<std::size_t>(theta_.cols()); }

    SurvivalModel with_parameters(Eigen::MatrixXd theta, Eigen::VectorXd bias) const;

private:
    TimeGrid grid_;
    Eigen::MatrixXd theta_;
    Eigen::VectorXd bias_;
    TrainingConfig hyper_;
};

using FeatureView = std::span<const double>;

// Length m+1; entry m is exactly 0.
Eigen::VectorXd logits(const SurvivalModel& model, FeatureView x);

// Same, for an arbitrary parameter pair; used by scorers that perturb weights.
Eigen::VectorXd logits(const Eigen::MatrixXd& theta, const Eigen::VectorXd& bias, FeatureView x);

// Regularized negative log-likelihood summed over samples. Censored samples
// marginalize over all outcomes k >= censor floor.
// Numerically stable softmax over outcome logits.
Eigen::VectorXd softmax(const Eigen::VectorXd& f);

double nll(const SurvivalModel& model, const Cohort& cohort, std::span<const LabelEncoding> labels);

struct Gradient {
    Eigen::MatrixXd theta;
    Eigen::VectorXd bias;

    double inf_norm() const;
};

Gradient nll_gradient(const SurvivalModel& model, const Cohort& cohort, std::span<const LabelEncoding> labels);

struct TrainingReport {
    std::size_t iterations = 0;
    double initial_nll = 0.0;
    double final_nll = 0.0;
    double final_grad_norm = 0.0;  // infinity norm of grad(nll) / N
    std::size_t backtracks = 0;
    bool converged = false;
};

struct FitResult {
    SurvivalModel model;
    TrainingReport report;
};

// Full-batch gradient descent from theta = 0, bias = 0. Throws NumericError if
// the objective becomes non-finite and cannot be recovered by backtracking.
FitResult fit(const Cohort& cohort, const TimeGrid& grid, const TrainingConfig& config);

// One likelihood-ascent step on theta_j (1-based j) for a single sample:
// theta_j += eta * (y_j - sum_{k<j} pi_k) * x, where y_j is the probability,
// under the label, that the outcome index is below j. No regularizers.
SurvivalModel sgd_step_on_row(const SurvivalModel& model, FeatureView x, const LabelEncoding& label,
                              std::size_t j, double eta);

struct SurvivalPrediction {
    std::vector<double> outcome_probs;  // pi_k, k = 0..m
    std::vector<double> survival;       // G(t_i) = sum_{k >= i-1} pi_k, i = 1..m
    std::vector<double> hazard;         // pi_{i-1} / G(t_i)
    bool degenerate_tail = false;       // some survival mass underflowed; those hazards are 0
};

SurvivalPrediction predict(const SurvivalModel& model, FeatureView x);

struct HazardProfile {
    std::vector<double> values;
};

HazardProfile mean_hazard(const SurvivalModel& model, const Cohort& cohort);

// Plain-text JSON document with a SHA-256 checksum over its content.
std::string serialize_model(const SurvivalModel& model);
SurvivalModel parse_model(std::string_view text);
void save_model(const std::filesystem::path& path, const SurvivalModel& model);
SurvivalModel load_model(const std::filesystem::path& path);

}  // namespace survood
