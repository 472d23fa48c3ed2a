#pragma once
// Synthetic cohorts with injectable covariate shift.
//
// The ground truth is itself an MTLR model on a fixed time grid: features are
// standard normal, the outcome index is drawn from the model's softmax, and
// the event time is placed uniformly inside the drawn interval. A
// censor_rate fraction of samples is censored at a uniform time before the
// event. Each sample draws from its own counter-based stream, so cohorts are
// reproducible bit for bit from the seed.

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "survood/analysis.hpp"
#include "survood/cohort.hpp"
#include "survood/metrics.hpp"
#include "survood/mtlr.hpp"
#include "survood/partition.hpp"

namespace survood {

enum class ShiftKind { none, scale, translate, noise, risk_coupled };

std::string_view to_string(ShiftKind kind);
ShiftKind parse_shift_kind(std::string_view name);

// Applied to OOD features after their outcomes are drawn.
//   scale:        x_a *= magnitude
//   translate:    x_a += magnitude
//   noise:        x_a += magnitude * z
//   risk_coupled: x_a += magnitude * z, and the outcome is redrawn from the
//                 truth evaluated at x_a + magnitude * z' (independent z'),
//                 so the observed features only partly explain the new risk.
struct ShiftSpec {
    ShiftKind kind = ShiftKind::none;
    double magnitude = 0.0;
    std::vector<std::size_t> affected_dims;  // empty = every dimension

    void validate(std::size_t d) const;
};

struct SynthConfig {
    std::size_t n = 1200;     // ID cohort size
    std::size_t n_ood = 600;  // OOD cohort size
    std::size_t d = 8;
    std::vector<double> grid;  // truth grid; empty = 1, 2, ..., m
    std::size_t m = 8;
    std::optional<Eigen::MatrixXd> true_theta;  // m x d; generated from the seed when absent
    std::optional<Eigen::VectorXd> true_bias;
    double signal = 0.3;       // scale of the shared risk direction in generated theta
    double base_bias = -0.25;  // generated bias per interval
    double censor_rate = 0.3;
    ShiftSpec shift;
    std::uint64_t seed = 0;
    std::string acquisition_parameter = "slice_thickness";
    double id_acquisition_value = 2.0;
    double ood_acquisition_value = 2.5;

    void validate() const;
    TimeGrid time_grid() const;
};

struct SynthResult {
    Cohort id;
    Cohort ood;
    Cohort ood_reference;  // OOD samples before the shift is applied
    SurvivalModel truth;
};

SynthResult generate(const SynthConfig& config);

// ID and OOD samples in one cohort, tagged by the pseudo acquisition parameter.
Cohort combined_cohort(const SynthResult& result);

struct ExperimentConfig {
    SynthConfig synth;
    TrainingConfig training;
    std::size_t n_test = 100;
};

struct DegradationReport {
    ConcordanceResult id_concordance;
    ConcordanceResult ood_concordance;
    double delta_c_index = 0.0;  // ID minus OOD
    TrainingReport training;
    double theta_relative_error = 0.0;  // ||theta_fit - theta_true||_F / ||theta_true||_F
    std::size_t train_size = 0;
    std::vector<double> grid;  // intervals the model was fitted on
    BenchmarkSplit split;
    std::vector<SplitProfile> profiles;  // ID test then OOD test
};

// Generate, split, fit on the train split over the truth grid, evaluate on both test sets.
DegradationReport degradation_experiment(const ExperimentConfig& config);

}  // namespace survood
