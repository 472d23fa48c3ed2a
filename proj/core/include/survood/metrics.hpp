#pragma once
// Survival accuracy (concordance) and OOD detection metrics.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "survood/cohort.hpp"
#include "survood/mtlr.hpp"

namespace survood {

struct RiskScore {
    std::string id;
    double risk = 0.0;  // higher = earlier expected event
};

// Negative discrete area under the predicted survival curve, -sum_i G(t_i).
double risk_from_model(const SurvivalModel& model, FeatureView x);
std::vector<RiskScore> risk_scores(const SurvivalModel& model, const Cohort& cohort);

struct TimeToEvent {
    double time = 0.0;
    bool event = false;
};

struct ConcordanceResult {
    double value = 0.0;
    std::uint64_t comparable_pairs = 0;
    std::uint64_t concordant_pairs = 0;
    std::uint64_t tied_pairs = 0;  // comparable pairs with equal risk, counted as 1/2
};

// Harrell's C: (i, j) is comparable iff time_i < time_j and sample i had an
// event; concordant iff risk_i > risk_j. O(n log n). Throws
// UndefinedMetricError when no pair is comparable.
ConcordanceResult concordance(std::span<const TimeToEvent> outcomes, std::span<const double> risks);
ConcordanceResult concordance(std::span<const RiskScore> risks, const Cohort& cohort);
double concordance_index(std::span<const RiskScore> risks, const Cohort& cohort);

// OOD is the positive class.
struct DetectionOutcome {
    std::vector<double> id_scores;
    std::vector<double> ood_scores;
};

// P(ood > id) + P(ood == id) / 2.
double auroc(const DetectionOutcome& outcome);
// Average precision: step-wise area under the precision-recall curve, one
// point per distinct score threshold.
double auprc(const DetectionOutcome& outcome);
// Smallest FPR among thresholds "score >= t" whose TPR reaches tpr_target.
double fpr_at_tpr(const DetectionOutcome& outcome, double tpr_target = 0.95);

// Midranks (1-based), ties share the average rank.
std::vector<double> average_ranks(std::span<const double> values);
double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace survood
