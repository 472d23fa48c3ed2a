#pragma once
// Out-of-distribution scorers over MTLR outputs.
//
// Every scorer follows the same orientation: a HIGHER score means MORE
// out-of-distribution. Logit-based scorers treat the m+1 outcome logits of
// the survival model as class logits; activation-based ones (SCALE, ASH,
// DICE, Dropout) act on the input feature vector, which is the only
// activation layer of a linear model. Signed features are ranked by
// magnitude wherever a percentile is involved.

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "survood/cohort.hpp"
#include "survood/mtlr.hpp"

namespace survood {

enum class ScorerKind { hazard_dev, msp, mls, energy, gen, odin, scale, ash, dice, dropout };

inline constexpr std::array<ScorerKind, 10> kAllScorerKinds{
    ScorerKind::hazard_dev, ScorerKind::msp,   ScorerKind::mls, ScorerKind::energy, ScorerKind::gen,
    ScorerKind::odin,       ScorerKind::scale, ScorerKind::ash, ScorerKind::dice,   ScorerKind::dropout};

std::string_view to_string(ScorerKind kind);
ScorerKind parse_scorer_kind(std::string_view name);

// Defaults follow the usual settings of each method.
struct ScorerParams {
    double energy_temperature = 1.0;
    double gen_gamma = 0.1;
    double odin_temperature = 1000.0;
    double odin_epsilon = 1e-3;
    double scale_percentile = 85.0;
    double ash_percentile = 65.0;
    double dice_keep_percent = 10.0;  // share of weights kept; 100 disables sparsification
    double dropout_rate = 0.1;
    std::size_t dropout_trials = 16;
    std::uint64_t seed = 0;

    void validate() const;
};

class OodScorer {
public:
    // An unfitted scorer. Usable directly for stateless kinds.
    explicit OodScorer(ScorerKind kind, ScorerParams params = {});

    ScorerKind kind() const noexcept { return kind_; }
    const ScorerParams& params() const noexcept { return params_; }

    // HazardDev: mean training hazard.
    const std::optional<HazardProfile>& reference_hazard() const noexcept { return reference_hazard_; }
    // DICE: 0/1 mask over theta.
    const std::optional<Eigen::MatrixXd>& weight_mask() const noexcept { return weight_mask_; }

    static bool requires_fit(ScorerKind kind) noexcept;
    bool is_fitted() const noexcept;

private:
    friend OodScorer fit_scorer(ScorerKind, const ScorerParams&, const SurvivalModel&, const Cohort&);

    ScorerKind kind_;
    ScorerParams params_;
    std::optional<HazardProfile> reference_hazard_;
    std::optional<Eigen::MatrixXd> weight_mask_;
};

OodScorer fit_scorer(ScorerKind kind, const ScorerParams& params, const SurvivalModel& model, const Cohort& train);

// `stream` keys the Dropout scorer's random masks; score_cohort passes a hash of
// the sample id so scores do not depend on cohort order.
double score(const OodScorer& scorer, const SurvivalModel& model, FeatureView x, std::uint64_t stream = 0);

struct SampleScore {
    std::string id;
    double score = 0.0;
};

std::vector<SampleScore> score_cohort(const OodScorer& scorer, const SurvivalModel& model, const Cohort& cohort);

// Building blocks, exposed for direct testing.
double max_softmax(const Eigen::VectorXd& logits);
double msp_score(const Eigen::VectorXd& logits);
double mls_score(const Eigen::VectorXd& logits);
double energy_score(const Eigen::VectorXd& logits, double temperature = 1.0);
double gen_score(const Eigen::VectorXd& logits, double gamma = 0.1);
double hazard_deviation(std::span<const double> test_hazard, std::span<const double> reference_hazard);
// p-th percentile (0..100) with linear interpolation between order statistics.
double percentile(std::vector<double> values, double p);
// SCALE exponent r = sum(|x|) / sum(|x_i| >= p-th percentile of |x|).
double scale_exponent(FeatureView x, double percentile_p);
// ASH-P: entries whose magnitude is below the p-th percentile of |x| set to 0.
std::vector<double> ash_prune(FeatureView x, double percentile_p);
// Input perturbed by ODIN's signed-gradient step toward higher max softmax.
std::vector<double> odin_perturb(const SurvivalModel& model, FeatureView x, double temperature, double epsilon);

}  // namespace survood
