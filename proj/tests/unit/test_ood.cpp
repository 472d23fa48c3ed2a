#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "survood/ood.hpp"
#include "survood/random.hpp"

using namespace survood;
using survood::testing::Rng;

namespace {

struct Setup {
    SurvivalModel model;
    Cohort train;
};

Setup random_setup(Rng& rng, std::size_t m, std::size_t d, double scale = 0.7) {
    const auto grid = survood::testing::random_grid(rng, m);
    return {survood::testing::random_model(rng, grid, d, scale), survood::testing::random_cohort(rng, 40, d, grid)};
}

TimeGrid unit_grid(std::size_t m) {
    std::vector<double> b;
    for (std::size_t i = 1; i <= m; ++i) b.push_back(static_cast<double>(i));
    return TimeGrid(b);
}

}  // namespace

TEST(ScorerNames, RoundTrip) {
    for (const auto kind : kAllScorerKinds) EXPECT_EQ(parse_scorer_kind(to_string(kind)), kind);
    EXPECT_THROW(parse_scorer_kind("Mahalanobis"), InputError);
}

TEST(ScorerParamsTest, Validation) {
    ScorerParams p;
    EXPECT_NO_THROW(p.validate());
    p.dropout_rate = 1.0;
    EXPECT_THROW(p.validate(), InputError);
    p = {};
    p.dice_keep_percent = 0.0;
    EXPECT_THROW(p.validate(), InputError);
    p = {};
    p.ash_percentile = 101;
    EXPECT_THROW(p.validate(), InputError);
    p = {};
    p.dropout_trials = 0;
    EXPECT_THROW(OodScorer(ScorerKind::dropout, p), InputError);
}

TEST(HazardDev, FittedReferenceOfIdenticalSamples) {
    Rng rng(1);
    const auto grid = survood::testing::random_grid(rng, 5);
    const auto model = survood::testing::random_model(rng, grid, 2);
    const std::vector<double> x{0.5, -0.25};
    const auto train = survood::testing::make_cohort({x, x}, {1, 2}, {true, false});
    const auto scorer = fit_scorer(ScorerKind::hazard_dev, {}, model, train);
    ASSERT_TRUE(scorer.reference_hazard().has_value());
    const auto h = predict(model, x).hazard;
    for (std::size_t i = 0; i < h.size(); ++i) EXPECT_NEAR(scorer.reference_hazard()->values[i], h[i], 1e-15);
    EXPECT_EQ(score(scorer, model, x), 0.0);
}

TEST(HazardDev, Arithmetic) {
    const std::vector<double> ref{0.1, 0.2, 0.3, 0.4, 0.1, 0.2, 0.3, 0.4};
    EXPECT_EQ(hazard_deviation(ref, ref), 0.0);
    std::vector<double> shifted;
    for (double v : ref) shifted.push_back(v + 0.05);
    EXPECT_NEAR(hazard_deviation(shifted, ref), 0.4, 1e-12);
    EXPECT_THROW(hazard_deviation(std::vector<double>{1.0}, ref), InputError);
}

TEST(HazardDev, LinearInTestHazard) {
    Rng rng(2);
    for (int i = 0; i < 100; ++i) {
        const auto m = rng.index(1, 10);
        std::vector<double> ref, v, moved;
        for (std::size_t k = 0; k < m; ++k) {
            ref.push_back(rng.uniform());
            v.push_back(rng.uniform(-0.2, 0.2));
            moved.push_back(ref.back() + v.back());
        }
        double total = 0;
        for (double d : v) total += d;
        EXPECT_NEAR(hazard_deviation(moved, ref) - hazard_deviation(ref, ref), total, 1e-12);
    }
}

TEST(LogitScores, UniformLogits) {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(9);
    EXPECT_NEAR(energy_score(zero), -std::log(9.0), 1e-12);
    EXPECT_NEAR(msp_score(zero), -1.0 / 9.0, 1e-15);
    EXPECT_EQ(mls_score(zero), 0.0);
}

TEST(LogitScores, GenVanishesOnOneHot) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(9);
    f[3] = 2000.0;
    EXPECT_EQ(gen_score(f), 0.0);
}

TEST(LogitScores, ShiftInvariance) {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        Eigen::VectorXd f(static_cast<Eigen::Index>(rng.index(2, 10)));
        for (Eigen::Index k = 0; k < f.size(); ++k) f[k] = std::round(rng.uniform(-20, 20));
        const double c = std::round(rng.uniform(-50, 50));
        const Eigen::VectorXd g = f.array() + c;
        EXPECT_EQ(msp_score(g), msp_score(f));
        EXPECT_EQ(gen_score(g), gen_score(f));
        EXPECT_EQ(mls_score(g), mls_score(f) - c);
        EXPECT_NEAR(energy_score(g), energy_score(f) - c, 1e-12);
    }
}

TEST(Scorers, DegenerateSettingsReduceToBaseScores) {
    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
        const auto s = random_setup(rng, rng.index(1, 8), rng.index(1, 6));
        ScorerParams p;
        p.odin_epsilon = 0.0;
        p.odin_temperature = 1.0;
        p.dice_keep_percent = 100.0;
        p.ash_percentile = 0.0;
        p.dropout_rate = 0.0;
        p.dropout_trials = rng.index(1, 20);
        p.energy_temperature = rng.uniform(0.5, 2.0);
        const auto msp = fit_scorer(ScorerKind::msp, p, s.model, s.train);
        const auto energy = fit_scorer(ScorerKind::energy, p, s.model, s.train);
        const auto odin = fit_scorer(ScorerKind::odin, p, s.model, s.train);
        const auto dice = fit_scorer(ScorerKind::dice, p, s.model, s.train);
        const auto ash = fit_scorer(ScorerKind::ash, p, s.model, s.train);
        const auto drop = fit_scorer(ScorerKind::dropout, p, s.model, s.train);
        EXPECT_TRUE((dice.weight_mask()->array() == 1.0).all());
        for (const auto& sample : s.train) {
            const auto& x = sample.features;
            EXPECT_EQ(score(odin, s.model, x), score(msp, s.model, x));
            EXPECT_EQ(score(dice, s.model, x), score(energy, s.model, x));
            EXPECT_EQ(score(ash, s.model, x), score(energy, s.model, x));
            EXPECT_EQ(score(drop, s.model, x, i), score(msp, s.model, x));
        }
    }
}

TEST(Scorers, ScaleExponentOfEqualMagnitudes) {
    EXPECT_EQ(scale_exponent(std::vector<double>{2.0, -2.0, 2.0, 2.0}, 85.0), 1.0);
    EXPECT_EQ(scale_exponent(std::vector<double>{0.0, 0.0}, 85.0), 1.0);
    // Top 15% of {1, 2, 3, 4} by magnitude is {4}: r = 10 / 4.
    EXPECT_DOUBLE_EQ(scale_exponent(std::vector<double>{1.0, -2.0, 3.0, 4.0}, 85.0), 2.5);
}

TEST(Scorers, AshPrunesBelowPercentile) {
    const auto pruned = ash_prune(std::vector<double>{0.1, -5.0, 0.3, 2.0, -0.2}, 50.0);
    EXPECT_EQ(pruned, (std::vector<double>{0.0, -5.0, 0.3, 2.0, 0.0}));
}

TEST(Scorers, PercentileMatchesLinearInterpolation) {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const auto v = survood::testing::random_vector(rng, rng.index(1, 30));
        const double p = rng.uniform(0, 100);
        EXPECT_NEAR(percentile(v, p), oracle::numpy_percentile(v, p), 1e-15);
    }
    EXPECT_THROW(percentile({}, 50), InputError);
}

TEST(Scorers, MatchStraightLineReimplementations) {
    Rng rng(6);
    for (int i = 0; i < 200; ++i) {
        const auto s = random_setup(rng, rng.index(1, 8), rng.index(1, 6));
        ScorerParams p;
        p.energy_temperature = rng.uniform(0.5, 3.0);
        p.odin_temperature = rng.coin() ? 1000.0 : rng.uniform(0.5, 10.0);
        p.odin_epsilon = rng.uniform(0.0, 0.1);
        p.scale_percentile = rng.uniform(0, 100);
        p.ash_percentile = rng.uniform(0, 100);
        p.dice_keep_percent = rng.uniform(1, 100);
        p.dropout_rate = rng.uniform(0, 0.5);
        p.dropout_trials = rng.index(1, 20);
        p.gen_gamma = rng.uniform(0.05, 1.0);
        p.seed = rng.index(0, 1000);
        const auto ref = [&] {
            std::vector<double> h(s.model.intervals(), 0.0);
            for (const auto& t : s.train) {
                const auto o = oracle::predict(s.model, t.features);
                for (std::size_t k = 0; k < h.size(); ++k) h[k] += static_cast<double>(o.hazard[k]);
            }
            for (auto& v : h) v /= static_cast<double>(s.train.size());
            return h;
        }();
        const auto mask = oracle::dice_mask(s.model, s.train, p.dice_keep_percent);
        const auto x = survood::testing::random_vector(rng, s.model.feature_dim());
        const std::uint64_t stream = rng.index(0, 1u << 20);
        auto run = [&](ScorerKind k) { return score(fit_scorer(k, p, s.model, s.train), s.model, x, stream); };
        EXPECT_NEAR(run(ScorerKind::hazard_dev), oracle::hazard_dev(s.model, x, ref), 1e-10);
        EXPECT_NEAR(run(ScorerKind::msp), oracle::msp(s.model, x), 1e-10);
        EXPECT_NEAR(run(ScorerKind::mls), oracle::mls(s.model, x), 1e-10);
        EXPECT_NEAR(run(ScorerKind::energy), oracle::energy(s.model, x, p.energy_temperature), 1e-10);
        EXPECT_NEAR(run(ScorerKind::gen), oracle::gen(s.model, x, p.gen_gamma), 1e-10);
        EXPECT_NEAR(run(ScorerKind::odin), oracle::odin(s.model, x, p.odin_temperature, p.odin_epsilon), 1e-10);
        EXPECT_NEAR(run(ScorerKind::scale), oracle::scale(s.model, x, p.scale_percentile, p.energy_temperature), 1e-10);
        EXPECT_NEAR(run(ScorerKind::ash), oracle::ash(s.model, x, p.ash_percentile, p.energy_temperature), 1e-10);
        EXPECT_NEAR(run(ScorerKind::dice), oracle::dice(s.model, mask, x, p.energy_temperature), 1e-10);
        EXPECT_NEAR(run(ScorerKind::dropout),
                    oracle::dropout(s.model, x, p.dropout_rate, p.dropout_trials, p.seed, stream), 1e-10);
    }
}

TEST(Scorers, OdinPerturbationRaisesTopSoftmax) {
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        const auto s = random_setup(rng, 5, 4);
        const auto x = survood::testing::random_vector(rng, 4);
        const auto xp = odin_perturb(s.model, x, 1.0, 1e-4);
        EXPECT_GE(max_softmax(logits(s.model, xp)), max_softmax(logits(s.model, x)) - 1e-15);
    }
}

TEST(Scorers, FittingState) {
    Rng rng(8);
    const auto s = random_setup(rng, 4, 3);
    for (const auto kind : kAllScorerKinds) {
        const auto scorer = fit_scorer(kind, {}, s.model, s.train);
        EXPECT_TRUE(scorer.is_fitted());
        EXPECT_EQ(scorer.reference_hazard().has_value(), kind == ScorerKind::hazard_dev);
        EXPECT_EQ(scorer.weight_mask().has_value(), kind == ScorerKind::dice);
    }
    const Cohort empty({}, s.train.feature_names());
    EXPECT_THROW(fit_scorer(ScorerKind::hazard_dev, {}, s.model, empty), InputError);
    EXPECT_THROW(fit_scorer(ScorerKind::dice, {}, s.model, empty), InputError);
    EXPECT_NO_THROW(fit_scorer(ScorerKind::msp, {}, s.model, empty));
    const OodScorer unfitted(ScorerKind::hazard_dev);
    EXPECT_FALSE(unfitted.is_fitted());
    EXPECT_THROW(score(unfitted, s.model, s.train[0].features), InputError);
}

TEST(Scorers, DiceKeepsRequestedShare) {
    Rng rng(9);
    const auto s = random_setup(rng, 5, 4);
    ScorerParams p;
    p.dice_keep_percent = 10.0;
    const auto scorer = fit_scorer(ScorerKind::dice, p, s.model, s.train);
    EXPECT_EQ(scorer.weight_mask()->sum(), 2.0);  // ceil(0.1 * 20)
    EXPECT_EQ(*scorer.weight_mask(), oracle::dice_mask(s.model, s.train, 10.0));
}

TEST(ScoreCohort, SingletonAndPermutation) {
    Rng rng(10);
    const auto s = random_setup(rng, 4, 3);
    for (const auto kind : kAllScorerKinds) {
        const auto scorer = fit_scorer(kind, {}, s.model, s.train);
        const auto all = score_cohort(scorer, s.model, s.train);
        ASSERT_EQ(all.size(), s.train.size());
        std::vector<std::string> ids;
        for (const auto& sample : s.train) ids.push_back(sample.id);
        const std::vector<std::string> one{ids[3]};
        const auto single = score_cohort(scorer, s.model, s.train.subset(one));
        ASSERT_EQ(single.size(), 1u);
        EXPECT_EQ(single[0].score, all[3].score);
        std::shuffle(ids.begin(), ids.end(), rng.engine());
        const auto permuted = score_cohort(scorer, s.model, s.train.subset(ids));
        for (std::size_t i = 0; i < ids.size(); ++i) {
            EXPECT_EQ(permuted[i].id, ids[i]);
            EXPECT_EQ(permuted[i].score, all[*s.train.index_of(ids[i])].score);
        }
    }
}

TEST(ScoreCohort, DropoutIsReproducible) {
    Rng rng(11);
    const auto s = random_setup(rng, 4, 3);
    ScorerParams p;
    p.seed = 42;
    p.dropout_rate = 0.3;
    const auto a = score_cohort(fit_scorer(ScorerKind::dropout, p, s.model, s.train), s.model, s.train);
    const auto b = score_cohort(fit_scorer(ScorerKind::dropout, p, s.model, s.train), s.model, s.train);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].score, b[i].score);
    p.seed = 43;
    const auto c = score_cohort(fit_scorer(ScorerKind::dropout, p, s.model, s.train), s.model, s.train);
    bool any_different = false;
    for (std::size_t i = 0; i < a.size(); ++i) any_different |= a[i].score != c[i].score;
    EXPECT_TRUE(any_different);
}

TEST(ScoreCohort, NonFiniteScoreIsNumericError) {
    Eigen::MatrixXd theta(2, 1);
    theta << 1.0, 1.0;
    const SurvivalModel model(unit_grid(2), theta, Eigen::VectorXd::Zero(2));
    const auto scorer = fit_scorer(ScorerKind::mls, {}, model, Cohort({}, {"x1"}));
    EXPECT_THROW(score(scorer, model, std::vector<double>{1e308}), NumericError);
}
