#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "survood/io.hpp"
#include "survood/mtlr.hpp"

using namespace survood;
using survood::testing::Rng;

namespace {

TrainingConfig no_reg() {
    TrainingConfig c;
    c.c1 = 0.0;
    c.c2 = 0.0;
    return c;
}

Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index r = 0;
    for (const auto& row : rows) {
        Eigen::Index c = 0;
        for (double v : row) m(r, c++) = v;
        ++r;
    }
    return m;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

TimeGrid unit_grid(std::size_t m) {
    std::vector<double> b;
    for (std::size_t i = 1; i <= m; ++i) b.push_back(static_cast<double>(i));
    return TimeGrid(b);
}

double relative_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

}  // namespace

TEST(Logits, ZeroParametersGiveZeroLogits) {
    const SurvivalModel model(unit_grid(4), 3);
    const auto f = logits(model, std::vector<double>{1.0, -2.0, 0.5});
    EXPECT_EQ(f.size(), 5);
    for (Eigen::Index k = 0; k < f.size(); ++k) EXPECT_EQ(f[k], 0.0);
}

TEST(Logits, LastEntryIsExactlyZero) {
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        const auto model = survood::testing::random_model(rng, survood::testing::random_grid(rng, rng.index(1, 8)), 3, 3.0);
        const auto f = logits(model, survood::testing::random_vector(rng, 3));
        EXPECT_EQ(f[f.size() - 1], 0.0);
    }
}

TEST(Logits, HandSuffixSum) {
    const SurvivalModel model(unit_grid(2), mat({{1}, {2}}), vec({0, 0}));
    const auto f = logits(model, std::vector<double>{3.0});
    EXPECT_EQ(f[0], 9.0);
    EXPECT_EQ(f[1], 6.0);
    EXPECT_EQ(f[2], 0.0);
    const auto o = oracle::logits(model.theta(), model.bias(), {3.0});
    for (int k = 0; k < 3; ++k) EXPECT_EQ(f[k], static_cast<double>(o[static_cast<std::size_t>(k)]));
}

TEST(Logits, MatchesLoopOracle) {
    Rng rng(2);
    for (int i = 0; i < 200; ++i) {
        const auto grid = survood::testing::random_grid(rng, rng.index(1, 8));
        const auto model = survood::testing::random_model(rng, grid, 4);
        const auto x = survood::testing::random_vector(rng, 4);
        const auto f = logits(model, x);
        const auto o = oracle::logits(model.theta(), model.bias(), x);
        for (std::size_t k = 0; k < o.size(); ++k) EXPECT_NEAR(f[static_cast<Eigen::Index>(k)], static_cast<double>(o[k]), 1e-12);
    }
}

TEST(Logits, DimensionMismatchIsInputError) {
    const SurvivalModel model(unit_grid(2), 3);
    EXPECT_THROW(logits(model, std::vector<double>{1.0}), InputError);
}

TEST(Logits, HomogeneousWithoutBias) {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const auto grid = survood::testing::random_grid(rng, rng.index(1, 8));
        auto model = survood::testing::random_model(rng, grid, 5);
        model = model.with_parameters(model.theta(), Eigen::VectorXd::Zero(model.bias().size()));
        const auto x = survood::testing::random_vector(rng, 5);
        const double alpha = rng.uniform(-3, 3);
        std::vector<double> ax;
        for (double v : x) ax.push_back(alpha * v);
        const auto f = logits(model, x);
        const auto g = logits(model, ax);
        for (Eigen::Index k = 0; k < f.size(); ++k) {
            EXPECT_LE(std::abs(g[k] - alpha * f[k]), 1e-12 * std::max(1.0, std::abs(alpha * f[k])));
        }
    }
}

TEST(Softmax, SumsToOne) {
    Rng rng(4);
    for (int i = 0; i < 1000; ++i) {
        Eigen::VectorXd f(static_cast<Eigen::Index>(rng.index(1, 12)));
        for (Eigen::Index k = 0; k < f.size(); ++k) f[k] = rng.normal(0, 50);
        const auto p = softmax(f);
        EXPECT_NEAR(p.sum(), 1.0, 1e-9);
        for (Eigen::Index k = 0; k < p.size(); ++k) {
            EXPECT_GE(p[k], 0.0);
            EXPECT_LE(p[k], 1.0);
        }
    }
}

TEST(Softmax, NegativePerturbationOfEarlyEntriesLowersEarlyMass) {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const auto n = static_cast<Eigen::Index>(rng.index(2, 10));
        Eigen::VectorXd f(n);
        for (Eigen::Index k = 0; k < n; ++k) f[k] = rng.normal(0, 2);
        const auto j = static_cast<Eigen::Index>(rng.index(1, static_cast<std::size_t>(n - 1)));
        Eigen::VectorXd g = f;
        for (Eigen::Index k = 0; k < j; ++k) g[k] -= rng.uniform(0.01, 2.0);
        EXPECT_LT(softmax(g).head(j).sum(), softmax(f).head(j).sum());
    }
}

TEST(Nll, UniformEventIsLogNine) {
    const SurvivalModel model(unit_grid(8), 2, no_reg());
    const auto c = survood::testing::make_cohort({{0.3, -1.0}}, {2.5}, {true});
    const auto labels = encode_labels(c, model.grid());
    EXPECT_NEAR(nll(model, c, labels), std::log(9.0), 1e-15);
}

TEST(Nll, CensoredFromZeroContributesNothing) {
    const SurvivalModel model(unit_grid(8), 2, no_reg());
    const auto c = survood::testing::make_cohort({{0.3, -1.0}}, {0.5}, {false});
    const auto labels = encode_labels(c, model.grid());
    ASSERT_EQ(labels[0].censor_floor(), 0u);
    EXPECT_EQ(nll(model, c, labels), 0.0);
}

TEST(Nll, SmallCohortMatchesSequenceOracle) {
    TrainingConfig hyper;
    hyper.c1 = 0.3;
    hyper.c2 = 0.7;
    const SurvivalModel model(TimeGrid({1.0, 2.0}), mat({{0.5, -1.0}, {2.0, 0.25}}), vec({0.1, -0.3}), hyper);
    const auto c = survood::testing::make_cohort({{1, 2}, {-0.5, 0.5}, {0.2, -1}}, {0.5, 1.5, 1.2},
                                                 {true, false, true});
    const auto labels = encode_labels(c, model.grid());
    EXPECT_NEAR(nll(model, c, labels), static_cast<double>(oracle::nll_by_sequences(model, c)), 1e-12);
}

TEST(Nll, RandomInstancesMatchSequenceOracle) {
    Rng rng(6);
    for (int i = 0; i < 100; ++i) {
        TrainingConfig hyper;
        hyper.c1 = rng.uniform(0, 1);
        hyper.c2 = rng.uniform(0, 1);
        const auto grid = survood::testing::random_grid(rng, rng.index(1, 6));
        const auto model = survood::testing::random_model(rng, grid, 3, 1.0, hyper);
        const auto c = survood::testing::random_cohort(rng, rng.index(1, 15), 3, grid);
        const double got = nll(model, c, encode_labels(c, grid));
        const double want = static_cast<double>(oracle::nll_by_sequences(model, c));
        EXPECT_LE(std::abs(got - want), 1e-12 * std::max(1.0, std::abs(want)));
    }
}

TEST(Nll, EmptyCohortAndMisalignedLabelsRejected) {
    const SurvivalModel model(unit_grid(2), 1);
    const auto c = survood::testing::make_cohort({{1}}, {1}, {true});
    EXPECT_THROW(nll(model, c, {}), InputError);
    const Cohort empty({}, {"x1"});
    EXPECT_THROW(nll(model, empty, {}), InputError);
}

TEST(Gradient, MatchesFiniteDifferences) {
    Rng rng(7);
    for (int i = 0; i < 50; ++i) {
        TrainingConfig hyper;
        hyper.c1 = rng.uniform(0, 0.5);
        hyper.c2 = rng.uniform(0, 0.5);
        const auto grid = survood::testing::random_grid(rng, rng.index(1, 5));
        const auto d = rng.index(1, 4);
        const auto model = survood::testing::random_model(rng, grid, d, 1.0, hyper);
        const auto c = survood::testing::random_cohort(rng, rng.index(2, 20), d, grid);
        const auto labels = encode_labels(c, grid);
        const auto g = nll_gradient(model, c, labels);
        const auto fd = oracle::finite_difference_gradient(model, c, labels);
        for (Eigen::Index r = 0; r < g.theta.rows(); ++r) {
            for (Eigen::Index col = 0; col < g.theta.cols(); ++col) EXPECT_LE(relative_gap(g.theta(r, col), fd.theta(r, col)), 1e-6);
            EXPECT_LE(relative_gap(g.bias[r], fd.bias[r]), 1e-6);
        }
    }
}

TEST(Gradient, SingleSampleSignFollowsFiniteDifferences) {
    // m = 1, x = 1, theta = 0: pi = (1/2, 1/2). The likelihood gradient on theta_1 is
    // (y_1 - pi_0) x with y_1 = 1 iff the outcome index is 0, so nll's gradient is
    // -0.5 for an event in the first interval and +0.5 for the beyond-horizon outcome.
    const SurvivalModel model(TimeGrid({1.0}), 1, no_reg());
    for (const auto& [time, expected] : {std::pair{0.5, -0.5}, std::pair{2.0, 0.5}}) {
        const auto c = survood::testing::make_cohort({{1.0}}, {time}, {true});
        const auto labels = encode_labels(c, model.grid());
        const auto g = nll_gradient(model, c, labels);
        const auto fd = oracle::finite_difference_gradient(model, c, labels);
        EXPECT_NEAR(g.theta(0, 0), expected, 1e-15);
        EXPECT_NEAR(fd.theta(0, 0), expected, 1e-9);
    }
}

TEST(Gradient, FullyUncertainCensoringLeavesOnlyRegularizers) {
    Rng rng(8);
    TrainingConfig hyper;
    hyper.c1 = 0.37;
    hyper.c2 = 1.3;
    const auto grid = survood::testing::random_grid(rng, 5);
    const auto model = survood::testing::random_model(rng, grid, 3, 1.0, hyper);
    std::vector<std::vector<double>> f;
    for (int i = 0; i < 6; ++i) f.push_back(survood::testing::random_vector(rng, 3));
    const auto c = survood::testing::make_cohort(f, std::vector<double>(6, 0.0), std::vector<bool>(6, false));
    const auto g = nll_gradient(model, c, encode_labels(c, grid));
    const auto& th = model.theta();
    const auto m = th.rows();
    for (Eigen::Index r = 0; r < m; ++r) {
        for (Eigen::Index col = 0; col < th.cols(); ++col) {
            double smooth = 0.0;
            if (r > 0) smooth += th(r, col) - th(r - 1, col);
            if (r + 1 < m) smooth -= th(r + 1, col) - th(r, col);
            EXPECT_NEAR(g.theta(r, col), hyper.c1 * th(r, col) + hyper.c2 * smooth, 1e-12);
        }
        EXPECT_NEAR(g.bias[r], 0.0, 1e-12);
    }
}

TEST(Fit, SeparableToyImprovesOnZero) {
    std::vector<std::vector<double>> f;
    std::vector<double> t;
    std::vector<bool> e;
    for (int i = 0; i < 10; ++i) {
        f.push_back({1.0});
        t.push_back(0.5);
        e.push_back(true);
        f.push_back({-1.0});
        t.push_back(10.0);
        e.push_back(true);
    }
    const auto c = survood::testing::make_cohort(f, t, e);
    TrainingConfig cfg;
    cfg.c1 = 0.1;
    const auto grid = unit_grid(4);
    const auto result = fit(c, grid, cfg);
    const SurvivalModel zero(grid, 1, cfg);
    EXPECT_LT(result.report.final_nll, nll(zero, c, encode_labels(c, grid)));
    EXPECT_EQ(result.report.initial_nll, nll(zero, c, encode_labels(c, grid)));
    if (result.report.converged) EXPECT_LT(result.report.final_grad_norm, cfg.grad_tolerance);
}

TEST(Fit, HugeL2ShrinksThetaToZero) {
    Rng rng(9);
    const auto grid = survood::testing::random_grid(rng, 4);
    const auto c = survood::testing::random_cohort(rng, 60, 3, grid);
    TrainingConfig cfg;
    cfg.c1 = 1e6;
    const auto result = fit(c, grid, cfg);
    EXPECT_LT(result.model.theta().cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Fit, ConvergedImpliesSmallGradient) {
    Rng rng(10);
    for (int i = 0; i < 10; ++i) {
        const auto grid = survood::testing::random_grid(rng, rng.index(1, 6));
        const auto c = survood::testing::random_cohort(rng, 80, 3, grid);
        TrainingConfig cfg;
        cfg.max_iters = rng.index(5, 3000);
        const auto r = fit(c, grid, cfg);
        const auto g = nll_gradient(r.model, c, encode_labels(c, grid));
        if (r.report.converged) {
            EXPECT_LT(g.inf_norm() / static_cast<double>(c.size()), cfg.grad_tolerance);
        } else {
            EXPECT_EQ(r.report.iterations, cfg.max_iters);
        }
        EXPECT_DOUBLE_EQ(r.report.final_nll, nll(r.model, c, encode_labels(c, grid)));
    }
}

TEST(Fit, FixedSmallStepsNeverIncreaseNll) {
    Rng rng(11);
    const auto grid = survood::testing::random_grid(rng, 5);
    const auto c = survood::testing::random_cohort(rng, 100, 4, grid);
    TrainingConfig cfg;
    cfg.backtracking = false;
    cfg.learning_rate = 1e-3;
    cfg.grad_tolerance = 1e-300;
    double prev = INFINITY;
    for (std::size_t iters = 1; iters <= 40; ++iters) {
        cfg.max_iters = iters;
        const auto r = fit(c, grid, cfg);
        EXPECT_EQ(r.report.iterations, iters);
        EXPECT_LE(r.report.final_nll, prev);
        prev = r.report.final_nll;
    }
}

TEST(Fit, DeterministicAndSeedIndependent) {
    Rng rng(12);
    const auto grid = survood::testing::random_grid(rng, 3);
    const auto c = survood::testing::random_cohort(rng, 50, 2, grid);
    TrainingConfig a, b;
    b.seed = 99;
    const auto ra = fit(c, grid, a);
    const auto rb = fit(c, grid, b);
    EXPECT_EQ(ra.model.theta(), rb.model.theta());
    EXPECT_EQ(ra.model.bias(), rb.model.bias());
}

TEST(Fit, NonFiniteObjectiveIsReported) {
    const auto c = survood::testing::make_cohort({{1e200}, {-1e200}}, {0.5, 3.0}, {true, true});
    TrainingConfig cfg;
    cfg.backtracking = false;
    cfg.learning_rate = 1e100;
    cfg.c1 = 0.0;
    cfg.c2 = 0.0;
    EXPECT_THROW(fit(c, unit_grid(2), cfg), NumericError);
}

TEST(Fit, InvalidConfigRejected) {
    const auto c = survood::testing::make_cohort({{1}}, {1}, {true});
    TrainingConfig cfg;
    cfg.learning_rate = 0.0;
    EXPECT_THROW(fit(c, unit_grid(2), cfg), InputError);
    cfg = {};
    cfg.c1 = -1;
    EXPECT_THROW(fit(c, unit_grid(2), cfg), InputError);
    cfg = {};
    cfg.max_iters = 0;
    EXPECT_THROW(fit(c, unit_grid(2), cfg), InputError);
}

TEST(SgdStep, LaterLogitsUnchangedAndEarlierShiftByFormula) {
    Rng rng(13);
    for (int i = 0; i < 100; ++i) {
        const auto grid = survood::testing::random_grid(rng, rng.index(1, 6));
        const auto m = grid.size();
        const auto model = survood::testing::random_model(rng, grid, 3);
        const auto x = survood::testing::random_vector(rng, 3);
        const auto k_out = rng.index(0, m);
        const auto label = LabelEncoding::event_at(k_out);
        const auto j = rng.index(1, m);
        const double eta = rng.uniform(0.001, 0.5);
        const auto before = logits(model, x);
        const auto after = logits(sgd_step_on_row(model, x, label, j, eta), x);
        const auto pi = softmax(before);
        const double y = k_out < j ? 1.0 : 0.0;
        double sq = 0.0;
        for (double v : x) sq += v * v;
        const double expected = eta * (y - pi.head(static_cast<Eigen::Index>(j)).sum()) * sq;
        for (std::size_t k = 0; k <= m; ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            if (k >= j) {
                EXPECT_EQ(after[kk], before[kk]);
            } else {
                EXPECT_NEAR(after[kk] - before[kk], expected, 1e-10);
            }
        }
    }
}

TEST(SgdStep, TouchesOnlyRowJ) {
    Rng rng(14);
    const auto grid = survood::testing::random_grid(rng, 4);
    const auto model = survood::testing::random_model(rng, grid, 3);
    const auto x = survood::testing::random_vector(rng, 3);
    const auto next = sgd_step_on_row(model, x, LabelEncoding::censored_from(1), 3, 0.1);
    for (Eigen::Index r = 0; r < 4; ++r) {
        if (r != 2) EXPECT_EQ(next.theta().row(r), model.theta().row(r));
    }
    EXPECT_EQ(next.bias(), model.bias());
    EXPECT_NE(next.theta().row(2), model.theta().row(2));
}

TEST(SgdStep, ZeroFeaturesLeaveModelUnchanged) {
    Rng rng(15);
    const auto grid = survood::testing::random_grid(rng, 4);
    const auto model = survood::testing::random_model(rng, grid, 3);
    const auto next = sgd_step_on_row(model, std::vector<double>(3, 0.0), LabelEncoding::event_at(2), 2, 0.5);
    EXPECT_EQ(next.theta(), model.theta());
    EXPECT_EQ(next.bias(), model.bias());
}

TEST(SgdStep, IntervalIndexOutOfRange) {
    const SurvivalModel model(unit_grid(3), 1);
    EXPECT_THROW(sgd_step_on_row(model, std::vector<double>{1.0}, LabelEncoding::event_at(0), 0, 0.1), InputError);
    EXPECT_THROW(sgd_step_on_row(model, std::vector<double>{1.0}, LabelEncoding::event_at(0), 4, 0.1), InputError);
}

TEST(Predict, UniformModelHasAnalyticHazard) {
    const SurvivalModel model(unit_grid(8), 2);
    const auto p = predict(model, std::vector<double>{0.4, 1.0});
    for (double v : p.outcome_probs) EXPECT_NEAR(v, 1.0 / 9.0, 1e-15);
    for (std::size_t i = 1; i <= 8; ++i) {
        EXPECT_NEAR(p.hazard[i - 1], 1.0 / (10.0 - static_cast<double>(i)), 1e-12);
        EXPECT_NEAR(p.survival[i - 1], (10.0 - static_cast<double>(i)) / 9.0, 1e-12);
    }
    EXPECT_FALSE(p.degenerate_tail);
}

TEST(Predict, FuzzedModelsKeepInvariants) {
    Rng rng(16);
    for (int i = 0; i < 2000; ++i) {
        const auto grid = survood::testing::random_grid(rng, rng.index(1, 10));
        const auto model = survood::testing::random_model(rng, grid, 3, rng.uniform(0.01, 20.0));
        const auto p = predict(model, survood::testing::random_vector(rng, 3, 3.0));
        double total = 0.0;
        for (double v : p.outcome_probs) total += v;
        EXPECT_NEAR(total, 1.0, 1e-9);
        EXPECT_EQ(p.survival[0], 1.0);
        for (std::size_t k = 1; k < p.survival.size(); ++k) EXPECT_LE(p.survival[k], p.survival[k - 1]);
        for (double h : p.hazard) {
            EXPECT_GE(h, 0.0);
            EXPECT_LE(h, 1.0);
        }
    }
}

TEST(Predict, MatchesDirectSummationOracle) {
    Rng rng(17);
    for (int i = 0; i < 100; ++i) {
        const auto grid = survood::testing::random_grid(rng, 3);
        const auto model = survood::testing::random_model(rng, grid, 2);
        const auto x = survood::testing::random_vector(rng, 2);
        const auto p = predict(model, x);
        const auto o = oracle::predict(model, x);
        for (std::size_t k = 0; k < 3; ++k) {
            EXPECT_NEAR(p.hazard[k], static_cast<double>(o.hazard[k]), 1e-12);
            EXPECT_NEAR(p.survival[k], static_cast<double>(o.survival[k]), 1e-12);
        }
    }
}

TEST(Predict, UnderflowingTailIsFlagged) {
    // The first outcome takes essentially all mass, so later survival underflows.
    const SurvivalModel model(unit_grid(3), mat({{0}, {0}, {0}}), vec({800, 0, 0}));
    const auto p = predict(model, std::vector<double>{0.0});
    EXPECT_TRUE(p.degenerate_tail);
    EXPECT_EQ(p.hazard[0], 1.0);
    EXPECT_EQ(p.hazard[1], 0.0);
    EXPECT_EQ(p.hazard[2], 0.0);
}

TEST(MeanHazard, IdenticalSamplesGiveTheirHazard) {
    Rng rng(18);
    const auto grid = survood::testing::random_grid(rng, 4);
    const auto model = survood::testing::random_model(rng, grid, 2);
    const std::vector<double> x{0.3, -0.8};
    const auto c = survood::testing::make_cohort({x, x, x}, {1, 2, 3}, {true, false, true});
    const auto h = mean_hazard(model, c);
    const auto single = predict(model, x);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(h.values[i], single.hazard[i], 1e-15);
}

TEST(MeanHazard, TwoSampleArithmetic) {
    // Parameters chosen so x = +1 has hazards (0.2, 0.4) and x = -1 has (0.4, 0.2).
    const double row2_plus = std::log(2.0 / 3.0), row2_minus = std::log(0.25);
    const double row1_plus = std::log(5.0 / 12.0) - row2_plus, row1_minus = std::log(5.0 / 6.0) - row2_minus;
    const SurvivalModel model(TimeGrid({1.0, 2.0}),
                              mat({{(row1_plus - row1_minus) / 2}, {(row2_plus - row2_minus) / 2}}),
                              vec({(row1_plus + row1_minus) / 2, (row2_plus + row2_minus) / 2}));
    const auto a = predict(model, std::vector<double>{1.0});
    ASSERT_NEAR(a.hazard[0], 0.2, 1e-12);
    ASSERT_NEAR(a.hazard[1], 0.4, 1e-12);
    const auto c = survood::testing::make_cohort({{1.0}, {-1.0}}, {1, 1}, {true, true});
    const auto h = mean_hazard(model, c);
    EXPECT_NEAR(h.values[0], 0.3, 1e-12);
    EXPECT_NEAR(h.values[1], 0.3, 1e-12);
}

TEST(MeanHazard, MatchesNaiveLoop) {
    Rng rng(19);
    const auto grid = survood::testing::random_grid(rng, 6);
    const auto model = survood::testing::random_model(rng, grid, 3);
    const auto c = survood::testing::random_cohort(rng, 50, 3, grid);
    const auto h = mean_hazard(model, c);
    for (std::size_t i = 0; i < 6; ++i) {
        long double s = 0;
        for (const auto& sample : c) s += oracle::predict(model, sample.features).hazard[i];
        EXPECT_NEAR(h.values[i], static_cast<double>(s / 50), 1e-12);
    }
    EXPECT_THROW(mean_hazard(model, Cohort({}, {"a", "b", "c"})), InputError);
}

TEST(ModelFile, RoundTripReproducesLogitsBitForBit) {
    Rng rng(20);
    TrainingConfig hyper;
    hyper.c1 = 0.125;
    hyper.max_iters = 77;
    const auto grid = survood::testing::random_grid(rng, 5);
    const auto model = survood::testing::random_model(rng, grid, 4, 1.0, hyper);
    const auto text = serialize_model(model);
    const auto back = parse_model(text);
    EXPECT_EQ(back.theta(), model.theta());
    EXPECT_EQ(back.bias(), model.bias());
    EXPECT_EQ(back.grid(), model.grid());
    EXPECT_EQ(back.hyper().c1, 0.125);
    EXPECT_EQ(back.hyper().max_iters, 77u);
    for (int i = 0; i < 20; ++i) {
        const auto x = survood::testing::random_vector(rng, 4);
        EXPECT_EQ(logits(back, x), logits(model, x));
    }
    EXPECT_EQ(serialize_model(back), text);
}

TEST(ModelFile, TamperedValueFailsChecksum) {
    const SurvivalModel model(unit_grid(2), mat({{0.5}, {0.25}}), vec({1, 2}));
    auto text = serialize_model(model);
    const auto pos = text.find("0.25");
    ASSERT_NE(pos, std::string::npos);
    text.replace(pos, 4, "0.26");
    try {
        parse_model(text);
        FAIL() << "expected checksum failure";
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("checksum"), std::string::npos);
    }
    EXPECT_THROW(parse_model("{not json"), InputError);
    EXPECT_THROW(load_model("/nonexistent/model.json"), InputError);
}
