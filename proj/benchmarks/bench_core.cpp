#include <benchmark/benchmark.h>

#include "survood/metrics.hpp"
#include "survood/ood.hpp"
#include "survood/synth.hpp"

using namespace survood;

namespace {

SynthResult cohort(std::size_t n) {
    SynthConfig c;
    c.n = n;
    c.n_ood = 1;
    c.seed = 1;
    return generate(c);
}

}  // namespace

static void BM_NllGradient(benchmark::State& state) {
    const auto data = cohort(static_cast<std::size_t>(state.range(0)));
    const auto labels = encode_labels(data.id, data.truth.grid());
    for (auto _ : state) benchmark::DoNotOptimize(nll_gradient(data.truth, data.id, labels));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NllGradient)->Arg(1000)->Arg(10000);

static void BM_Fit(benchmark::State& state) {
    const auto data = cohort(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(fit(data.id, data.truth.grid(), {}));
}
BENCHMARK(BM_Fit)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_Scorer(benchmark::State& state) {
    const auto kind = kAllScorerKinds[static_cast<std::size_t>(state.range(0))];
    const auto data = cohort(500);
    const auto scorer = fit_scorer(kind, {}, data.truth, data.id);
    for (auto _ : state) benchmark::DoNotOptimize(score_cohort(scorer, data.truth, data.id));
    state.SetLabel(std::string(to_string(kind)));
    state.SetItemsProcessed(state.iterations() * 500);
}
BENCHMARK(BM_Scorer)->DenseRange(0, static_cast<int>(kAllScorerKinds.size()) - 1);

static void BM_Concordance(benchmark::State& state) {
    const auto data = cohort(static_cast<std::size_t>(state.range(0)));
    const auto risks = risk_scores(data.truth, data.id);
    for (auto _ : state) benchmark::DoNotOptimize(concordance(risks, data.id));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Concordance)->RangeMultiplier(4)->Range(1 << 10, 1 << 16)->Complexity(benchmark::oNLogN);

static void BM_Auroc(benchmark::State& state) {
    const auto data = cohort(static_cast<std::size_t>(state.range(0)));
    const auto scorer = fit_scorer(ScorerKind::energy, {}, data.truth, data.id);
    std::vector<double> s;
    for (const auto& v : score_cohort(scorer, data.truth, data.id)) s.push_back(v.score);
    const std::vector<double> id(s.begin(), s.begin() + s.size() / 2), ood(s.begin() + s.size() / 2, s.end());
    for (auto _ : state) benchmark::DoNotOptimize(auroc({id, ood}));
}
BENCHMARK(BM_Auroc)->Arg(10000);
BENCHMARK_MAIN();
