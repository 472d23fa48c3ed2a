#include "survood/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace survood {

double risk_from_model(const SurvivalModel& model, FeatureView x) {
    const auto p = predict(model, x);
    double area = 0.0;
    for (double g : p.survival) area += g;
    return -area;
}

std::vector<RiskScore> risk_scores(const SurvivalModel& model, const Cohort& cohort) {
    std::vector<RiskScore> out;
    out.reserve(cohort.size());
    for (const auto& s : cohort) out.push_back({s.id, risk_from_model(model, s.features)});
    return out;
}

namespace {

// Fenwick tree over 1-based positions.
class CountTree {
public:
    explicit CountTree(std::size_t n) : tree_(n + 1, 0) {}
    void add(std::size_t pos) {
        for (; pos < tree_.size(); pos += pos & (~pos + 1)) ++tree_[pos];
    }
    std::uint64_t prefix(std::size_t pos) const {  // count at positions <= pos
        std::uint64_t s = 0;
        for (; pos > 0; pos -= pos & (~pos + 1)) s += tree_[pos];
        return s;
    }

private:
    std::vector<std::uint64_t> tree_;
};

void require_finite(std::span<const double> v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw InputError(std::string(what) + ": non-finite value");
    }
}

void require_nonempty(const DetectionOutcome& o, const char* what) {
    if (o.id_scores.empty() || o.ood_scores.empty()) {
        throw InputError(std::string(what) + ": both ID and OOD score lists must be nonempty");
    }
    require_finite(o.id_scores, what);
    require_finite(o.ood_scores, what);
}

struct Labeled {
    double score;
    bool positive;
};

// Pooled scores sorted by descending score.
std::vector<Labeled> pooled_descending(const DetectionOutcome& o) {
    std::vector<Labeled> all;
    all.reserve(o.id_scores.size() + o.ood_scores.size());
    for (double s : o.ood_scores) all.push_back({s, true});
    for (double s : o.id_scores) all.push_back({s, false});
    std::sort(all.begin(), all.end(), [](const Labeled& a, const Labeled& b) { return a.score > b.score; });
    return all;
}

}  // namespace

ConcordanceResult concordance(std::span<const TimeToEvent> outcomes, std::span<const double> risks) {
    if (outcomes.size() != risks.size()) throw InputError("concordance: risks do not align with outcomes");
    require_finite(risks, "concordance");
    const std::size_t n = outcomes.size();

    std::vector<double> distinct(risks.begin(), risks.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    auto rank_of = [&](double r) {
        return static_cast<std::size_t>(std::lower_bound(distinct.begin(), distinct.end(), r) - distinct.begin()) + 1;
    };

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return outcomes[a].time > outcomes[b].time; });

    // Walk from the latest time; the tree holds samples with strictly later times.
    CountTree tree(distinct.size());
    std::uint64_t inserted = 0;
    ConcordanceResult res;
    for (std::size_t g = 0; g < n;) {
        std::size_t end = g;
        while (end < n && outcomes[order[end]].time == outcomes[order[g]].time) ++end;
        for (std::size_t i = g; i < end; ++i) {
            const std::size_t s = order[i];
            if (!outcomes[s].event) continue;
            const std::size_t r = rank_of(risks[s]);
            const std::uint64_t below = tree.prefix(r - 1);
            const std::uint64_t equal = tree.prefix(r) - below;
            res.comparable_pairs += inserted;
            res.concordant_pairs += below;
            res.tied_pairs += equal;
        }
        for (std::size_t i = g; i < end; ++i) {
            tree.add(rank_of(risks[order[i]]));
            ++inserted;
        }
        g = end;
    }
    if (res.comparable_pairs == 0) throw UndefinedMetricError("concordance: no comparable pairs");
    res.value = static_cast<double>(2 * res.concordant_pairs + res.tied_pairs) /
                static_cast<double>(2 * res.comparable_pairs);
    return res;
}

ConcordanceResult concordance(std::span<const RiskScore> risks, const Cohort& cohort) {
    std::vector<TimeToEvent> outcomes;
    std::vector<double> r;
    outcomes.reserve(risks.size());
    r.reserve(risks.size());
    for (const auto& rs : risks) {
        const auto idx = cohort.index_of(rs.id);
        if (!idx) throw InputError("concordance: risk for unknown id '" + rs.id + "'");
        outcomes.push_back({cohort[*idx].time, cohort[*idx].event});
        r.push_back(rs.risk);
    }
    return concordance(outcomes, r);
}

double concordance_index(std::span<const RiskScore> risks, const Cohort& cohort) {
    return concordance(risks, cohort).value;
}

double auroc(const DetectionOutcome& outcome) {
    require_nonempty(outcome, "auroc");
    std::vector<double> id_sorted = outcome.id_scores;
    std::sort(id_sorted.begin(), id_sorted.end());
    std::uint64_t twice_wins = 0;
    for (double s : outcome.ood_scores) {
        const auto lo = std::lower_bound(id_sorted.begin(), id_sorted.end(), s);
        const auto hi = std::upper_bound(lo, id_sorted.end(), s);
        twice_wins += 2 * static_cast<std::uint64_t>(lo - id_sorted.begin()) + static_cast<std::uint64_t>(hi - lo);
    }
    const std::uint64_t pairs = outcome.id_scores.size() * outcome.ood_scores.size();
    return static_cast<double>(twice_wins) / static_cast<double>(2 * pairs);
}

double auprc(const DetectionOutcome& outcome) {
    require_nonempty(outcome, "auprc");
    const auto all = pooled_descending(outcome);
    const auto positives = static_cast<double>(outcome.ood_scores.size());
    std::uint64_t tp = 0, fp = 0;
    double prev_recall = 0.0, area = 0.0;
    for (std::size_t g = 0; g < all.size();) {
        std::size_t end = g;
        for (; end < all.size() && all[end].score == all[g].score; ++end) {
            all[end].positive ? ++tp : ++fp;
        }
        const double recall = static_cast<double>(tp) / positives;
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
        g = end;
    }
    return area;
}

double fpr_at_tpr(const DetectionOutcome& outcome, double tpr_target) {
    require_nonempty(outcome, "fpr_at_tpr");
    if (!(tpr_target > 0.0 && tpr_target <= 1.0)) throw InputError("fpr_at_tpr: target must lie in (0, 1]");
    const auto all = pooled_descending(outcome);
    const auto positives = static_cast<double>(outcome.ood_scores.size());
    const auto negatives = static_cast<double>(outcome.id_scores.size());
    std::uint64_t tp = 0, fp = 0;
    for (std::size_t g = 0; g < all.size();) {
        std::size_t end = g;
        for (; end < all.size() && all[end].score == all[g].score; ++end) {
            all[end].positive ? ++tp : ++fp;
        }
        if (static_cast<double>(tp) / positives >= tpr_target) return static_cast<double>(fp) / negatives;
        g = end;
    }
    return 1.0;
}

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    for (std::size_t g = 0; g < n;) {
        std::size_t end = g;
        while (end < n && values[order[end]] == values[order[g]]) ++end;
        const double avg = (static_cast<double>(g + 1) + static_cast<double>(end)) / 2.0;
        for (std::size_t i = g; i < end; ++i) ranks[order[i]] = avg;
        g = end;
    }
    return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InputError("pearson: length mismatch");
    if (x.size() < 2) throw InputError("pearson: at least two points required");
    require_finite(x, "pearson");
    require_finite(y, "pearson");
    // Extended precision keeps exactly collinear inputs at exactly +-1.
    const auto n = static_cast<long double>(x.size());
    long double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    long double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const long double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0 || syy == 0) throw UndefinedMetricError("pearson: constant input");
    const auto r = static_cast<double>(sxy / std::sqrt(sxx * syy));
    return std::clamp(r, -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InputError("spearman: length mismatch");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    return pearson(rx, ry);
}

}  // namespace survood
