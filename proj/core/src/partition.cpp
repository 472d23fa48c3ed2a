#include "survood/partition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "survood/json_io.hpp"
#include "survood/random.hpp"

namespace survood {

ValueRange ValueRange::interval(double lo, double hi) {
    if (!(lo <= hi)) throw InputError("value range: lower bound exceeds upper bound");
    return {lo, hi, {}};
}

ValueRange ValueRange::value_set(std::vector<double> values) {
    if (values.empty()) throw InputError("value range: empty value set");
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    ValueRange r;
    r.lo = values.front();
    r.hi = values.back();
    r.values = std::move(values);
    return r;
}

bool ValueRange::contains(double v) const {
    if (is_set()) return std::binary_search(values.begin(), values.end(), v);
    return v >= lo && v <= hi;
}

bool ValueRange::overlaps(const ValueRange& other) const {
    if (is_set()) {
        return std::any_of(values.begin(), values.end(), [&](double v) { return other.contains(v); });
    }
    if (other.is_set()) return other.overlaps(*this);
    return !(hi < other.lo || other.hi < lo);
}

void PartitionRule::validate() const {
    if (parameter.empty()) throw InputError("partition rule: parameter name is empty");
    if (n_test == 0) throw InputError("partition rule: n_test must be positive");
    if (id_range.overlaps(ood_range)) throw InputError("partition rule: ID and OOD ranges overlap");
}

PartitionRule derive_rule(const Cohort& cohort, const std::string& parameter, std::size_t n_test,
                          std::uint64_t seed) {
    std::map<double, std::size_t> counts;
    for (const auto& s : cohort) {
        if (auto v = s.acquisition_value(parameter)) ++counts[*v];
    }
    if (counts.empty()) throw InputError("derive_rule: no sample carries acquisition parameter '" + parameter + "'");
    if (counts.size() < 2) {
        throw InputError("derive_rule: parameter '" + parameter + "' has a single setting; need two groups");
    }

    std::vector<double> distinct;
    for (const auto& [v, c] : counts) distinct.push_back(v);

    PartitionRule rule;
    rule.parameter = parameter;
    rule.n_test = n_test;
    rule.seed = seed;

    // Index of the first value of the upper cluster.
    std::size_t cut = 1;
    if (distinct.size() > 2) {
        double best = -1.0;
        for (std::size_t i = 1; i < distinct.size(); ++i) {
            const double lo = distinct[i - 1], hi = distinct[i];
            const double gap = (hi - lo) / std::max(std::abs(lo), std::abs(hi));
            if (gap > best) {
                best = gap;
                cut = i;
            }
        }
        rule.gap_lower = distinct[cut - 1];
        rule.gap_upper = distinct[cut];
    }

    auto group_range = [&](std::size_t from, std::size_t to) {
        if (to - from == 1) return ValueRange::value_set({distinct[from]});
        return ValueRange::interval(distinct[from], distinct[to - 1]);
    };
    std::size_t lower_count = 0, upper_count = 0;
    for (std::size_t i = 0; i < distinct.size(); ++i) (i < cut ? lower_count : upper_count) += counts[distinct[i]];
    const ValueRange lower = group_range(0, cut);
    const ValueRange upper = group_range(cut, distinct.size());

    rule.tie_broken = lower_count == upper_count;
    if (lower_count > upper_count) {
        rule.id_range = lower;
        rule.ood_range = upper;
        rule.id_group_size = lower_count;
        rule.ood_group_size = upper_count;
    } else {
        rule.id_range = upper;
        rule.ood_range = lower;
        rule.id_group_size = upper_count;
        rule.ood_group_size = lower_count;
    }
    return rule;
}

std::string_view to_string(ExclusionReason reason) {
    switch (reason) {
        case ExclusionReason::missing_metadata: return "missing_metadata";
        case ExclusionReason::out_of_range: return "out_of_range";
        case ExclusionReason::ood_reserve: return "ood_reserve";
    }
    return "unknown";
}

std::vector<std::string> BenchmarkSplit::excluded_ids() const {
    std::vector<std::string> out;
    out.reserve(excluded.size());
    for (const auto& e : excluded) out.push_back(e.id);
    return out;
}

namespace {

// Indices (into `members`) of the k members with the smallest draw keys.
std::vector<std::size_t> draw(const Cohort& cohort, const std::vector<std::size_t>& members, std::size_t k,
                              std::uint64_t seed, std::uint64_t side) {
    std::vector<std::pair<std::uint64_t, std::size_t>> keyed;
    keyed.reserve(members.size());
    for (std::size_t idx : members) keyed.emplace_back(derive_key(seed, side, stable_hash(cohort[idx].id)), idx);
    std::sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return cohort[a.second].id < cohort[b.second].id;
    });
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < std::min(k, keyed.size()); ++i) out.push_back(keyed[i].second);
    std::sort(out.begin(), out.end());
    return out;
}

constexpr std::uint64_t kIdSide = 0x1D;
constexpr std::uint64_t kOodSide = 0x00D;

}  // namespace

BenchmarkSplit build_split(const Cohort& cohort, const PartitionRule& rule, bool allow_shortfall) {
    rule.validate();
    BenchmarkSplit split;
    split.rule = rule;

    std::vector<std::size_t> id_group, ood_group;
    std::vector<std::pair<std::size_t, ExclusionReason>> dropped;
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        const auto v = cohort[i].acquisition_value(rule.parameter);
        if (!v) {
            dropped.emplace_back(i, ExclusionReason::missing_metadata);
        } else if (rule.id_range.contains(*v)) {
            id_group.push_back(i);
        } else if (rule.ood_range.contains(*v)) {
            ood_group.push_back(i);
        } else {
            dropped.emplace_back(i, ExclusionReason::out_of_range);
        }
    }
    if (!allow_shortfall && (id_group.size() < rule.n_test || ood_group.size() < rule.n_test)) {
        throw InputError("build_split: test size " + std::to_string(rule.n_test) + " exceeds group sizes (ID " +
                         std::to_string(id_group.size()) + ", OOD " + std::to_string(ood_group.size()) + ")");
    }
    split.id_shortfall = rule.n_test - std::min(rule.n_test, id_group.size());
    split.ood_shortfall = rule.n_test - std::min(rule.n_test, ood_group.size());

    const auto id_test = draw(cohort, id_group, rule.n_test, rule.seed, kIdSide);
    const auto ood_test = draw(cohort, ood_group, rule.n_test, rule.seed, kOodSide);
    const std::set<std::size_t> id_test_set(id_test.begin(), id_test.end());
    const std::set<std::size_t> ood_test_set(ood_test.begin(), ood_test.end());

    for (std::size_t i : id_group) {
        (id_test_set.count(i) ? split.id_test_ids : split.train_ids).push_back(cohort[i].id);
    }
    for (std::size_t i : ood_group) {
        if (ood_test_set.count(i)) {
            split.ood_test_ids.push_back(cohort[i].id);
        } else {
            dropped.emplace_back(i, ExclusionReason::ood_reserve);
        }
    }
    std::sort(dropped.begin(), dropped.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [i, reason] : dropped) split.excluded.push_back({cohort[i].id, reason});
    check_split(split, cohort);
    return split;
}

void check_split(const BenchmarkSplit& split, const Cohort& cohort) {
    std::map<std::string, int> seen;
    auto visit = [&](const std::vector<std::string>& ids) {
        for (const auto& id : ids) {
            if (!cohort.index_of(id)) throw Error("split: unknown id '" + id + "'");
            if (++seen[id] > 1) throw Error("split: id '" + id + "' appears in more than one set");
        }
    };
    visit(split.train_ids);
    visit(split.id_test_ids);
    visit(split.ood_test_ids);
    visit(split.excluded_ids());
    if (seen.size() != cohort.size()) throw Error("split: sets do not cover the cohort");

    auto check_range = [&](const std::vector<std::string>& ids, const ValueRange& range, const char* what) {
        for (const auto& id : ids) {
            const auto v = cohort[*cohort.index_of(id)].acquisition_value(split.rule.parameter);
            if (!v || !range.contains(*v)) throw Error(std::string("split: ") + what + " sample '" + id + "' out of range");
        }
    };
    check_range(split.train_ids, split.rule.id_range, "train");
    check_range(split.id_test_ids, split.rule.id_range, "ID test");
    check_range(split.ood_test_ids, split.rule.ood_range, "OOD test");
}

std::string serialize_split(const BenchmarkSplit& split) {
    nlohmann::json excluded = nlohmann::json::array();
    for (const auto& e : split.excluded) excluded.push_back({{"id", e.id}, {"reason", to_string(e.reason)}});
    const nlohmann::json doc{{"format", "survood.split/1"},
                             {"rule", to_json(split.rule)},
                             {"train", split.train_ids},
                             {"id_test", split.id_test_ids},
                             {"ood_test", split.ood_test_ids},
                             {"excluded", std::move(excluded)},
                             {"id_shortfall", split.id_shortfall},
                             {"ood_shortfall", split.ood_shortfall}};
    return doc.dump(2) + "\n";
}

BenchmarkSplit parse_split(std::string_view text) {
    try {
        const auto doc = nlohmann::json::parse(text);
        if (doc.at("format") != "survood.split/1") throw InputError("split file: unknown format");
        BenchmarkSplit split;
        split.rule = partition_rule_from_json(doc.at("rule"));
        split.train_ids = doc.at("train").get<std::vector<std::string>>();
        split.id_test_ids = doc.at("id_test").get<std::vector<std::string>>();
        split.ood_test_ids = doc.at("ood_test").get<std::vector<std::string>>();
        for (const auto& e : doc.at("excluded")) {
            const auto reason = e.at("reason").get<std::string>();
            ExclusionReason r = ExclusionReason::missing_metadata;
            if (reason == "out_of_range") r = ExclusionReason::out_of_range;
            else if (reason == "ood_reserve") r = ExclusionReason::ood_reserve;
            else if (reason != "missing_metadata") throw InputError("split file: unknown exclusion reason");
            split.excluded.push_back({e.at("id").get<std::string>(), r});
        }
        split.id_shortfall = doc.at("id_shortfall").get<std::size_t>();
        split.ood_shortfall = doc.at("ood_shortfall").get<std::size_t>();
        return split;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("split file: ") + e.what());
    }
}

std::string split_csv(const BenchmarkSplit& split) {
    std::string out = "id,split\n";
    for (const auto& id : split.train_ids) out += id + ",train\n";
    for (const auto& id : split.id_test_ids) out += id + ",id_test\n";
    for (const auto& id : split.ood_test_ids) out += id + ",ood_test\n";
    for (const auto& e : split.excluded) out += e.id + ",excluded\n";
    return out;
}

}  // namespace survood
