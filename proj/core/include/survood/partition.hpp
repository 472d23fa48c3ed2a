#pragma once
// Acquisition-parameter driven train / ID-test / OOD-test splits.
//
// Samples are grouped by the value of one acquisition parameter. With two
// distinct values each value is a group; otherwise the sorted distinct values
// are cut into two contiguous clusters at the largest relative gap. The
// larger group becomes in-distribution; on equal sizes the group with the
// larger minimum value does. Test sets are drawn without replacement by
// ranking samples on a counter-based hash of (seed, side, id), so a split
// depends only on the cohort contents and the rule.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "survood/cohort.hpp"

namespace survood {

// Closed interval [lo, hi], or an explicit set of admissible values.
struct ValueRange {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> values;  // nonempty = discrete value set; lo/hi then span the set

    static ValueRange interval(double lo, double hi);
    static ValueRange value_set(std::vector<double> values);

    bool is_set() const noexcept { return !values.empty(); }
    bool contains(double v) const;
    bool overlaps(const ValueRange& other) const;
};

struct PartitionRule {
    std::string parameter;
    ValueRange id_range;
    ValueRange ood_range;
    std::size_t n_test = 100;
    std::uint64_t seed = 0;
    // Audit fields filled by derive_rule.
    std::size_t id_group_size = 0;
    std::size_t ood_group_size = 0;
    std::optional<double> gap_lower;  // cut between these two values (continuous grouping)
    std::optional<double> gap_upper;
    bool tie_broken = false;  // groups were equal in size

    void validate() const;
};

PartitionRule derive_rule(const Cohort& cohort, const std::string& parameter, std::size_t n_test,
                          std::uint64_t seed);

enum class ExclusionReason { missing_metadata, out_of_range, ood_reserve };
std::string_view to_string(ExclusionReason reason);

struct Exclusion {
    std::string id;
    ExclusionReason reason;
};

struct BenchmarkSplit {
    PartitionRule rule;
    std::vector<std::string> train_ids;
    std::vector<std::string> id_test_ids;
    std::vector<std::string> ood_test_ids;
    // Everything else: missing metadata, values outside both ranges, and OOD
    // group members not drawn for the test set.
    std::vector<Exclusion> excluded;
    std::size_t id_shortfall = 0;
    std::size_t ood_shortfall = 0;

    std::vector<std::string> excluded_ids() const;
};

// Throws InputError naming both counts when a group is smaller than n_test,
// unless allow_shortfall is set (the shortfall is then recorded).
BenchmarkSplit build_split(const Cohort& cohort, const PartitionRule& rule, bool allow_shortfall = false);

// Throws Error if the split violates disjointness/coverage or range fidelity.
void check_split(const BenchmarkSplit& split, const Cohort& cohort);

// Structured split document (JSON) and the companion `id,split` CSV.
std::string serialize_split(const BenchmarkSplit& split);
BenchmarkSplit parse_split(std::string_view text);
std::string split_csv(const BenchmarkSplit& split);

}  // namespace survood
