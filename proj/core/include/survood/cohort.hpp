#pragma once
// Patient records, CSV ingestion, time discretization and label encoding.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "survood/errors.hpp"

namespace survood {

// Acquisition parameters accepted by default in `acq_` columns.
const std::vector<std::string>& default_acquisition_vocabulary();

struct Sample {
    std::string id;
    std::vector<double> features;
    double time = 0.0;   // follow-up or event time, >= 0
    bool event = false;  // false = right-censored at `time`
    std::map<std::string, double> acquisition;  // absent key = missing metadata

    std::optional<double> acquisition_value(const std::string& name) const;
};

// An ordered, validated collection of samples sharing one feature space.
// Immutable once built.
class Cohort {
public:
    // Throws InputError on any invariant violation (feature length, non-finite
    // values, negative time, duplicate id).
    Cohort(std::vector<Sample> samples, std::vector<std::string> feature_names);

    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }
    std::size_t feature_dim() const noexcept { return feature_names_.size(); }
    const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
    const std::vector<Sample>& samples() const noexcept { return samples_; }
    const Sample& operator[](std::size_t i) const { return samples_[i]; }
    auto begin() const noexcept { return samples_.begin(); }
    auto end() const noexcept { return samples_.end(); }

    std::optional<std::size_t> index_of(const std::string& id) const;

    // Samples with the given ids, in the order given. Unknown ids throw.
    Cohort subset(std::span<const std::string> ids) const;

private:
    std::vector<Sample> samples_;
    std::vector<std::string> feature_names_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct CohortSchema {
    std::string id_column = "id";
    std::string time_column = "time";
    std::string event_column = "event";
    std::string feature_prefix = "f_";
    std::string acquisition_prefix = "acq_";
    // Allowed acquisition parameter names; empty accepts any name.
    std::vector<std::string> acquisition_vocabulary = default_acquisition_vocabulary();
};

struct RowDiagnostic {
    std::size_t line = 0;  // 1-based line in the file; the header is line 1
    std::string column;
    std::string message;
};

// Raised when one or more rows fail validation. what() lists every diagnostic.
class CohortLoadError : public InputError {
public:
    CohortLoadError(std::string source, std::vector<RowDiagnostic> diagnostics);
    const std::vector<RowDiagnostic>& diagnostics() const noexcept { return diagnostics_; }

private:
    std::vector<RowDiagnostic> diagnostics_;
};

Cohort parse_cohort(std::string_view csv, const CohortSchema& schema = {},
                    std::string_view source = "<memory>");
Cohort load_cohort(const std::filesystem::path& path, const CohortSchema& schema = {});

// Header `id,time,event,f_*,acq_*`; numbers in shortest round-trip form.
std::string write_cohort(const Cohort& cohort, const CohortSchema& schema = {});
void save_cohort(const std::filesystem::path& path, const Cohort& cohort,
                 const CohortSchema& schema = {});

// Interval boundaries t_1 < ... < t_m. Bin k+1 covers (t_k, t_{k+1}] with t_0 = -inf;
// outcome index m stands for "after t_m".
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> boundaries);

    std::size_t size() const noexcept { return boundaries_.size(); }
    double operator[](std::size_t i) const { return boundaries_[i]; }
    const std::vector<double>& boundaries() const noexcept { return boundaries_; }

    bool operator==(const TimeGrid&) const = default;

private:
    std::vector<double> boundaries_;
};

enum class GridStrategy { quantile, uniform };

GridStrategy parse_grid_strategy(std::string_view name);
std::string_view to_string(GridStrategy strategy);

TimeGrid make_time_grid(const Cohort& cohort, std::size_t m,
                        GridStrategy strategy = GridStrategy::quantile);

// Survival label in outcome-index form. For an event sample `index` is the
// outcome k in [0, m]; for a censored one it is the floor c such that every
// outcome k >= c is consistent with the censoring time.
class LabelEncoding {
public:
    static LabelEncoding event_at(std::size_t outcome_index) { return {outcome_index, false}; }
    static LabelEncoding censored_from(std::size_t censor_floor) { return {censor_floor, true}; }

    bool is_censored() const noexcept { return censored_; }
    std::size_t outcome_index() const;
    std::size_t censor_floor() const;
    // First outcome index consistent with the label.
    std::size_t first_outcome() const noexcept { return index_; }
    // Last consistent outcome index given m intervals.
    std::size_t last_outcome(std::size_t m) const noexcept { return censored_ ? m : index_; }

    bool operator==(const LabelEncoding&) const = default;

private:
    LabelEncoding(std::size_t index, bool censored) : index_(index), censored_(censored) {}

    std::size_t index_;
    bool censored_;
};

LabelEncoding encode_label(const Sample& sample, const TimeGrid& grid);
std::vector<LabelEncoding> encode_labels(const Cohort& cohort, const TimeGrid& grid);

}  // namespace survood
