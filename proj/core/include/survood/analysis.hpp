#pragma once
// Per-split hazard curves and logit profiles in plot-ready form.

#include <string>
#include <vector>

#include "survood/cohort.hpp"
#include "survood/mtlr.hpp"

namespace survood {

struct SplitProfile {
    std::string split;
    std::vector<double> hazard_mean;  // per interval
    std::vector<double> hazard_sd;    // population standard deviation
    std::vector<double> logit_mean;   // per outcome index 0..m
    std::vector<double> logit_abs_mean;
    double mean_abs_logit = 0.0;  // over samples and all m+1 outcomes
};

SplitProfile profile_split(const SurvivalModel& model, const Cohort& cohort, std::string split_name);

double mean_abs_logit(const SurvivalModel& model, const Cohort& cohort);

// split,interval,boundary,mean_hazard,sd_hazard
std::string hazard_curves_csv(const TimeGrid& grid, const std::vector<SplitProfile>& profiles);
// split,outcome,mean_logit,mean_abs_logit
std::string logit_profile_csv(const std::vector<SplitProfile>& profiles);

}  // namespace survood
