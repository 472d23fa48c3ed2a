#include "survood/analysis.hpp"

#include <cmath>

#include "survood/io.hpp"

namespace survood {

SplitProfile profile_split(const SurvivalModel& model, const Cohort& cohort, std::string split_name) {
    if (cohort.empty()) throw InputError("profile_split: cohort '" + split_name + "' is empty");
    const std::size_t m = model.intervals();
    SplitProfile p;
    p.split = std::move(split_name);
    p.hazard_mean.assign(m, 0.0);
    p.hazard_sd.assign(m, 0.0);
    p.logit_mean.assign(m + 1, 0.0);
    p.logit_abs_mean.assign(m + 1, 0.0);
    std::vector<double> hazard_sq(m, 0.0);
    for (const auto& s : cohort) {
        const auto pred = predict(model, s.features);
        for (std::size_t i = 0; i < m; ++i) {
            p.hazard_mean[i] += pred.hazard[i];
            hazard_sq[i] += pred.hazard[i] * pred.hazard[i];
        }
        const auto f = logits(model, s.features);
        for (std::size_t k = 0; k <= m; ++k) {
            p.logit_mean[k] += f[static_cast<Eigen::Index>(k)];
            p.logit_abs_mean[k] += std::abs(f[static_cast<Eigen::Index>(k)]);
        }
    }
    const auto n = static_cast<double>(cohort.size());
    for (std::size_t i = 0; i < m; ++i) {
        p.hazard_mean[i] /= n;
        p.hazard_sd[i] = std::sqrt(std::max(0.0, hazard_sq[i] / n - p.hazard_mean[i] * p.hazard_mean[i]));
    }
    for (std::size_t k = 0; k <= m; ++k) {
        p.logit_mean[k] /= n;
        p.logit_abs_mean[k] /= n;
    }
    p.mean_abs_logit = mean_abs_logit(model, cohort);
    return p;
}

double mean_abs_logit(const SurvivalModel& model, const Cohort& cohort) {
    if (cohort.empty()) throw InputError("mean_abs_logit: cohort is empty");
    double total = 0.0;
    for (const auto& s : cohort) total += logits(model, s.features).cwiseAbs().sum();
    return total / (static_cast<double>(cohort.size()) * static_cast<double>(model.intervals() + 1));
}

std::string hazard_curves_csv(const TimeGrid& grid, const std::vector<SplitProfile>& profiles) {
    std::string out = "split,interval,boundary,mean_hazard,sd_hazard\n";
    for (const auto& p : profiles) {
        for (std::size_t i = 0; i < p.hazard_mean.size(); ++i) {
            out += p.split + "," + std::to_string(i + 1) + "," + io::format_double(grid[i]) + "," +
                   io::format_double(p.hazard_mean[i]) + "," + io::format_double(p.hazard_sd[i]) + "\n";
        }
    }
    return out;
}

std::string logit_profile_csv(const std::vector<SplitProfile>& profiles) {
    std::string out = "split,outcome,mean_logit,mean_abs_logit\n";
    for (const auto& p : profiles) {
        for (std::size_t k = 0; k < p.logit_mean.size(); ++k) {
            out += p.split + "," + std::to_string(k) + "," + io::format_double(p.logit_mean[k]) + "," +
                   io::format_double(p.logit_abs_mean[k]) + "\n";
        }
    }
    return out;
}

}  // namespace survood
