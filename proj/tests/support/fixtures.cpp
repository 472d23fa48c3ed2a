#include "fixtures.hpp"

#include <algorithm>
#include <atomic>

#include <unistd.h>

namespace survood::testing {

TimeGrid random_grid(Rng& rng, std::size_t m) {
    std::vector<double> b;
    double t = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        t += rng.uniform(0.2, 2.0);
        b.push_back(t);
    }
    return TimeGrid(std::move(b));
}

Cohort random_cohort(Rng& rng, std::size_t n, std::size_t d, const TimeGrid& grid, double min_censored) {
    std::vector<std::vector<double>> features;
    std::vector<double> times;
    std::vector<bool> events;
    const auto forced = static_cast<std::size_t>(std::ceil(min_censored * static_cast<double>(n)));
    const double horizon = grid.boundaries().back() * 1.3;
    for (std::size_t i = 0; i < n; ++i) {
        features.push_back(random_vector(rng, d));
        double t = rng.uniform(0.0, horizon);
        if (rng.coin(0.15)) t = grid[rng.index(0, grid.size() - 1)];
        times.push_back(t);
        events.push_back(i >= forced && rng.coin(0.7));
    }
    return make_cohort(features, times, events);
}

SurvivalModel random_model(Rng& rng, const TimeGrid& grid, std::size_t d, double scale, TrainingConfig hyper) {
    Eigen::MatrixXd theta(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(d));
    Eigen::VectorXd bias(static_cast<Eigen::Index>(grid.size()));
    for (Eigen::Index r = 0; r < theta.rows(); ++r) {
        for (Eigen::Index c = 0; c < theta.cols(); ++c) theta(r, c) = rng.normal(0.0, scale);
        bias[r] = rng.normal(0.0, scale);
    }
    return SurvivalModel(grid, std::move(theta), std::move(bias), hyper);
}

Cohort make_cohort(const std::vector<std::vector<double>>& features, const std::vector<double>& times,
                   const std::vector<bool>& events) {
    std::vector<Sample> samples;
    for (std::size_t i = 0; i < features.size(); ++i) {
        Sample s;
        s.id = "s" + std::to_string(i);
        s.features = features[i];
        s.time = times[i];
        s.event = events[i];
        samples.push_back(std::move(s));
    }
    std::vector<std::string> names;
    for (std::size_t c = 0; c < (features.empty() ? 1 : features.front().size()); ++c) {
        names.push_back("x" + std::to_string(c + 1));
    }
    return Cohort(std::move(samples), std::move(names));
}

std::vector<double> random_vector(Rng& rng, std::size_t n, double sd) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal(0.0, sd);
    return v;
}

TempDir::TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("survood-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

}  // namespace survood::testing
