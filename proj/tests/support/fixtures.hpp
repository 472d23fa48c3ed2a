#pragma once
// Random instances for property tests. Test-only randomness comes from
// std::mt19937_64 so it stays independent of the library's own generator.

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "survood/cohort.hpp"
#include "survood/mtlr.hpp"

namespace survood::testing {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
    double normal(double mean = 0.0, double sd = 1.0) { return std::normal_distribution<double>(mean, sd)(gen_); }
    std::size_t index(std::size_t lo, std::size_t hi) {  // inclusive
        return std::uniform_int_distribution<std::size_t>(lo, hi)(gen_);
    }
    bool coin(double p = 0.5) { return uniform() < p; }
    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

// Strictly increasing positive boundaries.
TimeGrid random_grid(Rng& rng, std::size_t m);

// Times are spread over [0, 1.3 * t_m] with some exact boundary hits; at least
// `min_censored` of the samples are censored.
Cohort random_cohort(Rng& rng, std::size_t n, std::size_t d, const TimeGrid& grid, double min_censored = 0.3);

SurvivalModel random_model(Rng& rng, const TimeGrid& grid, std::size_t d, double scale = 1.0,
                           TrainingConfig hyper = {});

// Ids s0, s1, ...; feature names x1..xd.
Cohort make_cohort(const std::vector<std::vector<double>>& features, const std::vector<double>& times,
                   const std::vector<bool>& events);

std::vector<double> random_vector(Rng& rng, std::size_t n, double sd = 1.0);

// A fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace survood::testing
