// Monte Carlo summaries and the few goodness-of-fit tests the checks use.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace boolperc {

inline constexpr double kZ95 = 1.959963984540054;
inline constexpr double kZ99 = 2.5758293035489004;

// Mergeable count / sum / sum of squares.
struct Accumulator {
    std::uint64_t count = 0;
    double sum = 0.0;
    double sum_sq = 0.0;

    void add(double x) {
        ++count;
        sum += x;
        sum_sq += x * x;
    }
    void merge(const Accumulator& o) {
        count += o.count;
        sum += o.sum;
        sum_sq += o.sum_sq;
    }
    double mean() const { return count ? sum / count : 0.0; }
    double variance() const;  // unbiased sample variance
    double stderr_of_mean() const;
};

struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::uint64_t replicas = 0;
    std::uint64_t seed = 0;
    bool bernoulli = false;
    double bias_bound = 0.0;
    std::string bias_note;
    Accumulator acc;

    double stderr() const { return stderr_; }
    nlohmann::json to_json() const;
};

std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t n, double z = kZ95);
Estimate bernoulli_estimate(const Accumulator& acc, std::uint64_t seed, double z = kZ95);
Estimate mean_estimate(const Accumulator& acc, std::uint64_t seed, double z = kZ95);

double poisson_pmf(long k, double mean);

struct GofResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

double chi_square_sf(double statistic, int dof);
// Pearson test of integer counts against Poisson(mean); cells are merged
// until each expected count is at least min_expected.
GofResult poisson_chi_square(const std::vector<long>& counts, double mean, double min_expected = 5.0);
// Add one more sample's bins to a pooled test: returns observed/expected
// pairs so several tests can be summed into a single statistic.
std::vector<std::pair<double, double>> poisson_bins(const std::vector<long>& counts, double mean,
                                                    double min_expected = 5.0);
GofResult chi_square_from_bins(const std::vector<std::pair<double, double>>& bins, int constraints);

// Asymptotic Kolmogorov distribution tail P(K > x).
double kolmogorov_sf(double x);
struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace boolperc
