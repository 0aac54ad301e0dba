#include "boolperc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

namespace boolperc {

double Accumulator::variance() const {
    if (count < 2) return 0.0;
    const double m = mean();
    const double v = (sum_sq - count * m * m) / (count - 1);
    return v > 0.0 ? v : 0.0;
}

double Accumulator::stderr_of_mean() const { return count ? std::sqrt(variance() / count) : 0.0; }

nlohmann::json Estimate::to_json() const {
    return {{"value", value},     {"stderr", stderr_},   {"ci_lo", ci_lo},
            {"ci_hi", ci_hi},     {"replicas", replicas}, {"seed", seed},
            {"bias_bound", bias_bound}, {"bias_note", bias_note}};
}

std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t n, double z) {
    if (n == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(n);
    const double p = successes / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    double lo = std::max(0.0, centre - half);
    double hi = std::min(1.0, centre + half);
    if (successes == 0) lo = 0.0;
    if (successes == n) hi = 1.0;
    return {lo, hi};
}

Estimate bernoulli_estimate(const Accumulator& acc, std::uint64_t seed, double z) {
    Estimate e;
    e.acc = acc;
    e.bernoulli = true;
    e.replicas = acc.count;
    e.seed = seed;
    e.value = acc.mean();
    e.stderr_ = acc.count ? std::sqrt(e.value * (1.0 - e.value) / acc.count) : 0.0;
    const auto k = static_cast<std::uint64_t>(std::llround(acc.sum));
    std::tie(e.ci_lo, e.ci_hi) = wilson_interval(k, acc.count, z);
    return e;
}

Estimate mean_estimate(const Accumulator& acc, std::uint64_t seed, double z) {
    Estimate e;
    e.acc = acc;
    e.replicas = acc.count;
    e.seed = seed;
    e.value = acc.mean();
    e.stderr_ = acc.stderr_of_mean();
    e.ci_lo = e.value - z * e.stderr_;
    e.ci_hi = e.value + z * e.stderr_;
    return e;
}

double poisson_pmf(long k, double mean) {
    if (k < 0) return 0.0;
    if (mean == 0.0) return k == 0 ? 1.0 : 0.0;
    return std::exp(k * std::log(mean) - mean - std::lgamma(k + 1.0));
}

double chi_square_sf(double statistic, int dof) {
    if (dof <= 0) return 1.0;
    if (statistic <= 0.0) return 1.0;
    boost::math::chi_squared dist(dof);
    return boost::math::cdf(boost::math::complement(dist, statistic));
}

std::vector<std::pair<double, double>> poisson_bins(const std::vector<long>& counts, double mean,
                                                    double min_expected) {
    const double n = static_cast<double>(counts.size());
    long kmax = 0;
    for (long c : counts) kmax = std::max(kmax, c);
    // expected per value k, with the last cell absorbing the upper tail
    std::vector<double> expected;
    std::vector<double> observed;
    double cum = 0.0;
    for (long k = 0; k <= kmax; ++k) {
        const double p = poisson_pmf(k, mean);
        expected.push_back(n * p);
        cum += p;
        observed.push_back(0.0);
    }
    expected.back() += n * std::max(0.0, 1.0 - cum);
    for (long c : counts) observed[c] += 1.0;

    // merge left to right until each cell reaches min_expected
    std::vector<std::pair<double, double>> bins;
    double o = 0.0, e = 0.0;
    for (std::size_t k = 0; k < expected.size(); ++k) {
        o += observed[k];
        e += expected[k];
        if (e >= min_expected) {
            bins.emplace_back(o, e);
            o = e = 0.0;
        }
    }
    if (e > 0.0 || o > 0.0) {
        if (bins.empty())
            bins.emplace_back(o, e);
        else {
            bins.back().first += o;
            bins.back().second += e;
        }
    }
    return bins;
}

GofResult chi_square_from_bins(const std::vector<std::pair<double, double>>& bins, int constraints) {
    GofResult r;
    for (const auto& [o, e] : bins) {
        if (e > 0.0) r.statistic += (o - e) * (o - e) / e;
    }
    r.dof = static_cast<int>(bins.size()) - constraints;
    r.p_value = chi_square_sf(r.statistic, r.dof);
    return r;
}

GofResult poisson_chi_square(const std::vector<long>& counts, double mean, double min_expected) {
    return chi_square_from_bins(poisson_bins(counts, mean, min_expected), 1);
}

double kolmogorov_sf(double x) {
    if (x <= 0.0) return 1.0;
    if (x < 0.2) return 1.0;
    double s = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        s += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("KS test needs two nonempty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double dmax = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        dmax = std::max(dmax, std::abs(i / na - j / nb));
    }
    KsResult r;
    r.statistic = dmax;
    const double ne = na * nb / (na + nb);
    const double sq = std::sqrt(ne);
    // Stephens' small-sample correction
    r.p_value = kolmogorov_sf((sq + 0.12 + 0.11 / sq) * dmax);
    return r;
}

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("correlation needs paired samples");
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

}  // namespace boolperc
