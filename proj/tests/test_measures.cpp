#include <doctest.h>

#include <cmath>
#include <functional>

#include "boolperc/errors.hpp"
#include "boolperc/measures.hpp"
#include "boolperc/rng.hpp"
#include "boolperc/stats.hpp"

using namespace boolperc;

namespace {

// Composite Simpson in u = log r over [log a, log b].
double integrate_log(const std::function<double(double)>& f, double a, double b, int steps = 20000) {
    const double ua = std::log(a), ub = std::log(b), h = (ub - ua) / steps;
    auto g = [&](double u) { return f(std::exp(u)) * std::exp(u); };
    double s = g(ua) + g(ub);
    for (int i = 1; i < steps; ++i) s += g(ua + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

double power_density(int d, double delta, double r) { return r < 1.0 ? 0.0 : std::pow(r, -(d + 1 + delta)); }

}  // namespace

TEST_CASE("power-law mass and moments against quadrature") {
    for (int d : {2, 3}) {
        for (double delta : {0.5, 1.0, 2.0}) {
            const auto mu = RadiusMeasure::power_law(d, delta);
            const double far = 1e7;
            const double mass = integrate_log([&](double r) { return power_density(d, delta, r); }, 1.0, far);
            CHECK(mu.total_mass() == doctest::Approx(1.0 / (d + delta)).epsilon(1e-12));
            CHECK(mass == doctest::Approx(mu.total_mass()).epsilon(1e-6));
            CHECK(mu.d_moment() == doctest::Approx(1.0 / delta).epsilon(1e-12));
            for (double k : {0.0, 1.0, static_cast<double>(d)}) {
                const double q = integrate_log(
                    [&](double r) { return std::pow(r, k) * power_density(d, delta, r); }, 2.0, 9.0);
                CHECK(mu.moment(k, 2.0, 9.0) == doctest::Approx(q).epsilon(1e-8));
                const double ql = integrate_log(
                    [&](double r) { return std::pow(r, k) * std::log(r) * power_density(d, delta, r); }, 1.5, 40.0);
                CHECK(mu.log_moment(k, 1.5, 40.0) == doctest::Approx(ql).epsilon(1e-8));
            }
            CHECK(mu.tail_mass(5.0) == doctest::Approx(std::pow(5.0, -(d + delta)) / (d + delta)));
        }
    }
}

TEST_CASE("divergent d-moment is rejected") {
    CHECK_THROWS_AS(RadiusMeasure::power_law(2, 0.0), DivergentMoment);
    CHECK_THROWS_AS(RadiusMeasure::power_law(2, -0.5), DivergentMoment);
}

TEST_CASE("truncated and point-mass measures") {
    const auto base = RadiusMeasure::power_law(2, 1.0);
    const auto t = RadiusMeasure::truncated(base, 8.0);
    CHECK(t.total_mass() == doctest::Approx(base.mass(1.0, 8.0)));
    CHECK(t.tail_mass(8.5) == 0.0);
    CHECK(t.support_max() == 8.0);
    const auto p = RadiusMeasure::point_mass(3, 2.5);
    CHECK(p.total_mass() == 1.0);
    CHECK(p.moment(3, 0.0, RadiusMeasure::kInf) == doctest::Approx(2.5 * 2.5 * 2.5));
    CHECK(p.mass(0.0, 2.0) == 0.0);
    CHECK(p.sample_in(0.0, 10.0, 0.3) == 2.5);
}

TEST_CASE("json round trip") {
    for (const auto& mu : {RadiusMeasure::power_law(2, 1.5),
                           RadiusMeasure::truncated(RadiusMeasure::power_law(3, 1.0), 4.0),
                           RadiusMeasure::point_mass(2, 1.0)}) {
        const auto back = RadiusMeasure::from_json(mu.to_json(), mu.dimension());
        CHECK(back.label() == mu.label());
        CHECK(back.total_mass() == doctest::Approx(mu.total_mass()));
    }
}

TEST_CASE("sample_in follows the measure restricted to [a, b]") {
    const auto mu = RadiusMeasure::power_law(2, 1.0);
    Stream rng(7, StreamTag::Oracle, 0);
    std::vector<double> draws;
    for (int i = 0; i < 4000; ++i) {
        const double r = mu.sample_in(2.0, 6.0, rng.uniform());
        REQUIRE(r >= 2.0);
        REQUIRE(r <= 6.0);
        draws.push_back(r);
    }
    // compare against inverse-CDF draws computed independently
    std::vector<double> ref;
    const double s = 3.0, lo = std::pow(2.0, -s), hi = std::pow(6.0, -s);
    Stream rng2(8, StreamTag::Oracle, 0);
    for (int i = 0; i < 4000; ++i) ref.push_back(std::pow(lo - rng2.uniform() * (lo - hi), -1.0 / s));
    CHECK(ks_two_sample(draws, ref).p_value > 1e-3);
}

TEST_CASE("cell law: masses, CDF inverse and Lipschitz constant") {
    for (int d : {2, 3}) {
        for (double delta : {0.5, 1.0, 2.0}) {
            const double s = d + delta;
            double total = 0.0;
            for (int n = 1; n < 2000; ++n) total += CellLaw(d, delta, n).g();
            CHECK(total == doctest::Approx(1.0 / s).epsilon(1e-6));
            for (int n : {1, 2, 5}) {
                const CellLaw c(d, delta, n);
                for (double t : {0.0, 0.1, 0.5, 0.9, 1.0}) CHECK(c.cdf(c.inverse(t)) == doctest::Approx(t));
                CHECK(c.inverse(0.0) == doctest::Approx(n));
                CHECK(c.inverse(1.0) == doctest::Approx(n + 1));
                // sampled difference quotients stay below the constant
                double worst = 0.0;
                for (int i = 0; i < 1000; ++i) {
                    const double a = i / 1000.0, b = (i + 1) / 1000.0;
                    worst = std::max(worst, (c.inverse(b) - c.inverse(a)) / (b - a));
                }
                // the slope peaks at t = 1, where the grid is too coarse
                worst = std::max(worst, (c.inverse(1.0) - c.inverse(1.0 - 1e-7)) / 1e-7);
                CHECK(worst <= c.lipschitz() * (1 + 1e-9));
                CHECK(worst >= 0.99 * c.lipschitz());
                CHECK(c.lipschitz() <= uniform_lipschitz(d, delta) * (1 + 1e-12));
            }
            CHECK(uniform_lipschitz(d, delta) == doctest::Approx(2.0 * (std::pow(2.0, s) - 1.0) / s));
        }
    }
}

TEST_CASE("cell law regularity: the reverse dyadic implication needs the density factor") {
    // |r - r'| <= 2^-i does not force |t - t'| <= 2^-i: the normalized
    // density exceeds 1 at the left end of the band.
    const CellLaw c(2, 1.0, 1);
    CHECK(c.max_density() > 1.0);
    const int i = 6;
    const double dr = std::ldexp(1.0, -i);
    const double dt = c.cdf(1.0 + dr) - c.cdf(1.0);
    CHECK(dt > dr);
    // the corrected bound holds on a grid of pairs
    for (int k = 0; k < 200; ++k) {
        const double r = 1.0 + k / 200.0 * (1.0 - dr);
        CHECK(c.cdf(r + dr) - c.cdf(r) <= c.max_density() * dr * (1 + 1e-12));
    }
    // the forward implication holds with the Lipschitz constant
    const double t = 0.3, t2 = t + dr;
    CHECK(c.inverse(t2) - c.inverse(t) <= c.lipschitz() * dr);
}
