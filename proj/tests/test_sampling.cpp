#include <doctest.h>

#include <cmath>
#include <numeric>

#include "boolperc/errors.hpp"
#include "boolperc/sampling.hpp"
#include "boolperc/stats.hpp"

using namespace boolperc;

TEST_CASE("every sampled ball is relevant to the window") {
    const auto mu = RadiusMeasure::power_law(2, 1.0);
    const Region w = Region::ball(2, Vec{}, 6.0);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto cfg = sample(1.0, mu, w, std::nullopt, seed);
        for (const Ball& b : cfg.balls) {
            CHECK(w.intersects_ball(b));
            CHECK(b.radius >= 1.0);
            CHECK(b.radius <= cfg.r_max);
        }
        SampleOptions so;
        so.centers_only = true;
        const auto c2 = sample(1.0, mu, w, std::nullopt, seed, so);
        for (const Ball& b : c2.balls) CHECK(w.contains_point(b.center));
    }
}

TEST_CASE("sampling is a deterministic function of the seed") {
    const auto mu = RadiusMeasure::power_law(3, 0.5);
    const Region w = Region::cube(3, Vec{}, 3.0);
    const auto a = sample(0.7, mu, w, std::nullopt, 42);
    const auto b = sample(0.7, mu, w, std::nullopt, 42);
    const auto c = sample(0.7, mu, w, std::nullopt, 43);
    CHECK(configuration_csv(a) == configuration_csv(b));
    CHECK(configuration_csv(a) != configuration_csv(c));
}

TEST_CASE("empty configuration at zero intensity") {
    const auto cfg = sample(0.0, RadiusMeasure::power_law(2, 1.0), Region::ball(2, Vec{}, 5.0), std::nullopt, 3);
    CHECK(cfg.size() == 0);
}

TEST_CASE("centre counts are Poisson with the right mean") {
    const auto mu = RadiusMeasure::power_law(2, 2.0);
    const Region w = Region::cube(2, Vec{}, 2.0);
    SampleOptions so;
    so.centers_only = true;
    std::vector<long> counts;
    for (std::uint64_t s = 0; s < 2000; ++s) counts.push_back(static_cast<long>(sample(1.5, mu, w, std::nullopt, s, so).size()));
    const double mean = 1.5 * w.volume() * mu.total_mass();
    CHECK(poisson_chi_square(counts, mean).p_value > 1e-3);
}

TEST_CASE("truncation budget") {
    const auto mu = RadiusMeasure::power_law(2, 0.5);
    const Region w = Region::ball(2, Vec{}, 10.0);
    SampleOptions so;
    so.truncation_budget = 1e-6;
    CHECK_THROWS_AS(sample(1.0, mu, w, 2.0, 1, so), TruncationBudgetExceeded);
    const auto cfg = sample(1.0, mu, w, std::nullopt, 1, so);
    CHECK(cfg.truncation_tail <= 1e-6);
    CHECK(default_r_max(mu, 1.0, w, false, 1e-6) == cfg.r_max);
}

TEST_CASE("thinning is monotone and reproduces the intensity") {
    const auto mu = RadiusMeasure::power_law(2, 1.0);
    const Region w = Region::ball(2, Vec{}, 5.0);
    SampleOptions so;
    so.centers_only = true;
    std::vector<long> counts;
    for (std::uint64_t s = 0; s < 1500; ++s) {
        const auto dom = sample(2.0, mu, w, std::nullopt, s, so);
        const auto a = thin(dom, 1.0, mu);
        const auto b = thin(dom, 0.5, mu);
        // b is a subset of a, which is a subset of dom
        std::size_t j = 0;
        for (const Ball& x : b.balls) {
            while (j < a.balls.size() && (a.balls[j].center != x.center || a.balls[j].radius != x.radius)) ++j;
            REQUIRE(j < a.balls.size());
        }
        CHECK(a.size() <= dom.size());
        counts.push_back(static_cast<long>(a.size()));
    }
    CHECK(poisson_chi_square(counts, 1.0 * w.volume() * mu.total_mass()).p_value > 1e-3);
}

TEST_CASE("thinning to a truncated measure keeps only small radii") {
    const auto mu = RadiusMeasure::power_law(2, 1.0);
    const auto t = RadiusMeasure::truncated(mu, 3.0);
    const auto dom = sample(1.0, mu, Region::ball(2, Vec{}, 6.0), std::nullopt, 11);
    const auto th = thin(dom, 1.0, t);
    for (const Ball& b : th.balls) CHECK(b.radius <= 3.0);
    std::size_t small = 0;
    for (const Ball& b : dom.balls) small += b.radius <= 3.0;
    CHECK(th.size() == small);
}

TEST_CASE("sprinkle adds centres inside the region only") {
    const auto mu = RadiusMeasure::point_mass(2, 1.0);
    SampleOptions so;
    so.centers_only = true;
    const Region w = Region::cube(2, Vec{}, 10.0);
    const auto base = sample(0.2, mu, w, std::nullopt, 5, so);
    const Region r = Region::ball(2, Vec{}, 3.0);
    const auto s = sprinkle(base, 2.0, mu, r, 9);
    CHECK(s.size() >= base.size());
    for (std::size_t i = base.size(); i < s.size(); ++i) CHECK(r.contains_point(s.balls[i].center));
    CHECK_THROWS(sprinkle(base, 1.0, mu, Region::ball(2, Vec{}, 30.0), 9));
}

TEST_CASE("continuation probabilities of the encoded count") {
    for (double t : {0.01, 0.3, 1.0, 4.0}) {
        for (int k = 0; k < 8; ++k) {
            double ge_k = 0.0, ge_k1 = 0.0;
            for (int j = 0; j < 200; ++j) {
                const double p = poisson_pmf(j, t);
                if (j >= k) ge_k += p;
                if (j >= k + 1) ge_k1 += p;
            }
            if (ge_k < 1e-250) continue;
            CHECK(poisson_continue_probability(k, t) == doctest::Approx(ge_k1 / ge_k).epsilon(1e-9));
        }
    }
}

TEST_CASE("projection error of the encoded sampler is within c 2^-K") {
    const int d = 2;
    const double delta = 1.0;
    std::vector<CellIndex> cells;
    for (int x = -3; x <= 3; ++x)
        for (int n = 1; n <= 3; ++n) {
            CellIndex c;
            c.x[0] = x;
            c.x[1] = -x;
            c.n = n;
            cells.push_back(c);
        }
    const auto enc = sample_encoded(40.0, d, delta, cells, 53, 17);
    std::size_t seen = 0;
    for (const auto& cell : enc.cells) {
        const double c = CellLaw(d, delta, cell.cell.n).lipschitz();
        for (std::size_t k = 0; k < cell.count(); ++k) {
            for (int K : {4, 8}) {
                const Ball p = cell.projected(k, K, d, delta);
                const Ball& r = cell.decoded[k];
                CHECK(r.radius - p.radius >= 0.0);
                CHECK(r.radius - p.radius <= c * std::ldexp(1.0, -K));
                for (int l = 0; l < d; ++l) {
                    CHECK(r.center[l] - p.center[l] >= 0.0);
                    CHECK(r.center[l] - p.center[l] < std::ldexp(1.0, -K));
                }
            }
            ++seen;
        }
    }
    CHECK(seen > 0);
}

TEST_CASE("shallow encodings cap the count at the depth") {
    CellIndex c;
    c.n = 1;
    const auto enc = sample_encoded(500.0, 2, 1.0, {c}, 4, 3);
    CHECK(enc.cells[0].capped);
    CHECK(enc.cells[0].count() == 4);
}

TEST_CASE("configuration CSV layout") {
    Configuration cfg;
    cfg.d = 3;
    cfg.balls.push_back(Ball{make_vec({0.5, -1.0, 2.0}), 1.25, 0.0});
    CHECK(configuration_csv(cfg) == "x1,x2,x3,r\n0.5,-1,2,1.25\n");
}
