#include <doctest.h>

#include <cmath>

#include "boolperc/hypercube.hpp"

using namespace boolperc;

namespace {

std::vector<Dyadic> grid() { return {dyadic(1, 3), dyadic(1, 2), dyadic(3, 3), dyadic(1, 1)}; }

// P(f = 1) under independent Bernoulli(p_i), in floating point.
double prob_one(const BooleanFunction& f, const std::vector<double>& p) {
    double s = 0.0;
    for (std::uint32_t x = 0; x < (1u << f.size()); ++x) {
        if (!f(x)) continue;
        double w = 1.0;
        for (int i = 0; i < f.size(); ++i) w *= ((x >> i) & 1u) ? p[i] : 1.0 - p[i];
        s += w;
    }
    return s;
}

}  // namespace

TEST_CASE("dyadic arithmetic") {
    CHECK(dyadic(2, 2) == dyadic(1, 1));
    CHECK(dyadic(1, 2) + dyadic(1, 2) == dyadic(1, 1));
    CHECK(dyadic(3, 3) * dyadic(1, 1) == dyadic(3, 4));
    CHECK(dyadic(1, 3) < dyadic(1, 2));
    CHECK(dyadic(1, 2) <= dyadic(2, 3));
    CHECK(dyadic_from_double(0.375) == dyadic(3, 3));
    CHECK(dyadic(3, 3).str() == "3/2^3");
    CHECK(dyadic(3, 3).to_double() == 0.375);
    CHECK_THROWS(dyadic_from_double(0.1));
}

TEST_CASE("influence examples") {
    const auto p = std::vector<Dyadic>{dyadic(1, 2), dyadic(1, 2)};
    const auto dict = BooleanFunction::from(2, [](std::uint32_t x) { return x & 1u; }, p);
    CHECK(influence(dict, 0) == dyadic(1, 0));
    CHECK(influence(dict, 1) == dyadic(0, 0));
    const auto cst = BooleanFunction::from(2, [](std::uint32_t) { return true; }, p);
    CHECK(influence(cst, 0) == dyadic(0, 0));
    const auto andf = BooleanFunction::from(2, [](std::uint32_t x) { return x == 3u; }, p);
    CHECK(influence(andf, 0) == dyadic(1, 2));
    CHECK(probability_one(andf) == dyadic(1, 4));
}

TEST_CASE("Talagrand functional of the dictator") {
    const auto f = BooleanFunction::from(1, [](std::uint32_t x) { return x & 1u; }, {dyadic(1, 2)});
    const TalagrandCheck c = talagrand_check(f);
    CHECK(c.lhs == doctest::Approx(0.25 * std::log(4.0)));
    CHECK(c.var == doctest::Approx(3.0 / 16.0));
    CHECK(c.maxterm == doctest::Approx(0.25));
    CHECK(c.implied_c == doctest::Approx(4.0 / 3.0));
    const auto cst = BooleanFunction::from(1, [](std::uint32_t) { return false; }, {dyadic(1, 2)});
    CHECK(talagrand_check(cst).degenerate);
    CHECK(std::isinf(talagrand_check(cst).implied_c));
}

TEST_CASE("probabilities above one half are rejected") {
    CHECK_THROWS(BooleanFunction::from(1, [](std::uint32_t x) { return x; }, {dyadic(3, 2)}));
    CHECK_THROWS(BooleanFunction::from(1, [](std::uint32_t x) { return x; }, {dyadic(0, 0)}));
    CHECK_THROWS(BooleanFunction(2, {0, 1}, {dyadic(1, 1), dyadic(1, 1)}));
}

TEST_CASE("flip probabilities of the encoding") {
    CHECK(flip_changes_probability(dyadic(1, 2), 1) == dyadic(1, 1));
    CHECK(flip_changes_probability(dyadic(1, 2), 2) == dyadic(1, 1));
    CHECK(flip_changes_probability(dyadic(1, 1), 1) == dyadic(1, 0));
    CHECK(flip_changes_probability(dyadic(3, 3), 1) == dyadic(3, 2));
    CHECK(flip_changes_probability(dyadic(3, 3), 2) == dyadic(1, 2));
    CHECK(flip_changes_probability(dyadic(3, 3), 3) == dyadic(1, 2));
    CHECK(dyadic_j(dyadic(1, 2)) == 2);
    CHECK(dyadic_j(dyadic(3, 3)) == 1);
    CHECK(dyadic_j(dyadic(1, 3)) == 3);
}

TEST_CASE("lift of a quarter-probability dictator is an AND") {
    const auto f = BooleanFunction::from(1, [](std::uint32_t x) { return x & 1u; }, {dyadic(1, 2)});
    const Lifted L = lift(f);
    REQUIRE(L.f.size() == 2);
    for (std::uint32_t X = 0; X < 4; ++X) CHECK(L.f(X) == (X == 3u));
}

TEST_CASE("the lift pushes the fair measure to the product measure") {
    const auto g = grid();
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            const std::vector<Dyadic> p{g[a], g[b], g[(a + b) % 4]};
            // point indicators: P(lift = 1) must equal the product weight exactly
            for (std::uint32_t y = 0; y < 8; ++y) {
                const auto f = BooleanFunction::from(3, [y](std::uint32_t x) { return x == y; }, p);
                const Lifted L = lift(f);
                CHECK(probability_one(L.f) == f.weight(y).normalized());
                CHECK(variance(L.f) == variance(f));
            }
        }
}

TEST_CASE("Margulis-Russo: the p-derivative equals the signed pivotal") {
    const auto g = grid();
    const std::vector<Dyadic> p{g[0], g[2], g[3]};
    const std::vector<double> pd{0.125, 0.375, 0.5};
    const double h = 1e-5;
    for (std::uint32_t code : {0x17u, 0xE8u, 0x96u, 0x3Cu, 0x80u}) {
        const auto f = BooleanFunction::from(3, [code](std::uint32_t x) { return (code >> x) & 1u; }, p);
        for (int i = 0; i < 3; ++i) {
            auto up = pd, down = pd;
            up[i] += h;
            down[i] -= h;
            const double fd = (prob_one(f, up) - prob_one(f, down)) / (2 * h);
            CHECK(signed_pivotal(f, i) == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("encoding identity and bounds over all functions on three bits") {
    const auto g = grid();
    int checked = 0;
    double min_c = INFINITY;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c) {
                const std::vector<Dyadic> p{g[a], g[b], g[c]};
                for (std::uint32_t code = 0; code < 256; ++code) {
                    const auto f =
                        BooleanFunction::from(3, [code](std::uint32_t x) { return (code >> x) & 1u; }, p);
                    for (int i = 0; i < 3; ++i) {
                        const EncodingReport r = encoding_bounds_check(f, i);
                        REQUIRE(r.identity_holds);
                        REQUIRE(r.per_j_bounds_hold);
                        REQUIRE(r.aggregate_holds);
                        ++checked;
                    }
                    const TalagrandCheck t = talagrand_check(f);
                    if (!t.degenerate) min_c = std::min(min_c, t.implied_c);
                }
            }
    CHECK(checked == 64 * 256 * 3);
    CHECK(min_c > 0.0);
    CHECK(std::isfinite(min_c));
}
