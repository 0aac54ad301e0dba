// Exact influence calculations on {0,1}^N under product measures with
// dyadic parameters, and the fair-bit lift used to reduce inhomogeneous
// product measures to the uniform one.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace boolperc {

// num / 2^level, exact.
struct Dyadic {
    unsigned __int128 num = 0;
    int level = 0;

    double to_double() const;
    long double to_long_double() const;
    Dyadic normalized() const;
    friend Dyadic operator*(const Dyadic& a, const Dyadic& b);
    friend Dyadic operator+(const Dyadic& a, const Dyadic& b);
    friend bool operator==(const Dyadic& a, const Dyadic& b);
    friend bool operator<(const Dyadic& a, const Dyadic& b);
    friend bool operator<=(const Dyadic& a, const Dyadic& b) { return !(b < a); }
    std::string str() const;
};

Dyadic dyadic(std::uint64_t num, int level);
// Parses values such as 0.375 that are exactly dyadic with level <= 30.
Dyadic dyadic_from_double(double p);

class BooleanFunction {
public:
    // table[x] for x in [0, 2^N); bit i of x is coordinate i.
    BooleanFunction(int N, std::vector<std::uint8_t> table, std::vector<Dyadic> p);
    static BooleanFunction from(int N, const std::function<bool(std::uint32_t)>& f, std::vector<Dyadic> p);

    int size() const { return N_; }
    const std::vector<Dyadic>& p() const { return p_; }
    bool operator()(std::uint32_t x) const { return table_[x] != 0; }
    const std::vector<std::uint8_t>& table() const { return table_; }
    // Common level of all point weights.
    int weight_level() const;
    Dyadic weight(std::uint32_t x) const;

private:
    int N_;
    std::vector<std::uint8_t> table_;
    std::vector<Dyadic> p_;
};

Dyadic influence(const BooleanFunction& f, int i);
Dyadic probability_one(const BooleanFunction& f);
Dyadic variance(const BooleanFunction& f);
// P(f(x^{i->1}) = 1) - P(f(x^{i->0}) = 1), as a double.
double signed_pivotal(const BooleanFunction& f, int i);

struct TalagrandCheck {
    double lhs = 0.0;
    double var = 0.0;
    double maxterm = 0.0;
    double implied_c = 0.0;  // +inf when var == 0
    bool degenerate = false;
};
TalagrandCheck talagrand_check(const BooleanFunction& f);

// Fair-bit lift: variable i becomes level(p_i) bits, Y_i = 1[pi >= 1 - p_i].
struct Lifted {
    BooleanFunction f;
    std::vector<int> offset;  // first lifted bit of variable i
    std::vector<int> bits;    // number of lifted bits of variable i
};
Lifted lift(const BooleanFunction& f);

// Largest j with 2^{-j} >= p.
int dyadic_j(const Dyadic& p);
// P(flipping bit j of the level-l encoding changes Y), j = 1..l.
Dyadic flip_changes_probability(const Dyadic& p, int j);

struct EncodingReport {
    int i = 0;
    int j_i = 0;
    std::vector<Dyadic> lifted_influence;  // Inf_{i,j}(lift f), j = 1..l_i
    std::vector<Dyadic> flip_probability;  // P(Delta_j pi != 0)
    bool identity_holds = true;
    bool per_j_bounds_hold = true;
    bool aggregate_holds = true;
    long double aggregate_lhs = 0.0L;
    long double aggregate_rhs = 0.0L;
};
EncodingReport encoding_bounds_check(const BooleanFunction& f, int i);

}  // namespace boolperc
