#include "boolperc/hypercube.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace boolperc {

namespace {

constexpr int kMaxLevel = 126;
constexpr int kMaxBits = 24;

unsigned __int128 shl(unsigned __int128 v, int s) {
    if (s == 0) return v;
    if (s >= 128 || (v >> (128 - s)) != 0) throw std::overflow_error("dyadic numerator overflow");
    return v << s;
}

}  // namespace

double Dyadic::to_double() const { return static_cast<double>(to_long_double()); }

long double Dyadic::to_long_double() const {
    return std::ldexp(static_cast<long double>(num), -level);
}

Dyadic Dyadic::normalized() const {
    Dyadic d = *this;
    if (d.num == 0) return {0, 0};
    while (d.level > 0 && (d.num & 1) == 0) {
        d.num >>= 1;
        --d.level;
    }
    return d;
}

Dyadic operator*(const Dyadic& a, const Dyadic& b) {
    const Dyadic x = a.normalized(), y = b.normalized();
    if (x.level + y.level > kMaxLevel) throw std::overflow_error("dyadic level overflow");
    // both normalized numerators are below 2^level, so the product fits
    return Dyadic{x.num * y.num, x.level + y.level}.normalized();
}

Dyadic operator+(const Dyadic& a, const Dyadic& b) {
    const int L = std::max(a.level, b.level);
    return Dyadic{shl(a.num, L - a.level) + shl(b.num, L - b.level), L}.normalized();
}

bool operator==(const Dyadic& a, const Dyadic& b) {
    const Dyadic x = a.normalized(), y = b.normalized();
    return x.num == y.num && x.level == y.level;
}

bool operator<(const Dyadic& a, const Dyadic& b) {
    const int L = std::max(a.level, b.level);
    return shl(a.num, L - a.level) < shl(b.num, L - b.level);
}

std::string Dyadic::str() const {
    const Dyadic d = normalized();
    std::string s;
    unsigned __int128 v = d.num;
    if (v == 0) s = "0";
    while (v > 0) {
        s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    return s + "/2^" + std::to_string(d.level);
}

Dyadic dyadic(std::uint64_t num, int level) {
    if (level < 0 || level > kMaxLevel) throw std::invalid_argument("dyadic level out of range");
    return Dyadic{num, level}.normalized();
}

Dyadic dyadic_from_double(double p) {
    for (int l = 0; l <= 30; ++l) {
        const double m = std::ldexp(p, l);
        if (m == std::floor(m)) return dyadic(static_cast<std::uint64_t>(m), l);
    }
    throw std::invalid_argument("probability is not dyadic with level <= 30");
}

BooleanFunction::BooleanFunction(int N, std::vector<std::uint8_t> table, std::vector<Dyadic> p)
    : N_(N), table_(std::move(table)), p_(std::move(p)) {
    if (N < 0 || N > kMaxBits) throw std::invalid_argument("N must be in [0, 24]");
    if (table_.size() != (std::size_t{1} << N)) throw std::invalid_argument("truth table length must be 2^N");
    if (static_cast<int>(p_.size()) != N) throw std::invalid_argument("need one probability per bit");
    const Dyadic half = dyadic(1, 1);
    for (auto& q : p_) {
        q = q.normalized();
        if (q.num == 0 || half < q) throw std::invalid_argument("probabilities must lie in (0, 1/2]");
    }
    if (weight_level() > kMaxLevel) throw std::invalid_argument("total dyadic level too large");
}

BooleanFunction BooleanFunction::from(int N, const std::function<bool(std::uint32_t)>& f, std::vector<Dyadic> p) {
    std::vector<std::uint8_t> t(std::size_t{1} << N);
    for (std::uint32_t x = 0; x < t.size(); ++x) t[x] = f(x) ? 1 : 0;
    return BooleanFunction(N, std::move(t), std::move(p));
}

int BooleanFunction::weight_level() const {
    int L = 0;
    for (const auto& q : p_) L += q.level;
    return L;
}

Dyadic BooleanFunction::weight(std::uint32_t x) const {
    // product of p_i or 1 - p_i; numerators multiply, levels add
    unsigned __int128 num = 1;
    int level = 0;
    for (int i = 0; i < N_; ++i) {
        const unsigned __int128 full = static_cast<unsigned __int128>(1) << p_[i].level;
        num *= ((x >> i) & 1u) ? p_[i].num : full - p_[i].num;
        level += p_[i].level;
    }
    return Dyadic{num, level};
}

Dyadic influence(const BooleanFunction& f, int i) {
    const int L = f.weight_level();
    unsigned __int128 s = 0;
    const std::uint32_t n = 1u << f.size();
    for (std::uint32_t x = 0; x < n; ++x) {
        if (f(x) != f(x ^ (1u << i))) s += f.weight(x).num;
    }
    return Dyadic{s, L}.normalized();
}

Dyadic probability_one(const BooleanFunction& f) {
    const int L = f.weight_level();
    unsigned __int128 s = 0;
    const std::uint32_t n = 1u << f.size();
    for (std::uint32_t x = 0; x < n; ++x)
        if (f(x)) s += f.weight(x).num;
    return Dyadic{s, L}.normalized();
}

Dyadic variance(const BooleanFunction& f) {
    const Dyadic e = probability_one(f);
    const Dyadic one_minus{(static_cast<unsigned __int128>(1) << e.level) - e.num, e.level};
    return e * one_minus;
}

double signed_pivotal(const BooleanFunction& f, int i) {
    long double s = 0.0L;
    const std::uint32_t n = 1u << f.size();
    for (std::uint32_t x = 0; x < n; ++x) {
        if ((x >> i) & 1u) continue;
        // weight of the other coordinates
        long double w = 1.0L;
        for (int k = 0; k < f.size(); ++k) {
            if (k == i) continue;
            const long double p = f.p()[k].to_long_double();
            w *= ((x >> k) & 1u) ? p : 1.0L - p;
        }
        s += w * (static_cast<int>(f(x | (1u << i))) - static_cast<int>(f(x)));
    }
    return static_cast<double>(s);
}

TalagrandCheck talagrand_check(const BooleanFunction& f) {
    TalagrandCheck c;
    c.var = variance(f).to_double();
    for (int i = 0; i < f.size(); ++i) {
        const double p = f.p()[i].to_double();
        const double inf = influence(f, i).to_double();
        c.lhs += p * std::abs(std::log(p)) * inf;
        c.maxterm = std::max(c.maxterm, p * inf);
    }
    if (c.var == 0.0) {
        c.degenerate = true;
        c.implied_c = std::numeric_limits<double>::infinity();
        return c;
    }
    c.implied_c = c.lhs / (c.var * std::log(1.0 / c.maxterm));
    return c;
}

namespace {

bool threshold_bit(std::uint32_t pattern, int bits, const Dyadic& p) {
    // pi = pattern / 2^bits with X_1 the most significant bit
    const unsigned __int128 full = static_cast<unsigned __int128>(1) << p.level;
    const unsigned __int128 cut = full - p.num;  // (1 - p) at level p.level
    return static_cast<unsigned __int128>(pattern) >= shl(cut, bits - p.level);
}

}  // namespace

Lifted lift(const BooleanFunction& f) {
    Lifted out{BooleanFunction(0, {0}, {}), {}, {}};
    int M = 0;
    for (const auto& q : f.p()) {
        out.offset.push_back(M);
        out.bits.push_back(std::max(q.level, 1));
        M += out.bits.back();
    }
    if (M > kMaxBits) throw std::invalid_argument("lift needs at most 24 fair bits");
    std::vector<std::uint8_t> t(std::size_t{1} << M);
    for (std::uint32_t X = 0; X < t.size(); ++X) {
        std::uint32_t y = 0;
        for (int i = 0; i < f.size(); ++i) {
            // X_{i,1} is the first lifted bit of variable i and the most significant one
            std::uint32_t pattern = 0;
            for (int k = 0; k < out.bits[i]; ++k) {
                const std::uint32_t bit = (X >> (out.offset[i] + k)) & 1u;
                pattern |= bit << (out.bits[i] - 1 - k);
            }
            if (threshold_bit(pattern, out.bits[i], f.p()[i])) y |= 1u << i;
        }
        t[X] = f(y) ? 1 : 0;
    }
    out.f = BooleanFunction(M, std::move(t), std::vector<Dyadic>(M, dyadic(1, 1)));
    return out;
}

int dyadic_j(const Dyadic& p) {
    const Dyadic q = p.normalized();
    int j = 0;
    // largest j with 2^{level - j} >= num
    while (j + 1 <= q.level &&
           (static_cast<unsigned __int128>(1) << (q.level - j - 1)) >= q.num)
        ++j;
    return j;
}

Dyadic flip_changes_probability(const Dyadic& p, int j) {
    const int l = std::max(p.level, 1);
    if (j < 1 || j > l) throw std::invalid_argument("bit index out of range");
    std::uint32_t changes = 0;
    for (std::uint32_t pat = 0; pat < (1u << l); ++pat) {
        const std::uint32_t flipped = pat ^ (1u << (l - j));
        if (threshold_bit(pat, l, p) != threshold_bit(flipped, l, p)) ++changes;
    }
    return dyadic(changes, l);
}

EncodingReport encoding_bounds_check(const BooleanFunction& f, int i) {
    EncodingReport rep;
    rep.i = i;
    const Dyadic& p = f.p()[i];
    rep.j_i = dyadic_j(p);
    const Lifted L = lift(f);
    const Dyadic inf = influence(f, i);
    Dyadic total{0, 0};
    for (int j = 1; j <= L.bits[i]; ++j) {
        // X_{i,j} sits at offset + j - 1
        const int pos = L.offset[i] + j - 1;
        const Dyadic lifted_inf = influence(L.f, pos);
        const Dyadic flip = flip_changes_probability(p, j);
        rep.lifted_influence.push_back(lifted_inf);
        rep.flip_probability.push_back(flip);
        if (!(lifted_inf == flip * inf)) rep.identity_holds = false;
        const Dyadic bound = j >= rep.j_i ? dyadic(1, j - 1) : p * dyadic(2, 0);
        if (!(flip <= bound)) rep.per_j_bounds_hold = false;
        total = total + lifted_inf;
    }
    const long double pl = p.to_long_double();
    rep.aggregate_lhs = total.to_long_double();
    rep.aggregate_rhs = 4.0L * pl * std::abs(std::log(pl)) * inf.to_long_double();
    rep.aggregate_holds = rep.aggregate_lhs <= rep.aggregate_rhs;
    return rep;
}

}  // namespace boolperc
