#include "boolperc/measures.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "boolperc/errors.hpp"

namespace boolperc {

namespace {

// int_a^b t^e dt for 0 < a <= b <= inf, closed form.
double power_integral(double e, double a, double b) {
    if (!(b > a)) return 0.0;
    if (e == -1.0) return std::log(b / a);
    const double p = e + 1.0;
    if (std::isinf(b)) {
        if (p >= 0.0) return std::numeric_limits<double>::infinity();
        return -std::pow(a, p) / p;
    }
    // a^p (ratio^p - 1)/p, written to keep precision for close a, b
    return std::pow(a, p) * std::expm1(p * std::log(b / a)) / p;
}

// Antiderivative helper: int_x^inf t^{-s-1} log t dt = x^{-s}(s log x + 1)/s^2, s > 0.
double log_tail(double s, double x) {
    if (std::isinf(x)) return 0.0;
    return std::pow(x, -s) * (s * std::log(x) + 1.0) / (s * s);
}

}  // namespace

RadiusMeasure RadiusMeasure::power_law(int d, double delta) {
    if (d < 1) throw std::invalid_argument("dimension must be positive");
    if (!(delta > 0.0))
        throw DivergentMoment("power law needs delta > 0 for a finite d-moment");
    RadiusMeasure m;
    m.kind_ = Kind::PowerLaw;
    m.d_ = d;
    m.delta_ = delta;
    return m;
}

RadiusMeasure RadiusMeasure::truncated(const RadiusMeasure& base, double cutoff) {
    if (!(cutoff > 0.0)) throw std::invalid_argument("cutoff must be positive");
    RadiusMeasure m = base;
    m.kind_ = Kind::Truncated;
    if (base.point_) {
        // a point mass beyond the cutoff is the zero measure; keep it simple
        if (base.atom_ > cutoff) throw std::invalid_argument("cutoff below the atom");
        return base;
    }
    m.cutoff_ = std::min(base.cutoff_, cutoff);
    return m;
}

RadiusMeasure RadiusMeasure::point_mass(int d, double radius) {
    if (d < 1) throw std::invalid_argument("dimension must be positive");
    if (!(radius > 0.0)) throw std::invalid_argument("atom radius must be positive");
    RadiusMeasure m;
    m.kind_ = Kind::PointMass;
    m.d_ = d;
    m.delta_ = 0.0;
    m.atom_ = radius;
    m.cutoff_ = radius;
    m.point_ = true;
    return m;
}

RadiusMeasure RadiusMeasure::from_json(const nlohmann::json& j, int d) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "powerlaw") return power_law(d, j.at("delta").get<double>());
    if (kind == "truncated")
        return truncated(power_law(d, j.at("delta").get<double>()), j.at("cutoff").get<double>());
    if (kind == "pointmass") return point_mass(d, j.at("radius").get<double>());
    throw std::invalid_argument("unknown measure kind: " + kind);
}

double RadiusMeasure::mass(double a, double b) const { return moment(0.0, a, b); }

double RadiusMeasure::moment(double k, double a, double b) const {
    if (a > b) throw std::invalid_argument("interval with a > b");
    if (point_) return (a <= atom_ && atom_ <= b) ? std::pow(atom_, k) : 0.0;
    const double lo = std::max(a, 1.0);
    const double hi = std::min(b, cutoff_);
    if (!(hi > lo)) return 0.0;
    return power_integral(k - (d_ + 1 + delta_), lo, hi);
}

double RadiusMeasure::log_moment(double k, double a, double b) const {
    if (point_) return (a <= atom_ && atom_ <= b) ? std::pow(atom_, k) * std::log(atom_) : 0.0;
    const double lo = std::max(a, 1.0);
    const double hi = std::min(b, cutoff_);
    if (!(hi > lo)) return 0.0;
    const double s = d_ + delta_ - k;
    if (!(s > 0.0)) return std::numeric_limits<double>::infinity();
    return log_tail(s, lo) - log_tail(s, hi);
}

double RadiusMeasure::density(double r) const {
    if (point_) return 0.0;
    if (r < 1.0 || r > cutoff_) return 0.0;
    return std::pow(r, -(d_ + 1 + delta_));
}

double RadiusMeasure::sample_in(double a, double b, double u) const {
    if (point_) return atom_;
    const double lo = std::max(a, 1.0);
    const double hi = std::min(b, cutoff_);
    const double s = d_ + delta_;
    const double plo = std::pow(lo, -s);
    const double phi = std::isinf(hi) ? 0.0 : std::pow(hi, -s);
    const double r = std::pow(plo - u * (plo - phi), -1.0 / s);
    return std::clamp(r, lo, hi);
}

nlohmann::json RadiusMeasure::to_json() const {
    nlohmann::json j;
    switch (kind_) {
        case Kind::PowerLaw: j = {{"kind", "powerlaw"}, {"delta", delta_}}; break;
        case Kind::Truncated: j = {{"kind", "truncated"}, {"delta", delta_}, {"cutoff", cutoff_}}; break;
        case Kind::PointMass: j = {{"kind", "pointmass"}, {"radius", atom_}}; break;
    }
    return j;
}

std::string RadiusMeasure::label() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::PowerLaw: os << "powerlaw"; break;
        case Kind::Truncated: os << "truncated[" << cutoff_ << "]"; break;
        case Kind::PointMass: os << "pointmass[" << atom_ << "]"; break;
    }
    return os.str();
}

CellLaw::CellLaw(int d, double delta, int n) : d_(d), delta_(delta), n_(n) {
    if (n < 1) throw std::invalid_argument("cell band index must be >= 1");
    if (!(delta > 0.0)) throw DivergentMoment("cell law needs delta > 0");
    s_ = d + delta;
    lo_ = std::pow(static_cast<double>(n), -s_);
    hi_ = std::pow(static_cast<double>(n) + 1.0, -s_);
    g_ = (lo_ - hi_) / s_;
}

double CellLaw::F(double t) const { return t < 1.0 ? 0.0 : -std::expm1(-s_ * std::log(t)); }

double CellLaw::cdf(double r) const {
    if (r <= n_) return 0.0;
    if (r >= n_ + 1.0) return 1.0;
    return (lo_ - std::pow(r, -s_)) / (lo_ - hi_);
}

double CellLaw::inverse(double t) const {
    if (t <= 0.0) return n_;
    if (t >= 1.0) return n_ + 1.0;
    const double r = std::pow(lo_ - t * (lo_ - hi_), -1.0 / s_);
    return std::clamp(r, static_cast<double>(n_), n_ + 1.0);
}

double CellLaw::density(double r) const {
    if (r < n_ || r > n_ + 1.0) return 0.0;
    return s_ * std::pow(r, -s_ - 1.0) / (lo_ - hi_);
}

double CellLaw::lipschitz() const { return 1.0 / density(n_ + 1.0); }

double CellLaw::max_density() const { return density(n_); }

double uniform_lipschitz(int d, double delta) { return CellLaw(d, delta, 1).lipschitz(); }

}  // namespace boolperc
