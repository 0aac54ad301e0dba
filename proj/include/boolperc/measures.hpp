// Radius measures. These are unnormalized: the power law has total mass
// 1/(d+delta), not 1, and the Poisson intensity uses the raw measure.
#pragma once

#include <limits>
#include <string>

#include <json.hpp>

namespace boolperc {

class RadiusMeasure {
public:
    enum class Kind { PowerLaw, Truncated, PointMass };

    // Density r^{-(d+1+delta)} on [1, inf). Throws DivergentMoment for delta <= 0.
    static RadiusMeasure power_law(int d, double delta);
    static RadiusMeasure truncated(const RadiusMeasure& base, double cutoff);
    static RadiusMeasure point_mass(int d, double radius);
    static RadiusMeasure from_json(const nlohmann::json& j, int d);

    Kind kind() const { return kind_; }
    int dimension() const { return d_; }
    double delta() const { return delta_; }
    double cutoff() const { return cutoff_; }
    double atom() const { return atom_; }
    // PowerLaw or a truncation of one.
    bool power_law_family() const { return !point_; }

    // mu([a, b]) in closed form.
    double mass(double a, double b) const;
    double total_mass() const { return mass(0.0, kInf); }
    // mu([m, inf))
    double tail_mass(double m) const { return mass(m, kInf); }
    // int t^d dmu
    double d_moment() const { return moment(d_, 0.0, kInf); }
    // int_a^b t^k dmu(t)
    double moment(double k, double a, double b) const;
    // int_a^b t^k log(t) dmu(t)
    double log_moment(double k, double a, double b) const;
    // Lebesgue density (0 for the point mass).
    double density(double r) const;
    double support_min() const { return point_ ? atom_ : 1.0; }
    double support_max() const { return point_ ? atom_ : cutoff_; }
    // Inverse CDF of mu restricted to [a, b], u in [0, 1].
    double sample_in(double a, double b, double u) const;

    nlohmann::json to_json() const;
    std::string label() const;

    static constexpr double kInf = std::numeric_limits<double>::infinity();

private:
    Kind kind_ = Kind::PowerLaw;
    int d_ = 2;
    double delta_ = 1.0;
    double cutoff_ = kInf;
    double atom_ = 0.0;
    bool point_ = false;
};

// The power law restricted to [n, n+1): mass g(n) and normalized CDF.
class CellLaw {
public:
    CellLaw(int d, double delta, int n);

    int n() const { return n_; }
    int dimension() const { return d_; }
    double delta() const { return delta_; }
    double g() const { return g_; }
    // F(t) = 1 - t^{-(d+delta)}
    double F(double t) const;
    // Normalized CDF on [n, n+1].
    double cdf(double r) const;
    double inverse(double t) const;
    double density(double r) const;  // derivative of cdf
    // Lipschitz constant of inverse(): sup of its derivative, attained at t = 1.
    double lipschitz() const;
    // Largest value of the normalized density on [n, n+1], attained at r = n.
    double max_density() const;

private:
    int d_;
    double delta_;
    int n_;
    double s_;
    double lo_;  // n^{-s}
    double hi_;  // (n+1)^{-s}
    double g_;
};

// Lipschitz constant valid for every band n >= 1 (the n = 1 value).
double uniform_lipschitz(int d, double delta);

}  // namespace boolperc
