#include "boolperc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace boolperc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dim(int d) {
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("dimension must be in [1, 4]");
}

bool leq_slack(double a, double b) { return a <= b + 1e-12 * std::max(1.0, std::abs(b)); }

std::string vec_str(const Vec& v, int d) {
    std::ostringstream os;
    os << "(";
    for (int k = 0; k < d; ++k) os << (k ? "," : "") << v[k];
    os << ")";
    return os.str();
}

}  // namespace

double unit_ball_volume(int d) {
    return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

double dist2(const Vec& a, const Vec& b, int d) {
    double s = 0.0;
    for (int k = 0; k < d; ++k) {
        const double t = a[k] - b[k];
        s += t * t;
    }
    return s;
}

double norm(const Vec& a, int d) { return std::sqrt(dist2(a, Vec{}, d)); }

bool balls_intersect(const Ball& a, const Ball& b, int d) {
    const double s = a.radius + b.radius;
    return dist2(a.center, b.center, d) <= s * s;
}

Vec make_vec(std::initializer_list<double> xs) {
    Vec v{};
    int k = 0;
    for (double x : xs) {
        if (k >= kMaxDim) break;
        v[k++] = x;
    }
    return v;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

Region Region::ball(int d, const Vec& c, double radius) {
    check_dim(d);
    if (!(radius >= 0.0)) throw std::invalid_argument("ball radius must be >= 0");
    Region g;
    g.kind_ = Kind::Ball;
    g.d_ = d;
    g.center_ = c;
    g.r1_ = radius;
    return g;
}

Region Region::box(int d, const Vec& c, const Vec& half) {
    check_dim(d);
    Region g;
    g.kind_ = Kind::Box;
    g.d_ = d;
    g.center_ = c;
    for (int k = 0; k < d; ++k) {
        if (!(half[k] > 0.0)) throw std::invalid_argument("box half widths must be positive");
        g.half_[k] = half[k];
    }
    return g;
}

Region Region::cube(int d, const Vec& c, double half) {
    Vec h{};
    for (int k = 0; k < d; ++k) h[k] = half;
    return box(d, c, h);
}

Region Region::slab(int d, double k, double L) {
    Vec h{};
    for (int i = 0; i < d; ++i) h[i] = i < 2 ? L : k;
    return box(d, Vec{}, h);
}

Region Region::annulus(int d, const Vec& c, double inner, double outer) {
    check_dim(d);
    if (!(inner >= 0.0 && outer > inner)) throw std::invalid_argument("annulus needs 0 <= inner < outer");
    Region g;
    g.kind_ = Kind::Annulus;
    g.d_ = d;
    g.center_ = c;
    g.r0_ = inner;
    g.r1_ = outer;
    return g;
}

Region Region::sphere(int d, const Vec& c, double radius) {
    Region g = ball(d, c, radius);
    g.kind_ = Kind::Sphere;
    return g;
}

Region Region::box_boundary(int d, const Vec& c, double half) {
    Region g = cube(d, c, half);
    g.kind_ = Kind::BoxBoundary;
    return g;
}

Region Region::everything(int d) {
    check_dim(d);
    Region g;
    g.d_ = d;
    for (int k = 0; k < d; ++k) g.half_[k] = kInf;
    g.r1_ = kInf;
    return g;
}

bool Region::bounded() const {
    if (kind_ == Kind::Everything) return false;
    if (kind_ == Kind::Box) {
        for (int k = 0; k < d_; ++k)
            if (std::isinf(half_[k])) return false;
    }
    return true;
}

bool Region::contains_point(const Vec& y) const {
    switch (kind_) {
        case Kind::Ball: return dist2(y, center_, d_) <= r1_ * r1_;
        case Kind::Sphere: return dist2(y, center_, d_) == r1_ * r1_;
        case Kind::Annulus: {
            const double s = dist2(y, center_, d_);
            return s > r0_ * r0_ && s <= r1_ * r1_;
        }
        case Kind::Box:
            for (int k = 0; k < d_; ++k)
                if (std::abs(y[k] - center_[k]) > half_[k]) return false;
            return true;
        case Kind::BoxBoundary: {
            bool on_face = false;
            for (int k = 0; k < d_; ++k) {
                const double t = std::abs(y[k] - center_[k]);
                if (t > half_[k]) return false;
                if (t == half_[k]) on_face = true;
            }
            return on_face;
        }
        case Kind::Everything: return true;
    }
    return false;
}

double dist_to_box(const Vec& y, const Region& box, int d) {
    double s = 0.0;
    for (int k = 0; k < d; ++k) {
        const double t = std::abs(y[k] - box.center()[k]) - box.half()[k];
        if (t > 0.0) s += t * t;
    }
    return std::sqrt(s);
}

bool Region::intersects_ball(const Vec& z, double r) const {
    switch (kind_) {
        case Kind::Ball: {
            const double s = r1_ + r;
            return dist2(z, center_, d_) <= s * s;
        }
        case Kind::Sphere: {
            const double s = dist2(z, center_, d_);
            const double hi = r1_ + r;
            if (s > hi * hi) return false;
            if (r >= r1_) return true;
            const double lo = r1_ - r;
            return s >= lo * lo;
        }
        case Kind::Annulus: {
            const double s = dist2(z, center_, d_);
            const double hi = r1_ + r;
            if (s > hi * hi) return false;
            // need a point with |y - c| > inner: farthest point sits at |z - c| + r
            const double far = std::sqrt(s) + r;
            return far > r0_;
        }
        case Kind::Box: {
            double s = 0.0;
            for (int k = 0; k < d_; ++k) {
                const double t = std::abs(z[k] - center_[k]) - half_[k];
                if (t > 0.0) s += t * t;
            }
            return s <= r * r;
        }
        case Kind::BoxBoundary: {
            double s = 0.0;
            bool strictly_inside = true;
            for (int k = 0; k < d_; ++k) {
                const double a = std::abs(z[k] - center_[k]);
                const double t = a - half_[k];
                if (t > 0.0) s += t * t;
                if (a + r >= half_[k]) strictly_inside = false;
            }
            return s <= r * r && !strictly_inside;
        }
        case Kind::Everything: return true;
    }
    return false;
}

bool Region::contains_ball(const Vec& z, double r) const {
    switch (kind_) {
        case Kind::Ball: {
            if (r > r1_) return false;
            const double s = r1_ - r;
            return dist2(z, center_, d_) <= s * s;
        }
        case Kind::Annulus: {
            const double dz = std::sqrt(dist2(z, center_, d_));
            return dz + r <= r1_ && dz - r > r0_;
        }
        case Kind::Box:
            for (int k = 0; k < d_; ++k)
                if (std::abs(z[k] - center_[k]) + r > half_[k]) return false;
            return true;
        case Kind::Sphere:
        case Kind::BoxBoundary: return r == 0.0 && contains_point(z);
        case Kind::Everything: return true;
    }
    return false;
}

Region Region::boundary() const {
    switch (kind_) {
        case Kind::Ball: return sphere(d_, center_, r1_);
        case Kind::Box: {
            for (int k = 1; k < d_; ++k)
                if (half_[k] != half_[0]) throw std::invalid_argument("boundary() needs a cube");
            return box_boundary(d_, center_, half_[0]);
        }
        case Kind::Sphere:
        case Kind::BoxBoundary: return *this;
        default: throw std::invalid_argument("boundary() unsupported for this region");
    }
}

double Region::volume() const {
    switch (kind_) {
        case Kind::Ball: return unit_ball_volume(d_) * std::pow(r1_, d_);
        case Kind::Annulus: return unit_ball_volume(d_) * (std::pow(r1_, d_) - std::pow(r0_, d_));
        case Kind::Box: {
            double v = 1.0;
            for (int k = 0; k < d_; ++k) v *= 2.0 * half_[k];
            return v;
        }
        case Kind::Sphere:
        case Kind::BoxBoundary: return 0.0;
        case Kind::Everything: return kInf;
    }
    return 0.0;
}

Vec Region::bbox_half() const {
    Vec h{};
    for (int k = 0; k < d_; ++k) {
        switch (kind_) {
            case Kind::Box:
            case Kind::BoxBoundary:
            case Kind::Everything: h[k] = half_[k]; break;
            default: h[k] = r1_; break;
        }
    }
    return h;
}

double Region::circumradius() const {
    switch (kind_) {
        case Kind::Box:
        case Kind::BoxBoundary: {
            double s = 0.0;
            for (int k = 0; k < d_; ++k) s += half_[k] * half_[k];
            return std::sqrt(s);
        }
        case Kind::Everything: return kInf;
        default: return r1_;
    }
}

std::vector<double> Region::steiner_coefficients() const {
    std::vector<double> c(d_ + 1, 0.0);
    if (kind_ == Kind::Box || kind_ == Kind::BoxBoundary) {
        // vol(box + B_r) = sum_j alpha_j r^j e_{d-j}(side lengths)
        std::vector<double> e(d_ + 1, 0.0);
        e[0] = 1.0;
        for (int k = 0; k < d_; ++k) {
            const double side = 2.0 * half_[k];
            for (int m = k + 1; m >= 1; --m) e[m] += side * e[m - 1];
        }
        for (int j = 0; j <= d_; ++j) c[j] = unit_ball_volume(j) * e[d_ - j];
        return c;
    }
    if (kind_ == Kind::Everything) {
        for (auto& x : c) x = kInf;
        return c;
    }
    // (R + r)^d alpha_d covers balls exactly and bounds the other round shapes
    const double R = r1_;
    for (int j = 0; j <= d_; ++j) c[j] = unit_ball_volume(d_) * binomial(d_, j) * std::pow(R, d_ - j);
    return c;
}

double Region::enlarged_volume(double r) const {
    const auto c = steiner_coefficients();
    double v = 0.0;
    for (int j = static_cast<int>(c.size()) - 1; j >= 0; --j) v = v * r + c[j];
    return v;
}

nlohmann::json Region::to_json() const {
    nlohmann::json j;
    static const char* names[] = {"ball", "box", "annulus", "sphere", "box_boundary", "everything"};
    j["kind"] = names[static_cast<int>(kind_)];
    j["d"] = d_;
    std::vector<double> c(center_.begin(), center_.begin() + d_);
    j["center"] = c;
    if (kind_ == Kind::Box || kind_ == Kind::BoxBoundary) {
        std::vector<double> h(half_.begin(), half_.begin() + d_);
        j["half"] = h;
    } else if (kind_ == Kind::Annulus) {
        j["inner"] = r0_;
        j["outer"] = r1_;
    } else if (kind_ != Kind::Everything) {
        j["radius"] = r1_;
    }
    return j;
}

std::string Region::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::Ball: os << "ball" << vec_str(center_, d_) << " r=" << r1_; break;
        case Kind::Sphere: os << "sphere" << vec_str(center_, d_) << " r=" << r1_; break;
        case Kind::Annulus: os << "annulus" << vec_str(center_, d_) << " " << r0_ << ".." << r1_; break;
        case Kind::Box: os << "box" << vec_str(center_, d_) << " half" << vec_str(half_, d_); break;
        case Kind::BoxBoundary: os << "box_boundary" << vec_str(center_, d_) << " half=" << half_[0]; break;
        case Kind::Everything: os << "everything"; break;
    }
    return os.str();
}

bool region_contains(const Region& outer, const Region& inner) {
    using K = Region::Kind;
    const int d = outer.dimension();
    if (outer.kind() == K::Everything) return true;
    if (inner.kind() == K::Everything) return false;
    switch (outer.kind()) {
        case K::Ball: {
            double far = 0.0;
            if (inner.kind() == K::Box || inner.kind() == K::BoxBoundary) {
                double s = 0.0;
                for (int k = 0; k < d; ++k) {
                    const double t = std::abs(inner.center()[k] - outer.center()[k]) + inner.half()[k];
                    s += t * t;
                }
                far = std::sqrt(s);
            } else {
                far = std::sqrt(dist2(inner.center(), outer.center(), d)) + inner.outer();
            }
            return leq_slack(far, outer.radius());
        }
        case K::Box: {
            const Vec h = inner.bbox_half();
            for (int k = 0; k < d; ++k) {
                const double t = std::abs(inner.center()[k] - outer.center()[k]) + h[k];
                if (!leq_slack(t, outer.half()[k])) return false;
            }
            return true;
        }
        case K::Annulus: {
            if (dist2(inner.center(), outer.center(), d) != 0.0) return false;
            if (inner.kind() == K::Annulus) return inner.inner() >= outer.inner() && inner.outer() <= outer.outer();
            if (inner.kind() == K::Sphere) return inner.radius() > outer.inner() && inner.radius() <= outer.outer();
            return false;
        }
        default: return false;
    }
}

bool balls_meet_in_box(const Ball& a, const Ball& b, const Region& box, int d) {
    if (!balls_intersect(a, b, d)) return false;
    if (dist_to_box(a.center, box, d) > a.radius) return false;
    if (dist_to_box(b.center, box, d) > b.radius) return false;

    auto clamp_point = [&](const Vec& y) {
        Vec out{};
        for (int k = 0; k < d; ++k) {
            const double lo = box.center()[k] - box.half()[k];
            const double hi = box.center()[k] + box.half()[k];
            out[k] = std::clamp(y[k], lo, hi);
        }
        return out;
    };
    const double ra2 = a.radius * a.radius;
    const double rb2 = b.radius * b.radius;

    // The point of box and B_b nearest to a.center lies on the path
    // t -> clamp((1-t) a + t b); |y(t) - b| decreases along it.
    const Vec y0 = clamp_point(a.center);
    if (dist2(y0, b.center, d) <= rb2) return true;  // y0 is within a.radius already
    const Vec y1 = clamp_point(b.center);
    if (dist2(y1, a.center, d) <= ra2) return true;

    auto at = [&](double t) {
        Vec y{};
        for (int k = 0; k < d; ++k) y[k] = (1.0 - t) * a.center[k] + t * b.center[k];
        return clamp_point(y);
    };
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (dist2(at(mid), b.center, d) <= rb2)
            hi = mid;
        else
            lo = mid;
    }
    return dist2(at(hi), a.center, d) <= ra2;
}

}  // namespace boolperc
