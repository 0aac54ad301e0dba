// Points, balls and the handful of region shapes the events need.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace boolperc {

// Dimensions above 4 are not supported; coordinates past d are kept at 0.
inline constexpr int kMaxDim = 4;

using Vec = std::array<double, kMaxDim>;

struct Ball {
    Vec center{};
    double radius = 0.0;
    double mark = 0.0;  // uniform tag used for coupled thinning
};

double unit_ball_volume(int d);
double dist2(const Vec& a, const Vec& b, int d);
double norm(const Vec& a, int d);
bool balls_intersect(const Ball& a, const Ball& b, int d);
Vec make_vec(std::initializer_list<double> xs);

class Region {
public:
    enum class Kind { Ball, Box, Annulus, Sphere, BoxBoundary, Everything };

    // Closed ball; radius 0 gives a single point.
    static Region ball(int d, const Vec& c, double radius);
    static Region point(int d, const Vec& c) { return ball(d, c, 0.0); }
    // Closed axis-aligned box c + prod [-h_k, h_k]; infinite half widths allowed.
    static Region box(int d, const Vec& c, const Vec& half);
    static Region cube(int d, const Vec& c, double half);
    // [-L,L]^2 x [-k,k]^{d-2}
    static Region slab(int d, double k, double L);
    // {y : inner < |y - c| <= outer}
    static Region annulus(int d, const Vec& c, double inner, double outer);
    static Region sphere(int d, const Vec& c, double radius);
    static Region box_boundary(int d, const Vec& c, double half);
    static Region everything(int d);

    Kind kind() const { return kind_; }
    int dimension() const { return d_; }
    const Vec& center() const { return center_; }
    const Vec& half() const { return half_; }
    double inner() const { return r0_; }
    double outer() const { return r1_; }
    double radius() const { return r1_; }

    bool contains_point(const Vec& y) const;
    bool intersects_ball(const Vec& z, double r) const;
    bool intersects_ball(const Ball& b) const { return intersects_ball(b.center, b.radius); }
    bool contains_ball(const Vec& z, double r) const;
    bool bounded() const;

    Region boundary() const;
    double volume() const;
    // Axis-aligned half extents around center().
    Vec bbox_half() const;
    // Largest distance from center() to a point of the region.
    double circumradius() const;

    // Polynomial upper bound on vol(R + B_r) in r; exact for Ball and Box.
    std::vector<double> steiner_coefficients() const;
    double enlarged_volume(double r) const;

    nlohmann::json to_json() const;
    std::string describe() const;

private:
    Kind kind_ = Kind::Everything;
    int d_ = 2;
    Vec center_{};
    Vec half_{};
    double r0_ = 0.0;
    double r1_ = 0.0;
};

// Conservative test that `outer` contains `inner`.
bool region_contains(const Region& outer, const Region& inner);

// Whether B_a, B_b and the closed box share a point.
bool balls_meet_in_box(const Ball& a, const Ball& b, const Region& box, int d);

// Distance from y to a closed box (0 inside).
double dist_to_box(const Vec& y, const Region& box, int d);

double binomial(int n, int k);

}  // namespace boolperc
