// Poisson sampling of eta with intensity lambda dz (x) mu on a window,
// plus the fair-bit encoded sampler for unit cells.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "boolperc/geometry.hpp"
#include "boolperc/measures.hpp"
#include "boolperc/rng.hpp"

namespace boolperc {

struct SampleOptions {
    // Keep balls whose center lies in the window, instead of every ball meeting it.
    bool centers_only = false;
    // Radii below r_min are not sampled.
    double r_min = 0.0;
    // Allowed expected number of relevant balls lost to the r_max cut.
    double truncation_budget = 1e-3;
};

struct Configuration {
    int d = 2;
    std::vector<Ball> balls;
    Region window = Region::everything(2);
    bool centers_only = false;
    double r_min = 0.0;
    double r_max = 0.0;
    double lambda = 0.0;
    std::uint64_t seed = 0;
    // Expected number of relevant balls dropped by the r_max cut.
    double truncation_tail = 0.0;
    RadiusMeasure measure = RadiusMeasure::point_mass(2, 1.0);

    std::size_t size() const { return balls.size(); }
};

// Radius bands used by the band-wise sampler: unit bands up to 64, then dyadic.
std::vector<std::pair<double, double>> radius_bands(const RadiusMeasure& mu, double lo, double hi);

// Expected count of balls with radius in [a, b] that are relevant to the window.
double expected_relevant(const RadiusMeasure& mu, double lambda, const Region& window, double a, double b,
                         bool centers_only);

// Smallest power-of-two radius whose dropped tail fits the budget.
double default_r_max(const RadiusMeasure& mu, double lambda, const Region& window, bool centers_only,
                     double budget);

Configuration sample(double lambda, const RadiusMeasure& mu, const Region& window, std::optional<double> r_max,
                     Stream& rng, const SampleOptions& opt = {});
Configuration sample(double lambda, const RadiusMeasure& mu, const Region& window, std::optional<double> r_max,
                     std::uint64_t seed, const SampleOptions& opt = {});

// Keep each ball with probability lambda f(r) / (lambda_dom f_dom(r)) using
// its mark, so samples at smaller intensity are subsets of the dominating one.
Configuration thin(const Configuration& dominating, double lambda, const RadiusMeasure& mu);

// Add an independent sample of intensity beta_xi dz (x) mu centred in region.
Configuration sprinkle(const Configuration& base, double beta_xi, const RadiusMeasure& mu, const Region& region,
                       Stream& rng, std::optional<double> r_max = std::nullopt);
Configuration sprinkle(const Configuration& base, double beta_xi, const RadiusMeasure& mu, const Region& region,
                       std::uint64_t seed, std::optional<double> r_max = std::nullopt);

struct CellIndex {
    std::array<std::int64_t, kMaxDim> x{};
    int n = 1;
};

struct EncodedCell {
    CellIndex cell;
    int depth = 53;
    std::vector<bool> alpha;
    std::vector<std::uint64_t> beta;                       // one depth-bit word per point
    std::vector<std::array<std::uint64_t, kMaxDim>> gamma;  // d words per point
    std::vector<Ball> decoded;
    bool capped = false;  // count hit the depth cap

    std::size_t count() const { return decoded.size(); }
    // Center and radius of point k computed from the first `level` bits.
    Ball projected(std::size_t k, int level, int d, double delta) const;
};

// P(Poisson(t) >= k + 1 | Poisson(t) >= k).
double poisson_continue_probability(int k, double t);

struct EncodedSample {
    std::vector<EncodedCell> cells;
    Configuration config;
};

EncodedSample sample_encoded(double lambda, int d, double delta, const std::vector<CellIndex>& cells, int depth,
                             std::uint64_t seed);

// Level-K projection: 2^{-K} floor(2^K z) and the radius through the cell CDF.
Ball project(const Ball& b, int level, int d, double delta);

// Rows x1,...,xd,r.
std::string configuration_csv(const Configuration& cfg);
void write_configuration_csv(const Configuration& cfg, const std::string& path);
nlohmann::json configuration_manifest(const Configuration& cfg);

}  // namespace boolperc
