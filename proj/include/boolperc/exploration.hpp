// Grimmett-Marstrand style exploration on Z^2, the abstract exploration
// process, and the sprinkling / covering estimates feeding it.
#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "boolperc/estimators.hpp"

namespace boolperc {

inline constexpr double kSitePercolationThreshold = 0.592746;

using Site = std::array<int, 2>;

struct SprinkleParams {
    double beta = 3.0;
    double xi = 1.0;
    double pc_site = kSitePercolationThreshold;

    // xi solving eps^{1/c'} = exp(-3 lambda / xi).
    static SprinkleParams from_epsilon(double lambda, double epsilon, double c_prime, double beta);
    // Per-step success bound 1 - e^{-beta} - eps^{1/(3c')}, with eps^{1/c'} = exp(-3 lambda/xi).
    double step_bound(double lambda) const;
    bool above_threshold(double lambda) const { return step_bound(lambda) > pc_site; }
};

struct ExplorationStep {
    std::size_t t = 0;
    Site x{};
    bool accepted = false;
    std::optional<Ball> seed_ball;
    std::size_t frontier_size = 0;
};

struct ExplorationOutcome {
    bool reached_boundary = false;
    std::size_t accepted = 0;  // |A| including the origin
    std::size_t rejected = 0;  // |B|
    std::vector<ExplorationStep> trace;
    // Balls of eta_infinity centered in the explored region and its volume,
    // for the domination check; zero for the abstract process.
    std::size_t eta_infinity_balls = 0;
    std::size_t sprinkled_balls = 0;
    double explored_volume = 0.0;
};

// Frontier bookkeeping shared by both explorations. Edges run from an
// accepted site to an unexplored site inside [-M, M]^2 and are taken in
// lexicographic (site, direction) order.
class ExplorationState {
public:
    explicit ExplorationState(int M);

    int M() const { return M_; }
    bool has_frontier() const { return !frontier_.empty(); }
    std::size_t frontier_size() const { return frontier_.size(); }
    // Next (from, to) pair.
    std::pair<Site, Site> next_edge() const;
    void accept(const Site& x);
    void reject(const Site& x);
    bool accepted(const Site& x) const { return A_.count(x) != 0; }
    bool explored(const Site& x) const { return A_.count(x) || B_.count(x); }
    const std::set<Site>& A() const { return A_; }
    const std::set<Site>& B() const { return B_; }
    bool reached_boundary() const { return reached_; }

private:
    void add_edges_from(const Site& a);
    void drop_edges_into(const Site& x);
    bool inside(const Site& x) const { return std::abs(x[0]) <= M_ && std::abs(x[1]) <= M_; }

    int M_;
    std::set<Site> A_, B_;
    std::set<std::pair<Site, int>> frontier_;
    bool reached_ = false;
};

ExplorationOutcome run_exploration(double lambda, const RadiusMeasure& mu, double n, double N, int M,
                                   const SprinkleParams& sp, std::uint64_t seed);
// Same process on a supplied base configuration (its balls stand for eta).
ExplorationOutcome run_exploration(const std::vector<Ball>& base, const RadiusMeasure& mu, double n, double N,
                                   int M, const SprinkleParams& sp, std::uint64_t seed);

using AcceptanceOracle = std::function<double(const ExplorationState&, const Site&)>;
ExplorationOutcome run_abstract_exploration(const AcceptanceOracle& q, int M, std::uint64_t seed);
ExplorationOutcome run_abstract_exploration(double q, int M, std::uint64_t seed);
// The uniform that decides site x in the abstract exploration.
double abstract_site_uniform(std::uint64_t seed, const Site& x);

std::string trace_jsonl(const ExplorationOutcome& out, int d);

// Largest number of balls 2Nx + B_{4 sqrt(d) N}, x in Z^2, sharing a point.
int overlap_multiplicity(int d);
// Number of N-balls centered on dB_{rho N} used to cover B_{(rho+1/2)N} \ B_{rho N}.
int covering_number(int d, double rho);

struct SprinkleGeometry {
    Region a = Region::everything(2);      // A
    Region r = Region::everything(2);      // R, participating centers
    std::optional<Region> c;               // deterministic target C
    std::optional<Region> b_centers;       // random target balls B: centers ...
    double b_min_radius = 0.0;             // ... and radius floor
};

struct SprinklingGain {
    Estimate hypothesis;  // unconditional P(A <-> O(B cap eta) u C in R)
    Estimate before;      // conditional on no eta ball meeting dA, eta only
    Estimate after;       // same conditioning, eta u eta'
    double conditioning_rate = 0.0;
    double hypothesis_bound = 0.0;   // 1 - exp(-3 lambda/xi)
    double conclusion_bound = 0.0;   // 1 - exp(-beta) - exp(-lambda/xi)
};

// Connection indicator used by the sprinkling estimates.
bool sprinkle_connection(const std::vector<Ball>& balls, const std::vector<char>& is_b, int d,
                         const SprinkleGeometry& g);

SprinklingGain sprinkling_gain(const SprinkleGeometry& g, double lambda, const RadiusMeasure& mu, double beta,
                               double xi, const RunOptions& opt, std::size_t max_attempts = 200000);

struct CoveringBoost {
    Estimate annulus;
    Estimate box;
    int covering = 0;
    double z_norm = 0.0;
};
// Seed event over the annulus at rho, and the box event E_n(z + Lambda_N, B_{3 sqrt(d) N})
// with z = z_norm e_1 (default rho N).
CoveringBoost covering_seed_boost(double n, double N, double rho, double lambda, const RadiusMeasure& mu,
                                  const RunOptions& opt, std::optional<double> z_norm = std::nullopt);

}  // namespace boolperc
