// Monte Carlo estimators built on sampling + events.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "boolperc/events.hpp"
#include "boolperc/measures.hpp"
#include "boolperc/sampling.hpp"
#include "boolperc/stats.hpp"

namespace boolperc {

struct RunOptions {
    std::uint64_t seed = 1;
    std::size_t replicas = 100;
    unsigned threads = 1;
    // Replica i uses stream index replica_offset + i; disjoint offsets give
    // mergeable partial runs.
    std::size_t replica_offset = 0;
    std::optional<double> r_max;
    double truncation_budget = 1e-3;
    double z = kZ95;
};

// Configuration for replica i following the event's plan.
Configuration sample_for(const SamplePlan& plan, double lambda, const RadiusMeasure& mu, const RunOptions& opt,
                         std::size_t i);

Estimate estimate_event(const EventSpec& ev, double lambda, const RadiusMeasure& mu, const RunOptions& opt);

// Counting functional inside phi for one configuration: balls meeting dS
// connected to B_n through balls contained in S.
double phi_count(const std::vector<Ball>& balls, int d, double n, const Region& S);
Estimate estimate_phi(double n, const Region& S, double lambda, const RadiusMeasure& mu, const RunOptions& opt);

struct CorrelationLength {
    double length = 0.0;  // +inf when no grid point qualifies
    bool finite = false;
    std::vector<std::pair<double, Estimate>> grid;
};
CorrelationLength correlation_length(double n, double lambda, const RadiusMeasure& mu, double ell_max,
                                     const RunOptions& opt, double grid_ratio = 1.4142135623730951);

enum class InsertionWeight { One, LogRadius, LogBand };

struct CellKey {
    std::array<std::int64_t, kMaxDim> x{};
    int n = 1;
    auto operator<=>(const CellKey&) const = default;
};

struct PivotalIntegral {
    Estimate integral;      // per-replica means of the importance weights
    Estimate probability;   // frequency of the event on the same samples
    double tail_bound = 0;  // contribution of radii above r_max, bounded in closed form
    std::vector<std::pair<CellKey, double>> cell_mass;  // optional per-cell tallies
};

// Estimates int w(r) P(eta not in E, eta + (z,r) in E) dz dmu(r) with
// insertions drawn over the balls the event can see.
PivotalIntegral pivotal_integral(const EventSpec& ev, double lambda, const RadiusMeasure& mu, InsertionWeight w,
                                 std::size_t draws, const RunOptions& opt, bool tally_cells = false);

Estimate estimate_pivotal(const EventSpec& ev, const CellKey& cell, double lambda, double delta,
                          std::size_t draws, const RunOptions& opt);

// d/d delta of P(E) under lambda dz (x) mu_delta, from the insertion formula.
Estimate delta_derivative(const EventSpec& ev, double lambda, double delta, std::size_t draws,
                          const RunOptions& opt);

struct TalagrandReport {
    Estimate lhs;          // sum over cells of log(n) Piv
    Estimate probability;  // P(E)
    double max_piv = 0.0;
    CellKey argmax;
    std::size_t cells_examined = 0;
    double ratio = 0.0;  // lhs / (P(1-P) log(1/max_piv))
    bool degenerate = false;
};
TalagrandReport talagrand_diagnostic(const EventSpec& ev, double lambda, double delta, std::size_t cell_budget,
                                     std::size_t draws, const RunOptions& opt);

// (dz (x) mu)-mass of the bad balls of Lambda_K.
double bad_ball_mass(int d, double K, const RadiusMeasure& mu);

struct TwoArmRow {
    double K = 0.0;
    Estimate two_arm;
    Estimate bad;
    double bad_closed_form = 0.0;
};
std::vector<TwoArmRow> two_arm_decay(double k, const std::vector<double>& Ks, double lambda,
                                     const RadiusMeasure& mu, const RunOptions& opt);

}  // namespace boolperc
