// Bisection for critical intensities on finite windows.
//
// All intensities are evaluated on the same replicas: each replica is sampled
// once at lambda_hi and thinned down, so the crossing frequency is
// monotone in lambda and the bisections are consistent with each other.
#pragma once

#include <vector>

#include "boolperc/estimators.hpp"

namespace boolperc {

enum class CriticalMode {
    LambdaC,     // P(0 <-> dB_r), the origin must be covered
    LambdaHatC,  // P(B_r <-> dB_2r)
    Slab,        // P(0 <-> dB_r) using balls centered in the slab S_k
};

struct CriticalSearch {
    double lambda_lo = 0.1;
    double lambda_hi = 2.0;
    double tolerance = 0.01;
    std::vector<double> ladder{8.0};  // increasing; the decision uses the last one
    double theta = 0.5;
    CriticalMode mode = CriticalMode::LambdaC;
    double slab_k = 1.0;
};

struct CriticalStep {
    double lambda = 0.0;
    std::vector<double> ladder_estimates;
    Estimate top;
    // +1: crossing frequency above theta with CI separation, -1 below, 0 neither
    int decision = 0;
};

struct CriticalResult {
    // bracket of the point estimate: frequency(lo) < theta <= frequency(hi)
    double lo = 0.0, hi = 0.0;
    // bracket from the Wilson bounds: below ci_lo the upper bound is < theta,
    // above ci_hi the lower bound is > theta
    double ci_lo = 0.0, ci_hi = 0.0;
    std::vector<CriticalStep> trace;
    double truncation_tail = 0.0;
};

CriticalResult critical_search(const CriticalSearch& cs, const RadiusMeasure& mu, const RunOptions& opt);

}  // namespace boolperc
