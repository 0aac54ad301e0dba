#include "boolperc/critical.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "boolperc/errors.hpp"
#include "boolperc/parallel.hpp"

namespace boolperc {

namespace {

class CrossingOracle {
public:
    CrossingOracle(const CriticalSearch& cs, const RadiusMeasure& mu, const RunOptions& opt)
        : cs_(cs), mu_(mu), opt_(opt), d_(mu.dimension()) {
        const double top = cs.ladder.back();
        SamplePlan plan;
        plan.window = Region::ball(d_, Vec{}, cs.mode == CriticalMode::LambdaHatC ? 2.0 * top : top);
        plan.centers_only = false;
        if (cs.mode == CriticalMode::Slab) clip_ = Region::slab(d_, cs.slab_k, top);
        dominating_.resize(opt.replicas);
        parallel_for(opt.replicas, opt.threads,
                     [&](std::size_t i) { dominating_[i] = sample_for(plan, cs.lambda_hi, mu, opt, i); });
        tail_ = dominating_.empty() ? 0.0 : dominating_[0].truncation_tail;
    }

    // Per-scale crossing counts at lambda.
    const std::vector<std::size_t>& counts(double lambda) {
        auto it = cache_.find(lambda);
        if (it != cache_.end()) return it->second;
        const std::size_t S = cs_.ladder.size();
        std::vector<std::vector<char>> hit(opt_.replicas, std::vector<char>(S, 0));
        parallel_for(opt_.replicas, opt_.threads, [&](std::size_t i) {
            const Configuration cfg = thin(dominating_[i], lambda, mu_);
            const ClusterIndex idx = ClusterIndex::build(cfg, clip_);
            for (std::size_t s = 0; s < S; ++s) {
                const double r = cs_.ladder[s];
                const Region a = cs_.mode == CriticalMode::LambdaHatC ? Region::ball(d_, Vec{}, r)
                                                                      : Region::point(d_, Vec{});
                const Region b = Region::sphere(d_, Vec{}, cs_.mode == CriticalMode::LambdaHatC ? 2.0 * r : r);
                hit[i][s] = connected(idx, a, b) ? 1 : 0;
            }
        });
        std::vector<std::size_t> c(S, 0);
        for (const auto& h : hit)
            for (std::size_t s = 0; s < S; ++s) c[s] += h[s];
        return cache_.emplace(lambda, std::move(c)).first->second;
    }

    Estimate top(double lambda) {
        Accumulator acc;
        acc.count = opt_.replicas;
        acc.sum = static_cast<double>(counts(lambda).back());
        acc.sum_sq = acc.sum;
        return bernoulli_estimate(acc, opt_.seed, opt_.z);
    }

    CriticalStep step(double lambda) {
        CriticalStep st;
        st.lambda = lambda;
        for (std::size_t c : counts(lambda)) st.ladder_estimates.push_back(static_cast<double>(c) / opt_.replicas);
        st.top = top(lambda);
        st.decision = st.top.ci_lo > cs_.theta ? 1 : (st.top.ci_hi < cs_.theta ? -1 : 0);
        return st;
    }

    double tail() const { return tail_; }

private:
    const CriticalSearch& cs_;
    const RadiusMeasure& mu_;
    const RunOptions& opt_;
    int d_;
    std::optional<Region> clip_;
    std::vector<Configuration> dominating_;
    std::map<double, std::vector<std::size_t>> cache_;
    double tail_ = 0.0;
};

// Bisection for the crossing of a monotone statistic through theta.
template <class Above>
std::pair<double, double> bisect(double lo, double hi, double tol, Above&& above) {
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (above(mid))
            hi = mid;
        else
            lo = mid;
    }
    return {lo, hi};
}

}  // namespace

CriticalResult critical_search(const CriticalSearch& cs, const RadiusMeasure& mu, const RunOptions& opt) {
    if (!(cs.lambda_lo < cs.lambda_hi)) throw std::invalid_argument("bracket needs lambda_lo < lambda_hi");
    if (cs.ladder.empty() || !std::is_sorted(cs.ladder.begin(), cs.ladder.end()))
        throw std::invalid_argument("ladder must be nonempty and increasing");
    if (!(cs.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (cs.mode == CriticalMode::Slab && mu.dimension() < 3)
        throw std::invalid_argument("slab mode needs d >= 3");

    CrossingOracle oracle(cs, mu, opt);
    CriticalResult res;
    res.truncation_tail = oracle.tail();
    auto record = [&](double lambda) {
        CriticalStep st = oracle.step(lambda);
        res.trace.push_back(st);
        return st;
    };
    const CriticalStep at_lo = record(cs.lambda_lo);
    const CriticalStep at_hi = record(cs.lambda_hi);
    if (at_lo.decision != -1 || at_hi.decision != 1) {
        throw BracketInvalid("bracket does not straddle the transition: frequency " +
                             std::to_string(at_lo.top.value) + " at lambda_lo, " +
                             std::to_string(at_hi.top.value) + " at lambda_hi, theta " +
                             std::to_string(cs.theta));
    }
    std::tie(res.lo, res.hi) = bisect(cs.lambda_lo, cs.lambda_hi, cs.tolerance,
                                      [&](double l) { return record(l).top.value >= cs.theta; });
    // upper end: smallest lambda whose lower Wilson bound clears theta
    res.ci_hi = bisect(cs.lambda_lo, cs.lambda_hi, cs.tolerance,
                       [&](double l) { return record(l).top.ci_lo > cs.theta; })
                    .second;
    // lower end: largest lambda whose upper Wilson bound stays below theta
    res.ci_lo = bisect(cs.lambda_lo, cs.lambda_hi, cs.tolerance,
                       [&](double l) { return record(l).top.ci_hi >= cs.theta; })
                    .first;
    return res;
}

}  // namespace boolperc
