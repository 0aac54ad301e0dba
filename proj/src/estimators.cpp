#include "boolperc/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "boolperc/parallel.hpp"

namespace boolperc {

namespace {

double weight_of(InsertionWeight w, double r) {
    switch (w) {
        case InsertionWeight::One: return 1.0;
        case InsertionWeight::LogRadius: return std::log(r);
        case InsertionWeight::LogBand: return std::log(std::floor(r));
    }
    return 0.0;
}

std::string tail_note(double tail) {
    std::ostringstream os;
    os << "radii above r_max dropped; expected relevant balls lost <= " << tail;
    return os.str();
}

struct InsertionBand {
    double a, b;
    Vec half;  // half extents of the center box
    double wmax;
    double load;  // vol * mass * wmax
};

Estimate scaled(const Estimate& e, double c) {
    Estimate out = e;
    out.value = c * e.value;
    out.stderr_ = std::abs(c) * e.stderr_;
    out.ci_lo = std::min(c * e.ci_lo, c * e.ci_hi);
    out.ci_hi = std::max(c * e.ci_lo, c * e.ci_hi);
    out.bernoulli = false;
    return out;
}

double effective_r_max(const SamplePlan& plan, double lambda, const RadiusMeasure& mu, const RunOptions& opt) {
    double r = opt.r_max ? *opt.r_max
                         : default_r_max(mu, lambda, plan.window, plan.centers_only, opt.truncation_budget);
    if (plan.r_max_floor > 0.0) r = std::max(r, plan.r_max_floor);
    return std::min(r, mu.support_max());
}

}  // namespace

Configuration sample_for(const SamplePlan& plan, double lambda, const RadiusMeasure& mu, const RunOptions& opt,
                         std::size_t i) {
    Stream rng(opt.seed, StreamTag::Replica, opt.replica_offset + i);
    SampleOptions so;
    so.centers_only = plan.centers_only;
    so.r_min = plan.r_min;
    so.truncation_budget = opt.truncation_budget;
    Configuration cfg = sample(lambda, mu, plan.window, effective_r_max(plan, lambda, mu, opt), rng, so);
    cfg.seed = opt.seed;
    return cfg;
}

Estimate estimate_event(const EventSpec& ev, double lambda, const RadiusMeasure& mu, const RunOptions& opt) {
    if (opt.replicas < 1) throw std::invalid_argument("replicas must be >= 1");
    if (mu.dimension() != ev.dimension()) throw std::invalid_argument("event and measure dimensions differ");
    const SamplePlan plan = ev.plan();
    std::vector<char> hit(opt.replicas, 0);
    std::vector<double> tail(opt.replicas, 0.0);
    parallel_for(opt.replicas, opt.threads, [&](std::size_t i) {
        const Configuration cfg = sample_for(plan, lambda, mu, opt, i);
        hit[i] = evaluate_event(cfg, ev) ? 1 : 0;
        tail[i] = cfg.truncation_tail;
    });
    Accumulator acc;
    for (char h : hit) acc.add(h);
    Estimate e = bernoulli_estimate(acc, opt.seed, opt.z);
    e.bias_bound = *std::max_element(tail.begin(), tail.end());
    e.bias_note = tail_note(e.bias_bound);
    return e;
}

double phi_count(const std::vector<Ball>& balls, int d, double n, const Region& S) {
    const Region rim = S.boundary();
    const Region core = Region::ball(d, Vec{}, n);
    std::vector<char> inside(balls.size(), 0);
    bool any_rim = false;
    for (std::size_t i = 0; i < balls.size(); ++i) {
        inside[i] = S.contains_ball(balls[i].center, balls[i].radius) ? 1 : 0;
        any_rim = any_rim || rim.intersects_ball(balls[i]);
    }
    if (!any_rim) return 0.0;
    const ClusterIndex idx(balls, d, inside);
    const auto roots = idx.roots_meeting(core);
    double count = 0.0;
    for (const Ball& b : balls) {
        if (rim.intersects_ball(b) && ball_connected_to(idx, b, roots, core)) count += 1.0;
    }
    return count;
}

Estimate estimate_phi(double n, const Region& S, double lambda, const RadiusMeasure& mu, const RunOptions& opt) {
    const int d = mu.dimension();
    if (!region_contains(S, Region::ball(d, Vec{}, n))) throw std::invalid_argument("phi needs B_n inside S");
    if (mu.support_max() > n * (1.0 + 1e-12)) throw std::invalid_argument("phi needs radii truncated at n");
    SamplePlan plan;
    plan.window = S;
    plan.centers_only = false;
    std::vector<double> vals(opt.replicas, 0.0);
    parallel_for(opt.replicas, opt.threads, [&](std::size_t i) {
        const Configuration cfg = sample_for(plan, lambda, mu, opt, i);
        vals[i] = phi_count(cfg.balls, d, n, S);
    });
    Accumulator acc;
    for (double v : vals) acc.add(v);
    return mean_estimate(acc, opt.seed, opt.z);
}

CorrelationLength correlation_length(double n, double lambda, const RadiusMeasure& mu, double ell_max,
                                     const RunOptions& opt, double grid_ratio) {
    if (!(ell_max >= n)) throw std::invalid_argument("ell_max must be >= n");
    if (!(grid_ratio > 1.0)) throw std::invalid_argument("grid ratio must exceed 1");
    const int d = mu.dimension();
    CorrelationLength out;
    out.length = std::numeric_limits<double>::infinity();
    std::vector<double> grid;
    for (double s = n; s < ell_max; s *= grid_ratio) grid.push_back(s);
    grid.push_back(ell_max);
    for (double s : grid) {
        const Estimate e = estimate_phi(n, Region::ball(d, Vec{}, s), lambda, mu, opt);
        out.grid.emplace_back(s, e);
        if (e.ci_hi <= 1.0 / std::numbers::e) {
            out.length = s;
            out.finite = true;
            break;
        }
    }
    return out;
}

PivotalIntegral pivotal_integral(const EventSpec& ev, double lambda, const RadiusMeasure& mu, InsertionWeight w,
                                 std::size_t draws, const RunOptions& opt, bool tally_cells) {
    if (!ev.increasing()) throw std::invalid_argument("insertion integrals need an increasing event");
    if (draws < 1) throw std::invalid_argument("need at least one insertion draw");
    const int d = ev.dimension();
    const SamplePlan plan = ev.plan();
    const double r_max = effective_r_max(plan, lambda, mu, opt);
    const Vec whalf = plan.window.bbox_half();
    const Vec& wc = plan.window.center();

    std::vector<InsertionBand> bands;
    double Z = 0.0;
    for (const auto& [a, b] : radius_bands(mu, std::max(plan.r_min, mu.support_min()), r_max)) {
        InsertionBand ib{a, b, {}, weight_of(w, b), 0.0};
        const double e = plan.centers_only ? 0.0 : b;
        double vol = 1.0;
        for (int k = 0; k < d; ++k) {
            ib.half[k] = whalf[k] + e;
            vol *= 2.0 * ib.half[k];
        }
        const double m = mu.power_law_family() ? mu.mass(a, b) : 1.0;
        if (ib.wmax <= 0.0 || m <= 0.0) continue;
        ib.load = vol * m * ib.wmax;
        Z += ib.load;
        bands.push_back(ib);
    }
    std::vector<double> cum;
    for (const auto& ib : bands) cum.push_back((cum.empty() ? 0.0 : cum.back()) + ib.load);

    std::vector<double> vals(opt.replicas, 0.0);
    std::vector<char> base_hit(opt.replicas, 0);
    std::vector<std::vector<std::pair<CellKey, double>>> tallies(tally_cells ? opt.replicas : 0);
    parallel_for(opt.replicas, opt.threads, [&](std::size_t i) {
        const Configuration cfg = sample_for(plan, lambda, mu, opt, i);
        if (evaluate_event(cfg.balls, ev)) {
            base_hit[i] = 1;
            return;
        }
        if (bands.empty()) return;
        Stream ins(opt.seed, StreamTag::Insertion, opt.replica_offset + i);
        std::vector<Ball> balls = cfg.balls;
        double sum = 0.0;
        for (std::size_t t = 0; t < draws; ++t) {
            const double u = ins.uniform() * Z;
            std::size_t bi = std::upper_bound(cum.begin(), cum.end(), u) - cum.begin();
            bi = std::min(bi, bands.size() - 1);
            const InsertionBand& ib = bands[bi];
            Ball b;
            b.radius = mu.sample_in(ib.a, ib.b, ins.uniform());
            for (int k = 0; k < d; ++k) b.center[k] = wc[k] + (2.0 * ins.uniform() - 1.0) * ib.half[k];
            const bool relevant = plan.centers_only ? plan.window.contains_point(b.center)
                                                    : plan.window.intersects_ball(b);
            if (!relevant) continue;
            balls.push_back(b);
            const bool on = evaluate_event(balls, ev);
            balls.pop_back();
            if (!on) continue;
            const double ratio = weight_of(w, b.radius) / ib.wmax;
            sum += ratio;
            if (tally_cells) {
                CellKey key;
                for (int k = 0; k < d; ++k) key.x[k] = static_cast<std::int64_t>(std::llround(b.center[k]));
                key.n = static_cast<int>(std::floor(b.radius));
                tallies[i].emplace_back(key, Z * ratio / static_cast<double>(draws));
            }
        }
        vals[i] = Z * sum / static_cast<double>(draws);
    });

    PivotalIntegral out;
    Accumulator acc, pacc;
    for (std::size_t i = 0; i < opt.replicas; ++i) {
        acc.add(vals[i]);
        pacc.add(base_hit[i]);
    }
    out.integral = mean_estimate(acc, opt.seed, opt.z);
    out.probability = bernoulli_estimate(pacc, opt.seed, opt.z);

    // closed-form bound on the part of the integral above r_max
    if (r_max < mu.support_max()) {
        auto wm = [&](double j) {
            return w == InsertionWeight::One ? mu.moment(j, r_max, RadiusMeasure::kInf)
                                             : mu.log_moment(j, r_max, RadiusMeasure::kInf);
        };
        if (plan.centers_only) {
            out.tail_bound = plan.window.volume() * wm(0.0);
        } else {
            const auto c = plan.window.steiner_coefficients();
            for (std::size_t j = 0; j < c.size(); ++j) out.tail_bound += c[j] * wm(static_cast<double>(j));
        }
    }
    out.integral.bias_bound = out.tail_bound;
    out.integral.bias_note = "insertion radii above r_max omitted; their contribution <= " +
                             std::to_string(out.tail_bound);

    if (tally_cells) {
        std::map<CellKey, double> m;
        for (const auto& t : tallies)
            for (const auto& [k, v] : t) m[k] += v / static_cast<double>(opt.replicas);
        out.cell_mass.assign(m.begin(), m.end());
        std::stable_sort(out.cell_mass.begin(), out.cell_mass.end(),
                         [](const auto& x, const auto& y) { return x.second > y.second; });
    }
    return out;
}

Estimate estimate_pivotal(const EventSpec& ev, const CellKey& cell, double lambda, double delta,
                          std::size_t draws, const RunOptions& opt) {
    if (!ev.increasing()) throw std::invalid_argument("pivotality needs an increasing event");
    const int d = ev.dimension();
    const RadiusMeasure mu = RadiusMeasure::power_law(d, delta);
    const CellLaw law(d, delta, cell.n);
    const SamplePlan plan = ev.plan();
    std::vector<double> vals(opt.replicas, 0.0);
    parallel_for(opt.replicas, opt.threads, [&](std::size_t i) {
        const Configuration cfg = sample_for(plan, lambda, mu, opt, i);
        if (evaluate_event(cfg.balls, ev)) return;
        Stream ins(opt.seed, StreamTag::Insertion, opt.replica_offset + i);
        std::vector<Ball> balls = cfg.balls;
        std::size_t hits = 0;
        for (std::size_t t = 0; t < draws; ++t) {
            Ball b;
            for (int k = 0; k < d; ++k) b.center[k] = static_cast<double>(cell.x[k]) + ins.uniform() - 0.5;
            b.radius = law.inverse(ins.uniform());
            balls.push_back(b);
            if (evaluate_event(balls, ev)) ++hits;
            balls.pop_back();
        }
        vals[i] = law.g() * static_cast<double>(hits) / static_cast<double>(draws);
    });
    Accumulator acc;
    for (double v : vals) acc.add(v);
    return mean_estimate(acc, opt.seed, opt.z);
}

Estimate delta_derivative(const EventSpec& ev, double lambda, double delta, std::size_t draws,
                          const RunOptions& opt) {
    const RadiusMeasure mu = RadiusMeasure::power_law(ev.dimension(), delta);
    if (lambda == 0.0) {
        Accumulator acc;
        for (std::size_t i = 0; i < opt.replicas; ++i) acc.add(0.0);
        return mean_estimate(acc, opt.seed, opt.z);
    }
    const PivotalIntegral pi = pivotal_integral(ev, lambda, mu, InsertionWeight::LogRadius, draws, opt);
    Estimate e = scaled(pi.integral, -lambda);
    e.bias_bound = lambda * pi.tail_bound + opt.truncation_budget;
    e.bias_note = "tail of the log-weighted insertion integral <= " + std::to_string(lambda * pi.tail_bound) +
                  "; sampled configurations drop at most " + std::to_string(opt.truncation_budget) +
                  " expected balls";
    return e;
}

TalagrandReport talagrand_diagnostic(const EventSpec& ev, double lambda, double delta, std::size_t cell_budget,
                                     std::size_t draws, const RunOptions& opt) {
    const RadiusMeasure mu = RadiusMeasure::power_law(ev.dimension(), delta);
    TalagrandReport rep;
    const PivotalIntegral lhs = pivotal_integral(ev, lambda, mu, InsertionWeight::LogBand, draws, opt);
    rep.lhs = lhs.integral;
    rep.probability = lhs.probability;

    RunOptions pilot_opt = opt;
    pilot_opt.seed = stream_key(opt.seed, StreamTag::Pilot, 0);
    const PivotalIntegral pilot = pivotal_integral(ev, lambda, mu, InsertionWeight::One, draws, pilot_opt, true);
    const std::size_t m = std::min(cell_budget, pilot.cell_mass.size());
    for (std::size_t c = 0; c < m; ++c) {
        RunOptions o = opt;
        o.seed = stream_key(opt.seed, StreamTag::Pilot, c + 1);
        const Estimate piv = estimate_pivotal(ev, pilot.cell_mass[c].first, lambda, delta, draws, o);
        if (piv.value > rep.max_piv) {
            rep.max_piv = piv.value;
            rep.argmax = pilot.cell_mass[c].first;
        }
    }
    rep.cells_examined = m;
    const double p = rep.probability.value;
    if (p <= 0.0 || p >= 1.0 || rep.max_piv <= 0.0) {
        rep.degenerate = true;
        rep.ratio = std::numeric_limits<double>::infinity();
        return rep;
    }
    rep.ratio = rep.lhs.value / (p * (1.0 - p) * std::log(1.0 / rep.max_piv));
    return rep;
}

double bad_ball_mass(int d, double K, const RadiusMeasure& mu) {
    const auto c = Region::cube(d, Vec{}, K).steiner_coefficients();
    const double above = std::nextafter(K, RadiusMeasure::kInf);
    double m = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) m += c[j] * mu.moment(static_cast<double>(j), above, RadiusMeasure::kInf);
    return m;
}

std::vector<TwoArmRow> two_arm_decay(double k, const std::vector<double>& Ks, double lambda,
                                     const RadiusMeasure& mu, const RunOptions& opt) {
    const int d = mu.dimension();
    std::vector<TwoArmRow> rows;
    for (double K : Ks) {
        const EventSpec ev = EventSpec::two_arm(d, k, K);
        const SamplePlan plan = ev.plan();
        std::vector<char> a2(opt.replicas, 0), bad(opt.replicas, 0);
        double tail = 0.0;
        parallel_for(opt.replicas, opt.threads, [&](std::size_t i) {
            const Configuration cfg = sample_for(plan, lambda, mu, opt, i);
            a2[i] = two_arm_components(cfg.balls, d, std::get<TwoArmEvent>(ev.variant())) >= 2 ? 1 : 0;
            for (const Ball& b : cfg.balls) {
                if (is_bad_ball(b, d, K)) {
                    bad[i] = 1;
                    break;
                }
            }
            if (i == 0) tail = cfg.truncation_tail;
        });
        Accumulator x, y;
        for (std::size_t i = 0; i < opt.replicas; ++i) {
            x.add(a2[i]);
            y.add(bad[i]);
        }
        TwoArmRow row;
        row.K = K;
        row.two_arm = bernoulli_estimate(x, opt.seed, opt.z);
        row.bad = bernoulli_estimate(y, opt.seed, opt.z);
        row.bad.bias_bound = tail;
        row.bad.bias_note = tail_note(tail);
        row.bad_closed_form = -std::expm1(-lambda * bad_ball_mass(d, K, mu));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace boolperc
