#include "boolperc/exploration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "boolperc/errors.hpp"

namespace boolperc {

namespace {

// Lexicographic order of the unit vectors.
constexpr std::array<Site, 4> kDirs{{{-1, 0}, {0, -1}, {0, 1}, {1, 0}}};

Site plus(const Site& a, const Site& b) { return {a[0] + b[0], a[1] + b[1]}; }
Site minus(const Site& a, const Site& b) { return {a[0] - b[0], a[1] - b[1]}; }

std::uint64_t site_key(const Site& x) {
    const std::int64_t v[2] = {x[0], x[1]};
    return hash_ints(v, 2);
}

bool lex_less(const Vec& a, const Vec& b, int d) {
    for (int k = 0; k < d; ++k) {
        if (a[k] != b[k]) return a[k] < b[k];
    }
    return false;
}

// Balls bucketed by the nearest site 2Nx in the first two coordinates.
class SiteBuckets {
public:
    explicit SiteBuckets(double N) : N_(N) {}

    void add(const Ball& b) {
        const Site s{static_cast<int>(std::floor((b.center[0] + N_) / (2 * N_))),
                     static_cast<int>(std::floor((b.center[1] + N_) / (2 * N_)))};
        map_[site_key(s)].push_back(b);
        ++count_;
    }

    // Balls centered in the ball of radius R around 2Nx.
    void collect(const Site& x, double R, int d, std::vector<Ball>& out) const {
        const int reach = static_cast<int>(std::ceil(R / (2 * N_))) + 1;
        Vec c{};
        c[0] = 2 * N_ * x[0];
        c[1] = 2 * N_ * x[1];
        for (int i = -reach; i <= reach; ++i) {
            for (int j = -reach; j <= reach; ++j) {
                auto it = map_.find(site_key({x[0] + i, x[1] + j}));
                if (it == map_.end()) continue;
                for (const Ball& b : it->second)
                    if (dist2(b.center, c, d) <= R * R) out.push_back(b);
            }
        }
    }

    std::size_t size() const { return count_; }

private:
    double N_;
    std::unordered_map<std::uint64_t, std::vector<Ball>> map_;
    std::size_t count_ = 0;
};

// Volume of the union of d-balls of radius R centered at 2Nx, x in sites,
// integrated over the plane of the first two coordinates.
double union_volume(const std::vector<Site>& sites, double N, double R, int d) {
    if (sites.empty()) return 0.0;
    const double h = R / 16.0;
    int lo0 = sites[0][0], hi0 = lo0, lo1 = sites[0][1], hi1 = lo1;
    for (const Site& s : sites) {
        lo0 = std::min(lo0, s[0]);
        hi0 = std::max(hi0, s[0]);
        lo1 = std::min(lo1, s[1]);
        hi1 = std::max(hi1, s[1]);
    }
    const double x0 = 2 * N * lo0 - R, y0 = 2 * N * lo1 - R;
    const int nx = static_cast<int>(std::ceil((2 * N * (hi0 - lo0) + 2 * R) / h));
    const int ny = static_cast<int>(std::ceil((2 * N * (hi1 - lo1) + 2 * R) / h));
    std::vector<double> dmin2(static_cast<std::size_t>(nx) * ny, std::numeric_limits<double>::infinity());
    for (const Site& s : sites) {
        const double cx = 2 * N * s[0], cy = 2 * N * s[1];
        const int i0 = std::max(0, static_cast<int>(std::floor((cx - R - x0) / h)));
        const int i1 = std::min(nx - 1, static_cast<int>(std::ceil((cx + R - x0) / h)));
        const int j0 = std::max(0, static_cast<int>(std::floor((cy - R - y0) / h)));
        const int j1 = std::min(ny - 1, static_cast<int>(std::ceil((cy + R - y0) / h)));
        for (int i = i0; i <= i1; ++i) {
            for (int j = j0; j <= j1; ++j) {
                const double px = x0 + (i + 0.5) * h - cx, py = y0 + (j + 0.5) * h - cy;
                double& m = dmin2[static_cast<std::size_t>(i) * ny + j];
                m = std::min(m, px * px + py * py);
            }
        }
    }
    // each plane point carries the transverse (d-2)-ball cross-section
    const double alpha = d == 2 ? 1.0 : unit_ball_volume(d - 2);
    double vol = 0.0;
    for (double m : dmin2) {
        if (m <= R * R) vol += alpha * std::pow(R * R - m, 0.5 * (d - 2));
    }
    return vol * h * h;
}

}  // namespace

SprinkleParams SprinkleParams::from_epsilon(double lambda, double epsilon, double c_prime, double beta) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
    if (!(c_prime > 0.0)) throw std::invalid_argument("c' must be positive");
    SprinkleParams sp;
    sp.beta = beta;
    sp.xi = 3.0 * lambda * c_prime / (-std::log(epsilon));
    return sp;
}

double SprinkleParams::step_bound(double lambda) const {
    return 1.0 - std::exp(-beta) - std::exp(-lambda / xi);
}

ExplorationState::ExplorationState(int M) : M_(M) {
    if (M < 0) throw std::invalid_argument("M must be nonnegative");
    const Site o{0, 0};
    A_.insert(o);
    reached_ = M == 0;
    add_edges_from(o);
}

std::pair<Site, Site> ExplorationState::next_edge() const {
    if (frontier_.empty()) throw std::logic_error("empty frontier");
    const auto& [a, k] = *frontier_.begin();
    return {a, plus(a, kDirs[k])};
}

void ExplorationState::add_edges_from(const Site& a) {
    for (int k = 0; k < 4; ++k) {
        const Site x = plus(a, kDirs[k]);
        if (inside(x) && !explored(x)) frontier_.insert({a, k});
    }
}

void ExplorationState::drop_edges_into(const Site& x) {
    for (int k = 0; k < 4; ++k) frontier_.erase({minus(x, kDirs[k]), k});
}

void ExplorationState::accept(const Site& x) {
    drop_edges_into(x);
    A_.insert(x);
    add_edges_from(x);
    if (std::max(std::abs(x[0]), std::abs(x[1])) == M_) reached_ = true;
}

void ExplorationState::reject(const Site& x) {
    drop_edges_into(x);
    B_.insert(x);
}

ExplorationOutcome run_exploration(double lambda, const RadiusMeasure& mu, double n, double N, int M,
                                   const SprinkleParams& sp, std::uint64_t seed) {
    const int d = mu.dimension();
    const double R = 4.0 * std::sqrt(static_cast<double>(d)) * N;
    Vec half{};
    for (int k = 0; k < d; ++k) half[k] = R;
    half[0] += 2 * N * M;
    half[1] += 2 * N * M;
    Stream rng(seed, StreamTag::Exploration, 0);
    SampleOptions so;
    so.centers_only = true;
    const Configuration base = sample(lambda, mu, Region::box(d, Vec{}, half), std::nullopt, rng, so);
    return run_exploration(base.balls, mu, n, N, M, sp, seed);
}

ExplorationOutcome run_exploration(const std::vector<Ball>& base, const RadiusMeasure& mu, double n, double N,
                                   int M, const SprinkleParams& sp, std::uint64_t seed) {
    const int d = mu.dimension();
    if (!(N >= n && n > 0.0)) throw std::invalid_argument("exploration needs 0 < n <= N");
    if (!(sp.beta >= 0.0 && sp.xi > 0.0)) throw std::invalid_argument("sprinkle parameters must be positive");
    const double R = 4.0 * std::sqrt(static_cast<double>(d)) * N;
    const double beta_xi = sp.beta * sp.xi;

    SiteBuckets eta(N), sprinkled(N);
    for (const Ball& b : base) eta.add(b);

    auto site_center = [&](const Site& x) {
        Vec c{};
        c[0] = 2 * N * x[0];
        c[1] = 2 * N * x[1];
        return c;
    };

    ExplorationState st(M);
    std::map<Site, Ball> seeds;
    seeds[{0, 0}] = Ball{Vec{}, n, 0.0};
    std::vector<Site> queried;
    ExplorationOutcome out;

    std::size_t t = 0;
    while (!st.reached_boundary() && st.has_frontier()) {
        ExplorationStep step;
        step.t = t;
        step.frontier_size = st.frontier_size();
        const auto [from, x] = st.next_edge();
        step.x = x;
        queried.push_back(x);

        const Region tilde = Region::ball(d, site_center(x), R);
        if (beta_xi > 0.0) {
            Stream srng(seed, StreamTag::Sprinkle, site_key(x));
            SampleOptions so;
            so.centers_only = true;
            const Configuration extra = sample(beta_xi, mu, tilde, std::nullopt, srng, so);
            for (const Ball& b : extra.balls) sprinkled.add(b);
        }

        std::vector<Ball> local;
        eta.collect(x, R, d, local);
        sprinkled.collect(x, R, d, local);
        const Ball& s = seeds.at(from);
        GeneralSeedEvent ev{Region::ball(d, s.center, s.radius), Region::cube(d, site_center(x), N), tilde, n};
        const auto w = general_seed_witnesses(local, d, ev);
        if (!w.empty()) {
            std::size_t best = w[0];
            for (std::size_t i : w) {
                const Ball& a = local[i];
                const Ball& b = local[best];
                if (a.radius > b.radius || (a.radius == b.radius && lex_less(a.center, b.center, d))) best = i;
            }
            seeds[x] = local[best];
            step.accepted = true;
            step.seed_ball = local[best];
            st.accept(x);
        } else {
            st.reject(x);
        }
        out.trace.push_back(step);
        ++t;
    }

    out.reached_boundary = st.reached_boundary();
    out.accepted = st.A().size();
    out.rejected = st.B().size();
    out.sprinkled_balls = sprinkled.size();

    // eta_infinity restricted to the explored region
    std::size_t inside = 0;
    auto in_explored = [&](const Ball& b) {
        for (const Site& x : queried)
            if (dist2(b.center, site_center(x), d) <= R * R) return true;
        return false;
    };
    if (!queried.empty()) {
        for (const Ball& b : base)
            if (in_explored(b)) ++inside;
        // every sprinkle is centered in the ball of some queried site
        inside += sprinkled.size();
    }
    out.eta_infinity_balls = inside;
    out.explored_volume = union_volume(queried, N, R, d);
    return out;
}

double abstract_site_uniform(std::uint64_t seed, const Site& x) {
    return Stream(seed, StreamTag::Abstract, site_key(x)).uniform();
}

ExplorationOutcome run_abstract_exploration(const AcceptanceOracle& q, int M, std::uint64_t seed) {
    ExplorationState st(M);
    ExplorationOutcome out;
    std::size_t t = 0;
    while (!st.reached_boundary() && st.has_frontier()) {
        ExplorationStep step;
        step.t = t++;
        step.frontier_size = st.frontier_size();
        const Site x = st.next_edge().second;
        step.x = x;
        step.accepted = abstract_site_uniform(seed, x) < q(st, x);
        if (step.accepted)
            st.accept(x);
        else
            st.reject(x);
        out.trace.push_back(step);
    }
    out.reached_boundary = st.reached_boundary();
    out.accepted = st.A().size();
    out.rejected = st.B().size();
    return out;
}

ExplorationOutcome run_abstract_exploration(double q, int M, std::uint64_t seed) {
    return run_abstract_exploration([q](const ExplorationState&, const Site&) { return q; }, M, seed);
}

std::string trace_jsonl(const ExplorationOutcome& out, int d) {
    std::ostringstream os;
    for (const auto& s : out.trace) {
        nlohmann::json j;
        j["t"] = s.t;
        j["x_t"] = {s.x[0], s.x[1]};
        j["accepted"] = s.accepted;
        if (s.seed_ball) {
            std::vector<double> c(s.seed_ball->center.begin(), s.seed_ball->center.begin() + d);
            j["seed_ball"] = {{"center", c}, {"radius", s.seed_ball->radius}};
        } else {
            j["seed_ball"] = nullptr;
        }
        j["frontier_size"] = s.frontier_size;
        os << j.dump() << '\n';
    }
    return os.str();
}

int overlap_multiplicity(int d) {
    const double R = 4.0 * std::sqrt(static_cast<double>(d));
    const int reach = static_cast<int>(std::ceil(R / 2.0)) + 1;
    int best = 0;
    // by symmetry of 2Z^2 it is enough to scan y in [0,1]^2
    constexpr int kSteps = 64;
    for (int a = 0; a <= kSteps; ++a) {
        for (int b = 0; b <= kSteps; ++b) {
            const double y0 = static_cast<double>(a) / kSteps, y1 = static_cast<double>(b) / kSteps;
            int c = 0;
            for (int i = -reach; i <= reach; ++i)
                for (int j = -reach; j <= reach; ++j) {
                    const double u = y0 - 2.0 * i, v = y1 - 2.0 * j;
                    if (u * u + v * v <= R * R) ++c;
                }
            best = std::max(best, c);
        }
    }
    return best;
}

int covering_number(int d, double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
    if (d == 2) {
        const double s = rho + 0.5;
        // the covered angle shrinks with the distance from the origin
        const double c = (s * s + rho * rho - 1.0) / (2.0 * rho * s);
        if (c <= -1.0) return 1;
        if (c >= 1.0) throw std::invalid_argument("unit balls on dB_rho cannot reach the outer sphere");
        return static_cast<int>(std::ceil(M_PI / std::acos(c)));
    }
    // greedy cover of sampled annulus points by unit balls centered on dB_rho
    Stream rng(0x5eed, StreamTag::Oracle, static_cast<std::uint64_t>(d));
    std::normal_distribution<double> gauss;
    auto direction = [&]() {
        Vec v{};
        double s = 0;
        for (int k = 0; k < d; ++k) {
            v[k] = gauss(rng);
            s += v[k] * v[k];
        }
        s = std::sqrt(s);
        for (int k = 0; k < d; ++k) v[k] /= s;
        return v;
    };
    std::vector<Vec> targets;
    for (int i = 0; i < 3000; ++i) {
        const Vec u = direction();
        for (double r : {rho + 1e-9, rho + 0.25, rho + 0.5}) {
            Vec p{};
            for (int k = 0; k < d; ++k) p[k] = r * u[k];
            targets.push_back(p);
        }
    }
    std::vector<Vec> candidates;
    for (int i = 0; i < 800; ++i) {
        Vec u = direction();
        for (int k = 0; k < d; ++k) u[k] *= rho;
        candidates.push_back(u);
    }
    std::vector<char> covered(targets.size(), 0);
    std::size_t left = targets.size();
    int count = 0;
    while (left > 0) {
        std::size_t best = 0, best_gain = 0;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            std::size_t g = 0;
            for (std::size_t t = 0; t < targets.size(); ++t)
                if (!covered[t] && dist2(candidates[c], targets[t], d) <= 1.0) ++g;
            if (g > best_gain) {
                best_gain = g;
                best = c;
            }
        }
        if (best_gain == 0) throw std::runtime_error("covering candidates do not reach every target");
        for (std::size_t t = 0; t < targets.size(); ++t) {
            if (!covered[t] && dist2(candidates[best], targets[t], d) <= 1.0) {
                covered[t] = 1;
                --left;
            }
        }
        ++count;
    }
    return count;
}

bool sprinkle_connection(const std::vector<Ball>& balls, const std::vector<char>& is_b, int d,
                         const SprinkleGeometry& g) {
    std::vector<char> part(balls.size(), 0);
    for (std::size_t i = 0; i < balls.size(); ++i) part[i] = g.r.contains_point(balls[i].center) ? 1 : 0;
    const ClusterIndex idx(balls, d, part);
    const auto ra = idx.roots_meeting(g.a);
    if (ra.empty()) return false;
    std::vector<std::int64_t> targets;
    if (g.c) targets = idx.roots_meeting(*g.c);
    for (std::size_t i = 0; i < balls.size(); ++i)
        if (is_b[i] && idx.root(i) >= 0) targets.push_back(idx.root(i));
    for (std::int64_t r : targets)
        if (std::binary_search(ra.begin(), ra.end(), r)) return true;
    return false;
}

SprinklingGain sprinkling_gain(const SprinkleGeometry& g, double lambda, const RadiusMeasure& mu, double beta,
                               double xi, const RunOptions& opt, std::size_t max_attempts) {
    const int d = mu.dimension();
    if (!g.r.bounded()) throw std::invalid_argument("R must be bounded");
    if (!(xi > 0.0 && beta >= 0.0)) throw std::invalid_argument("need xi > 0 and beta >= 0");
    const Region rim = g.a.boundary();
    SampleOptions so;
    so.centers_only = true;
    so.truncation_budget = opt.truncation_budget;

    auto flags = [&](const std::vector<Ball>& balls, std::size_t from_eta) {
        std::vector<char> f(balls.size(), 0);
        if (!g.b_centers) return f;
        for (std::size_t i = 0; i < from_eta; ++i) {
            const Ball& b = balls[i];
            f[i] = (b.radius >= g.b_min_radius && g.b_centers->contains_point(b.center) &&
                    !rim.intersects_ball(b))
                       ? 1
                       : 0;
        }
        return f;
    };

    Accumulator hyp, before, after;
    std::size_t attempts = 0;
    for (std::size_t i = 0; i < opt.replicas; ++i) {
        const Stream base(opt.seed, StreamTag::Replica, opt.replica_offset + i);
        {
            Stream s = base.child(StreamTag::Sample, 0);
            const Configuration eta = sample(lambda, mu, g.r, opt.r_max, s, so);
            hyp.add(sprinkle_connection(eta.balls, flags(eta.balls, eta.size()), d, g) ? 1.0 : 0.0);
        }
        Configuration eta;
        bool ok = false;
        for (std::size_t j = 0; j < max_attempts && !ok; ++j) {
            Stream s = base.child(StreamTag::Conditioning, j);
            eta = sample(lambda, mu, g.r, opt.r_max, s, so);
            ++attempts;
            ok = std::none_of(eta.balls.begin(), eta.balls.end(),
                              [&](const Ball& b) { return rim.intersects_ball(b); });
        }
        if (!ok) {
            throw ConditioningTooRare("no configuration avoiding the boundary of A in " +
                                          std::to_string(max_attempts) + " attempts",
                                      static_cast<double>(i) / static_cast<double>(attempts));
        }
        before.add(sprinkle_connection(eta.balls, flags(eta.balls, eta.size()), d, g) ? 1.0 : 0.0);
        Stream s = base.child(StreamTag::Sprinkle, 0);
        std::vector<Ball> all = eta.balls;
        if (beta * xi > 0.0) {
            const Configuration extra = sample(beta * xi, mu, g.r, opt.r_max, s, so);
            all.insert(all.end(), extra.balls.begin(), extra.balls.end());
        }
        after.add(sprinkle_connection(all, flags(all, eta.size()), d, g) ? 1.0 : 0.0);
    }
    SprinklingGain out;
    out.conditioning_rate = attempts ? static_cast<double>(opt.replicas) / static_cast<double>(attempts) : 1.0;
    if (out.conditioning_rate < 1e-3)
        throw ConditioningTooRare("conditioning on an empty boundary layer is too rare", out.conditioning_rate);
    out.hypothesis = bernoulli_estimate(hyp, opt.seed, opt.z);
    out.before = bernoulli_estimate(before, opt.seed, opt.z);
    out.after = bernoulli_estimate(after, opt.seed, opt.z);
    out.hypothesis_bound = 1.0 - std::exp(-3.0 * lambda / xi);
    out.conclusion_bound = 1.0 - std::exp(-beta) - std::exp(-lambda / xi);
    return out;
}

CoveringBoost covering_seed_boost(double n, double N, double rho, double lambda, const RadiusMeasure& mu,
                                  const RunOptions& opt, std::optional<double> z_norm) {
    const int d = mu.dimension();
    const double sd = std::sqrt(static_cast<double>(d));
    CoveringBoost out;
    out.z_norm = z_norm.value_or(rho * N);
    if (!(out.z_norm >= N && out.z_norm <= (sd + 2.0) * N))
        throw std::invalid_argument("|z| must lie in [N, (sqrt(d)+2) N]");
    out.covering = covering_number(d, rho);
    out.annulus = estimate_event(EventSpec::seed(d, n, N, rho), lambda, mu, opt);
    Vec z{};
    z[0] = out.z_norm;
    const EventSpec box = EventSpec::general_seed(d, Region::ball(d, Vec{}, n), Region::cube(d, z, N),
                                                  Region::ball(d, Vec{}, 3.0 * sd * N), n);
    out.box = estimate_event(box, lambda, mu, opt);
    return out;
}

}  // namespace boolperc
