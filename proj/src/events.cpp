#include "boolperc/events.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "boolperc/errors.hpp"

namespace boolperc {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Region seed_clip(int d, const SeedEvent& s) { return Region::ball(d, Vec{}, (s.rho + 0.5) * s.N); }

GeneralSeedEvent as_general(int d, const SeedEvent& s) {
    return {Region::ball(d, Vec{}, s.n), Region::annulus(d, Vec{}, s.rho * s.N, (s.rho + 0.5) * s.N),
            seed_clip(d, s), s.n};
}

// Smallest box around two regions.
Region hull_box(int d, const Region& a, const Region& b) {
    Vec c{}, h{};
    const Vec ha = a.bbox_half(), hb = b.bbox_half();
    for (int k = 0; k < d; ++k) {
        const double lo = std::min(a.center()[k] - ha[k], b.center()[k] - hb[k]);
        const double hi = std::max(a.center()[k] + ha[k], b.center()[k] + hb[k]);
        c[k] = 0.5 * (lo + hi);
        h[k] = 0.5 * (hi - lo);
    }
    return Region::box(d, c, h);
}

}  // namespace

EventSpec::EventSpec(int d, Variant v) : d_(d), v_(std::move(v)) {
    std::visit(Overloaded{
                   [](const ConnectionEvent& e) {
                       if (!e.clip.bounded()) throw std::invalid_argument("connection clip must be bounded");
                   },
                   [](const CrossingEvent& e) {
                       if (!(e.inner >= 0.0 && e.outer > e.inner))
                           throw std::invalid_argument("crossing needs 0 <= inner < outer");
                   },
                   [](const SeedEvent& e) {
                       if (!(e.rho >= 1.0)) throw std::invalid_argument("seed event needs rho >= 1");
                       if (!(e.N >= 2.0 * e.n)) throw std::invalid_argument("seed event needs N >= 2n");
                       if (!(e.n > 0.0)) throw std::invalid_argument("seed event needs n > 0");
                   },
                   [](const GeneralSeedEvent& e) {
                       if (!e.clip.bounded() || !e.target.bounded())
                           throw std::invalid_argument("general seed regions must be bounded");
                   },
                   [](const TwoArmEvent& e) {
                       if (!(e.k > 0.0 && e.K >= e.k)) throw std::invalid_argument("two-arm needs 0 < k <= K");
                   },
                   [](const BigBallEvent& e) {
                       if (!(e.n > 0.0 && e.threshold > 0.0)) throw std::invalid_argument("big-ball needs n, threshold > 0");
                   },
               },
               v_);
}

EventSpec EventSpec::connection(int d, Region a, Region b, Region clip) {
    return EventSpec(d, ConnectionEvent{std::move(a), std::move(b), std::move(clip)});
}
EventSpec EventSpec::crossing(int d, double inner, double outer, std::optional<Region> clip) {
    return EventSpec(d, CrossingEvent{inner, outer, std::move(clip)});
}
EventSpec EventSpec::seed(int d, double n, double N, double rho) { return EventSpec(d, SeedEvent{n, N, rho}); }
EventSpec EventSpec::general_seed(int d, Region source, Region target, Region clip, double min_radius) {
    return EventSpec(d, GeneralSeedEvent{std::move(source), std::move(target), std::move(clip), min_radius});
}
EventSpec EventSpec::two_arm(int d, double k, double K) { return EventSpec(d, TwoArmEvent{k, K}); }
EventSpec EventSpec::big_ball(int d, double n, double threshold) {
    return EventSpec(d, BigBallEvent{n, threshold});
}
EventSpec EventSpec::dictator(int d, double n, double delta) {
    return big_ball(d, n, std::pow(n, d / (d + delta)));
}

EventSpec EventSpec::from_json(const nlohmann::json& j, int d) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "crossing") {
        std::optional<Region> clip;
        if (j.contains("slab_k")) clip = Region::slab(d, j.at("slab_k").get<double>(), j.at("outer").get<double>());
        return crossing(d, j.value("inner", 0.0), j.at("outer").get<double>(), clip);
    }
    if (kind == "origin") return crossing(d, 0.0, j.at("r").get<double>());
    if (kind == "seed") return seed(d, j.at("n").get<double>(), j.at("N").get<double>(), j.value("rho", 1.0));
    if (kind == "bigball") return big_ball(d, j.at("n").get<double>(), j.at("threshold").get<double>());
    if (kind == "dictator") return dictator(d, j.at("n").get<double>(), j.at("delta").get<double>());
    if (kind == "twoarm") return two_arm(d, j.at("k").get<double>(), j.at("K").get<double>());
    throw std::invalid_argument("unknown event kind: " + kind);
}

SamplePlan EventSpec::plan() const {
    SamplePlan p;
    const int d = d_;
    std::visit(Overloaded{
                   [&](const ConnectionEvent& e) {
                       p.window = e.clip;
                       p.centers_only = true;
                   },
                   [&](const CrossingEvent& e) {
                       p.window = Region::ball(d, Vec{}, e.outer);
                       p.centers_only = false;
                   },
                   [&](const SeedEvent& e) {
                       p.window = seed_clip(d, e);
                       p.centers_only = true;
                   },
                   [&](const GeneralSeedEvent& e) {
                       p.window = region_contains(e.clip, e.target) ? e.clip : hull_box(d, e.clip, e.target);
                       p.centers_only = true;
                   },
                   [&](const TwoArmEvent& e) {
                       // every ball of radius > K is removed, so r_max = K loses nothing
                       p.window = Region::cube(d, Vec{}, e.K);
                       p.centers_only = false;
                       p.r_max_floor = e.K;
                   },
                   [&](const BigBallEvent& e) {
                       p.window = Region::ball(d, Vec{}, e.n);
                       p.centers_only = true;
                       p.r_min = e.threshold;
                   },
               },
               v_);
    return p;
}

std::string EventSpec::label() const {
    std::ostringstream os;
    std::visit(Overloaded{
                   [&](const ConnectionEvent& e) { os << "connection(" << e.a.describe() << "|" << e.b.describe() << ")"; },
                   [&](const CrossingEvent& e) {
                       os << "crossing(" << e.inner << "," << e.outer << (e.clip ? ",clipped" : "") << ")";
                   },
                   [&](const SeedEvent& e) { os << "seed(" << e.n << "," << e.N << "," << e.rho << ")"; },
                   [&](const GeneralSeedEvent& e) { os << "general_seed(n=" << e.min_radius << ")"; },
                   [&](const TwoArmEvent& e) { os << "two_arm(" << e.k << "," << e.K << ")"; },
                   [&](const BigBallEvent& e) { os << "big_ball(" << e.n << "," << e.threshold << ")"; },
               },
               v_);
    return os.str();
}

nlohmann::json EventSpec::to_json() const {
    nlohmann::json j;
    std::visit(Overloaded{
                   [&](const ConnectionEvent& e) {
                       j = {{"kind", "connection"}, {"a", e.a.to_json()}, {"b", e.b.to_json()}, {"clip", e.clip.to_json()}};
                   },
                   [&](const CrossingEvent& e) {
                       j = {{"kind", "crossing"}, {"inner", e.inner}, {"outer", e.outer}};
                       if (e.clip) j["clip"] = e.clip->to_json();
                   },
                   [&](const SeedEvent& e) { j = {{"kind", "seed"}, {"n", e.n}, {"N", e.N}, {"rho", e.rho}}; },
                   [&](const GeneralSeedEvent& e) {
                       j = {{"kind", "general_seed"}, {"source", e.source.to_json()}, {"target", e.target.to_json()},
                            {"clip", e.clip.to_json()}, {"min_radius", e.min_radius}};
                   },
                   [&](const TwoArmEvent& e) { j = {{"kind", "twoarm"}, {"k", e.k}, {"K", e.K}}; },
                   [&](const BigBallEvent& e) { j = {{"kind", "bigball"}, {"n", e.n}, {"threshold", e.threshold}}; },
               },
               v_);
    return j;
}

void check_window(const Configuration& cfg, const EventSpec& ev) {
    const SamplePlan p = ev.plan();
    bool ok = region_contains(cfg.window, p.window);
    if (cfg.centers_only && !p.centers_only) ok = false;
    if (cfg.r_min > p.r_min) ok = false;
    if (p.r_max_floor > 0.0 && cfg.r_max < std::min(p.r_max_floor, cfg.measure.support_max())) ok = false;
    if (!ok) {
        throw WindowTooSmall("configuration window " + cfg.window.describe() + " cannot resolve " + ev.label() +
                                 "; required " + p.window.describe() +
                                 (p.centers_only ? " (centers)" : " (meeting)"),
                             p.window.describe());
    }
}

bool is_bad_ball(const Ball& b, int d, double K) {
    if (!Region::cube(d, Vec{}, K).intersects_ball(b)) return false;
    if (b.radius > K) return true;
    for (int k = 0; k < d; ++k)
        if (std::abs(b.center[k]) > 2.0 * K) return true;
    return false;
}

std::vector<std::size_t> general_seed_witnesses(const std::vector<Ball>& balls, int d, const GeneralSeedEvent& ev) {
    std::vector<std::size_t> out;
    std::vector<std::size_t> targets;
    for (std::size_t i = 0; i < balls.size(); ++i) {
        if (balls[i].radius >= ev.min_radius && ev.target.contains_point(balls[i].center)) targets.push_back(i);
    }
    if (targets.empty()) return out;
    const ClusterIndex idx = ClusterIndex::build(balls, d, ev.clip);
    const auto roots = idx.roots_meeting(ev.source);
    for (std::size_t i : targets) {
        if (ball_connected_to(idx, balls[i], roots, ev.source)) out.push_back(i);
    }
    return out;
}

int two_arm_components(const std::vector<Ball>& balls, int d, const TwoArmEvent& ev) {
    const Region big = Region::cube(d, Vec{}, ev.K);
    const Region small = Region::cube(d, Vec{}, ev.k);
    const Region rim = Region::box_boundary(d, Vec{}, ev.K);
    std::vector<char> part(balls.size(), 0);
    for (std::size_t i = 0; i < balls.size(); ++i)
        part[i] = (big.intersects_ball(balls[i]) && !is_bad_ball(balls[i], d, ev.K)) ? 1 : 0;
    const ClusterIndex idx(balls, d, part,
                           [&](const Ball& a, const Ball& b) { return balls_meet_in_box(a, b, big, d); });
    const auto r1 = idx.roots_meeting(small);
    const auto r2 = idx.roots_meeting(rim);
    std::vector<std::int64_t> both;
    std::set_intersection(r1.begin(), r1.end(), r2.begin(), r2.end(), std::back_inserter(both));
    return static_cast<int>(both.size());
}

bool evaluate_event(const std::vector<Ball>& balls, const EventSpec& ev) {
    const int d = ev.dimension();
    return std::visit(
        Overloaded{
            [&](const ConnectionEvent& e) {
                return connected(ClusterIndex::build(balls, d, e.clip), e.a, e.b);
            },
            [&](const CrossingEvent& e) {
                const Region a = e.inner > 0.0 ? Region::ball(d, Vec{}, e.inner) : Region::point(d, Vec{});
                return connected(ClusterIndex::build(balls, d, e.clip), a, Region::sphere(d, Vec{}, e.outer));
            },
            [&](const SeedEvent& e) { return !general_seed_witnesses(balls, d, as_general(d, e)).empty(); },
            [&](const GeneralSeedEvent& e) { return !general_seed_witnesses(balls, d, e).empty(); },
            [&](const TwoArmEvent& e) { return two_arm_components(balls, d, e) >= 2; },
            [&](const BigBallEvent& e) {
                const double n2 = e.n * e.n;
                for (const Ball& b : balls)
                    if (b.radius >= e.threshold && dist2(b.center, Vec{}, d) <= n2) return true;
                return false;
            },
        },
        ev.variant());
}

bool evaluate_event(const Configuration& cfg, const EventSpec& ev) {
    if (cfg.d != ev.dimension()) throw std::invalid_argument("event and configuration dimensions differ");
    check_window(cfg, ev);
    return evaluate_event(cfg.balls, ev);
}

}  // namespace boolperc
