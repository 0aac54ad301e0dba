// Declarative events and their exact indicators on a configuration.
#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "boolperc/connectivity.hpp"
#include "boolperc/geometry.hpp"
#include "boolperc/sampling.hpp"

namespace boolperc {

// A <-> B using only balls centered in clip.
struct ConnectionEvent {
    Region a, b, clip;
};

// B_inner <-> dB_outer, or 0 <-> dB_outer when inner == 0. An optional clip
// (a slab, say) restricts the participating centers.
struct CrossingEvent {
    double inner = 0.0;
    double outer = 1.0;
    std::optional<Region> clip;
};

// B_n connects inside B_{(rho+1/2)N} to a ball of radius >= n centered in
// the annulus B_{(rho+1/2)N} \ B_{rho N}.
struct SeedEvent {
    double n = 1.0, N = 2.0, rho = 1.0;
};

// B connects within F to a ball of radius >= n centered in E.
struct GeneralSeedEvent {
    Region source, target, clip;
    double min_radius = 1.0;
};

// Two disjoint clusters of good pieces joining Lambda_k to dLambda_K.
struct TwoArmEvent {
    double k = 1.0, K = 2.0;
};

// Some ball centered in B_n has radius >= threshold.
struct BigBallEvent {
    double n = 1.0, threshold = 1.0;
};

struct SamplePlan {
    Region window = Region::everything(2);
    bool centers_only = false;
    double r_min = 0.0;
    double r_max_floor = 0.0;
};

class EventSpec {
public:
    using Variant =
        std::variant<ConnectionEvent, CrossingEvent, SeedEvent, GeneralSeedEvent, TwoArmEvent, BigBallEvent>;

    EventSpec(int d, Variant v);

    static EventSpec connection(int d, Region a, Region b, Region clip);
    static EventSpec crossing(int d, double inner, double outer, std::optional<Region> clip = std::nullopt);
    static EventSpec seed(int d, double n, double N, double rho);
    static EventSpec general_seed(int d, Region source, Region target, Region clip, double min_radius);
    static EventSpec two_arm(int d, double k, double K);
    static EventSpec big_ball(int d, double n, double threshold);
    // The big-ball event with threshold n^{d/(d+delta)}.
    static EventSpec dictator(int d, double n, double delta);
    static EventSpec from_json(const nlohmann::json& j, int d);

    int dimension() const { return d_; }
    const Variant& variant() const { return v_; }
    bool increasing() const { return !std::holds_alternative<TwoArmEvent>(v_); }
    SamplePlan plan() const;
    std::string label() const;
    nlohmann::json to_json() const;

private:
    int d_;
    Variant v_;
};

// Throws WindowTooSmall when cfg cannot resolve the event.
void check_window(const Configuration& cfg, const EventSpec& ev);

bool evaluate_event(const Configuration& cfg, const EventSpec& ev);
// No window check; used for configurations assembled by hand or with an
// inserted ball.
bool evaluate_event(const std::vector<Ball>& balls, const EventSpec& ev);

// Balls of radius >= n centered in target that connect to source inside clip.
std::vector<std::size_t> general_seed_witnesses(const std::vector<Ball>& balls, int d, const GeneralSeedEvent& ev);

// Count of components after removing bad balls that touch both Lambda_k and
// dLambda_K.
int two_arm_components(const std::vector<Ball>& balls, int d, const TwoArmEvent& ev);
// A bad ball meets Lambda_K and has center outside Lambda_{2K} or radius > K.
bool is_bad_ball(const Ball& b, int d, double K);

}  // namespace boolperc
