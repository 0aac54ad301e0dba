// Ball-intersection clusters. Balls are convex, so two balls lie in the same
// component of the occupied set iff a chain of pairwise intersecting balls
// joins them.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "boolperc/geometry.hpp"
#include "boolperc/sampling.hpp"

namespace boolperc {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n = 0);
    std::size_t find(std::size_t i);
    bool unite(std::size_t a, std::size_t b);
    std::size_t size_of(std::size_t i) { return size_[find(i)]; }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
};

// Optional refinement of the edge rule (used by the two-arm event, where
// pieces are clipped to a box).
using EdgeFilter = std::function<bool(const Ball&, const Ball&)>;

class ClusterIndex {
public:
    ClusterIndex() = default;
    // participating[i] == 0 removes ball i from the graph.
    ClusterIndex(std::vector<Ball> balls, int d, std::vector<char> participating = {}, EdgeFilter filter = {});

    // Only balls centered in clip participate.
    static ClusterIndex build(const Configuration& cfg, const std::optional<Region>& clip = std::nullopt);
    static ClusterIndex build(std::vector<Ball> balls, int d, const std::optional<Region>& clip = std::nullopt);

    int dimension() const { return d_; }
    std::size_t size() const { return balls_.size(); }
    const std::vector<Ball>& balls() const { return balls_; }
    bool participates(std::size_t i) const { return part_[i] != 0; }
    // Representative of i's class, or -1 when i does not participate.
    std::int64_t root(std::size_t i) const;
    bool same_cluster(std::size_t i, std::size_t j) const;
    std::size_t class_count() const;

    // Sorted distinct roots of classes whose union meets the region.
    std::vector<std::int64_t> roots_meeting(const Region& a) const;
    // Participating balls that intersect the query ball.
    std::vector<std::size_t> neighbors(const Ball& q) const;

private:
    struct Level {
        double cell = 0.0;  // grid spacing
        double max_radius = 0.0;
        std::vector<std::size_t> members;
        std::vector<std::pair<std::array<std::int64_t, kMaxDim>, std::size_t>> keyed;  // sorted by key
    };
    using Key = std::array<std::int64_t, kMaxDim>;

    Key key_of(const Vec& z, double cell) const;
    template <class F>
    void for_each_candidate(const Level& lv, const Vec& z, double reach, F&& f) const;
    void build_levels();
    void link(const EdgeFilter& filter);

    int d_ = 2;
    std::vector<Ball> balls_;
    std::vector<char> part_;
    std::vector<std::int64_t> roots_;
    double base_ = 1.0;
    std::vector<Level> levels_;
};

// True iff some class meets both regions (a single ball meeting both counts).
bool connected(const ClusterIndex& idx, const Region& a, const Region& b);
// Union of classes meeting a; sorted ball indices.
std::vector<std::size_t> cluster_of(const ClusterIndex& idx, const Region& a);
// Whether `target` touches a (directly) or touches a class that meets a.
bool ball_connected_to(const ClusterIndex& idx, const Ball& target, const std::vector<std::int64_t>& roots_of_a,
                       const Region& a);

}  // namespace boolperc
