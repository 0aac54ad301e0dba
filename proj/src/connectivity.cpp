#include "boolperc/connectivity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace boolperc {

DisjointSets::DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t DisjointSets::find(std::size_t i) {
    std::size_t r = i;
    while (parent_[r] != r) r = parent_[r];
    while (parent_[i] != r) {
        const std::size_t next = parent_[i];
        parent_[i] = r;
        i = next;
    }
    return r;
}

bool DisjointSets::unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
}

ClusterIndex::ClusterIndex(std::vector<Ball> balls, int d, std::vector<char> participating, EdgeFilter filter)
    : d_(d), balls_(std::move(balls)), part_(std::move(participating)) {
    if (part_.empty()) part_.assign(balls_.size(), 1);
    if (part_.size() != balls_.size()) throw std::invalid_argument("participation mask has the wrong size");
    build_levels();
    link(filter);
}

ClusterIndex ClusterIndex::build(std::vector<Ball> balls, int d, const std::optional<Region>& clip) {
    std::vector<char> part(balls.size(), 1);
    if (clip) {
        for (std::size_t i = 0; i < balls.size(); ++i) part[i] = clip->contains_point(balls[i].center) ? 1 : 0;
    }
    return ClusterIndex(std::move(balls), d, std::move(part));
}

ClusterIndex ClusterIndex::build(const Configuration& cfg, const std::optional<Region>& clip) {
    return build(cfg.balls, cfg.d, clip);
}

ClusterIndex::Key ClusterIndex::key_of(const Vec& z, double cell) const {
    Key k{};
    for (int a = 0; a < d_; ++a) k[a] = static_cast<std::int64_t>(std::floor(z[a] / cell));
    return k;
}

void ClusterIndex::build_levels() {
    std::vector<double> radii;
    for (std::size_t i = 0; i < balls_.size(); ++i)
        if (part_[i]) radii.push_back(balls_[i].radius);
    if (radii.empty()) return;
    auto mid = radii.begin() + radii.size() / 2;
    std::nth_element(radii.begin(), mid, radii.end());
    base_ = *mid > 0.0 ? *mid : 1.0;

    for (std::size_t i = 0; i < balls_.size(); ++i) {
        if (!part_[i]) continue;
        const double r = balls_[i].radius;
        std::size_t lv = 0;
        if (r > base_) lv = static_cast<std::size_t>(std::ceil(std::log2(r / base_)));
        while (lv > 0 && r <= base_ * std::exp2(static_cast<double>(lv) - 1.0)) --lv;
        if (levels_.size() <= lv) levels_.resize(lv + 1);
        levels_[lv].members.push_back(i);
        levels_[lv].max_radius = std::max(levels_[lv].max_radius, r);
    }
    for (std::size_t lv = 0; lv < levels_.size(); ++lv) {
        Level& L = levels_[lv];
        L.cell = 2.0 * base_ * std::exp2(static_cast<double>(lv));
        for (std::size_t i : L.members) L.keyed.emplace_back(key_of(balls_[i].center, L.cell), i);
        std::sort(L.keyed.begin(), L.keyed.end());
    }
}

template <class F>
void ClusterIndex::for_each_candidate(const Level& lv, const Vec& z, double reach, F&& f) const {
    if (lv.members.empty()) return;
    Key lo{}, hi{};
    double cells = 1.0;
    for (int a = 0; a < d_; ++a) {
        lo[a] = static_cast<std::int64_t>(std::floor((z[a] - reach) / lv.cell));
        hi[a] = static_cast<std::int64_t>(std::floor((z[a] + reach) / lv.cell));
        cells *= static_cast<double>(hi[a] - lo[a] + 1);
    }
    if (cells > static_cast<double>(lv.members.size())) {
        for (std::size_t j : lv.members) f(j);
        return;
    }
    Key cur = lo;
    for (;;) {
        auto range = std::equal_range(lv.keyed.begin(), lv.keyed.end(), std::make_pair(cur, std::size_t{0}),
                                      [](const auto& x, const auto& y) { return x.first < y.first; });
        for (auto it = range.first; it != range.second; ++it) f(it->second);
        int a = 0;
        for (; a < d_; ++a) {
            if (cur[a] < hi[a]) {
                ++cur[a];
                break;
            }
            cur[a] = lo[a];
        }
        if (a == d_) break;
    }
}

void ClusterIndex::link(const EdgeFilter& filter) {
    DisjointSets dsu(balls_.size());
    for (std::size_t li = 0; li < levels_.size(); ++li) {
        for (std::size_t i : levels_[li].members) {
            const Ball& bi = balls_[i];
            for (std::size_t lj = 0; lj <= li; ++lj) {
                const Level& L = levels_[lj];
                for_each_candidate(L, bi.center, bi.radius + L.max_radius, [&](std::size_t j) {
                    if (lj == li && j >= i) return;
                    if (!balls_intersect(bi, balls_[j], d_)) return;
                    if (filter && !filter(bi, balls_[j])) return;
                    dsu.unite(i, j);
                });
            }
        }
    }
    roots_.assign(balls_.size(), -1);
    for (std::size_t i = 0; i < balls_.size(); ++i)
        if (part_[i]) roots_[i] = static_cast<std::int64_t>(dsu.find(i));
}

std::int64_t ClusterIndex::root(std::size_t i) const { return roots_[i]; }

bool ClusterIndex::same_cluster(std::size_t i, std::size_t j) const {
    return roots_[i] >= 0 && roots_[i] == roots_[j];
}

std::size_t ClusterIndex::class_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < roots_.size(); ++i)
        if (roots_[i] == static_cast<std::int64_t>(i)) ++n;
    return n;
}

std::vector<std::int64_t> ClusterIndex::roots_meeting(const Region& a) const {
    std::vector<std::int64_t> out;
    for (std::size_t i = 0; i < balls_.size(); ++i) {
        if (part_[i] && a.intersects_ball(balls_[i])) out.push_back(roots_[i]);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::size_t> ClusterIndex::neighbors(const Ball& q) const {
    std::vector<std::size_t> out;
    for (const Level& L : levels_) {
        for_each_candidate(L, q.center, q.radius + L.max_radius, [&](std::size_t j) {
            if (balls_intersect(q, balls_[j], d_)) out.push_back(j);
        });
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool connected(const ClusterIndex& idx, const Region& a, const Region& b) {
    const auto ra = idx.roots_meeting(a);
    if (ra.empty()) return false;
    const auto rb = idx.roots_meeting(b);
    std::vector<std::int64_t> both;
    std::set_intersection(ra.begin(), ra.end(), rb.begin(), rb.end(), std::back_inserter(both));
    return !both.empty();
}

std::vector<std::size_t> cluster_of(const ClusterIndex& idx, const Region& a) {
    const auto ra = idx.roots_meeting(a);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx.participates(i) && std::binary_search(ra.begin(), ra.end(), idx.root(i))) out.push_back(i);
    }
    return out;
}

bool ball_connected_to(const ClusterIndex& idx, const Ball& target, const std::vector<std::int64_t>& roots_of_a,
                       const Region& a) {
    if (a.intersects_ball(target)) return true;
    if (roots_of_a.empty()) return false;
    for (std::size_t j : idx.neighbors(target)) {
        if (std::binary_search(roots_of_a.begin(), roots_of_a.end(), idx.root(j))) return true;
    }
    return false;
}

}  // namespace boolperc
