#include "boolperc/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

#include "boolperc/errors.hpp"

namespace boolperc {

namespace {

constexpr double kUnitBandLimit = 64.0;

long draw_poisson(double mean, Stream& rng) {
    if (!(mean > 0.0)) return 0;
    std::poisson_distribution<long> pd(mean);
    return pd(rng);
}

double dropped_tail(const RadiusMeasure& mu, double lambda, const Region& window, bool centers_only,
                    double r_max) {
    if (lambda == 0.0 || r_max >= mu.support_max()) return 0.0;
    return expected_relevant(mu, lambda, window, r_max, RadiusMeasure::kInf, centers_only);
}

}  // namespace

std::vector<std::pair<double, double>> radius_bands(const RadiusMeasure& mu, double lo, double hi) {
    std::vector<std::pair<double, double>> bands;
    if (!mu.power_law_family()) {
        if (lo <= mu.atom() && mu.atom() <= hi) bands.emplace_back(mu.atom(), mu.atom());
        return bands;
    }
    lo = std::max(lo, 1.0);
    hi = std::min(hi, mu.support_max());
    double a = lo;
    while (a < hi) {
        double b;
        if (a < kUnitBandLimit)
            b = std::floor(a) + 1.0;
        else
            b = std::exp2(std::floor(std::log2(a)) + 1.0);
        b = std::min(b, hi);
        bands.emplace_back(a, b);
        a = b;
    }
    return bands;
}

double expected_relevant(const RadiusMeasure& mu, double lambda, const Region& window, double a, double b,
                         bool centers_only) {
    if (lambda == 0.0) return 0.0;
    if (centers_only) return lambda * window.volume() * mu.mass(a, b);
    const auto c = window.steiner_coefficients();
    double total = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
        if (c[j] == 0.0) continue;
        total += c[j] * mu.moment(static_cast<double>(j), a, b);
    }
    return lambda * total;
}

double default_r_max(const RadiusMeasure& mu, double lambda, const Region& window, bool centers_only,
                     double budget) {
    if (std::isfinite(mu.support_max())) return mu.support_max();
    double r = 2.0;
    for (int i = 0; i < 62; ++i, r *= 2.0) {
        if (dropped_tail(mu, lambda, window, centers_only, r) <= budget) return r;
    }
    return r;
}

Configuration sample(double lambda, const RadiusMeasure& mu, const Region& window, std::optional<double> r_max,
                     Stream& rng, const SampleOptions& opt) {
    const int d = mu.dimension();
    if (window.dimension() != d) throw std::invalid_argument("window and measure dimensions differ");
    if (!window.bounded()) throw std::invalid_argument("sampling window must be bounded");
    if (lambda < 0.0) throw std::invalid_argument("intensity must be nonnegative");

    Configuration cfg;
    cfg.d = d;
    cfg.window = window;
    cfg.centers_only = opt.centers_only;
    cfg.r_min = opt.r_min;
    cfg.lambda = lambda;
    cfg.seed = rng.key();
    cfg.measure = mu;
    const double rm = r_max ? *r_max : default_r_max(mu, lambda, window, opt.centers_only, opt.truncation_budget);
    cfg.r_max = std::min(rm, mu.support_max());
    cfg.truncation_tail = dropped_tail(mu, lambda, window, opt.centers_only, cfg.r_max);
    if (cfg.truncation_tail > opt.truncation_budget) {
        throw TruncationBudgetExceeded("expected " + std::to_string(cfg.truncation_tail) +
                                       " relevant balls above r_max=" + std::to_string(cfg.r_max) +
                                       " exceeds budget " + std::to_string(opt.truncation_budget));
    }
    if (lambda == 0.0) return cfg;

    const Vec half = window.bbox_half();
    const Vec& c = window.center();
    for (const auto& [a, b] : radius_bands(mu, std::max(opt.r_min, mu.support_min()), cfg.r_max)) {
        const double m = mu.power_law_family() ? mu.mass(a, b) : 1.0;
        const double e = opt.centers_only ? 0.0 : b;
        double vol = 1.0;
        for (int k = 0; k < d; ++k) vol *= 2.0 * (half[k] + e);
        const long count = draw_poisson(lambda * vol * m, rng);
        for (long i = 0; i < count; ++i) {
            Ball ball;
            for (int k = 0; k < d; ++k) ball.center[k] = c[k] + (2.0 * rng.uniform() - 1.0) * (half[k] + e);
            ball.radius = mu.sample_in(a, b, rng.uniform());
            ball.mark = rng.uniform();
            const bool keep = opt.centers_only ? window.contains_point(ball.center)
                                               : window.intersects_ball(ball.center, ball.radius);
            if (keep) cfg.balls.push_back(ball);
        }
    }
    return cfg;
}

Configuration sample(double lambda, const RadiusMeasure& mu, const Region& window, std::optional<double> r_max,
                     std::uint64_t seed, const SampleOptions& opt) {
    Stream rng(seed, StreamTag::Sample, 0);
    Configuration cfg = sample(lambda, mu, window, r_max, rng, opt);
    cfg.seed = seed;
    return cfg;
}

Configuration thin(const Configuration& dom, double lambda, const RadiusMeasure& mu) {
    if (mu.dimension() != dom.d) throw std::invalid_argument("dimension mismatch in thin()");
    if (lambda < 0.0) throw std::invalid_argument("intensity must be nonnegative");
    const RadiusMeasure& md = dom.measure;
    if (mu.power_law_family() != md.power_law_family())
        throw std::invalid_argument("thin() cannot mix point masses and densities");
    if (!mu.power_law_family() && mu.atom() != md.atom())
        throw std::invalid_argument("thin() needs the same atom");

    Configuration out;
    out.d = dom.d;
    out.window = dom.window;
    out.centers_only = dom.centers_only;
    out.r_min = dom.r_min;
    out.lambda = lambda;
    out.seed = dom.seed;
    out.measure = mu;
    out.r_max = std::min(dom.r_max, mu.support_max());
    out.truncation_tail = dropped_tail(mu, lambda, dom.window, dom.centers_only, out.r_max);
    if (lambda == 0.0) return out;

    out.balls.reserve(dom.balls.size());
    for (const Ball& b : dom.balls) {
        double ratio;
        if (mu.power_law_family()) {
            const double fd = md.density(b.radius);
            const double f = mu.density(b.radius);
            if (f == 0.0) continue;
            if (fd == 0.0) throw std::invalid_argument("thin(): target not dominated");
            ratio = (lambda * f) / (dom.lambda * fd);
        } else {
            ratio = lambda / dom.lambda;
        }
        if (ratio > 1.0 + 1e-9) throw std::invalid_argument("thin(): target not dominated");
        if (b.mark < ratio) {
            Ball kept = b;
            kept.mark = ratio >= 1.0 ? b.mark : b.mark / ratio;
            out.balls.push_back(kept);
        }
    }
    return out;
}

Configuration sprinkle(const Configuration& base, double beta_xi, const RadiusMeasure& mu, const Region& region,
                       Stream& rng, std::optional<double> r_max) {
    if (base.window.bounded() && !region_contains(base.window, region))
        throw std::invalid_argument("sprinkle region must lie in the base window");
    Configuration out = base;
    if (beta_xi == 0.0) return out;
    SampleOptions opt;
    opt.centers_only = true;
    const Configuration extra = sample(beta_xi, mu, region, r_max, rng, opt);
    out.balls.insert(out.balls.end(), extra.balls.begin(), extra.balls.end());
    out.truncation_tail += extra.truncation_tail;
    return out;
}

Configuration sprinkle(const Configuration& base, double beta_xi, const RadiusMeasure& mu, const Region& region,
                       std::uint64_t seed, std::optional<double> r_max) {
    Stream rng(seed, StreamTag::Sprinkle, 0);
    return sprinkle(base, beta_xi, mu, region, rng, r_max);
}

double poisson_continue_probability(int k, double t) {
    if (t <= 0.0) return 0.0;
    if (k == 0) return -std::expm1(-t);
    // P(N >= k)/P(N = k) = 1 + S1, S1 = sum_{m>=1} t^m / ((k+1)...(k+m))
    double term = 1.0;
    double s1 = 0.0;
    for (int m = 1; m < 100000; ++m) {
        term *= t / (k + m);
        s1 += term;
        if (term < 1e-18 * (1.0 + s1)) break;
    }
    return s1 / (1.0 + s1);
}

Ball EncodedCell::projected(std::size_t k, int level, int d, double delta) const {
    if (level < 1 || level > depth) throw std::invalid_argument("projection level out of range");
    const int shift = depth - level;
    const double scale = std::ldexp(1.0, -level);
    Ball b;
    for (int l = 0; l < d; ++l)
        b.center[l] = static_cast<double>(cell.x[l]) - 0.5 + static_cast<double>(gamma[k][l] >> shift) * scale;
    b.radius = CellLaw(d, delta, cell.n).inverse(static_cast<double>(beta[k] >> shift) * scale);
    b.mark = decoded[k].mark;
    return b;
}

Ball project(const Ball& b, int level, int d, double delta) {
    const int n = static_cast<int>(std::floor(b.radius));
    const double scale = std::ldexp(1.0, level);
    Ball out = b;
    for (int l = 0; l < d; ++l) out.center[l] = std::floor(b.center[l] * scale) / scale;
    const CellLaw law(d, delta, std::max(n, 1));
    out.radius = law.inverse(std::floor(law.cdf(b.radius) * scale) / scale);
    return out;
}

EncodedSample sample_encoded(double lambda, int d, double delta, const std::vector<CellIndex>& cells, int depth,
                             std::uint64_t seed) {
    if (depth < 1 || depth > 64) throw std::invalid_argument("encoding depth must be in [1, 64]");
    EncodedSample out;
    Vec lo{}, hi{};
    for (int k = 0; k < d; ++k) {
        lo[k] = RadiusMeasure::kInf;
        hi[k] = -RadiusMeasure::kInf;
    }
    int n_lo = 1 << 30, n_hi = 0;
    const double unit = std::ldexp(1.0, -depth);
    for (const CellIndex& ci : cells) {
        EncodedCell ec;
        ec.cell = ci;
        ec.depth = depth;
        const CellLaw law(d, delta, ci.n);
        const double t = lambda * law.g();

        std::int64_t key[kMaxDim + 1];
        for (int k = 0; k < kMaxDim; ++k) key[k] = ci.x[k];
        key[kMaxDim] = ci.n;
        Stream st(seed, StreamTag::Encoded, hash_ints(key, kMaxDim + 1));

        const bool cap = depth < 53;
        for (int k = 0;; ++k) {
            const bool a = st.uniform() < poisson_continue_probability(k, t);
            ec.alpha.push_back(a);
            if (!a) break;
            ec.beta.push_back(st.bits(depth));
            std::array<std::uint64_t, kMaxDim> g{};
            for (int l = 0; l < d; ++l) g[l] = st.bits(depth);
            ec.gamma.push_back(g);
            Ball b;
            for (int l = 0; l < d; ++l) b.center[l] = static_cast<double>(ci.x[l]) - 0.5 + g[l] * unit;
            b.radius = law.inverse(ec.beta.back() * unit);
            b.mark = st.uniform();
            ec.decoded.push_back(b);
            if (cap && static_cast<int>(ec.decoded.size()) >= depth) {
                ec.capped = true;
                break;
            }
        }
        for (int k = 0; k < d; ++k) {
            lo[k] = std::min(lo[k], ci.x[k] - 0.5);
            hi[k] = std::max(hi[k], ci.x[k] + 0.5);
        }
        n_lo = std::min(n_lo, ci.n);
        n_hi = std::max(n_hi, ci.n);
        out.config.balls.insert(out.config.balls.end(), ec.decoded.begin(), ec.decoded.end());
        out.cells.push_back(std::move(ec));
    }
    Configuration& cfg = out.config;
    cfg.d = d;
    cfg.lambda = lambda;
    cfg.seed = seed;
    cfg.centers_only = true;
    cfg.measure = RadiusMeasure::power_law(d, delta);
    if (!cells.empty()) {
        Vec c{}, h{};
        for (int k = 0; k < d; ++k) {
            c[k] = 0.5 * (lo[k] + hi[k]);
            h[k] = 0.5 * (hi[k] - lo[k]);
        }
        cfg.window = Region::box(d, c, h);
        cfg.r_min = n_lo;
        cfg.r_max = n_hi + 1.0;
    }
    return out;
}

std::string configuration_csv(const Configuration& cfg) {
    std::string out;
    for (int k = 0; k < cfg.d; ++k) out += "x" + std::to_string(k + 1) + ",";
    out += "r\n";
    char buf[64];
    for (const Ball& b : cfg.balls) {
        for (int k = 0; k < cfg.d; ++k) {
            std::snprintf(buf, sizeof buf, "%.17g,", b.center[k]);
            out += buf;
        }
        std::snprintf(buf, sizeof buf, "%.17g\n", b.radius);
        out += buf;
    }
    return out;
}

void write_configuration_csv(const Configuration& cfg, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << configuration_csv(cfg);
}

nlohmann::json configuration_manifest(const Configuration& cfg) {
    return {{"d", cfg.d},
            {"seed", cfg.seed},
            {"lambda", cfg.lambda},
            {"measure", cfg.measure.to_json()},
            {"window", cfg.window.to_json()},
            {"centers_only", cfg.centers_only},
            {"r_min", cfg.r_min},
            {"r_max", cfg.r_max},
            {"truncation_tail", cfg.truncation_tail},
            {"balls", cfg.balls.size()}};
}

}  // namespace boolperc
