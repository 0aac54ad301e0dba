#include "boolperc/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <unistd.h>

#include <CLI11.hpp>

#include "boolperc/critical.hpp"
#include "boolperc/errors.hpp"
#include "boolperc/estimators.hpp"
#include "boolperc/exploration.hpp"
#include "boolperc/hypercube.hpp"
#include "boolperc/parallel.hpp"

namespace boolperc {

const std::vector<std::string> kCsvColumns{"run_id", "op",       "d",     "measure", "delta", "lambda",
                                           "n",      "N",        "rho",   "scale",   "replicas",
                                           "estimate", "stderr", "ci_lo", "ci_hi",   "seed",  "wall_ms"};

namespace {

using Clock = std::chrono::steady_clock;

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : ""; }

std::optional<double> parse_opt(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::stod(s);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

// Ops whose rows are summaries rather than replica means; merge keeps them
// only when every input agrees.
bool poolable(const std::string& op) {
    static const std::set<std::string> fixed{"lambda-c",
                                             "lambda-hat-c",
                                             "slab",
                                             "correlation-length",
                                             "talagrand-diagnostic",
                                             "talagrand-diagnostic.max_piv",
                                             "two-arm.bad_closed_form"};
    return !fixed.count(op);
}

Accumulator reconstruct(const ResultRow& r) {
    Accumulator a;
    a.count = r.est.replicas;
    const double n = static_cast<double>(a.count);
    const double p = r.est.value;
    a.sum = p * n;
    const double bern_se = a.count ? std::sqrt(std::max(0.0, p * (1.0 - p)) / n) : 0.0;
    const bool bern = p >= 0.0 && p <= 1.0 && std::abs(a.sum - std::round(a.sum)) < 1e-6 &&
                      std::abs(r.est.stderr_ - bern_se) <= 1e-12 * std::max(1.0, bern_se);
    if (bern) {
        a.sum = std::round(a.sum);
        a.sum_sq = a.sum;
    } else {
        const double var = r.est.stderr_ * r.est.stderr_ * n;
        a.sum_sq = (n - 1.0) * var + n * p * p;
    }
    return a;
}

bool is_bernoulli(const ResultRow& r) {
    const Accumulator a = reconstruct(r);
    return a.sum_sq == a.sum && a.sum == std::round(a.sum);
}

// ---------------------------------------------------------------------------
// Run context

struct Run {
    std::string op;
    RunConfig cfg;
    RunOptions opt;
    std::string run_id;
    Clock::time_point start = Clock::now();
    std::vector<ResultRow> rows;
    std::optional<std::string> body;  // replaces the standard CSV when set
    nlohmann::json extra = nlohmann::json::object();
    std::vector<std::string> bias_notes;
    std::map<std::string, std::string> side_files;  // path -> content
    bool assertion_failed = false;

    std::int64_t elapsed_ms() const {
        return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
    }

    ResultRow row(const std::string& name, const Estimate& e) {
        ResultRow r;
        r.run_id = run_id;
        r.op = name;
        r.d = cfg.d();
        if (cfg.has("measure") || cfg.has("delta")) {
            const RadiusMeasure mu = cfg.measure();
            r.measure = mu.label();
            if (mu.power_law_family()) r.delta = mu.delta();
        }
        if (cfg.has("lambda") && cfg.json().at("lambda").is_number()) r.lambda = cfg.get<double>("lambda", 0.0);
        if (cfg.has("n") && cfg.json().at("n").is_number()) r.n = cfg.get<double>("n", 0.0);
        if (cfg.has("N") && cfg.json().at("N").is_number()) r.N = cfg.get<double>("N", 0.0);
        if (cfg.has("rho") && cfg.json().at("rho").is_number()) r.rho = cfg.get<double>("rho", 0.0);
        r.est = e;
        r.est.seed = opt.seed;
        if (!e.bias_note.empty()) bias_notes.push_back(name + ": " + e.bias_note);
        r.wall_ms = elapsed_ms();
        return r;
    }

    void add(ResultRow r) { rows.push_back(std::move(r)); }

    double lambda() const { return cfg.require<double>("lambda"); }

    std::vector<double> list(const std::string& key) const {
        if (!cfg.has(key)) throw ConfigInvalid("missing required config key '" + key + "'");
        const auto& v = cfg.json().at(key);
        std::vector<double> out;
        try {
            if (v.is_array()) {
                for (const auto& x : v) out.push_back(x.get<double>());
            } else {
                out.push_back(v.get<double>());
            }
        } catch (const nlohmann::json::exception&) {
            throw ConfigInvalid("config key '" + key + "' must be a number or a list of numbers");
        }
        if (out.empty()) throw ConfigInvalid("config key '" + key + "' is empty");
        return out;
    }
};

Estimate point(double v, std::uint64_t replicas = 0) {
    Estimate e;
    e.value = v;
    e.ci_lo = e.ci_hi = v;
    e.replicas = replicas;
    return e;
}

std::optional<double> scale_of(const RunConfig& cfg) {
    for (const char* k : {"outer", "r", "K", "s", "threshold"}) {
        if (cfg.has(k) && cfg.json().at(k).is_number()) return cfg.get<double>(k, 0.0);
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Subcommands

void op_sample(Run& run) {
    const double lambda = run.lambda();
    const RadiusMeasure mu = run.cfg.measure();
    const int d = run.cfg.d();
    const double w = run.cfg.require<double>("window");
    const std::string kind = run.cfg.get<std::string>("window_kind", "ball");
    Region window = Region::everything(d);
    if (kind == "ball")
        window = Region::ball(d, Vec{}, w);
    else if (kind == "cube")
        window = Region::cube(d, Vec{}, w);
    else
        throw ConfigInvalid("window_kind must be 'ball' or 'cube'");
    SampleOptions so;
    so.centers_only = run.cfg.get<bool>("centers_only", false);
    so.truncation_budget = run.opt.truncation_budget;
    Stream rng(run.opt.seed, StreamTag::Sample, run.opt.replica_offset);
    const Configuration cfg = sample(lambda, mu, window, run.opt.r_max, rng, so);
    run.body = configuration_csv(cfg);
    run.extra["configuration"] = configuration_manifest(cfg);
}

void op_estimate_event(Run& run) {
    const EventSpec ev = run.cfg.event();
    const double lambda = run.lambda();
    const Estimate e = estimate_event(ev, lambda, run.cfg.measure(), run.opt);
    ResultRow r = run.row("estimate-event", e);
    r.scale = scale_of(run.cfg);
    run.extra["event"] = ev.to_json();
    run.add(r);
}

void op_crossing(Run& run) {
    const int d = run.cfg.d();
    const double lambda = run.lambda();
    const double inner = run.cfg.get<double>("inner", 0.0);
    const RadiusMeasure mu = run.cfg.measure();
    for (double outer : run.list("outer")) {
        if (!(outer > inner)) throw ConfigInvalid("outer must exceed inner");
        std::optional<Region> clip;
        if (run.cfg.has("slab_k")) clip = Region::slab(d, run.cfg.get<double>("slab_k", 1.0), outer);
        const Estimate e = estimate_event(EventSpec::crossing(d, inner, outer, clip), lambda, mu, run.opt);
        ResultRow r = run.row("crossing", e);
        r.n = inner;
        r.scale = outer;
        run.add(r);
    }
}

void critical_rows(Run& run, CriticalMode mode) {
    const std::string name = run.op;
    CriticalSearch cs;
    cs.mode = mode;
    cs.lambda_lo = run.cfg.require<double>("lambda_lo");
    cs.lambda_hi = run.cfg.require<double>("lambda_hi");
    cs.tolerance = run.cfg.get<double>("tolerance", 0.01);
    cs.theta = run.cfg.get<double>("theta", 0.5);
    cs.ladder = run.cfg.has("ladder") ? run.list("ladder") : std::vector<double>{8.0};
    if (!(cs.lambda_lo < cs.lambda_hi) || !(cs.tolerance > 0.0))
        throw ConfigInvalid("need lambda_lo < lambda_hi and tolerance > 0");
    if (!std::is_sorted(cs.ladder.begin(), cs.ladder.end())) throw ConfigInvalid("ladder must be increasing");
    const RadiusMeasure mu = run.cfg.measure();
    std::vector<double> ks{0.0};
    if (mode == CriticalMode::Slab) {
        if (run.cfg.d() < 3) throw ConfigInvalid("slab needs d >= 3");
        ks = run.list("slab_k");
    }
    for (double k : ks) {
        cs.slab_k = k;
        const CriticalResult res = critical_search(cs, mu, run.opt);
        Estimate e = point(0.5 * (res.lo + res.hi), run.opt.replicas);
        e.stderr_ = 0.5 * (res.hi - res.lo);
        e.ci_lo = res.ci_lo;
        e.ci_hi = res.ci_hi;
        e.bias_bound = res.truncation_tail;
        ResultRow r = run.row(name, e);
        r.lambda.reset();
        r.N = cs.ladder.back();
        if (mode == CriticalMode::Slab) r.scale = k;
        run.add(r);
        std::vector<CriticalStep> trace = res.trace;
        std::stable_sort(trace.begin(), trace.end(),
                         [](const CriticalStep& a, const CriticalStep& b) { return a.lambda < b.lambda; });
        trace.erase(std::unique(trace.begin(), trace.end(),
                                [](const CriticalStep& a, const CriticalStep& b) { return a.lambda == b.lambda; }),
                    trace.end());
        for (const auto& st : trace) {
            for (std::size_t s = 0; s < cs.ladder.size(); ++s) {
                Accumulator acc;
                acc.count = run.opt.replicas;
                acc.sum = std::round(st.ladder_estimates[s] * static_cast<double>(run.opt.replicas));
                acc.sum_sq = acc.sum;
                ResultRow t = run.row(name + ".trace", bernoulli_estimate(acc, run.opt.seed, run.opt.z));
                t.lambda = st.lambda;
                t.N = cs.ladder[s];
                if (mode == CriticalMode::Slab) t.scale = k;
                run.add(t);
            }
        }
    }
}

void op_phi(Run& run) {
    const int d = run.cfg.d();
    const double n = run.cfg.require<double>("n");
    const double s = run.cfg.require<double>("s");
    const Estimate e = estimate_phi(n, Region::ball(d, Vec{}, s), run.lambda(), run.cfg.measure(), run.opt);
    ResultRow r = run.row("phi", e);
    r.scale = s;
    run.add(r);
}

void op_correlation_length(Run& run) {
    const double n = run.cfg.require<double>("n");
    const double ell_max = run.cfg.require<double>("ell_max");
    const double ratio = run.cfg.get<double>("ratio", std::sqrt(2.0));
    if (!(ratio > 1.0)) throw ConfigInvalid("ratio must exceed 1");
    const CorrelationLength cl = correlation_length(n, run.lambda(), run.cfg.measure(), ell_max, run.opt, ratio);
    for (const auto& [s, e] : cl.grid) {
        ResultRow r = run.row("correlation-length.grid", e);
        r.scale = s;
        run.add(r);
    }
    ResultRow r = run.row("correlation-length", point(cl.length, run.opt.replicas));
    r.scale = ell_max;
    run.add(r);
}

InsertionWeight weight_of(const std::string& w) {
    if (w == "one") return InsertionWeight::One;
    if (w == "logradius") return InsertionWeight::LogRadius;
    if (w == "logband") return InsertionWeight::LogBand;
    throw ConfigInvalid("weight must be one, logradius or logband");
}

void op_pivotal(Run& run) {
    const EventSpec ev = run.cfg.event();
    const auto draws = run.cfg.get<std::size_t>("draws", 1000);
    const PivotalIntegral pi = pivotal_integral(ev, run.lambda(), run.cfg.measure(),
                                                weight_of(run.cfg.get<std::string>("weight", "one")), draws, run.opt);
    Estimate integral = pi.integral;
    integral.bias_bound = pi.tail_bound;
    ResultRow r = run.row("pivotal", integral);
    r.scale = scale_of(run.cfg);
    run.add(r);
    ResultRow p = run.row("pivotal.probability", pi.probability);
    p.scale = r.scale;
    run.add(p);
}

double power_law_delta(const Run& run) {
    const RadiusMeasure mu = run.cfg.measure();
    if (mu.kind() != RadiusMeasure::Kind::PowerLaw) throw ConfigInvalid("this subcommand needs measure = powerlaw");
    return mu.delta();
}

void op_delta_derivative(Run& run) {
    const EventSpec ev = run.cfg.event();
    const auto draws = run.cfg.get<std::size_t>("draws", 1000);
    const Estimate e = delta_derivative(ev, run.lambda(), power_law_delta(run), draws, run.opt);
    ResultRow r = run.row("delta-derivative", e);
    r.scale = scale_of(run.cfg);
    run.add(r);
}

void op_talagrand(Run& run) {
    const EventSpec ev = run.cfg.event();
    const auto budget = run.cfg.get<std::size_t>("cell_budget", 16);
    const auto draws = run.cfg.get<std::size_t>("draws", 200);
    const TalagrandReport rep = talagrand_diagnostic(ev, run.lambda(), power_law_delta(run), budget, draws, run.opt);
    const auto sc = scale_of(run.cfg);
    ResultRow r = run.row("talagrand-diagnostic", point(rep.ratio, run.opt.replicas));
    r.scale = sc;
    run.add(r);
    ResultRow l = run.row("talagrand-diagnostic.lhs", rep.lhs);
    l.scale = sc;
    run.add(l);
    ResultRow p = run.row("talagrand-diagnostic.probability", rep.probability);
    p.scale = sc;
    run.add(p);
    ResultRow m = run.row("talagrand-diagnostic.max_piv", point(rep.max_piv, run.opt.replicas));
    m.scale = sc;
    run.add(m);
    run.extra["degenerate"] = rep.degenerate;
    run.extra["cells_examined"] = rep.cells_examined;
}

void op_two_arm(Run& run) {
    const double k = run.cfg.require<double>("k");
    const auto Ks = run.list("K");
    for (double K : Ks)
        if (!(K > k)) throw ConfigInvalid("every K must exceed k");
    const auto rows = two_arm_decay(k, Ks, run.lambda(), run.cfg.measure(), run.opt);
    for (const auto& tr : rows) {
        for (auto [name, e] : {std::pair<std::string, Estimate>{"two-arm", tr.two_arm},
                               std::pair<std::string, Estimate>{"two-arm.bad", tr.bad},
                               std::pair<std::string, Estimate>{"two-arm.bad_closed_form",
                                                                point(tr.bad_closed_form)}}) {
            ResultRow r = run.row(name, e);
            r.n = k;
            r.scale = tr.K;
            run.add(r);
        }
    }
}

std::vector<Dyadic> dyadic_ps(const Run& run, int N) {
    const auto ps = run.list("p");
    if (ps.size() != 1 && static_cast<int>(ps.size()) != N)
        throw ConfigInvalid("p must be a single value or one value per bit");
    std::vector<Dyadic> out;
    for (int i = 0; i < N; ++i) {
        try {
            out.push_back(dyadic_from_double(ps.size() == 1 ? ps[0] : ps[i]));
        } catch (const std::invalid_argument& e) {
            throw ConfigInvalid(e.what());
        }
        const double v = out.back().to_double();
        if (!(v > 0.0 && v <= 0.5)) throw ConfigInvalid("p must lie in (0, 1/2]");
    }
    return out;
}

int bits_of(const Run& run) {
    const int N = run.cfg.require<int>("n");
    if (N < 1 || N > 4) throw ConfigInvalid("the full function space is enumerated only for n in [1, 4]");
    return N;
}

BooleanFunction function_by_id(int N, std::uint64_t id, const std::vector<Dyadic>& p) {
    return BooleanFunction::from(N, [id](std::uint32_t x) { return ((id >> x) & 1u) != 0; }, p);
}

std::string p_vector(const std::vector<Dyadic>& p) {
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? ";" : "") + num(p[i].to_double());
    return s;
}

void op_hypercube_check(Run& run) {
    const int N = bits_of(run);
    const auto p = dyadic_ps(run, N);
    const std::uint64_t count = std::uint64_t{1} << (1u << N);
    std::ostringstream os;
    os << "function_id,p,lhs,var,maxterm,implied_c\n";
    double min_c = std::numeric_limits<double>::infinity();
    for (std::uint64_t id = 0; id < count; ++id) {
        const TalagrandCheck c = talagrand_check(function_by_id(N, id, p));
        os << id << ',' << p_vector(p) << ',' << num(c.lhs) << ',' << num(c.var) << ',' << num(c.maxterm) << ','
           << num(c.implied_c) << '\n';
        if (!c.degenerate) min_c = std::min(min_c, c.implied_c);
    }
    run.body = os.str();
    run.extra["functions"] = count;
    run.extra["min_implied_c"] = min_c;
    if (!(min_c > 0.0)) run.assertion_failed = true;
}

void op_encoding_check(Run& run) {
    const int N = bits_of(run);
    const auto p = dyadic_ps(run, N);
    const std::uint64_t count = std::uint64_t{1} << (1u << N);
    std::ostringstream os;
    os << "function_id,i,p,j,j_i,lifted_influence,flip_probability,identity_holds,per_j_bounds_hold,"
          "aggregate_lhs,aggregate_rhs,aggregate_holds\n";
    bool all = true;
    for (std::uint64_t id = 0; id < count; ++id) {
        const BooleanFunction f = function_by_id(N, id, p);
        for (int i = 0; i < N; ++i) {
            const EncodingReport rep = encoding_bounds_check(f, i);
            all = all && rep.identity_holds && rep.per_j_bounds_hold && rep.aggregate_holds;
            for (std::size_t j = 0; j < rep.lifted_influence.size(); ++j) {
                os << id << ',' << i << ',' << num(p[i].to_double()) << ',' << (j + 1) << ',' << rep.j_i << ','
                   << rep.lifted_influence[j].str() << ',' << rep.flip_probability[j].str() << ','
                   << rep.identity_holds << ',' << rep.per_j_bounds_hold << ','
                   << num(static_cast<double>(rep.aggregate_lhs)) << ','
                   << num(static_cast<double>(rep.aggregate_rhs)) << ',' << rep.aggregate_holds << '\n';
            }
        }
    }
    run.body = os.str();
    run.extra["all_hold"] = all;
    if (!all) run.assertion_failed = true;
}

SprinkleParams sprinkle_params(const Run& run, double lambda) {
    const double beta = run.cfg.get<double>("beta", 3.0);
    SprinkleParams sp;
    if (run.cfg.has("xi")) {
        sp.beta = beta;
        sp.xi = run.cfg.get<double>("xi", 1.0);
    } else if (run.cfg.has("epsilon")) {
        try {
            sp = SprinkleParams::from_epsilon(lambda, run.cfg.get<double>("epsilon", 0.5),
                                              run.cfg.get<double>("c_prime", 1.0), beta);
        } catch (const std::invalid_argument& e) {
            throw ConfigInvalid(e.what());
        }
    } else {
        throw ConfigInvalid("missing required config key 'xi' (or 'epsilon')");
    }
    sp.pc_site = run.cfg.get<double>("pc_site", kSitePercolationThreshold);
    if (!(sp.xi > 0.0) || sp.beta < 0.0) throw ConfigInvalid("need xi > 0 and beta >= 0");
    return sp;
}

void op_explore_gm(Run& run) {
    const double lambda = run.lambda();
    const double n = run.cfg.require<double>("n");
    const double N = run.cfg.require<double>("N");
    const int M = run.cfg.require<int>("M");
    if (!(n > 0.0 && N >= n) || M < 1) throw ConfigInvalid("need 0 < n <= N and M >= 1");
    const SprinkleParams sp = sprinkle_params(run, lambda);
    const RadiusMeasure mu = run.cfg.measure();
    std::vector<ExplorationOutcome> outs(run.opt.replicas);
    parallel_for(run.opt.replicas, run.opt.threads, [&](std::size_t i) {
        outs[i] = run_exploration(lambda, mu, n, N, M, sp,
                                  stream_key(run.opt.seed, StreamTag::Exploration, run.opt.replica_offset + i));
    });
    Accumulator reached, accepted;
    for (const auto& o : outs) {
        reached.add(o.reached_boundary ? 1.0 : 0.0);
        accepted.add(static_cast<double>(o.accepted));
    }
    ResultRow r = run.row("explore-gm", bernoulli_estimate(reached, run.opt.seed, run.opt.z));
    r.scale = M;
    run.add(r);
    ResultRow a = run.row("explore-gm.accepted", mean_estimate(accepted, run.opt.seed, run.opt.z));
    a.scale = M;
    run.add(a);
    run.extra["step_bound"] = sp.step_bound(lambda);
    run.extra["beta"] = sp.beta;
    run.extra["xi"] = sp.xi;
    run.extra["pc_site"] = sp.pc_site;
    if (run.cfg.has("trace") && !outs.empty())
        run.side_files[run.cfg.get<std::string>("trace", "")] = trace_jsonl(outs[0], run.cfg.d());
}

void op_explore_abstract(Run& run) {
    const int M = run.cfg.require<int>("M");
    if (M < 1) throw ConfigInvalid("M must be >= 1");
    for (double q : run.list("q")) {
        if (!(q >= 0.0 && q <= 1.0)) throw ConfigInvalid("q must lie in [0, 1]");
        std::vector<char> hit(run.opt.replicas, 0);
        parallel_for(run.opt.replicas, run.opt.threads, [&](std::size_t i) {
            const auto key = stream_key(run.opt.seed, StreamTag::Abstract, run.opt.replica_offset + i);
            hit[i] = run_abstract_exploration(q, M, key).reached_boundary ? 1 : 0;
        });
        Accumulator acc;
        for (char h : hit) acc.add(h);
        ResultRow r = run.row("explore-abstract", bernoulli_estimate(acc, run.opt.seed, run.opt.z));
        r.lambda = q;
        r.scale = M;
        run.add(r);
    }
}

SprinkleGeometry geometry_of(const Run& run) {
    const int d = run.cfg.d();
    const std::string g = run.cfg.get<std::string>("geometry", "shell");
    SprinkleGeometry geo;
    const double R = run.cfg.get<double>("R", 8.0);
    geo.r = Region::ball(d, Vec{}, R);
    if (g == "shell") {
        const double a = run.cfg.get<double>("a", 3.0);
        geo.a = Region::ball(d, Vec{}, a);
        geo.c = Region::annulus(d, Vec{}, a + 0.5, a + 2.0);
        if (!(a + 2.0 <= R)) throw ConfigInvalid("shell geometry needs a + 2 <= R");
    } else if (g == "targets") {
        const double a = run.cfg.get<double>("a", 1.0);
        geo.a = Region::cube(d, Vec{}, a);
        Vec c{}, h{};
        c[0] = a + 1.5;
        h[0] = 0.5;
        for (int k = 1; k < d; ++k) h[k] = 1.5;
        geo.b_centers = Region::box(d, c, h);
        geo.b_min_radius = run.cfg.get<double>("b_min_radius", 0.0);
        if (!(a + 2.0 + 1.5 <= R)) throw ConfigInvalid("targets geometry needs a + 3.5 <= R");
    } else {
        throw ConfigInvalid("geometry must be 'shell' or 'targets'");
    }
    return geo;
}

void op_sprinkle_gain(Run& run) {
    const double lambda = run.lambda();
    const SprinkleGeometry geo = geometry_of(run);
    const SprinkleParams sp = sprinkle_params(run, lambda);
    const SprinklingGain g = sprinkling_gain(geo, lambda, run.cfg.measure(), sp.beta, sp.xi, run.opt);
    for (auto [name, e] : {std::pair<std::string, Estimate>{"sprinkle-gain.hypothesis", g.hypothesis},
                           std::pair<std::string, Estimate>{"sprinkle-gain.before", g.before},
                           std::pair<std::string, Estimate>{"sprinkle-gain.after", g.after}}) {
        run.add(run.row(name, e));
    }
    run.extra["hypothesis_bound"] = g.hypothesis_bound;
    run.extra["conclusion_bound"] = g.conclusion_bound;
    run.extra["conditioning_rate"] = g.conditioning_rate;
    run.extra["geometry"] = run.cfg.get<std::string>("geometry", "shell");
}

struct OpSpec {
    std::string name;
    std::string help;
    std::vector<std::string> keys;
    void (*fn)(Run&);
};

const std::vector<std::string> kMeasureKeys{"d", "measure", "delta", "cutoff", "radius"};
const std::vector<std::string> kRunKeys{"replica_offset", "r_max", "budget", "run_id", "z"};
const std::vector<std::string> kEventKeys{"event", "n",     "N",         "rho",    "k",    "K",
                                          "r",     "inner", "outer",     "threshold", "slab_k"};

std::vector<std::string> join(std::initializer_list<std::vector<std::string>> parts) {
    std::vector<std::string> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

const std::vector<OpSpec>& op_table() {
    static const std::vector<OpSpec> table{
        {"sample", "Sample a configuration on a window and dump it as x1..xd,r rows",
         join({kMeasureKeys, kRunKeys, {"lambda", "window", "window_kind", "centers_only"}}), op_sample},
        {"estimate-event", "Monte Carlo probability of an event",
         join({kMeasureKeys, kRunKeys, kEventKeys, {"lambda"}}), op_estimate_event},
        {"crossing", "P(B_inner <-> dB_outer) for one or more outer radii",
         join({kMeasureKeys, kRunKeys, {"lambda", "inner", "outer", "slab_k"}}), op_crossing},
        {"lambda-c", "Critical intensity bracket for P(0 <-> dB_r)",
         join({kMeasureKeys, kRunKeys, {"lambda_lo", "lambda_hi", "tolerance", "theta", "ladder"}}),
         [](Run& r) { critical_rows(r, CriticalMode::LambdaC); }},
        {"lambda-hat-c", "Critical intensity bracket for P(B_r <-> dB_2r)",
         join({kMeasureKeys, kRunKeys, {"lambda_lo", "lambda_hi", "tolerance", "theta", "ladder"}}),
         [](Run& r) { critical_rows(r, CriticalMode::LambdaHatC); }},
        {"slab", "Critical intensity brackets with centers restricted to slabs of half width k",
         join({kMeasureKeys, kRunKeys, {"lambda_lo", "lambda_hi", "tolerance", "theta", "ladder", "slab_k"}}),
         [](Run& r) { critical_rows(r, CriticalMode::Slab); }},
        {"phi", "Expected boundary count phi(B_s) from B_n",
         join({kMeasureKeys, kRunKeys, {"lambda", "n", "s"}}), op_phi},
        {"correlation-length", "Smallest grid scale s with phi(B_s) below 1/e",
         join({kMeasureKeys, kRunKeys, {"lambda", "n", "ell_max", "ratio"}}), op_correlation_length},
        {"pivotal", "Insertion integral of pivotal probabilities",
         join({kMeasureKeys, kRunKeys, kEventKeys, {"lambda", "weight", "draws"}}), op_pivotal},
        {"delta-derivative", "d/d delta of an event probability",
         join({kMeasureKeys, kRunKeys, kEventKeys, {"lambda", "draws"}}), op_delta_derivative},
        {"talagrand-diagnostic", "Ratio of the log-weighted pivotal sum to P(1-P) log(1/max piv)",
         join({kMeasureKeys, kRunKeys, kEventKeys, {"lambda", "cell_budget", "draws"}}), op_talagrand},
        {"two-arm", "Two-arm probabilities and bad-ball probabilities over K",
         join({kMeasureKeys, kRunKeys, {"lambda", "k", "K"}}), op_two_arm},
        {"hypercube-check", "Exact Talagrand constants over every function on n bits",
         join({kMeasureKeys, kRunKeys, {"n", "p"}}), op_hypercube_check},
        {"encoding-check", "Exact fair-bit lift identities and bounds over every function on n bits",
         join({kMeasureKeys, kRunKeys, {"n", "p"}}), op_encoding_check},
        {"explore-gm", "Dynamic exploration with sprinkling on Z^2",
         join({kMeasureKeys, kRunKeys,
               {"lambda", "n", "N", "M", "beta", "xi", "epsilon", "c_prime", "pc_site", "trace"}}),
         op_explore_gm},
        {"explore-abstract", "Abstract exploration with constant acceptance probability q",
         join({kMeasureKeys, kRunKeys, {"q", "M"}}), op_explore_abstract},
        {"sprinkle-gain", "Connection frequencies before and after sprinkling, conditioned on dA",
         join({kMeasureKeys, kRunKeys,
               {"lambda", "geometry", "a", "R", "b_min_radius", "beta", "xi", "epsilon", "c_prime"}}),
         op_sprinkle_gain},
    };
    return table;
}

// Command-line values: numbers, booleans and lists parse as config values,
// anything else is kept as a string.
nlohmann::json cli_value(const std::string& key, const std::string& raw) {
    static const std::set<std::string> strings{"event",    "measure", "weight", "geometry",
                                               "run_id",   "trace",   "window_kind"};
    if (strings.count(key)) return raw;
    std::string text = raw;
    if (text.find(',') != std::string::npos && text.front() != '[') text = "[" + text + "]";
    try {
        return parse_config_text("v = " + text).at("v");
    } catch (const ConfigInvalid&) {
        return raw;
    }
}

std::string dashed(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
}

nlohmann::json normalize_keys(const nlohmann::json& j) {
    nlohmann::json out = nlohmann::json::object();
    for (auto it = j.begin(); it != j.end(); ++it) {
        std::string k = it.key();
        std::replace(k.begin(), k.end(), '-', '_');
        out[k] = it.value();
    }
    return out;
}

RunOptions options_of(const RunConfig& cfg) {
    RunOptions opt;
    opt.seed = cfg.seed();
    const auto replicas = cfg.get<std::int64_t>("replicas", 100);
    if (replicas < 1) throw ConfigInvalid("replicas must be >= 1");
    opt.replicas = static_cast<std::size_t>(replicas);
    const auto threads = cfg.get<std::int64_t>("threads", 1);
    if (threads < 1) throw ConfigInvalid("threads must be >= 1");
    opt.threads = static_cast<unsigned>(threads);
    const auto offset = cfg.get<std::int64_t>("replica_offset", 0);
    if (offset < 0) throw ConfigInvalid("replica_offset must be >= 0");
    opt.replica_offset = static_cast<std::size_t>(offset);
    if (cfg.has("r_max")) opt.r_max = cfg.get<double>("r_max", 0.0);
    opt.truncation_budget = cfg.get<double>("budget", 1e-3);
    const double conf = cfg.get<double>("z", kZ95);
    if (!(conf > 0.0)) throw ConfigInvalid("z must be positive");
    opt.z = conf;
    return opt;
}

int run_merge(const std::vector<std::string>& inputs, const std::optional<std::string>& out) {
    std::vector<std::vector<ResultRow>> tables;
    for (const auto& path : inputs) {
        std::ifstream in(path);
        if (!in) throw ConfigInvalid("cannot read " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        tables.push_back(parse_rows(ss.str()));
    }
    const std::string csv = format_rows(merge_rows(tables));
    if (out)
        write_atomic(*out, csv);
    else
        std::cout << csv;
    return 0;
}

}  // namespace

std::string format_rows(const std::vector<ResultRow>& rows) {
    std::string out;
    for (std::size_t i = 0; i < kCsvColumns.size(); ++i) out += (i ? "," : "") + kCsvColumns[i];
    out += '\n';
    for (const auto& r : rows) {
        std::ostringstream os;
        os << r.run_id << ',' << r.op << ',' << r.d << ',' << r.measure << ',' << opt_num(r.delta) << ','
           << opt_num(r.lambda) << ',' << opt_num(r.n) << ',' << opt_num(r.N) << ',' << opt_num(r.rho) << ','
           << opt_num(r.scale) << ',' << r.est.replicas << ',' << num(r.est.value) << ',' << num(r.est.stderr_)
           << ',' << num(r.est.ci_lo) << ',' << num(r.est.ci_hi) << ',' << r.est.seed << ',' << r.wall_ms << '\n';
        out += os.str();
    }
    return out;
}

std::vector<ResultRow> parse_rows(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    std::vector<ResultRow> rows;
    if (!std::getline(in, line)) return rows;
    if (split(line, ',') != kCsvColumns) throw SchemaMismatch("unexpected CSV header: " + line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != kCsvColumns.size()) throw SchemaMismatch("wrong field count in row: " + line);
        try {
            ResultRow r;
            r.run_id = f[0];
            r.op = f[1];
            r.d = std::stoi(f[2]);
            r.measure = f[3];
            r.delta = parse_opt(f[4]);
            r.lambda = parse_opt(f[5]);
            r.n = parse_opt(f[6]);
            r.N = parse_opt(f[7]);
            r.rho = parse_opt(f[8]);
            r.scale = parse_opt(f[9]);
            r.est.replicas = std::stoull(f[10]);
            r.est.value = std::stod(f[11]);
            r.est.stderr_ = std::stod(f[12]);
            r.est.ci_lo = std::stod(f[13]);
            r.est.ci_hi = std::stod(f[14]);
            r.est.seed = std::stoull(f[15]);
            r.wall_ms = std::stoll(f[16]);
            rows.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw SchemaMismatch("unparsable row: " + line);
        }
    }
    return rows;
}

std::vector<ResultRow> merge_rows(const std::vector<std::vector<ResultRow>>& inputs) {
    auto key_of = [](const ResultRow& r) {
        return r.op + '|' + std::to_string(r.d) + '|' + r.measure + '|' + opt_num(r.delta) + '|' +
               opt_num(r.lambda) + '|' + opt_num(r.n) + '|' + opt_num(r.N) + '|' + opt_num(r.rho) + '|' +
               opt_num(r.scale);
    };
    std::map<std::string, std::vector<ResultRow>> groups;
    for (const auto& t : inputs)
        for (const auto& r : t) groups[key_of(r)].push_back(r);

    std::vector<ResultRow> out;
    for (auto& [key, rows] : groups) {
        // a fixed order keeps floating sums independent of the input order
        std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
            return std::tie(a.est.replicas, a.est.value, a.est.stderr_, a.est.seed) <
                   std::tie(b.est.replicas, b.est.value, b.est.stderr_, b.est.seed);
        });
        ResultRow m = rows.front();
        m.run_id = "merged";
        m.wall_ms = 0;
        bool same_seed = true;
        for (const auto& r : rows) {
            m.wall_ms += r.wall_ms;
            same_seed = same_seed && r.est.seed == rows.front().est.seed;
        }
        if (!poolable(m.op)) {
            for (const auto& r : rows) {
                if (r.est.value != m.est.value || r.est.ci_lo != m.est.ci_lo || r.est.ci_hi != m.est.ci_hi)
                    throw SchemaMismatch("summary rows of op '" + m.op + "' differ and cannot be pooled");
            }
            out.push_back(m);
            continue;
        }
        Accumulator acc;
        bool bern = true;
        for (const auto& r : rows) {
            acc.merge(reconstruct(r));
            bern = bern && is_bernoulli(r);
        }
        const std::uint64_t seed = same_seed ? rows.front().est.seed : 0;
        // the z behind the stored interval is recovered from the first row
        double z = kZ95;
        const ResultRow& f = rows.front();
        if (f.est.stderr_ > 0.0 && !bern) z = (f.est.ci_hi - f.est.value) / f.est.stderr_;
        if (bern && f.est.replicas > 0) {
            for (double cand : {kZ95, kZ99}) {
                const auto w = wilson_interval(static_cast<std::uint64_t>(std::llround(f.est.value * f.est.replicas)),
                                               f.est.replicas, cand);
                if (std::abs(w.first - f.est.ci_lo) < 1e-12 && std::abs(w.second - f.est.ci_hi) < 1e-12) z = cand;
            }
        }
        m.est = bern ? bernoulli_estimate(acc, seed, z) : mean_estimate(acc, seed, z);
        out.push_back(m);
    }
    return out;
}

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot write " + tmp.string());
        os << content;
        os.flush();
        if (!os) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Monte Carlo experiments for Boolean percolation with heavy-tailed radii"};
    app.require_subcommand(1);

    struct Bound {
        CLI::App* sub = nullptr;
        const OpSpec* spec = nullptr;
        std::map<std::string, std::string> raw;
        std::map<std::string, CLI::Option*> opts;
        std::string config;
    };
    std::vector<std::unique_ptr<Bound>> bound;
    std::string out_path;

    for (const auto& spec : op_table()) {
        auto b = std::make_unique<Bound>();
        b->spec = &spec;
        b->sub = app.add_subcommand(spec.name, spec.help);
        b->sub->add_option("--config", b->config, "Key = value configuration file");
        for (const std::string key : {"seed", "replicas", "threads"})
            b->opts[key] = b->sub->add_option("--" + key, b->raw[key]);
        b->sub->add_option("--out", out_path, "Output CSV path (stdout when omitted)");
        for (const auto& key : spec.keys) {
            if (b->opts.count(key)) continue;
            b->opts[key] = b->sub->add_option("--" + dashed(key), b->raw[key]);
        }
        bound.push_back(std::move(b));
    }
    std::vector<std::string> inputs;
    CLI::App* merge = app.add_subcommand("merge", "Pool result CSVs by count, sum and sum of squares");
    merge->add_option("inputs", inputs, "Result CSV files");
    merge->add_option("--out", out_path, "Output CSV path (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (merge->parsed()) return run_merge(inputs, out_path.empty() ? std::nullopt : std::optional(out_path));

        Bound* b = nullptr;
        for (auto& x : bound)
            if (x->sub->parsed()) b = x.get();
        if (!b) return 2;

        RunConfig cfg;
        if (!b->config.empty()) cfg.overlay(normalize_keys(load_config_file(b->config)));
        nlohmann::json cli = nlohmann::json::object();
        for (const auto& [key, o] : b->opts)
            if (o->count() > 0) cli[key] = cli_value(key, b->raw[key]);
        cfg.overlay(cli);

        Run run;
        run.op = b->spec->name;
        run.cfg = cfg;
        run.opt = options_of(cfg);
        run.run_id = cfg.get<std::string>("run_id", run.op + "-" + std::to_string(run.opt.seed));
        if (run.run_id.find_first_of(",\n") != std::string::npos) throw ConfigInvalid("run_id must not contain commas");
        cfg.d();
        b->spec->fn(run);

        const std::string csv = run.body ? *run.body : format_rows(run.rows);
        const std::int64_t wall = run.elapsed_ms();
        if (out_path.empty()) {
            std::cout << csv;
        } else {
            nlohmann::json man;
            man["artifact_version"] = kArtifactVersion;
            man["op"] = run.op;
            man["run_id"] = run.run_id;
            man["config"] = cfg.json();
            man["seed"] = run.opt.seed;
            man["replicas"] = run.opt.replicas;
            man["replica_offset"] = run.opt.replica_offset;
            man["threads"] = run.opt.threads;
            man["wall_ms"] = wall;
            man["bias_notes"] = run.bias_notes;
            man["rows"] = run.body ? static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) - 1
                                   : run.rows.size();
            man["details"] = run.extra;
            for (const auto& [path, content] : run.side_files) write_atomic(path, content);
            write_atomic(out_path, csv);
            write_atomic(out_path + ".manifest.json", man.dump(2) + "\n");
        }
        return run.assertion_failed ? 5 : 0;
    } catch (const ConfigInvalid& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DivergentMoment& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const TruncationBudgetExceeded& e) {
        std::cerr << "truncation budget exceeded: " << e.what() << '\n';
        return 3;
    } catch (const BracketInvalid& e) {
        std::cerr << "invalid bracket: " << e.what() << '\n';
        return 4;
    } catch (const SchemaMismatch& e) {
        std::cerr << "schema mismatch: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid parameters: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace boolperc
