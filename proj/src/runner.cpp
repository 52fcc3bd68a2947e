#include "coalweb/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "coalweb/lattice.hpp"
#include "coalweb/metric_checks.hpp"
#include "coalweb/path.hpp"
#include "coalweb/rng.hpp"
#include "coalweb/skeleton.hpp"
#include "coalweb/stats.hpp"
#include "coalweb/webstats.hpp"

namespace coalweb {

namespace {

const double kPi = std::acos(-1.0);

struct Ctx {
    const Config& cfg;
    std::uint64_t root_seed = 0;
    std::size_t n_replicas = 0;
    int threads = 0;
    RunReport* rep = nullptr;

    EnsembleConfig ensemble(std::uint64_t stream) const {
        return EnsembleConfig{n_replicas, derive_seed(root_seed, stream), threads};
    }
};

std::string histogram_extra(const StatSummary& s) {
    std::string out = "hist=";
    bool first = true;
    for (const auto& [value, count] : s.histogram) {
        if (!first) out += '|';
        out += std::to_string(value) + ':' + std::to_string(count);
        first = false;
    }
    return out;
}

double binomial_se(double p, double n) {
    return n > 0 ? std::sqrt(std::max(0.0, p * (1.0 - p) / n)) : 0.0;
}

Window window_from(const Config& cfg, Window def) {
    Window w = def;
    w.i_min = cfg.get_int("window.i_min", def.i_min);
    w.i_max = cfg.get_int("window.i_max", def.i_max);
    w.t_min = cfg.get_double("window.t_min", def.t_min);
    w.t_max = cfg.get_double("window.t_max", def.t_max);
    std::string b = cfg.get_string("boundary", def.boundary == Boundary::periodic
                                                   ? "periodic"
                                                   : "open");
    if (b == "periodic")
        w.boundary = Boundary::periodic;
    else if (b == "open" || b == "open-with-buffer")
        w.boundary = Boundary::open_buffer;
    else
        throw ConfigError("key 'boundary': expected open or periodic, got '" + b + "'");
    return w;
}

void run_eta(Ctx& c) {
    std::vector<double> deltas =
        c.cfg.has("delta") ? c.cfg.get_double_list("delta") : std::vector<double>{0.02};
    EtaQuery q;
    q.t0 = c.cfg.get_double("eta.t0", 0.0);
    q.t = c.cfg.get_double("eta.t", 1.0);
    q.a = c.cfg.get_double("eta.a", 0.0);
    q.b = c.cfg.get_double("eta.b", 1.0);
    if (c.n_replicas == 0) return;

    const double target = 1.0 + (q.b - q.a) / std::sqrt(kPi * q.t);
    for (std::size_t di = 0; di < deltas.size(); ++di) {
        EtaEnsembleResult res = eta_ensemble(deltas[di], q, c.ensemble(di));
        const StatSummary& s = res.summary;
        const double n = static_cast<double>(s.n);

        ResultRow mean;
        mean.stat = "eta_mean";
        mean.delta = deltas[di];
        mean.t0 = q.t0;
        mean.t = q.t;
        mean.a = q.a;
        mean.b = q.b;
        mean.n = static_cast<std::int64_t>(s.n);
        mean.estimate = s.mean;
        mean.std_error = s.std_error;
        mean.extra = histogram_extra(s);
        c.rep->rows.push_back(mean);

        for (int k : {2, 3}) {
            ResultRow r = mean;
            r.stat = "eta_p" + std::to_string(k);
            r.estimate = s.tail_prob(k);
            r.std_error = binomial_se(r.estimate, n);
            r.extra.clear();
            c.rep->rows.push_back(r);
        }

        std::string tag = "(delta=" + format_double(deltas[di]) + ")";
        CheckFlag band;
        band.name = "eta_mean_band" + tag;
        band.observed = std::abs(s.mean - target);
        band.threshold = 0.05 * target + 3.0 * s.std_error;
        band.pass = band.observed <= band.threshold;
        c.rep->checks.push_back(band);

        EtaBoundReport eb = check_etabound(s, 6);
        CheckFlag tail;
        tail.name = "eta_tail_bound" + tag;
        tail.observed = 0.0;
        for (const EtaBoundRow& row : eb.rows)
            tail.observed = std::max(tail.observed,
                                     row.p_k - row.bound - 3.0 * row.combined_se);
        tail.threshold = 0.0;
        tail.pass = eb.pass;
        c.rep->checks.push_back(tail);
    }
}

void run_tightness(Ctx& c) {
    const double delta = c.cfg.get_double("delta", 0.02);
    const double u = c.cfg.get_double("tightness.u", 1.0);
    std::vector<double> ts = c.cfg.get_double_list("tightness.t");
    if (c.n_replicas == 0) return;

    for (std::size_t ti = 0; ti < ts.size(); ++ti) {
        GEstimate ge = estimate_g(delta, ts[ti], u, c.ensemble(ti));
        ResultRow g;
        g.stat = "g";
        g.delta = delta;
        g.t = ts[ti];
        g.u = u;
        g.n = static_cast<std::int64_t>(ge.n_replicas);
        g.estimate = ge.g;
        g.std_error = ge.std_error;
        g.extra = "x_offset=" + format_double(ge.x_offset) +
                  ";t_offset=" + format_double(ge.t_offset) +
                  ";placements=" + std::to_string(ge.n_placements);
        c.rep->rows.push_back(g);

        ResultRow gn = g;
        gn.stat = "g_over_t32";
        gn.estimate = ge.g_over_t32;
        gn.std_error = ge.std_error / std::pow(ts[ti], 1.5);
        gn.extra.clear();
        c.rep->rows.push_back(gn);

        ResultRow gs = g;
        gs.stat = "g_u4_over_t2";
        gs.estimate = ge.shape_u4_over_t2;
        gs.std_error = ge.std_error * std::pow(u, 4.0) / (ts[ti] * ts[ti]);
        gs.extra.clear();
        c.rep->rows.push_back(gs);
    }
}

void run_bstats(Ctx& c) {
    std::vector<double> deltas =
        c.cfg.has("delta") ? c.cfg.get_double_list("delta") : std::vector<double>{0.02};
    const double t0 = c.cfg.get_double("bstats.t0", 0.0);
    const double t = c.cfg.get_double("bstats.t", 1.0);
    std::vector<double> eps = c.cfg.get_double_list("bstats.epsilon");
    if (c.n_replicas == 0) return;

    std::vector<BStatRow> rows = b_statistics(deltas, t0, t, eps, c.ensemble(0));
    for (const BStatRow& r : rows) {
        ResultRow b1;
        b1.stat = "b1";
        b1.delta = r.delta;
        b1.t0 = t0;
        b1.t = t;
        b1.epsilon = r.epsilon;
        b1.n = static_cast<std::int64_t>(r.n);
        b1.estimate = r.b1;
        b1.std_error = r.b1_se;
        b1.extra = "sites=" + std::to_string(r.n_sites);
        c.rep->rows.push_back(b1);

        ResultRow b2 = b1;
        b2.stat = "b2";
        b2.estimate = r.b2;
        b2.std_error = r.b2_se;
        c.rep->rows.push_back(b2);
    }
}

void run_donsker(Ctx& c) {
    const double delta = c.cfg.get_double("delta", 0.01);
    const double t = c.cfg.get_double("donsker.t", 1.0);
    if (c.n_replicas == 0) return;

    double ks = donsker_marginal_check(delta, t, c.ensemble(0));
    ResultRow r;
    r.stat = "ks_marginal";
    r.delta = delta;
    r.t = t;
    r.n = static_cast<std::int64_t>(c.n_replicas);
    r.estimate = ks;
    c.rep->rows.push_back(r);

    double meet_dev = -1.0;
    if (c.cfg.has("donsker.dist")) {
        const double dist = c.cfg.get_double("donsker.dist");
        const double t_max = c.cfg.get_double("donsker.t_max", t);
        meet_dev = donsker_pair_meeting(delta, dist, t_max, c.ensemble(1));
        ResultRow m;
        m.stat = "meet_cdf_dev";
        m.delta = delta;
        m.t = t_max;
        m.n = static_cast<std::int64_t>(c.n_replicas);
        m.estimate = meet_dev;
        m.extra = "dist=" + format_double(dist);
        c.rep->rows.push_back(m);
    }

    if (c.cfg.has("donsker.ks_threshold")) {
        const double thr = c.cfg.get_double("donsker.ks_threshold");
        CheckFlag f;
        f.name = "donsker_marginal_ks";
        f.observed = ks;
        f.threshold = thr;
        f.pass = ks < thr;
        c.rep->checks.push_back(f);
        if (meet_dev >= 0.0) {
            CheckFlag g;
            g.name = "donsker_meet_cdf";
            g.observed = meet_dev;
            g.threshold = thr;
            g.pass = meet_dev < thr;
            c.rep->checks.push_back(g);
        }
    }
}

void run_dual(Ctx& c) {
    EtaQuery q;
    q.t0 = c.cfg.get_double("dual.t0", 0.0);
    q.t = c.cfg.get_double("dual.t", 2.0);
    q.a = c.cfg.get_double("dual.a", -4.0);
    q.b = c.cfg.get_double("dual.b", 4.0);
    const auto reach = static_cast<std::int64_t>(2.0 * q.t) + 2;
    Window def;
    def.i_min = static_cast<std::int64_t>(q.a) - reach;
    def.i_max = static_cast<std::int64_t>(q.b) + reach;
    def.t_min = q.t0;
    def.t_max = q.t0 + q.t;
    Window w = window_from(c.cfg, def);
    if (c.n_replicas == 0) return;

    std::size_t failures = 0;
    std::vector<double> etas(c.n_replicas, 0.0);
    for (std::size_t r = 0; r < c.n_replicas; ++r) {
        ArrowField f(w, derive_seed(c.root_seed, r));
        auto [eta, eta_dual] = count_eta_dual(f, q);
        etas[r] = static_cast<double>(eta);
        if (eta != 1 + eta_dual) ++failures;
    }

    ResultRow fr;
    fr.stat = "dual_identity_failures";
    fr.t0 = q.t0;
    fr.t = q.t;
    fr.a = q.a;
    fr.b = q.b;
    fr.n = static_cast<std::int64_t>(c.n_replicas);
    fr.estimate = static_cast<double>(failures);
    c.rep->rows.push_back(fr);

    StatSummary s = summarize(etas, true);
    ResultRow em = fr;
    em.stat = "dual_eta_mean";
    em.estimate = s.mean;
    em.std_error = s.std_error;
    em.extra = histogram_extra(s);
    c.rep->rows.push_back(em);

    CheckFlag f;
    f.name = "dual_identity";
    f.observed = static_cast<double>(failures);
    f.threshold = 0.0;
    f.pass = failures == 0;
    c.rep->checks.push_back(f);
}

void run_census(Ctx& c) {
    Window def;
    def.i_min = 0;
    def.i_max = 63;
    def.t_min = 0;
    def.t_max = 32;
    def.boundary = Boundary::periodic;
    Window w = window_from(c.cfg, def);
    if (c.n_replicas == 0) return;

    CensusCounts fwd, dual;
    for (std::size_t r = 0; r < c.n_replicas; ++r) {
        ArrowField f(w, derive_seed(c.root_seed, r));
        CensusReport cr = point_census(f, w);
        for (const auto& [cls, count] : cr.forward.classes) fwd.classes[cls] += count;
        fwd.total += cr.forward.total;
        for (const auto& [cls, count] : cr.dual.classes) dual.classes[cls] += count;
        dual.total += cr.dual.total;
    }

    auto emit = [&](const char* prefix, const CensusCounts& cc) {
        for (int m_in = 0; m_in <= 2; ++m_in) {
            ResultRow r;
            r.stat = std::string(prefix) + std::to_string(m_in);
            r.n = static_cast<std::int64_t>(cc.total);
            r.estimate = static_cast<double>(cc.at(m_in, 1));
            c.rep->rows.push_back(r);
        }
    };
    emit("census_fwd_in", fwd);
    emit("census_dual_in", dual);

    if (w.boundary == Boundary::periodic) {
        CheckFlag f;
        f.name = "census_balance_fwd";
        f.observed = std::abs(static_cast<double>(fwd.at(2, 1)) -
                              static_cast<double>(fwd.at(0, 1)));
        f.threshold = 0.0;
        f.pass = f.observed == 0.0;
        c.rep->checks.push_back(f);

        CheckFlag d;
        d.name = "census_balance_dual";
        d.observed = std::abs(static_cast<double>(dual.at(2, 1)) -
                              static_cast<double>(dual.at(0, 1)));
        d.threshold = 0.0;
        d.pass = d.observed == 0.0;
        c.rep->checks.push_back(d);
    }
}

void run_skeleton(Ctx& c) {
    SeedSet seeds;
    for (auto [x, t] : c.cfg.has("skeleton.seeds")
                           ? c.cfg.get_point_list("skeleton.seeds")
                           : std::vector<std::pair<double, double>>{{-0.5, 0.0},
                                                                    {0.0, 0.0},
                                                                    {0.5, 0.0}})
        seeds.pts.push_back({x, t});
    seeds.validate();
    TimeGrid grid;
    grid.t_start = c.cfg.get_double("skeleton.t_start", 0.0);
    grid.t_end = c.cfg.get_double("skeleton.t_end", 1.0);
    grid.step = c.cfg.get_double("skeleton.dt", 1e-3);
    grid.validate();
    const bool bridge = c.cfg.get_bool("skeleton.bridge_correction", true);
    if (c.n_replicas == 0) return;

    std::size_t noncross_failures = 0;
    std::vector<double> merged(c.n_replicas, 0.0);
    for (std::size_t r = 0; r < c.n_replicas; ++r) {
        Skeleton sk =
            sample_skeleton_detailed(seeds, grid, derive_seed(c.root_seed, r), bridge);
        if (!check_skeleton_noncrossing(sk)) ++noncross_failures;
        std::size_t m = 0;
        for (const SkeletonPath& p : sk.paths)
            if (p.coalesced_with >= 0) ++m;
        merged[r] = static_cast<double>(m);
    }

    ResultRow nc;
    nc.stat = "skeleton_noncross_failures";
    nc.t0 = grid.t_start;
    nc.t = grid.t_end - grid.t_start;
    nc.n = static_cast<std::int64_t>(c.n_replicas);
    nc.estimate = static_cast<double>(noncross_failures);
    nc.extra = "seeds=" + std::to_string(seeds.pts.size()) +
               ";dt=" + format_double(grid.step);
    c.rep->rows.push_back(nc);

    StatSummary ms = summarize(merged, true);
    ResultRow mg = nc;
    mg.stat = "skeleton_mean_merged";
    mg.estimate = ms.mean;
    mg.std_error = ms.std_error;
    mg.extra.clear();
    c.rep->rows.push_back(mg);

    CheckFlag f;
    f.name = "skeleton_noncrossing";
    f.observed = static_cast<double>(noncross_failures);
    f.threshold = 0.0;
    f.pass = noncross_failures == 0;
    c.rep->checks.push_back(f);

    if (c.cfg.get_bool("skeleton.ordering", false)) {
        OrderingCheckConfig occ;
        occ.seeds = seeds;
        occ.grid = grid;
        occ.n_replicas = c.n_replicas;
        occ.seed = derive_seed(c.root_seed, 1000);
        occ.threads = c.threads;
        OrderingInvarianceReport rep = ordering_invariance_check(occ);

        for (auto [name, value] : {std::pair<const char*, double>{"ordering_ks_meet",
                                                                  rep.ks_meet_time},
                                   {"ordering_ks_marginal", rep.ks_marginal},
                                   {"ordering_ks_eta", rep.ks_eta}}) {
            ResultRow r;
            r.stat = name;
            r.n = static_cast<std::int64_t>(rep.n_replicas);
            r.estimate = value;
            c.rep->rows.push_back(r);
        }
        if (c.cfg.has("skeleton.ordering_threshold")) {
            const double thr = c.cfg.get_double("skeleton.ordering_threshold");
            CheckFlag o;
            o.name = "skeleton_ordering_invariance";
            o.observed = std::max({rep.ks_meet_time, rep.ks_eta});
            o.threshold = thr;
            o.pass = o.observed < thr;
            c.rep->checks.push_back(o);
        }
    }
}

void run_metrics(Ctx& c) {
    const std::size_t n_triples =
        c.cfg.get_u64("metrics.n_triples", c.n_replicas);
    const double psi_step = c.cfg.get_double("metrics.psi_step", 1e-3);
    if (c.n_replicas == 0 || n_triples == 0) return;

    MetricTripleReport rep = run_metric_triples(n_triples, derive_seed(c.root_seed, 0),
                                                psi_step);
    for (auto [name, value] :
         {std::pair<const char*, double>{"metric_rho_violations",
                                         double(rep.rho_violations)},
          {"metric_path_violations", double(rep.path_violations)},
          {"metric_family_violations", double(rep.family_violations)},
          {"metric_cap_identity_failures", double(rep.cap_identity_failures)},
          {"metric_max_refine_error", rep.max_refine_error}}) {
        ResultRow r;
        r.stat = name;
        r.n = static_cast<std::int64_t>(rep.n_triples);
        r.estimate = value;
        c.rep->rows.push_back(r);
    }

    CheckFlag f;
    f.name = "metric_axioms";
    f.observed = static_cast<double>(rep.total_violations());
    f.threshold = 0.0;
    f.pass = rep.total_violations() == 0;
    c.rep->checks.push_back(f);
}

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "kind", "seed", "n_replicas", "threads", "delta", "time_mode", "boundary",
        "window.i_min", "window.i_max", "window.t_min", "window.t_max",
        "eta.t0", "eta.t", "eta.a", "eta.b",
        "tightness.t", "tightness.u",
        "bstats.t0", "bstats.t", "bstats.epsilon",
        "donsker.t", "donsker.dist", "donsker.t_max", "donsker.ks_threshold",
        "dual.t0", "dual.t", "dual.a", "dual.b",
        "skeleton.seeds", "skeleton.dt", "skeleton.t_start", "skeleton.t_end",
        "skeleton.bridge_correction", "skeleton.ordering", "skeleton.ordering_threshold",
        "metrics.n_triples", "metrics.psi_step",
    };
    return keys;
}

}  // namespace

RunReport run_experiment(const Config& cfg, const RunOptions& opt) {
    cfg.require_known(known_keys());
    const std::string kind = cfg.get_string("kind");

    RunReport rep;
    rep.kind = kind;
    rep.config_hash = cfg.hash();
    rep.root_seed = opt.seed ? *opt.seed : cfg.get_u64("seed", 1);
    rep.n_replicas = cfg.get_u64("n_replicas", 1000);
    rep.threads = opt.threads ? *opt.threads
                              : static_cast<int>(cfg.get_int("threads", 0));
    rep.config_echo = cfg.entries();

    Ctx c{cfg};
    c.root_seed = rep.root_seed;
    c.n_replicas = rep.n_replicas;
    c.threads = rep.threads;
    c.rep = &rep;

    auto start = std::chrono::steady_clock::now();
    if (kind == "eta")
        run_eta(c);
    else if (kind == "tightness")
        run_tightness(c);
    else if (kind == "bstats")
        run_bstats(c);
    else if (kind == "donsker")
        run_donsker(c);
    else if (kind == "dual")
        run_dual(c);
    else if (kind == "census")
        run_census(c);
    else if (kind == "skeleton")
        run_skeleton(c);
    else if (kind == "metrics")
        run_metrics(c);
    else
        throw ConfigError("unknown experiment kind '" + kind +
                          "' (expected eta, tightness, bstats, donsker, dual, census, "
                          "skeleton, or metrics)");
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

int run_and_write(const std::string& config_path, const RunOptions& opt) {
    Config cfg = Config::parse_file(config_path);
    RunReport rep = run_experiment(cfg, opt);
    write_run_outputs(rep, opt.out_dir);
    return rep.all_pass() ? 0 : 1;
}

int export_paths(const std::string& config_path, const std::string& format,
                 const RunOptions& opt) {
    if (format != "pathset")
        throw ConfigError("unsupported export format '" + format + "' (only 'pathset')");
    Config cfg = Config::parse_file(config_path);
    cfg.require_known(known_keys());
    const std::string kind = cfg.get_string("kind");
    const std::uint64_t root_seed = opt.seed ? *opt.seed : cfg.get_u64("seed", 1);

    PathSet ps;
    if (kind == "skeleton") {
        SeedSet seeds;
        for (auto [x, t] : cfg.get_point_list("skeleton.seeds")) seeds.pts.push_back({x, t});
        seeds.validate();
        TimeGrid grid;
        grid.t_start = cfg.get_double("skeleton.t_start", 0.0);
        grid.t_end = cfg.get_double("skeleton.t_end", 1.0);
        grid.step = cfg.get_double("skeleton.dt", 1e-3);
        grid.validate();
        ps = sample_skeleton(seeds, grid, root_seed,
                             cfg.get_bool("skeleton.bridge_correction", true));
    } else {
        Window def;
        def.i_min = -16;
        def.i_max = 16;
        def.t_min = 0;
        def.t_max = 16;
        Window w = window_from(cfg, def);
        const std::string mode = cfg.get_string("time_mode", "discrete");
        if (mode == "discrete") {
            // Walks started inside the window move at unit slope, so a spatial
            // buffer of one time horizon keeps open-mode walks off the edge.
            // Hashed arrows depend on absolute coordinates, so the buffer does
            // not perturb the realization inside the window.
            Window fw = w;
            if (fw.boundary == Boundary::open_buffer) {
                std::int64_t buf = w.j_max() - w.j_min();
                fw.i_min -= buf;
                fw.i_max += buf;
            }
            ArrowField f(fw, root_seed);
            std::vector<std::pair<std::int64_t, std::int64_t>> starts;
            for (std::int64_t j = w.j_min(); j <= w.j_max(); ++j)
                for (std::int64_t i = w.i_min; i <= w.i_max; ++i)
                    if (((i + j) & 1) == 0) starts.emplace_back(i, j);
            ps = build_discrete_web(f, starts);
        } else if (mode == "continuous") {
            // Continuous walks jump at Poisson events, so no finite buffer is
            // a hard guarantee; four horizons plus slack makes an escape
            // astronomically unlikely, and an escape still errors honestly.
            Window fw = w;
            if (fw.boundary == Boundary::open_buffer) {
                std::int64_t buf =
                    4 * static_cast<std::int64_t>(std::ceil(w.t_max - w.t_min)) + 16;
                fw.i_min -= buf;
                fw.i_max += buf;
            }
            ClockField clocks = sample_poisson_clocks(fw, root_seed);
            std::vector<std::pair<std::int64_t, double>> starts;
            for (std::int64_t i = w.i_min; i <= w.i_max; ++i) starts.emplace_back(i, w.t_min);
            ps = build_continuous_web(clocks, starts);
        } else {
            throw ConfigError("key 'time_mode': expected discrete or continuous, got '" +
                              mode + "'");
        }
        const double delta = cfg.get_double("delta", 1.0);
        if (delta != 1.0) ps = rescale_web(ps, delta);
    }

    std::filesystem::path dir(opt.out_dir.empty() ? "." : opt.out_dir);
    std::filesystem::create_directories(dir);
    std::ofstream f(dir / "paths.txt", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / "paths.txt").string());
    f << "# config_hash=" << hex_u64(cfg.hash()) << " root_seed=" << root_seed << "\n";
    write_pathset(f, ps);
    return 0;
}

}  // namespace coalweb
