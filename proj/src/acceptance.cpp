#include "coalweb/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
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

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

double hypot2(double a, double b) { return std::sqrt(a * a + b * b); }

CriterionResult c1_eta_mean(const AcceptanceOptions& o) {
    CriterionResult r;
    r.id = 1;
    r.suite = "eta-mean";
    EtaQuery q;
    q.t0 = 0.0;
    q.t = 1.0;
    q.a = 0.0;
    q.b = 1.0;
    auto e02 = eta_ensemble(0.02, q, {2000, derive_seed(o.root_seed, 101), o.threads});
    auto e04 = eta_ensemble(0.04, q, {2000, derive_seed(o.root_seed, 102), o.threads});
    const double target = 1.5642;
    const double bias02 = std::abs(e02.summary.mean - target);
    const double bias04 = std::abs(e04.summary.mean - target);
    const double band = 0.05 * target + 3.0 * e02.summary.std_error;
    const double shrink = bias04 + 2.0 * hypot2(e02.summary.std_error, e04.summary.std_error);
    r.target = "mean=1.5642; bias(d=0.02)<=bias(d=0.04)+2SE";
    r.observed = "mean=" + fmt(e02.summary.mean) + " bias=" + fmt(bias02) +
                 " bias04=" + fmt(bias04);
    r.tolerance = "band=" + fmt(band) + " shrink<=" + fmt(shrink);
    r.pass = bias02 <= band && bias02 <= shrink;
    return r;
}

CriterionResult c2_eta_tail(const AcceptanceOptions& o) {
    CriterionResult r;
    r.id = 2;
    r.suite = "eta-tail";
    double worst = -std::numeric_limits<double>::infinity();
    bool pass = true;
    int i = 0;
    for (double eps : {0.25, 0.5, 1.0}) {
        EtaQuery q;
        q.t0 = 0.0;
        q.t = 1.0;
        q.a = 0.0;
        q.b = eps;
        auto e = eta_ensemble(0.02, q, {2000, derive_seed(o.root_seed, 103 + i++), o.threads});
        EtaBoundReport eb = check_etabound(e.summary, 3);
        pass = pass && eb.pass;
        for (const EtaBoundRow& row : eb.rows)
            worst = std::max(worst, row.p_k - row.bound - 3.0 * row.combined_se);
    }
    r.target = "P(eta>=3)<=P(eta>=2)^2 for eps=0.25,0.5,1";
    r.observed = "worst margin=" + fmt(worst);
    r.tolerance = "margin<=0 (3SE included)";
    r.pass = pass;
    return r;
}

CriterionResult c3_theta(const AcceptanceOptions& o) {
    CriterionResult r;
    r.id = 3;
    r.suite = "theta";
    double worst = 0.0;
    int i = 0;
    for (double d : {0.5, 1.0, 2.0}) {
        double mc = theta_mc(d, 1.0, 100000, derive_seed(o.root_seed, 106 + i++));
        worst = std::max(worst, std::abs(theta_closed(d, 1.0) - mc));
    }
    r.target = "max dev closed form vs 1e5-pair oracle, d/sqrt(t)=0.5,1,2";
    r.observed = "max|dev|=" + fmt(worst);
    r.tolerance = "<0.01";
    r.pass = worst < 0.01;
    return r;
}

CriterionResult c4_donsker(const AcceptanceOptions& o) {
    CriterionResult r;
    r.id = 4;
    r.suite = "donsker";
    const double ks =
        donsker_marginal_check(0.01, 1.0, {10000, derive_seed(o.root_seed, 109), o.threads});
    const double meet =
        donsker_pair_meeting(0.01, 0.2, 1.0, {10000, derive_seed(o.root_seed, 110), o.threads});
    r.target = "marginal KS at d=0.01,t=1,N=1e4; pair meeting CDF vs closed form";
    r.observed = "ks=" + fmt(ks) + " meet_dev=" + fmt(meet);
    r.tolerance = "<0.02 each";
    r.pass = ks < 0.02 && meet < 0.02;
    return r;
}

CriterionResult c5_tightness(const AcceptanceOptions& o) {
    CriterionResult r;
    r.id = 5;
    r.suite = "tightness";
    const double u = 1.0;
    const std::vector<double> ts = {0.16, 0.08, 0.04, 0.02, 0.01};
    std::vector<double> f(ts.size()), se(ts.size());
    double shape_c = 0.0;
    std::string series = "g/t^1.5=";
    for (std::size_t i = 0; i < ts.size(); ++i) {
        GEstimate ge =
            estimate_g(0.02, ts[i], u, {4000, derive_seed(o.root_seed, 111 + i), o.threads});
        f[i] = ge.g_over_t32;
        se[i] = ge.std_error / std::pow(ts[i], 1.5);
        shape_c = std::max(shape_c, ge.shape_u4_over_t2);
        series += (i ? "," : "") + fmt(f[i]);
    }
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < ts.size(); ++i)
        worst = std::max(worst, f[i] - f[i - 1] - 3.0 * hypot2(se[i], se[i - 1]));
    r.target = "g/t^1.5 nonincreasing as t halves 0.16..0.01; finite shape constant";
    r.observed = series + " worst_step=" + fmt(worst) + " C=" + fmt(shape_c);
    r.tolerance = "worst_step<=0 (3SE included)";
    r.pass = worst <= 0.0 && std::isfinite(shape_c);
    return r;
}

std::vector<std::int8_t> bits_to_arrows(std::uint32_t bits, int n_free, int n_fixed) {
    std::vector<std::int8_t> arrows;
    arrows.reserve(static_cast<std::size_t>(n_free + n_fixed));
    for (int k = 0; k < n_free; ++k)
        arrows.push_back((bits >> k) & 1u ? std::int8_t{1} : std::int8_t{-1});
    for (int k = 0; k < n_fixed; ++k) arrows.push_back(1);
    return arrows;
}

CriterionResult c6_dual(const AcceptanceOptions& o) {
    CriterionResult r;
    r.id = 6;
    r.suite = "dual";
    std::size_t failures = 0;

    struct Q {
        double t0, t, a, b;
    };
    const Q queries[] = {{0, 4, -4, 4}, {0, 2, 0, 6}, {2, 2, -2, 4}, {0, 6, -2, 2}, {4, 2, 0, 0}};
    for (std::size_t rep = 0; rep < 500; ++rep) {
        const Q& qq = queries[rep % 5];
        EtaQuery q;
        q.t0 = qq.t0;
        q.t = qq.t;
        q.a = qq.a;
        q.b = qq.b;
        const auto reach = static_cast<std::int64_t>(2 * qq.t) + 2;
        Window w;
        w.i_min = static_cast<std::int64_t>(qq.a) - reach;
        w.i_max = static_cast<std::int64_t>(qq.b) + reach;
        w.t_min = qq.t0;
        w.t_max = qq.t0 + qq.t;
        ArrowField f(w, derive_seed(o.root_seed, 5000 + rep));
        auto [eta, eta_dual] = count_eta_dual(f, q);
        if (eta != 1 + eta_dual) ++failures;
    }

    // Exhaustive: every arrow assignment feeding a 4-start, 3-row query.
    // Rows 0 and 1 hold the 13 arrows any forward or dual step can consume;
    // the top row's arrows are unreachable and held fixed.
    Window w;
    w.i_min = -3;
    w.i_max = 9;
    w.t_min = 0;
    w.t_max = 2;
    EtaQuery q;
    q.t0 = 0;
    q.t = 2;
    q.a = 0;
    q.b = 6;
    std::size_t exhaustive = 0;
    for (std::uint32_t bits = 0; bits < (1u << 13); ++bits) {
        ArrowField f(w, bits_to_arrows(bits, 13, 6));
        auto [eta, eta_dual] = count_eta_dual(f, q);

        std::vector<double> ends;
        for (std::int64_t i = 0; i <= 6; i += 2)
            ends.push_back(eval_path(discrete_path(f, i, 0), 2.0));
        std::sort(ends.begin(), ends.end());
        ends.erase(std::unique(ends.begin(), ends.end()), ends.end());

        ArrowField dual = dual_field(f);
        std::vector<std::pair<std::int64_t, std::int64_t>> dual_starts;
        for (std::int64_t i = -1; i <= 7; i += 2) dual_starts.emplace_back(i, 2);
        std::vector<double> landings;
        for (const Path& p : build_dual_web(dual, dual_starts).paths) {
            double x = eval_path(p, 0.0);
            if (x > q.a && x < q.b) landings.push_back(x);
        }
        std::sort(landings.begin(), landings.end());
        landings.erase(std::unique(landings.begin(), landings.end()), landings.end());

        bool ok = eta == ends.size() && eta_dual == landings.size() && eta == 1 + eta_dual;
        if (!ok) ++exhaustive;
    }

    r.target = "eta = 1 + eta_dual exactly, 500 random + 8192 exhaustive fields";
    r.observed = "failures=" + std::to_string(failures + exhaustive);
    r.tolerance = "0";
    r.pass = failures + exhaustive == 0;
    return r;
}

CriterionResult c7_metrics(const AcceptanceOptions& o) {
    CriterionResult r;
    r.id = 7;
    r.suite = "metrics";
    MetricTripleReport rep = run_metric_triples(1000, derive_seed(o.root_seed, 117));
    r.target = "metric axioms on 1e3 random triples; cap identification exact";
    r.observed = "violations=" + std::to_string(rep.total_violations()) +
                 " max_refine_err=" + fmt(rep.max_refine_error);
    r.tolerance = "0 (slack 1e-9 + refinement)";
    r.pass = rep.total_violations() == 0;
    return r;
}

std::size_t pair_violations(const Path& p, const Path& q) {
    const auto j0p = static_cast<std::int64_t>(p.t0());
    const auto j0q = static_cast<std::int64_t>(q.t0());
    const std::int64_t lo = std::max(j0p, j0q);
    const std::int64_t hi = std::min(static_cast<std::int64_t>(p.t_last()),
                                     static_cast<std::int64_t>(q.t_last()));
    std::size_t v = 0;
    double prev = 0.0;
    bool met = false;
    for (std::int64_t j = lo; j <= hi; ++j) {
        double d = p.xs[static_cast<std::size_t>(j - j0p)] -
                   q.xs[static_cast<std::size_t>(j - j0q)];
        if (met && d != 0.0) ++v;
        if (d == 0.0) met = true;
        if (j > lo && ((prev > 0.0 && d < 0.0) || (prev < 0.0 && d > 0.0))) ++v;
        prev = d;
    }
    return v;
}

// Dense field padded so walks from the window's cells cannot leave it; the
// pad arrows all point right and are not part of the enumeration.
ArrowField padded_exhaustive_field(const Window& w, std::uint32_t bits) {
    Window pw = w;
    const std::int64_t pad = w.rows() - 1;
    pw.i_min -= pad;
    pw.i_max += pad;
    std::vector<std::int8_t> arrows;
    int k = 0;
    for (std::int64_t j = pw.j_min(); j <= pw.j_max(); ++j)
        for (std::int64_t i = pw.i_min; i <= pw.i_max; ++i) {
            if (((i + j) & 1) != 0) continue;
            if (i >= w.i_min && i <= w.i_max)
                arrows.push_back((bits >> k++) & 1u ? std::int8_t{1} : std::int8_t{-1});
            else
                arrows.push_back(1);
        }
    return ArrowField(pw, std::move(arrows));
}

CriterionResult c8_coalescence(const AcceptanceOptions& o) {
    CriterionResult r;
    r.id = 8;
    r.suite = "coalescence";
    std::size_t violations = 0;

    // Exhaustive over all arrow fields of two 8-even-point windows.
    Window w1;
    w1.i_min = 0;
    w1.i_max = 4;
    w1.t_min = 0;
    w1.t_max = 2;
    Window w2;
    w2.i_min = 0;
    w2.i_max = 3;
    w2.t_min = 0;
    w2.t_max = 3;
    for (const Window& w : {w1, w2}) {
        ArrowField probe(w, 0);
        int n_cells = static_cast<int>(probe.dense_cells());
        std::vector<std::pair<std::int64_t, std::int64_t>> starts;
        for (std::int64_t j = w.j_min(); j <= w.j_max(); ++j)
            for (std::int64_t i = w.i_min; i <= w.i_max; ++i)
                if (((i + j) & 1) == 0) starts.emplace_back(i, j);
        for (std::uint32_t bits = 0; bits < (1u << n_cells); ++bits) {
            ArrowField f = padded_exhaustive_field(w, bits);
            PathSet web = build_discrete_web(f, starts);
            for (std::size_t a = 0; a < web.paths.size(); ++a)
                for (std::size_t b = a + 1; b < web.paths.size(); ++b)
                    violations += pair_violations(web.paths[a], web.paths[b]);
        }
    }

    // Randomized pairs on hashed windows.
    Window w;
    w.i_min = -80;
    w.i_max = 80;
    w.t_min = 0;
    w.t_max = 48;
    const std::uint64_t seed = derive_seed(o.root_seed, 118);
    for (std::size_t rep = 0; rep < 1000000; ++rep) {
        Rng rng(derive_seed(seed, rep));
        ArrowField f(w, rng.next_u64());
        auto draw_start = [&](std::int64_t& i, std::int64_t& j) {
            j = static_cast<std::int64_t>(rng.next_u64() % 17);
            i = -24 + static_cast<std::int64_t>(rng.next_u64() % 49);
            if (((i + j) & 1) != 0) i = (i < 24) ? i + 1 : i - 1;
        };
        std::int64_t i1, j1, i2, j2;
        draw_start(i1, j1);
        draw_start(i2, j2);
        violations +=
            pair_violations(discrete_path(f, i1, j1), discrete_path(f, i2, j2));
    }

    r.target = "no crossing, no post-merge split: 512 exhaustive fields + 1e6 pairs";
    r.observed = "violations=" + std::to_string(violations);
    r.tolerance = "0";
    r.pass = violations == 0;
    return r;
}

CriterionResult c9_holder(const AcceptanceOptions& o) {
    CriterionResult r;
    r.id = 9;
    r.suite = "holder";
    HolderReport h = holder_diagnostic(1.0 / 3.0, 3, 200, derive_seed(o.root_seed, 119));
    r.target = "modulus ratio: stable at xi=0.45 (4x), >=2 at xi=0.55 (16x)";
    r.observed =
        "r045=" + fmt(h.ratio_4x_xi045) + " r055=" + fmt(h.ratio_16x_xi055);
    r.tolerance = "r045 in [0.8,1.6]; r055>=2";
    r.pass = h.ratio_4x_xi045 >= 0.8 && h.ratio_4x_xi045 <= 1.6 && h.ratio_16x_xi055 >= 2.0;
    return r;
}

CriterionResult c10_ordering(const AcceptanceOptions& o) {
    CriterionResult r;
    r.id = 10;
    r.suite = "ordering";
    OrderingCheckConfig occ;
    occ.seeds.pts = {{-1.0, 0.0}, {0.0, 0.0}, {0.3, 0.0}, {-0.4, 0.1}, {0.8, 0.05}};
    occ.grid.t_start = 0.0;
    occ.grid.t_end = 1.0;
    occ.grid.step = 1e-3;
    occ.n_replicas = 2000;
    occ.seed = derive_seed(o.root_seed, 120);
    occ.threads = o.threads;
    OrderingInvarianceReport rep = ordering_invariance_check(occ);
    r.target = "two-sample KS under seed reordering, meeting times + eta, N=2000";
    r.observed = "ks_meet=" + fmt(rep.ks_meet_time) + " ks_eta=" + fmt(rep.ks_eta) +
                 " ks_marginal=" + fmt(rep.ks_marginal);
    r.tolerance = "<0.06";
    r.pass = rep.ks_meet_time < 0.06 && rep.ks_eta < 0.06;
    return r;
}

CriterionResult c11_bstats(const AcceptanceOptions& o) {
    CriterionResult r;
    r.id = 11;
    r.suite = "bstats";
    std::vector<BStatRow> rows = b_statistics({0.02}, 0.0, 1.0, {0.4, 0.2, 0.1, 0.05},
                                              {4000, derive_seed(o.root_seed, 121), o.threads});
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < rows.size(); ++i)
        worst = std::max(worst, rows[i].b1 - rows[i - 1].b1 -
                                    3.0 * hypot2(rows[i].b1_se, rows[i - 1].b1_se));
    const double b2_small = rows.back().b2, b2_big = rows.front().b2;
    r.target = "B1 decreasing over eps=0.4..0.05; B2(0.05)<B2(0.4)";
    r.observed = "b1=" + fmt(rows[0].b1) + "," + fmt(rows[1].b1) + "," + fmt(rows[2].b1) +
                 "," + fmt(rows[3].b1) + " worst_step=" + fmt(worst) +
                 " b2: " + fmt(b2_small) + "<" + fmt(b2_big);
    r.tolerance = "worst_step<=0 (3SE); strict b2 drop";
    r.pass = worst <= 0.0 && b2_small < b2_big;
    return r;
}

using CriterionFn = CriterionResult (*)(const AcceptanceOptions&);

const std::vector<std::pair<std::string, CriterionFn>>& registry() {
    static const std::vector<std::pair<std::string, CriterionFn>> reg = {
        {"eta-mean", c1_eta_mean},   {"eta-tail", c2_eta_tail},
        {"theta", c3_theta},         {"donsker", c4_donsker},
        {"tightness", c5_tightness}, {"dual", c6_dual},
        {"metrics", c7_metrics},     {"coalescence", c8_coalescence},
        {"holder", c9_holder},       {"ordering", c10_ordering},
        {"bstats", c11_bstats},
    };
    return reg;
}

}  // namespace

const std::vector<std::string>& acceptance_suites() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [name, fn] : registry()) v.push_back(name);
        return v;
    }();
    return names;
}

bool run_acceptance_suite(const std::string& name, const AcceptanceOptions& opt,
                          std::vector<CriterionResult>& out) {
    for (const auto& [n, fn] : registry()) {
        if (n == name) {
            out.push_back(fn(opt));
            return true;
        }
    }
    return false;
}

void print_acceptance_table(std::ostream& os, const std::vector<CriterionResult>& rows) {
    auto pad = [](std::string s, std::size_t w) {
        if (s.size() < w) s.append(w - s.size(), ' ');
        return s;
    };
    os << pad("criterion", 16) << " | " << pad("target", 58) << " | "
       << pad("observed", 58) << " | " << pad("tolerance", 34) << " | result\n";
    for (const CriterionResult& r : rows) {
        os << pad(std::to_string(r.id) + " " + r.suite, 16) << " | " << pad(r.target, 58)
           << " | " << pad(r.observed, 58) << " | " << pad(r.tolerance, 34) << " | "
           << (r.pass ? "PASS" : "FAIL") << "\n";
    }
}

int acceptance_main(const std::string& suite, const AcceptanceOptions& opt, std::ostream& os) {
    std::vector<CriterionResult> rows;
    if (suite == "all") {
        for (const std::string& name : acceptance_suites()) run_acceptance_suite(name, opt, rows);
    } else if (!run_acceptance_suite(suite, opt, rows)) {
        os << "unknown suite '" << suite << "'\navailable:";
        for (const std::string& name : acceptance_suites()) os << ' ' << name;
        os << " all\n";
        return 2;
    }
    print_acceptance_table(os, rows);
    bool ok = true;
    for (const CriterionResult& r : rows) ok = ok && r.pass;
    return ok ? 0 : 1;
}

}  // namespace coalweb
