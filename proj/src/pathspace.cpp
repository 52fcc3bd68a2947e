#include "coalweb/pathspace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "coalweb/spacetime.hpp"

namespace coalweb {

namespace {

double phi_of(const Path& p, double t) {
    return compactify({eval_path(p, t), t}).phi;
}

// Collect the finite breakpoint times of a path.
void finite_knots(const Path& p, std::vector<double>& out) {
    for (double t : p.times)
        if (std::isfinite(t)) out.push_back(t);
}

double sech2(double x) {
    if (std::fabs(x) > 350.0) return 0.0;
    double c = std::cosh(x);
    return 1.0 / (c * c);
}

// Local slope of the held extension on the open interval (u, v), assuming no
// breakpoint strictly inside.
double local_slope(const Path& p, double u, double v) {
    const auto& ts = p.times;
    if (v <= ts.front() || u >= ts.back()) return 0.0;  // held tails
    auto it = std::upper_bound(ts.begin(), ts.end(), u);
    std::size_t hi = static_cast<std::size_t>(it - ts.begin());
    if (hi == 0 || hi >= ts.size()) return 0.0;
    std::size_t lo = hi - 1;
    if (std::isinf(ts[lo]) || std::isinf(ts[hi])) return 0.0;
    return (p.xs[hi] - p.xs[lo]) / (ts[hi] - ts[lo]);
}

// Bound on |d/dt phi(f(t), t)| over [u, v] for a piece with slope m:
//   |phi'| <= sech^2(f) |m| / (1+|t|) + |tanh f| / (1+|t|)^2.
double phi_deriv_bound(const Path& p, double u, double v, double m) {
    double xu = eval_path(p, u), xv = eval_path(p, v);
    double s = (xu * xv < 0.0) ? 1.0 : sech2(std::min(std::fabs(xu), std::fabs(xv)));
    double w = (u <= 0.0 && v >= 0.0) ? 1.0 : 1.0 / (1.0 + std::min(std::fabs(u), std::fabs(v)));
    return s * std::fabs(m) * w + w * w;
}

}  // namespace

PathDistResult path_dist_detailed(const Path& a, const Path& b, double psi_step) {
    validate_path(a);
    validate_path(b);
    if (!(psi_step > 0.0)) throw std::invalid_argument("path_dist: psi_step must be positive");

    PathDistResult r;
    r.value = std::fabs(std::tanh(a.t0()) - std::tanh(b.t0()));

    std::vector<double> knots;
    finite_knots(a, knots);
    finite_knots(b, knots);

    if (knots.empty()) {
        // Both paths are constant on the whole axis; the weight 1/(1+|t|)
        // peaks at t = 0.
        double d = std::fabs(std::tanh(a.xs.front()) - std::tanh(b.xs.front()));
        r.value = std::max(r.value, d);
        return r;
    }

    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    double t_left = knots.front();
    double t_right = knots.back();
    if (t_left > 0.0) knots.insert(knots.begin(), 0.0), t_left = 0.0;
    if (t_right < 0.0) knots.push_back(0.0), t_right = 0.0;

    // Constant tails: on (-inf, t_left] both paths sit at their initial
    // values, so the difference is |dtanh| / (1 + |t|) and the sup is at the
    // endpoint closest to zero.  Same on [t_right, +inf).
    {
        double dl = std::fabs(std::tanh(eval_path(a, t_left)) - std::tanh(eval_path(b, t_left)));
        // min |t| over the ray (-inf, t_left] is 0 when the ray reaches 0
        double wl = (t_left >= 0.0) ? 1.0 : 1.0 - t_left;
        r.value = std::max(r.value, dl / wl);

        double dr = std::fabs(std::tanh(eval_path(a, t_right)) - std::tanh(eval_path(b, t_right)));
        double wr = (t_right <= 0.0) ? 1.0 : 1.0 + t_right;  // min |t| on [t_right, inf)
        r.value = std::max(r.value, dr / wr);
    }

    // Interior: subdivide each knot interval finely enough that both the psi
    // spacing and the phi derivative bound keep the per-step error near
    // psi_step.  Points are placed uniformly in t; uniform-in-psi placement
    // degenerates once tanh saturates to 1 in double precision.
    double max_err = 0.0;
    double prev_phi_gap = std::fabs(phi_of(a, knots.front()) - phi_of(b, knots.front()));
    r.value = std::max(r.value, prev_phi_gap);
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        double u = knots[k], v = knots[k + 1];
        double psi_u = std::tanh(u), psi_v = std::tanh(v);
        double ma = local_slope(a, u, v);
        double mb = local_slope(b, u, v);
        double lip0 = phi_deriv_bound(a, u, v, ma) + phi_deriv_bound(b, u, v, mb);
        int n_sub = static_cast<int>(std::ceil((psi_v - psi_u) / psi_step));
        int n_lip = static_cast<int>(std::ceil(0.5 * (v - u) * lip0 / psi_step));
        n_sub = std::max({n_sub, n_lip, 1});
        n_sub = std::min(n_sub, 200000);
        double prev_t = u;
        for (int s = 1; s <= n_sub; ++s) {
            double t = (s == n_sub) ? v : u + (v - u) * (static_cast<double>(s) / n_sub);
            double gap = std::fabs(phi_of(a, t) - phi_of(b, t));
            r.value = std::max(r.value, gap);
            double lip = phi_deriv_bound(a, prev_t, t, ma) + phi_deriv_bound(b, prev_t, t, mb);
            max_err = std::max(max_err, 0.5 * (t - prev_t) * lip);
            prev_t = t;
        }
    }
    r.refine_error = max_err;
    return r;
}

HausdorffResult hausdorff_dist_detailed(const PathSet& a, const PathSet& b, double psi_step) {
    if (a.paths.empty() || b.paths.empty())
        throw std::invalid_argument("hausdorff_dist: empty path set");

    std::size_t na = a.paths.size(), nb = b.paths.size();
    std::vector<double> dist(na * nb), err(na * nb);
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = 0; j < nb; ++j) {
            PathDistResult d = path_dist_detailed(a.paths[i], b.paths[j], psi_step);
            dist[i * nb + j] = d.value;
            err[i * nb + j] = d.refine_error;
        }

    HausdorffResult h;
    for (std::size_t i = 0; i < na; ++i) {
        double best = dist[i * nb];
        double best_err = err[i * nb];
        for (std::size_t j = 1; j < nb; ++j)
            if (dist[i * nb + j] < best) best = dist[i * nb + j], best_err = err[i * nb + j];
        if (best > h.value) h.value = best;
        h.refine_error = std::max(h.refine_error, best_err);
    }
    for (std::size_t j = 0; j < nb; ++j) {
        double best = dist[j];
        double best_err = err[j];
        for (std::size_t i = 1; i < na; ++i)
            if (dist[i * nb + j] < best) best = dist[i * nb + j], best_err = err[i * nb + j];
        if (best > h.value) h.value = best;
        h.refine_error = std::max(h.refine_error, best_err);
    }
    return h;
}

}  // namespace coalweb
