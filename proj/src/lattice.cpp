#include "coalweb/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coalweb/rng.hpp"

namespace coalweb {

void Window::validate() const {
    if (i_max < i_min) throw std::invalid_argument("window: i_max < i_min");
    if (!(t_max >= t_min)) throw std::invalid_argument("window: t_max < t_min");
    if (boundary == Boundary::periodic && extent() % 2 != 0)
        throw std::invalid_argument("window: periodic spatial extent must be even");
}

void Window::validate_discrete() const {
    validate();
    if (t_min != std::floor(t_min) || t_max != std::floor(t_max))
        throw std::invalid_argument("window: discrete-time bounds must be integers");
}

std::int64_t ArrowField::row_first_column(std::int64_t j) const {
    int want = (orient_ == Orientation::forward) ? 0 : 1;
    std::int64_t i0 = win_.i_min;
    if (((i0 + j) & 1) != want) ++i0;
    return i0;
}

std::int64_t ArrowField::row_cells(std::int64_t j) const {
    std::int64_t i0 = row_first_column(j);
    if (i0 > win_.i_max) return 0;
    return (win_.i_max - i0) / 2 + 1;
}

std::int64_t ArrowField::dense_cells() const {
    std::int64_t total = 0;
    for (std::int64_t j = win_.j_min(); j <= win_.j_max(); ++j) total += row_cells(j);
    return total;
}

ArrowField::ArrowField(Window w, std::uint64_t seed) : win_(w), seed_(seed) {
    win_.validate_discrete();
}

ArrowField::ArrowField(Window w, std::vector<std::int8_t> arrows)
    : win_(w), dense_(true), table_(std::move(arrows)) {
    win_.validate_discrete();
    std::int64_t need = dense_cells();
    if (need > kDenseCellBudget)
        throw ResourceError("dense arrow field exceeds the cell budget");
    if (static_cast<std::int64_t>(table_.size()) != need)
        throw std::invalid_argument("dense arrow field: wrong table size");
    for (std::int8_t a : table_)
        if (a != 1 && a != -1) throw std::invalid_argument("dense arrow field: arrows must be +-1");
    row_offset_.reserve(static_cast<std::size_t>(win_.rows()));
    std::int64_t off = 0;
    for (std::int64_t j = win_.j_min(); j <= win_.j_max(); ++j) {
        row_offset_.push_back(off);
        off += row_cells(j);
    }
}

int ArrowField::raw_arrow(std::int64_t i, std::int64_t j) const {
    if (base_) {
        // Dual view: reverse of the base arrow one row against our step
        // direction (below for backward duals, above for forward ones).
        std::int64_t jb = (orient_ == Orientation::backward) ? j - 1 : j + 1;
        return -base_->arrow(i, jb);
    }
    if (!dense_) return cell_coin(seed_, i, j);
    std::int64_t row = j - win_.j_min();
    return table_[static_cast<std::size_t>(row_offset_[static_cast<std::size_t>(row)] +
                                           (i - row_first_column(j)) / 2)];
}

int ArrowField::arrow(std::int64_t i, std::int64_t j) const {
    i = win_.resolve_column(i);
    int want = (orient_ == Orientation::forward) ? 0 : 1;
    if (((i + j) & 1) != want)
        throw std::invalid_argument("arrow: cell parity does not match field orientation");
    std::int64_t lo = win_.j_min(), hi = win_.j_max();
    if (base_) {
        if (orient_ == Orientation::backward)
            ++lo;
        else
            --hi;
    }
    if (j < lo || j > hi) throw std::invalid_argument("arrow: row outside window");
    return raw_arrow(i, j);
}

ArrowField sample_arrow_field(const Window& w, std::uint64_t seed) {
    return ArrowField(w, seed);
}

ArrowField dual_field(const ArrowField& f) {
    ArrowField d;
    d.win_ = f.win_;
    d.orient_ = (f.orientation() == ArrowField::Orientation::forward)
                    ? ArrowField::Orientation::backward
                    : ArrowField::Orientation::forward;
    d.base_ = std::make_shared<ArrowField>(f);
    return d;
}

Path discrete_path(const ArrowField& field, std::int64_t i0, std::int64_t j0) {
    const Window& w = field.window();
    if (field.orientation() != ArrowField::Orientation::forward)
        throw std::invalid_argument("discrete_path: needs a forward field");
    if (((i0 + j0) & 1) != 0) throw std::invalid_argument("discrete_path: start parity is odd");
    if (j0 < w.j_min() || j0 > w.j_max())
        throw std::invalid_argument("discrete_path: start row outside window");
    i0 = w.resolve_column(i0);

    Path p;
    std::int64_t i = i0;
    p.push(static_cast<double>(j0), static_cast<double>(i));
    for (std::int64_t j = j0; j < w.j_max(); ++j) {
        i = w.resolve_column(i + field.arrow(i, j));
        p.push(static_cast<double>(j + 1), static_cast<double>(i));
    }
    return p;
}

PathSet build_discrete_web(const ArrowField& field) {
    const Window& w = field.window();
    std::vector<std::pair<std::int64_t, std::int64_t>> starts;
    for (std::int64_t j = w.j_min(); j <= w.j_max(); ++j)
        for (std::int64_t i = w.i_min + (((w.i_min + j) & 1) != 0 ? 1 : 0); i <= w.i_max; i += 2)
            starts.emplace_back(i, j);
    return build_discrete_web(field, starts);
}

PathSet build_discrete_web(const ArrowField& field,
                           const std::vector<std::pair<std::int64_t, std::int64_t>>& starts) {
    const Window& w = field.window();
    // total breakpoints is sum of remaining rows per start
    std::int64_t total = 0;
    for (auto [i, j] : starts) total += w.j_max() - j + 1;
    if (total > ArrowField::kPathBreakpointBudget)
        throw ResourceError("discrete web would exceed the breakpoint budget");

    PathSet ps;
    ps.provenance = Provenance::discrete_web;
    ps.paths.reserve(starts.size());
    for (auto [i, j] : starts) ps.paths.push_back(discrete_path(field, i, j));
    return ps;
}

PathSet build_dual_web(const ArrowField& dual,
                       const std::vector<std::pair<std::int64_t, std::int64_t>>& starts) {
    if (dual.orientation() != ArrowField::Orientation::backward)
        throw std::invalid_argument("build_dual_web: needs a backward field");
    const Window& w = dual.window();
    PathSet ps;
    ps.provenance = Provenance::dual_web;
    ps.paths.reserve(starts.size());
    for (auto [i0, j0] : starts) {
        if (((i0 + j0) & 1) != 1)
            throw std::invalid_argument("build_dual_web: start parity is even");
        if (j0 < w.j_min() || j0 > w.j_max())
            throw std::invalid_argument("build_dual_web: start row outside window");
        std::int64_t i = w.resolve_column(i0);
        // walk down, then record breakpoints in ascending time
        std::vector<double> rev_x;
        rev_x.push_back(static_cast<double>(i));
        for (std::int64_t j = j0; j > w.j_min(); --j) {
            i = w.resolve_column(i + dual.arrow(i, j));
            rev_x.push_back(static_cast<double>(i));
        }
        Path p;
        for (std::int64_t k = static_cast<std::int64_t>(rev_x.size()) - 1; k >= 0; --k)
            p.push(static_cast<double>(j0 - k), rev_x[static_cast<std::size_t>(k)]);
        ps.paths.push_back(std::move(p));
    }
    return ps;
}

std::int64_t ClockField::column_index(std::int64_t i) const {
    return i - window.i_min;
}

std::int64_t ClockField::first_event_after(std::int64_t i, double t) const {
    const auto& ts = times[static_cast<std::size_t>(column_index(i))];
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    if (it == ts.end()) return -1;
    return it - ts.begin();
}

ClockField sample_poisson_clocks(const Window& w, std::uint64_t seed) {
    w.validate();
    std::int64_t ncols = w.extent();
    if (ncols * std::max(1.0, w.t_max - w.t_min) > ArrowField::kDenseCellBudget)
        throw ResourceError("clock field exceeds the event budget");

    ClockField cf;
    cf.window = w;
    cf.times.resize(static_cast<std::size_t>(ncols));
    cf.signs.resize(static_cast<std::size_t>(ncols));
    for (std::int64_t c = 0; c < ncols; ++c) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
        double t = w.t_min;
        auto& ts = cf.times[static_cast<std::size_t>(c)];
        auto& sg = cf.signs[static_cast<std::size_t>(c)];
        while (true) {
            double gap;
            do {
                gap = rng.next_exponential();
            } while (!(gap > 0.0));
            t += gap;
            if (t > w.t_max) break;
            ts.push_back(t);
            sg.push_back(static_cast<std::int8_t>(rng.next_sign()));
        }
    }
    // Exact collisions across adjacent columns would make "first event
    // after" ambiguous; nudge the later column's copy by one ulp.
    for (std::int64_t c = 0; c + 1 < ncols; ++c) {
        auto& a = cf.times[static_cast<std::size_t>(c)];
        auto& b = cf.times[static_cast<std::size_t>(c + 1)];
        for (double& tb : b) {
            while (std::binary_search(a.begin(), a.end(), tb))
                tb = std::nextafter(tb, std::numeric_limits<double>::infinity());
        }
        std::sort(b.begin(), b.end());
    }
    return cf;
}

std::vector<Path> continuous_path(const ClockField& clocks, std::int64_t y0, double s0,
                                  bool split_at_start) {
    const Window& w = clocks.window;
    if (y0 < w.i_min || y0 > w.i_max)
        throw std::invalid_argument("continuous_path: start column outside window");
    if (s0 < w.t_min || s0 > w.t_max)
        throw std::invalid_argument("continuous_path: start time outside window");

    // Follow the event chain from column `site` jumping at event index `k`.
    auto chain = [&](Path p, std::int64_t site, std::int64_t k) {
        while (true) {
            std::size_t ci = static_cast<std::size_t>(clocks.column_index(site));
            double tev = clocks.times[ci][static_cast<std::size_t>(k)];
            std::int64_t target = w.resolve_column(site + clocks.signs[ci][static_cast<std::size_t>(k)]);
            std::int64_t k2 = clocks.first_event_after(target, tev);
            if (k2 < 0) {
                // No anchor event left at the destination; close the segment
                // at the window top.  Horizon artifact, documented.
                if (w.t_max > tev) p.push(w.t_max, static_cast<double>(target));
                return p;
            }
            std::size_t ti = static_cast<std::size_t>(clocks.column_index(target));
            p.push(clocks.times[ti][static_cast<std::size_t>(k2)], static_cast<double>(target));
            site = target;
            k = k2;
        }
    };

    std::vector<Path> out;
    std::int64_t k_next = clocks.first_event_after(y0, s0);

    // s0 exactly on an event of this column?
    bool on_event = false;
    std::int64_t k_here = -1;
    {
        const auto& ts = clocks.times[static_cast<std::size_t>(clocks.column_index(y0))];
        auto it = std::lower_bound(ts.begin(), ts.end(), s0);
        if (it != ts.end() && *it == s0) {
            on_event = true;
            k_here = it - ts.begin();
        }
    }

    if (on_event && split_at_start) {
        Path immediate;
        immediate.push(s0, static_cast<double>(y0));
        out.push_back(chain(std::move(immediate), y0, k_here));
    }

    Path waiting;
    waiting.push(s0, static_cast<double>(y0));
    if (k_next < 0) {
        if (w.t_max > s0) waiting.push(w.t_max, static_cast<double>(y0));
        out.push_back(std::move(waiting));
    } else {
        double t1 = clocks.times[static_cast<std::size_t>(clocks.column_index(y0))]
                               [static_cast<std::size_t>(k_next)];
        if (t1 > s0) waiting.push(t1, static_cast<double>(y0));
        out.push_back(chain(std::move(waiting), y0, k_next));
    }
    return out;
}

PathSet build_continuous_web(const ClockField& clocks) {
    std::vector<std::pair<std::int64_t, double>> starts;
    for (std::int64_t i = clocks.window.i_min; i <= clocks.window.i_max; ++i)
        starts.emplace_back(i, clocks.window.t_min);
    return build_continuous_web(clocks, starts);
}

PathSet build_continuous_web(const ClockField& clocks,
                             const std::vector<std::pair<std::int64_t, double>>& starts) {
    PathSet ps;
    ps.provenance = Provenance::continuous_web;
    for (auto [i, s] : starts) {
        std::vector<Path> got = continuous_path(clocks, i, s, false);
        for (Path& p : got) ps.paths.push_back(std::move(p));
    }
    return ps;
}

PathSet rescale_web(const PathSet& web, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("rescale_web: delta must be positive");
    PathSet out = web;
    out.delta = web.delta * delta;
    for (Path& p : out.paths) {
        for (double& t : p.times) t *= delta * delta;
        for (double& x : p.xs) x *= delta;
    }
    return out;
}

}  // namespace coalweb
