#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "coalweb/path.hpp"

namespace coalweb {

// Walks exiting the spatial window in open mode raise this; callers are
// expected to size their buffer (default: the time horizon, the reach of a
// unit-slope path).
struct TruncationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense-field materialization larger than the memory budget raises this.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Boundary { open_buffer, periodic };

// Lattice window: columns i_min..i_max inclusive, time span [t_min, t_max].
// Discrete-time ops interpret t_min/t_max as integer rows.  In periodic mode
// the spatial extent (number of columns) must be even so wrapping preserves
// the parity of i + j.
struct Window {
    std::int64_t i_min = 0;
    std::int64_t i_max = 0;
    double t_min = 0.0;
    double t_max = 0.0;
    Boundary boundary = Boundary::open_buffer;

    std::int64_t extent() const { return i_max - i_min + 1; }
    std::int64_t j_min() const { return static_cast<std::int64_t>(t_min); }
    std::int64_t j_max() const { return static_cast<std::int64_t>(t_max); }
    std::int64_t rows() const { return j_max() - j_min() + 1; }

    void validate() const;
    void validate_discrete() const;  // also requires integral t bounds

    // Wrap (periodic) or fail (open) a column index.
    std::int64_t resolve_column(std::int64_t i) const {
        if (i >= i_min && i <= i_max) return i;
        if (boundary == Boundary::periodic) {
            std::int64_t w = extent();
            std::int64_t r = (i - i_min) % w;
            if (r < 0) r += w;
            return i_min + r;
        }
        throw TruncationError("walk left the spatial window (open mode, buffer too small)");
    }
};

// One +-1 arrow per even-parity cell (forward orientation) or per odd-parity
// cell (backward orientation, produced by dual_field).  Hashed fields derive
// every arrow from (seed, i, j) and need no storage; dense fields hold an
// explicit table and serve exhaustive enumeration and hand-built cases.
class ArrowField {
public:
    enum class Orientation { forward, backward };

    // Hashed field over the window (deterministic in seed).
    ArrowField(Window w, std::uint64_t seed);

    // Dense field; `arrows` lists cells row by row (j ascending), each row's
    // cells of the matching parity with i ascending.
    ArrowField(Window w, std::vector<std::int8_t> arrows);

    // Arrow at a cell.  Forward fields step (i,j) -> (i+arrow, j+1) and
    // require (i + j) even; backward fields step (i,j) -> (i+arrow, j-1) and
    // require (i + j) odd.  Columns are wrapped in periodic mode.
    int arrow(std::int64_t i, std::int64_t j) const;

    const Window& window() const { return win_; }
    Orientation orientation() const { return orient_; }
    bool is_dense() const { return dense_; }
    std::uint64_t seed() const { return seed_; }

    // First arrow-carrying column of a row, and the row's cell count.
    std::int64_t row_first_column(std::int64_t j) const;
    std::int64_t row_cells(std::int64_t j) const;
    // Number of arrow-carrying cells a dense field of this window stores.
    std::int64_t dense_cells() const;

    static constexpr std::int64_t kDenseCellBudget = std::int64_t(1) << 28;
    static constexpr std::int64_t kPathBreakpointBudget = std::int64_t(1) << 25;

    friend ArrowField dual_field(const ArrowField& f);

private:
    ArrowField() = default;

    Window win_;
    Orientation orient_ = Orientation::forward;
    bool dense_ = false;
    std::uint64_t seed_ = 0;
    std::vector<std::int8_t> table_;
    std::vector<std::int64_t> row_offset_;    // dense mode: table offset per row
    std::shared_ptr<const ArrowField> base_;  // set for dual views

    int raw_arrow(std::int64_t i, std::int64_t j) const;
};

// Hashed field sampler (the usual entry point).
ArrowField sample_arrow_field(const Window& w, std::uint64_t seed);

// Backward field forced by non-crossing: the dual arrow at an odd cell
// (i, j) is the reverse of the forward arrow at (i, j-1), and vice versa.
// Applying it twice reproduces the original arrows on the interior rows.
ArrowField dual_field(const ArrowField& f);

// Trajectory of the walk started at even cell (i0, j0), followed to the top
// of the window (unit-slope segments, one breakpoint per row).
Path discrete_path(const ArrowField& field, std::int64_t i0, std::int64_t j0);

// Paths from every even cell in the window, or from the given (i, j) starts.
PathSet build_discrete_web(const ArrowField& field);
PathSet build_discrete_web(const ArrowField& field,
                           const std::vector<std::pair<std::int64_t, std::int64_t>>& starts);

// Backward paths of a dual (backward-oriented) field, one per odd start
// cell, followed down to the bottom of the window.  Breakpoint times are
// ascending (path "starts" at the bottom row it reaches), matching the Path
// convention; provenance is dual_web.
PathSet build_dual_web(const ArrowField& dual,
                       const std::vector<std::pair<std::int64_t, std::int64_t>>& starts);

// Rate-one event clocks, one list per column; each event carries a +-1 jump
// sign.  Exact time collisions between adjacent columns are displaced by one
// ulp so "first event after" is always unambiguous.
struct ClockField {
    Window window;
    std::vector<std::vector<double>> times;  // per column, ascending
    std::vector<std::vector<std::int8_t>> signs;

    // Index of the first event at column i with time > t, or -1.
    std::int64_t first_event_after(std::int64_t i, double t) const;
    std::int64_t column_index(std::int64_t i) const;
};

ClockField sample_poisson_clocks(const Window& w, std::uint64_t seed);

// Continuous-time trajectory from (y0, s0): constant until the site's first
// event after s0, then a chain of linear segments, each ending at the first
// event of the destination column after the segment's start event.  When s0
// lands exactly on an event and `split_at_start` is set, both conventions
// are returned (jump immediately / wait for the next event).
std::vector<Path> continuous_path(const ClockField& clocks, std::int64_t y0, double s0,
                                  bool split_at_start = false);

PathSet build_continuous_web(const ClockField& clocks);
PathSet build_continuous_web(const ClockField& clocks,
                             const std::vector<std::pair<std::int64_t, double>>& starts);

// Diffusive rescale (x, t) -> (delta x, delta^2 t) applied to every
// breakpoint; the set's delta tag is multiplied accordingly.
PathSet rescale_web(const PathSet& web, double delta);

}  // namespace coalweb
