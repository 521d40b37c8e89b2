#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "randfield/errors.hpp"

namespace randfield {

using Point = std::vector<double>;

inline double euclidean_distance(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return std::sqrt(s);
}

// Uniform discretization of [-tau_bar, T]: n_hist steps cover the delay
// history [-tau_bar, 0], n_main steps cover (0, T]. Grid point i lives at
// time (i - n_hist) * dt; there are n_hist + n_main + 1 points in total.
struct TimeGrid {
    double dt = 0.0;
    std::size_t n_hist = 0;
    std::size_t n_main = 0;

    std::size_t total_points() const { return n_hist + n_main + 1; }
    std::size_t index_of_time0() const { return n_hist; }
    double time(std::size_t i) const {
        return (static_cast<double>(i) - static_cast<double>(n_hist)) * dt;
    }
    // Nearest grid index for a time in [-n_hist*dt, n_main*dt].
    std::size_t index_of(double t) const {
        const double raw = t / dt + static_cast<double>(n_hist);
        long idx = std::lround(raw);
        if (idx < 0) idx = 0;
        const long last = static_cast<long>(total_points()) - 1;
        if (idx > last) idx = last;
        return static_cast<std::size_t>(idx);
    }
    // Grids parsed back from text carry rounding in dt; equality means the
    // same discretization, not bitwise-identical steps.
    bool operator==(const TimeGrid& o) const {
        return std::abs(dt - o.dt) <= 1e-9 * std::max(dt, o.dt) && n_hist == o.n_hist &&
               n_main == o.n_main;
    }
};

inline TimeGrid make_grid(double dt, double tau_bar, double horizon_T) {
    if (dt <= 0.0) throw ConfigError("grid: dt must be > 0");
    TimeGrid g;
    g.dt = dt;
    g.n_hist = static_cast<std::size_t>(std::ceil(tau_bar / dt - 1e-9));
    g.n_main = static_cast<std::size_t>(std::ceil(horizon_T / dt - 1e-9));
    if (g.n_main == 0) throw ConfigError("grid: horizon shorter than one step");
    return g;
}

// One grid-sampled trajectory on [-tau_bar, T] paired with its location.
struct PathSample {
    Point r;
    std::vector<double> values;  // total_points() entries
};

// Uniform-weight collection of path samples: an empirical measure on
// path space x domain (a finite network draw or a mean-field iterate).
struct Ensemble {
    std::vector<PathSample> members;
    TimeGrid grid;

    std::size_t size() const { return members.size(); }
};

}  // namespace randfield
