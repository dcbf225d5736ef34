#pragma once

// Internal one-dimensional minimization helpers shared by the solvers.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace optrec::detail {

struct ScalarMin {
    double x = 0.0;
    double value = std::numeric_limits<double>::infinity();
};

inline double finite_or_inf(double v) {
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

/// Golden-section search for a minimum of f on [a, b].
inline ScalarMin golden_section(const std::function<double(double)>& f, double a, double b,
                                double xtol, int max_iter = 300) {
    constexpr double kInvPhi = 0.6180339887498948482;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = finite_or_inf(f(c));
    double fd = finite_or_inf(f(d));
    for (int it = 0; it < max_iter && (b - a) > xtol; ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = finite_or_inf(f(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = finite_or_inf(f(d));
        }
    }
    return fc <= fd ? ScalarMin{c, fc} : ScalarMin{d, fd};
}

/// Scans `grid_points` equally spaced points of [lo, hi] (endpoints included),
/// then refines around the best one by golden-section search. The grid
/// point is kept unless the refinement improves on it beyond rounding noise,
/// so minima sitting exactly on an endpoint are returned exactly.
inline ScalarMin grid_golden_minimize(const std::function<double(double)>& f, double lo, double hi,
                                      int grid_points, double xtol) {
    const int n = std::max(grid_points, 3);
    std::vector<double> xs(n);
    ScalarMin best;
    int best_k = 0;
    for (int k = 0; k < n; ++k) {
        xs[k] = k == n - 1 ? hi : lo + (hi - lo) * static_cast<double>(k) / (n - 1);
        const double v = finite_or_inf(f(xs[k]));
        if (v < best.value) {
            best = {xs[k], v};
            best_k = k;
        }
    }
    if (!std::isfinite(best.value)) return best;

    const double a = xs[std::max(best_k - 1, 0)];
    const double b = xs[std::min(best_k + 1, n - 1)];
    const ScalarMin refined = golden_section(f, a, b, xtol);
    const double noise = 1e-14 * std::max(std::abs(best.value), 1e-300);
    if (refined.value < best.value - noise) return refined;
    return best;
}

}  // namespace optrec::detail
