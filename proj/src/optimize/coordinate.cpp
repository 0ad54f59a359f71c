#include <algorithm>
#include <cmath>

#include "heliotower/optimize.hpp"
#include "tracker.hpp"

namespace heliotower {

namespace {

// Minimizes along coordinate i starting from (x, fx): probe +-h, expand the
// step 1, 2, 4, ... times h while the value keeps falling, then bisect the
// bracket down to h. Moves x only when the first probe gains more than tol.
double line_search(detail::Tracker& ev, Point& x, double fx, std::size_t i, double h, double tol) {
    const OptProblem& p = ev.problem();
    const double c = x[i];
    const double s_min = p.lower[i] - c;
    const double s_max = p.upper[i] - c;
    auto at = [&](double s) {
        Point y = x;
        y[i] = std::clamp(c + s, p.lower[i], p.upper[i]);
        return ev(y, static_cast<int>(i));
    };

    double dir = 0.0, sb = 0.0, fb = fx;
    if (s_max > 0.0) {
        const double s = std::min(h, s_max);
        const double f = at(s);
        if (f < fx - tol) dir = 1.0, sb = s, fb = f;
    }
    if (dir == 0.0 && s_min < 0.0) {
        const double s = std::max(-h, s_min);
        const double f = at(s);
        if (f < fx - tol) dir = -1.0, sb = s, fb = f;
    }
    if (dir == 0.0) return fx;

    const double limit = dir > 0.0 ? s_max : s_min;
    double sa = 0.0, sc = sb;
    double step = h;
    while (sb != limit) {
        step *= 2.0;
        const double s = dir > 0.0 ? std::min(sb + step, s_max) : std::max(sb - step, s_min);
        const double f = at(s);
        if (f < fb) {
            sa = sb;
            sb = s;
            fb = f;
            sc = s;
        } else {
            sc = s;
            break;
        }
    }

    while (std::max(std::abs(sb - sa), std::abs(sc - sb)) > h) {
        const bool left = std::abs(sb - sa) >= std::abs(sc - sb);
        const double m = left ? 0.5 * (sa + sb) : 0.5 * (sb + sc);
        if (m == sa || m == sb || m == sc) break;
        const double f = at(m);
        if (f < fb) {
            (left ? sc : sa) = sb;
            sb = m;
            fb = f;
        } else {
            (left ? sa : sc) = m;
        }
    }
    x[i] = std::clamp(c + sb, p.lower[i], p.upper[i]);
    return fb;
}

}  // namespace

OptResult coordinate_cycle(const OptProblem& problem, const CoordinateOptions& options) {
    detail::Tracker ev(problem, "coord");
    const std::size_t n = problem.dimension();
    Point h = options.h0;
    if (h.empty()) {
        h = problem.range();
        for (double& v : h) v *= 0.05;
    }
    if (h.size() != n) throw InvalidArgument("step vector has the wrong size");
    for (double v : h)
        if (!(v > 0.0)) throw InvalidArgument("coordinate steps must be positive");
    if (options.refinements < 0) throw InvalidArgument("refinements must be non-negative");

    Point x = problem.x0;
    try {
        double fx = ev(x);
        int halvings = 0;
        while (true) {
            bool moved = false;
            for (std::size_t i = 0; i < n; ++i) {
                const double before = x[i];
                fx = line_search(ev, x, fx, i, h[i], problem.tol_f);
                moved = moved || x[i] != before;
            }
            if (moved) continue;
            if (halvings == options.refinements) return ev.finish(Termination::Converged);
            for (double& v : h) v *= 0.5;
            ++halvings;
        }
    } catch (const detail::BudgetExhausted&) {
        return ev.finish(Termination::Budget);
    }
}

}  // namespace heliotower
