#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "heliotower/optimize.hpp"
#include "tracker.hpp"

namespace heliotower {

namespace {

Termination run_seek(detail::Tracker& ev, const SeekOptions& options, RandomSource& rng) {
    const OptProblem& p = ev.problem();
    if (!(options.step_scale > 0.0)) throw InvalidArgument("step_scale must be positive");
    if (!(options.t_rel > 0.0)) throw InvalidArgument("t_rel must be positive");
    const Point range = p.range();
    Point x = p.x0;
    double e = ev(x);
    for (std::size_t k = 0; k < options.n_steps; ++k) {
        Point y = x;
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += options.step_scale * range[i] * rng.normal();
        y = p.clamp(std::move(y));
        const double e_new = ev(y);
        const double u = rng.uniform();
        if (u < acceptance_probability(e, e_new, options)) {
            x = std::move(y);
            e = e_new;
        }
    }
    return Termination::Steps;
}

// Central differences, one-sided where a central probe would leave the box.
Eigen::VectorXd gradient(detail::Tracker& ev, const Point& x, double fx, const Point& h) {
    const OptProblem& p = ev.problem();
    Eigen::VectorXd g(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        const int hint = static_cast<int>(i);
        Point a = x, b = x;
        const bool up = x[i] + h[i] <= p.upper[i];
        const bool down = x[i] - h[i] >= p.lower[i];
        double gi = 0.0;
        if (up && down) {
            a[i] += h[i];
            b[i] -= h[i];
            gi = (ev(a, hint) - ev(b, hint)) / (a[i] - b[i]);
        } else if (up) {
            a[i] += h[i];
            gi = (ev(a, hint) - fx) / (a[i] - x[i]);
        } else {
            b[i] -= h[i];
            gi = (fx - ev(b, hint)) / (x[i] - b[i]);
        }
        g[static_cast<Eigen::Index>(i)] = gi;
    }
    return g;
}

// BFGS on the inverse metric with projected Armijo backtracking. Variables
// held at a bound by the gradient are frozen for that iteration.
Termination run_qn(detail::Tracker& ev, Point x, double fx, const QuasiNewtonOptions& options) {
    const OptProblem& p = ev.problem();
    const std::size_t n = x.size();
    const auto N = static_cast<Eigen::Index>(n);
    const Point range = p.range();
    Point h = options.grad_steps;
    if (h.empty()) {
        h = range;
        for (double& v : h) v *= 1e-4;
    }
    if (h.size() != n) throw InvalidArgument("gradient step vector has the wrong size");

    Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(N, N);
    bool identity = true;
    Eigen::VectorXd g = gradient(ev, x, fx, h);
    auto& notes = ev.result().notes;

    while (true) {
        Eigen::VectorXd ge = g;
        for (std::size_t i = 0; i < n; ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            if ((x[i] <= p.lower[i] && g[k] > 0.0) || (x[i] >= p.upper[i] && g[k] < 0.0)) ge[k] = 0.0;
        }
        if (ge.lpNorm<Eigen::Infinity>() < options.grad_tol) return Termination::Converged;

        Eigen::VectorXd d = -hinv * ge;
        for (Eigen::Index k = 0; k < N; ++k)
            if (ge[k] == 0.0 && g[k] != 0.0) d[k] = 0.0;
        if (!(ge.dot(d) < 0.0)) {
            notes.push_back("metric reset: not a descent direction");
            hinv.setIdentity();
            identity = true;
            d = -ge;
        }

        // Cap the first trial step at a quarter of each range.
        double alpha = 1.0;
        for (Eigen::Index k = 0; k < N; ++k)
            if (d[k] != 0.0) alpha = std::min(alpha, 0.25 * range[static_cast<std::size_t>(k)] / std::abs(d[k]));

        bool accepted = false;
        Point xn;
        double fn = 0.0;
        for (int b = 0; b <= options.max_backtracks; ++b, alpha *= 0.5) {
            xn = x;
            for (std::size_t i = 0; i < n; ++i) xn[i] += alpha * d[static_cast<Eigen::Index>(i)];
            xn = p.clamp(std::move(xn));
            double slope = 0.0;
            for (std::size_t i = 0; i < n; ++i) slope += ge[static_cast<Eigen::Index>(i)] * (xn[i] - x[i]);
            if (xn == x) break;
            fn = ev(xn);
            if (fn <= fx + options.armijo * slope && fn <= fx) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (identity) return Termination::LineSearch;
            notes.push_back("metric reset: line search failed");
            hinv.setIdentity();
            identity = true;
            continue;
        }

        const Eigen::VectorXd gn = gradient(ev, xn, fn, h);
        Eigen::VectorXd s(N);
        for (std::size_t i = 0; i < n; ++i) s[static_cast<Eigen::Index>(i)] = xn[i] - x[i];
        const Eigen::VectorXd y = gn - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (identity) hinv *= sy / y.squaredNorm();
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(N, N);
            hinv = (I - rho * s * y.transpose()) * hinv * (I - rho * y * s.transpose()) + rho * s * s.transpose();
            identity = false;
        } else {
            notes.push_back("metric update skipped: curvature condition failed");
        }
        x = std::move(xn);
        fx = fn;
        g = gn;
    }
}

}  // namespace

double acceptance_probability(double e_old, double e_new, const SeekOptions& options) {
    if (std::isnan(e_new)) return 0.0;
    if (e_new <= e_old) return 1.0;
    if (!std::isfinite(e_old)) return 1.0;
    if (!(e_old > 0.0)) throw InvalidArgument("metropolis acceptance needs a positive objective");
    const double t = (options.literal ? 1.0 : options.t_rel) * e_old;
    return std::exp((e_old - e_new) / t);
}

OptResult metropolis_seek(const OptProblem& problem, const SeekOptions& options, std::uint64_t seed) {
    Rng rng = Rng::stream(seed, "seek");
    return metropolis_seek(problem, options, rng);
}

OptResult metropolis_seek(const OptProblem& problem, const SeekOptions& options, RandomSource& rng) {
    detail::Tracker ev(problem, "seek");
    try {
        return ev.finish(run_seek(ev, options, rng));
    } catch (const detail::BudgetExhausted&) {
        return ev.finish(Termination::Budget);
    }
}

OptResult quasi_newton_refine(const OptProblem& problem, const QuasiNewtonOptions& options) {
    detail::Tracker ev(problem, "quasi-newton");
    try {
        const double f0 = ev(problem.x0);
        return ev.finish(run_qn(ev, problem.x0, f0, options));
    } catch (const detail::BudgetExhausted&) {
        return ev.finish(Termination::Budget);
    }
}

OptResult seek_refine(const OptProblem& problem, const SeekOptions& seek, const QuasiNewtonOptions& qn,
                      std::uint64_t seed) {
    detail::Tracker ev(problem, "seek-refine");
    Rng rng = Rng::stream(seed, "seek");
    try {
        run_seek(ev, seek, rng);
        const Point start = ev.result().x_best;
        return ev.finish(run_qn(ev, start, ev.result().f_best, qn));
    } catch (const detail::BudgetExhausted&) {
        return ev.finish(Termination::Budget);
    }
}

}  // namespace heliotower
