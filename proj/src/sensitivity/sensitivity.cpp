#include "heliotower/sensitivity.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <sstream>

#include "heliotower/error.hpp"

namespace heliotower::sensitivity {

namespace {

double checked(const Function& f, const Vector& x) {
    const double v = f(x);
    if (!std::isfinite(v)) throw InvalidArgument("objective is not finite at a stencil point");
    return v;
}

void check_steps(const Vector& x, const Vector& steps) {
    if (steps.size() != x.size()) throw InvalidArgument("step vector has the wrong size");
    for (Eigen::Index i = 0; i < steps.size(); ++i)
        if (!(steps[i] > 0.0)) throw InvalidArgument("finite-difference steps must be positive");
}

struct Probe {
    double first = 0.0;
    double second = 0.0;
    double scale = 0.0;  // largest |f| seen, for the roundoff floor
};

Probe probe(const Function& f, Vector x, Eigen::Index i, double h, double f0) {
    const double c = x[i];
    x[i] = c + h;
    const double up = checked(f, x);
    x[i] = c - h;
    const double down = checked(f, x);
    const double step = (c + h) - (c - h);
    Probe p;
    p.first = (up - down) / step;
    p.second = (up - 2.0 * f0 + down) / (h * h);
    p.scale = std::max({std::abs(up), std::abs(down), std::abs(f0)});
    return p;
}

}  // namespace

Vector fd_gradient(const Function& f, const Vector& x, const Vector& steps) {
    check_steps(x, steps);
    Vector g(x.size());
    Vector y = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        y[i] = x[i] + steps[i];
        const double up = checked(f, y);
        y[i] = x[i] - steps[i];
        const double down = checked(f, y);
        y[i] = x[i];
        g[i] = (up - down) / (2.0 * steps[i]);
    }
    return g;
}

Matrix fd_hessian(const Function& f, const Vector& x, const Vector& steps) {
    check_steps(x, steps);
    const Eigen::Index n = x.size();
    Matrix h(n, n);
    const double f0 = checked(f, x);
    Vector y = x;
    for (Eigen::Index i = 0; i < n; ++i) {
        y[i] = x[i] + steps[i];
        const double up = checked(f, y);
        y[i] = x[i] - steps[i];
        const double down = checked(f, y);
        y[i] = x[i];
        h(i, i) = (up - 2.0 * f0 + down) / (steps[i] * steps[i]);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            auto at = [&](double si, double sj) {
                Vector z = x;
                z[i] += si * steps[i];
                z[j] += sj * steps[j];
                return checked(f, z);
            };
            const double v = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * steps[i] * steps[j]);
            h(i, j) = v;
            h(j, i) = v;
        }
    }
    return 0.5 * (h + h.transpose());
}

StepChoice choose_steps(const Function& f, const Vector& x, const Vector& h_init, const StepOptions& options) {
    check_steps(x, h_init);
    if (options.trials < 1) throw InvalidArgument("choose_steps needs at least one trial");
    const double f0 = checked(f, x);
    const double fscale = std::max(std::abs(f0), DBL_MIN);

    StepChoice out;
    out.steps.resize(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        StepDiagnostic best;
        double best_score = INFINITY;
        bool found = false;
        for (int k = 0; k < options.trials; ++k) {
            const double h = std::ldexp(h_init[i], -k);
            const Probe a = probe(f, x, i, h, f0);
            const Probe b = probe(f, x, i, 1.15 * h, f0);
            const double roundoff = 64.0 * DBL_EPSILON * std::max(a.scale, b.scale) / (h * h);
            const double floor = options.curvature_floor * std::max(std::abs(f0), 1.0) + roundoff;

            StepDiagnostic d;
            d.step = h;
            d.second_derivative = a.second;
            d.first_deriv_residual = std::abs(a.first) * h / fscale;
            d.stability_ratio =
                std::abs(a.second - b.second) / std::max({std::abs(a.second), std::abs(b.second), floor});
            d.accepted = d.first_deriv_residual < options.first_deriv_tol && d.stability_ratio <= options.stability_tol;
            if (d.accepted) {
                best = d;
                found = true;
                break;
            }
            const double score = std::max(d.first_deriv_residual / options.first_deriv_tol,
                                          d.stability_ratio / options.stability_tol);
            if (score < best_score) {
                best_score = score;
                best = d;
            }
        }
        if (!found) {
            std::ostringstream msg;
            msg << "no stable step for variable " << i << ": best h=" << best.step
                << " first_deriv_residual=" << best.first_deriv_residual
                << " stability_ratio=" << best.stability_ratio;
            throw StepSelectionError(msg.str());
        }
        out.steps[i] = best.step;
        out.diagnostics.push_back(best);
    }
    return out;
}

Inverse invert_hessian(const Matrix& h) {
    if (h.rows() != h.cols() || h.rows() == 0) throw InvalidArgument("Hessian must be square and non-empty");
    const Matrix sym = 0.5 * (h + h.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    if (eig.info() != Eigen::Success) throw InvalidArgument("eigen-decomposition of the Hessian failed");
    const Vector& ev = eig.eigenvalues();  // ascending
    if (!(ev[0] > 0.0)) {
        // Report the variable dominating the offending eigenvector.
        Eigen::Index var = 0;
        eig.eigenvectors().col(0).cwiseAbs().maxCoeff(&var);
        std::ostringstream msg;
        msg << "Hessian is not positive definite: smallest eigenvalue " << ev[0]
            << ", eigenvector dominated by variable " << var;
        throw NotPositiveDefinite(msg.str(), ev[0], static_cast<int>(var));
    }
    Inverse out;
    const double top = ev[ev.size() - 1];
    out.condition = top / ev[0];
    if (out.condition > 1e12) {
        out.pseudo = true;
        Vector inv_ev(ev.size());
        for (Eigen::Index k = 0; k < ev.size(); ++k) inv_ev[k] = ev[k] * 1e12 > top ? 1.0 / ev[k] : 0.0;
        out.inverse = eig.eigenvectors() * inv_ev.asDiagonal() * eig.eigenvectors().transpose();
    } else {
        out.inverse = sym.llt().solve(Matrix::Identity(sym.rows(), sym.cols()));
    }
    out.inverse = 0.5 * (out.inverse + out.inverse.transpose());
    return out;
}

Vector uncertainties(const Inverse& inv, double epsilon, SigmaConvention convention) {
    if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
    const double factor = convention == SigmaConvention::Exact ? 2.0 : 1.0;
    Vector s(inv.inverse.rows());
    for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = std::sqrt(std::max(0.0, factor * inv.inverse(i, i) * epsilon));
    return s;
}

Vector uncertainties(const Matrix& h, double epsilon, SigmaConvention convention) {
    return uncertainties(invert_hessian(h), epsilon, convention);
}

Matrix correlations(const Inverse& inv) {
    const Matrix& m = inv.inverse;
    const Eigen::Index n = m.rows();
    Matrix rho = Matrix::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double d = std::sqrt(m(i, i) * m(j, j));
            rho(i, j) = d > 0.0 ? std::clamp(m(i, j) / d, -1.0, 1.0) : 0.0;
        }
    }
    return rho;
}

Matrix correlations(const Matrix& h) { return correlations(invert_hessian(h)); }

double sigma_inner(double sigma_j, double rho) {
    if (!(std::abs(rho) <= 1.0)) throw InvalidArgument("correlation must lie in [-1, 1]");
    return sigma_j * std::sqrt(1.0 - rho * rho);
}

HessianReport analyze(const Function& f, const Vector& x_star, const Vector& h_init, const AnalysisOptions& options) {
    HessianReport r;
    r.x_star = x_star;
    r.f_star = checked(f, x_star);
    const StepChoice steps = choose_steps(f, x_star, h_init, options.steps);
    r.steps = steps.steps;
    r.diagnostics = steps.diagnostics;
    r.hessian = fd_hessian(f, x_star, r.steps);
    const Inverse inv = invert_hessian(r.hessian);
    r.hessian_inverse = inv.inverse;
    r.condition = inv.condition;
    r.pseudo_inverse = inv.pseudo;
    r.epsilon = options.epsilon;
    r.sigma = uncertainties(inv, options.epsilon, options.convention);
    r.rho = correlations(inv);
    return r;
}

}  // namespace heliotower::sensitivity
