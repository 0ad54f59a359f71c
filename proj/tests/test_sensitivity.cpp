#include <cmath>
#include <random>

#include "doctest.h"
#include "heliotower/error.hpp"
#include "heliotower/sensitivity.hpp"

using namespace heliotower;
using namespace heliotower::sensitivity;
using doctest::Approx;

namespace {

// Frozen values from tests/oracles/oracles.py (constrained brute force).
constexpr double kSigmaX = 0.063245553203367597;       // x^2 + xy + y^2, eps = 0.003
constexpr double kSigmaInnerX = 0.054772255750516592;  // same, y frozen at 0

double q2(const Vector& v) { return v[0] * v[0] + v[0] * v[1] + v[1] * v[1]; }

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

Matrix mat2(double a, double b, double c, double d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

// Minimum over the remaining variables of f0 + (x - c)^T M (x - c) with x_i
// fixed at c_i + s, by solving the reduced linear system.
double constrained_min_rise(const Matrix& m, int i, double s) {
    const Eigen::Index n = m.rows();
    std::vector<Eigen::Index> rest;
    for (Eigen::Index k = 0; k < n; ++k)
        if (k != i) rest.push_back(k);
    Matrix mrr(rest.size(), rest.size());
    Vector b(rest.size());
    for (std::size_t a = 0; a < rest.size(); ++a) {
        b[static_cast<Eigen::Index>(a)] = -m(rest[a], i) * s;
        for (std::size_t c = 0; c < rest.size(); ++c)
            mrr(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c)) = m(rest[a], rest[c]);
    }
    const Vector y = mrr.ldlt().solve(b);
    Vector d = Vector::Zero(n);
    d[i] = s;
    for (std::size_t a = 0; a < rest.size(); ++a) d[rest[a]] = y[static_cast<Eigen::Index>(a)];
    return d.dot(m * d);
}

}  // namespace

TEST_CASE("fd_gradient") {
    const Function sq = [](const Vector& v) { return v[0] * v[0]; };
    CHECK(fd_gradient(sq, vec({1.0}), vec({1e-3}))[0] == Approx(2.0).epsilon(1e-12));
    const Function s = [](const Vector& v) { return std::sin(v[0]); };
    for (double h : {0.1, 0.01}) CHECK(fd_gradient(s, vec({0.0}), vec({h}))[0] == Approx(std::sin(h) / h).epsilon(1e-12));
    const Function c = [](const Vector&) { return 3.0; };
    CHECK(fd_gradient(c, vec({1, 2, 3}), vec({0.1, 0.1, 0.1})).isZero(0.0));
    CHECK_THROWS_AS(fd_gradient(c, vec({1}), vec({0})), InvalidArgument);
    const Function bad = [](const Vector&) { return NAN; };
    CHECK_THROWS_AS(fd_gradient(bad, vec({1}), vec({0.1})), InvalidArgument);
}

TEST_CASE("fd_hessian") {
    const Matrix h = fd_hessian(q2, vec({0, 0}), vec({1e-3, 1e-3}));
    CHECK((h - mat2(2, 1, 1, 2)).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const Function lin = [](const Vector& v) { return 3 * v[0] - 2 * v[1] + 1; };
    CHECK(fd_hessian(lin, vec({0.3, 0.7}), vec({1e-3, 1e-3})).cwiseAbs().maxCoeff() < 1e-8);
    // the cross stencil uses the (-,-) corner: an xy term alone is detected
    const Function xy = [](const Vector& v) { return v[0] * v[1]; };
    const Matrix hxy = fd_hessian(xy, vec({0.5, -0.5}), vec({1e-2, 1e-2}));
    CHECK(hxy(0, 1) == Approx(1.0).epsilon(1e-10));
    CHECK(hxy(0, 0) == Approx(0.0));
}

TEST_CASE("choose_steps") {
    const Function sq = [](const Vector& v) { return v[0] * v[0]; };
    // at 0 every candidate works, so the first (largest) is taken
    StepChoice c = choose_steps(sq, vec({0.0}), vec({0.1}));
    CHECK(c.steps[0] == 0.1);
    CHECK(c.diagnostics[0].accepted);
    CHECK(c.diagnostics[0].first_deriv_residual == 0.0);

    // off the minimum the slope never vanishes
    CHECK_THROWS_AS(choose_steps(sq, vec({1.0}), vec({0.1})), StepSelectionError);

    // quartic: f'' = 2h^2 from the stencil changes 32% per 1.15x until it
    // drops under the curvature floor
    const Function quart = [](const Vector& v) { return std::pow(v[0], 4) + 1.0; };
    c = choose_steps(quart, vec({0.0}), vec({0.1}));
    CHECK(c.diagnostics[0].stability_ratio <= 0.02);
    CHECK(c.diagnostics[0].first_deriv_residual < 1e-12);
    CHECK(c.steps[0] < 0.1);
    StepOptions strict;
    strict.curvature_floor = 0.0;
    strict.trials = 6;
    CHECK_THROWS_AS(choose_steps(quart, vec({0.0}), vec({0.1}), strict), StepSelectionError);

    // a true quadratic minimum has a residual at roundoff level
    const Function q = [](const Vector& v) { return 5.0 + 3.0 * (v[0] - 0.2) * (v[0] - 0.2); };
    c = choose_steps(q, vec({0.2}), vec({0.05}));
    CHECK(c.diagnostics[0].first_deriv_residual < 1e-14);
    CHECK(c.diagnostics[0].stability_ratio < 1e-8);
}

TEST_CASE("uncertainties") {
    const Matrix h = mat2(2, 1, 1, 2);
    const Vector s = uncertainties(h, 0.003);
    CHECK(s[0] == Approx(std::sqrt(4 * 0.003 / 3)).epsilon(1e-14));
    CHECK(s[0] == Approx(kSigmaX).epsilon(1e-12));
    CHECK(std::fabs(s[0] - kSigmaX) < 1e-6);
    // the defining condition: re-minimized rise equals eps
    CHECK(constrained_min_rise(h / 2, 0, s[0]) == Approx(0.003).epsilon(1e-12));

    const Vector d = uncertainties(mat2(2, 0, 0, 8), 0.01);
    CHECK(d[0] == Approx(0.1).epsilon(1e-14));
    CHECK(d[1] == Approx(0.05).epsilon(1e-14));

    const Vector s4 = uncertainties(h, 0.012);
    CHECK(s4[0] == Approx(2 * s[0]).epsilon(1e-14));
    CHECK(s4[1] == Approx(2 * s[1]).epsilon(1e-14));

    const Vector lit = uncertainties(h, 0.003, SigmaConvention::Literal);
    CHECK(lit[0] == Approx(s[0] / std::sqrt(2.0)).epsilon(1e-14));

    try {
        uncertainties(mat2(1, 2, 2, 1), 0.001);
        FAIL("expected NotPositiveDefinite");
    } catch (const NotPositiveDefinite& e) {
        CHECK(e.eigenvalue() == Approx(-1.0));
        CHECK(std::string(e.what()).find("-1") != std::string::npos);
    }
}

TEST_CASE("correlations") {
    const Matrix rho = correlations(mat2(2, 1, 1, 2));
    CHECK(rho(0, 1) == Approx(-0.5).epsilon(1e-14));
    CHECK(rho(0, 0) == 1.0);
    CHECK(correlations(mat2(2, 0, 0, 8)).isIdentity(0.0));

    std::mt19937_64 gen(8);
    std::normal_distribution<double> n(0, 1);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix a(5, 5);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) a(i, j) = n(gen);
        const Matrix h = a * a.transpose() + 0.1 * Matrix::Identity(5, 5);
        const Matrix r = correlations(h);
        CHECK(r.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
        // rescaling coordinates x -> D x maps H -> D^-1 H D^-1 and leaves rho
        const Vector scale = Vector::LinSpaced(5, 0.5, 7.0);
        const Matrix hs = scale.cwiseInverse().asDiagonal() * h * scale.cwiseInverse().asDiagonal();
        CHECK((correlations(hs) - r).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("sigma_inner") {
    CHECK(sigma_inner(0.3, 0.0) == 0.3);
    CHECK(sigma_inner(0.3, 1.0) == 0.0);
    CHECK(sigma_inner(0.3, -1.0) == 0.0);
    CHECK(sigma_inner(kSigmaX, -0.5) == Approx(kSigmaInnerX).epsilon(1e-12));
    CHECK_THROWS_AS(sigma_inner(0.3, 1.5), InvalidArgument);
}

TEST_CASE("analyze a random quadratic") {
    std::mt19937_64 gen(21);
    std::normal_distribution<double> n(0, 1);
    const int dim = 6;
    Matrix a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = n(gen);
    const Matrix m = a * a.transpose() / dim + 0.2 * Matrix::Identity(dim, dim);
    Vector c(dim);
    for (int i = 0; i < dim; ++i) c[i] = n(gen);
    const Function f = [&](const Vector& x) { return 2.0 + (x - c).dot(m * (x - c)); };
    const HessianReport r = analyze(f, c, Vector::Constant(dim, 0.05));
    CHECK((r.hessian - 2 * m).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(r.rho.diagonal().isOnes(1e-12));
    for (int i = 0; i < dim; ++i) {
        CHECK(r.sigma[i] > 0);
        CHECK(constrained_min_rise(m, i, r.sigma[i]) == Approx(0.001).epsilon(1e-9));
    }
    CHECK_FALSE(r.pseudo_inverse);
}

TEST_CASE("near-singular Hessian falls back to a pseudo-inverse") {
    Matrix h = mat2(1, 1, 1, 1 + 1e-14);
    const Inverse inv = invert_hessian(h);
    CHECK(inv.pseudo);
    CHECK(inv.condition > 1e12);
    CHECK(inv.inverse.allFinite());
}

TEST_CASE("wide and narrow minima") {
    const Function wide = [](const Vector& x) { return 1.18 + 0.00204 * std::pow(x[0] - 1.5, 2); };
    const Function narrow = [](const Vector& x) {
        return 1.18 + 0.173 * std::pow(x[0] - 1.03, 2) * std::pow(x[0] - 1.98, 2);
    };
    const HessianReport a = analyze(wide, vec({1.5}), vec({0.2}));
    const HessianReport b = analyze(narrow, vec({1.03}), vec({0.05}));
    // quadratic-model sigma against the oracle's exact 1-d values
    CHECK(a.sigma[0] == Approx(0.70014004201400404).epsilon(1e-6));
    CHECK(b.sigma[0] == Approx(std::sqrt(0.002 / (2 * 0.173 * 0.95 * 0.95))).epsilon(1e-4));
    CHECK(a.sigma[0] / b.sigma[0] > 5.0);
}
