#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"
#include "heliotower/error.hpp"
#include "heliotower/optimize.hpp"
#include "heliotower/sensitivity.hpp"

using namespace heliotower;
using doctest::Approx;

namespace {

double rosenbrock(const Point& x) { return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2); }

double double_well(double x) { return std::pow(x * x - 1, 2) + 0.3 * x + 1.0; }

OptProblem box(std::function<double(const Point&)> f, Point lo, Point hi, Point x0, std::size_t budget = 20000) {
    OptProblem p;
    p.eval = [f = std::move(f)](const Point& x, int) { return f(x); };
    p.lower = std::move(lo);
    p.upper = std::move(hi);
    p.x0 = std::move(x0);
    p.budget = budget;
    return p;
}

// Wraps an objective so every evaluated point is checked against the box.
OptProblem audited(OptProblem p, bool& violated) {
    auto inner = p.eval;
    p.eval = [inner, lo = p.lower, hi = p.upper, &violated](const Point& x, int c) {
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] < lo[i] || x[i] > hi[i]) violated = true;
        return inner(x, c);
    };
    return p;
}

void check_trace(const OptResult& r) {
    REQUIRE_FALSE(r.trace.empty());
    double best = std::numeric_limits<double>::infinity();
    double last = best;
    for (const TracePoint& t : r.trace) {
        best = std::min(best, t.f);
        CHECK(t.best == best);
        CHECK(t.best <= last);
        last = t.best;
    }
    CHECK(r.f_best == best);
    CHECK(r.n_evals == r.trace.size());
}

struct Quadratic11 {
    Eigen::MatrixXd m;
    Eigen::VectorXd c;

    explicit Quadratic11(std::uint64_t seed) {
        std::mt19937_64 gen(seed);
        std::normal_distribution<double> n(0, 1);
        Eigen::MatrixXd a(11, 11);
        for (int i = 0; i < 11; ++i)
            for (int j = 0; j < 11; ++j) a(i, j) = n(gen);
        m = a * a.transpose() / 11.0 + Eigen::MatrixXd::Identity(11, 11);
        c.resize(11);
        for (int i = 0; i < 11; ++i) c(i) = n(gen);
    }

    double operator()(const Point& x) const {
        const Eigen::Map<const Eigen::VectorXd> v(x.data(), 11);
        return 0.5 * v.dot(m * v) - c.dot(v) + 10.0;
    }
};

}  // namespace

TEST_CASE("OptProblem validation") {
    OptProblem p = box(rosenbrock, {-2, -2}, {2, 2}, {0, 0});
    CHECK_NOTHROW(p.validate());
    p.x0 = {3, 0};
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p.x0 = {0, 0};
    p.upper = {2, -2};
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p.upper = {2, 2};
    p.budget = 0;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

TEST_CASE("coordinate cycle: separable quadratic") {
    const Point c{0.3, -1.7, 2.2, 0.05};
    auto f = [c](const Point& x) {
        double s = 0;
        for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - c[i]) * (x[i] - c[i]);
        return s;
    };
    bool violated = false;
    const OptProblem p = audited(box(f, Point(4, -5), Point(4, 5), Point(4, 4.0)), violated);
    CoordinateOptions opt;
    opt.h0 = Point(4, 0.5);
    opt.refinements = 6;
    const OptResult r = coordinate_cycle(p, opt);
    const double h_final = 0.5 / 64;
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::fabs(r.x_best[i] - c[i]) <= h_final);
    CHECK(r.termination == Termination::Converged);
    CHECK_FALSE(violated);
    check_trace(r);
}

TEST_CASE("coordinate cycle: Rosenbrock") {
    bool violated = false;
    const OptProblem p = audited(box(rosenbrock, {-2, -2}, {2, 2}, {-1.2, 1}), violated);
    CoordinateOptions opt;
    opt.h0 = {0.03, 0.03};
    opt.refinements = 10;
    const OptResult r = coordinate_cycle(p, opt);
    // axis steps crawl along the curved valley; the value still gets close
    CHECK(r.f_best < 1e-3);
    CHECK(std::fabs(r.x_best[0] - 1) < 5e-2);
    CHECK(std::fabs(r.x_best[1] - 1) < 5e-2);
    CHECK_FALSE(violated);
    check_trace(r);
}

TEST_CASE("coordinate cycle: coupled quadratic zig-zags to the grid minimum") {
    // f = (x - 1, y + 0.5) M (x - 1, y + 0.5)^T with M = [[2, 1], [1, 2]]
    auto f = [](const Point& v) {
        const double x = v[0] - 1, y = v[1] + 0.5;
        return 2 * x * x + 2 * x * y + 2 * y * y;
    };
    const OptProblem p = box(f, {-3, -3}, {3, 3}, {-2, 2});
    CoordinateOptions opt;
    opt.h0 = {0.1, 0.1};
    opt.refinements = 8;
    const OptResult r = coordinate_cycle(p, opt);
    check_trace(r);

    // dense grid oracle
    double best = std::numeric_limits<double>::infinity();
    Point arg(2);
    for (int i = 0; i <= 1200; ++i)
        for (int j = 0; j <= 1200; ++j) {
            const Point v{-3 + 6.0 * i / 1200, -3 + 6.0 * j / 1200};
            const double fv = f(v);
            if (fv < best) {
                best = fv;
                arg = v;
            }
        }
    CHECK(std::fabs(r.x_best[0] - arg[0]) < 0.01);
    CHECK(std::fabs(r.x_best[1] - arg[1]) < 0.01);
    CHECK(r.f_best <= best + 1e-4);
}

TEST_CASE("coordinate cycle passes the changed variable") {
    std::vector<int> hints;
    OptProblem p = box([](const Point& x) { return x[0] * x[0] + x[1] * x[1]; }, {-1, -1}, {1, 1}, {0.5, 0.5});
    p.eval = [&hints](const Point& x, int changed) {
        hints.push_back(changed);
        return x[0] * x[0] + x[1] * x[1];
    };
    coordinate_cycle(p);
    CHECK(hints.front() == -1);
    CHECK(std::count(hints.begin(), hints.end(), 0) > 0);
    CHECK(std::count(hints.begin(), hints.end(), 1) > 0);
}

TEST_CASE("budget exhaustion keeps the best point") {
    const OptProblem p = box(rosenbrock, {-2, -2}, {2, 2}, {-1.2, 1}, 25);
    const OptResult r = coordinate_cycle(p);
    CHECK(r.termination == Termination::Budget);
    CHECK(r.n_evals == 25);
    check_trace(r);
    const OptResult g = genetic_run(p, GAConfig{}, 3);
    CHECK(g.termination == Termination::Budget);
    CHECK(g.n_evals <= 25);
    const OptResult s = seek_refine(p, SeekOptions{}, QuasiNewtonOptions{}, 3);
    CHECK(s.termination == Termination::Budget);
    CHECK(s.n_evals == 25);
}

TEST_CASE("Metropolis acceptance") {
    const SeekOptions opt;
    CHECK(acceptance_probability(1.0, 0.9, opt) == 1.0);
    CHECK(acceptance_probability(1.0, 1.0, opt) == 1.0);
    CHECK(acceptance_probability(2.0, 2.2, opt) == Approx(std::exp(-0.2 / (0.1 * 2.0))));
    SeekOptions literal;
    literal.literal = true;
    CHECK(acceptance_probability(2.0, 2.2, literal) == Approx(std::exp(-0.2 / 2.0)));
    CHECK(acceptance_probability(1.0, std::numeric_limits<double>::quiet_NaN(), opt) == 0.0);
    CHECK(acceptance_probability(std::numeric_limits<double>::infinity(), 5.0, opt) == 1.0);
    CHECK_THROWS_AS(acceptance_probability(-1.0, 0.5, opt), InvalidArgument);
}

TEST_CASE("Metropolis walker crosses a barrier a greedy walker does not") {
    const OptProblem p = box([](const Point& x) { return double_well(x[0]); }, {-2}, {2}, {1.0}, 400);
    SeekOptions warm;
    warm.n_steps = 300;
    SeekOptions greedy = warm;
    greedy.t_rel = 1e-12;
    int crossed = 0, greedy_crossed = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        if (metropolis_seek(p, warm, seed).x_best[0] < 0) ++crossed;
        if (metropolis_seek(p, greedy, seed).x_best[0] < 0) ++greedy_crossed;
    }
    CHECK(crossed > 0);
    CHECK(greedy_crossed == 0);
}

TEST_CASE("Metropolis search is reproducible and bounded") {
    bool violated = false;
    const OptProblem p = audited(box(rosenbrock, {-2, -2}, {2, 2}, {-1.2, 1}, 1000), violated);
    SeekOptions opt;
    opt.step_scale = 0.3;
    const OptResult a = metropolis_seek(p, opt, 42);
    const OptResult b = metropolis_seek(p, opt, 42);
    CHECK(a.x_best == b.x_best);
    CHECK(a.f_best == b.f_best);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) CHECK(a.trace[i].x == b.trace[i].x);
    CHECK(a.termination == Termination::Steps);
    CHECK_FALSE(violated);
    check_trace(a);

    ScriptedRandom rng({0.0}, {0.1, -0.1});
    SeekOptions one;
    one.n_steps = 1;
    const OptResult s = metropolis_seek(box(rosenbrock, {-2, -2}, {2, 2}, {0, 0}, 100), one, rng);
    CHECK(s.trace.size() == 2);
    CHECK(s.trace[1].x[0] == Approx(0.1 * 0.02 * 4));
    CHECK(s.trace[1].x[1] == Approx(-0.1 * 0.02 * 4));
}

TEST_CASE("quasi-Newton: 11-d convex quadratic") {
    const Quadratic11 q(11);
    const Eigen::VectorXd x_star = q.m.ldlt().solve(q.c);
    const double f_star = q(Point(x_star.data(), x_star.data() + 11));
    const OptProblem p = box(q, Point(11, -20), Point(11, 20), Point(11, 0.0));
    QuasiNewtonOptions opt;
    opt.grad_steps = Point(11, 1e-4);
    opt.grad_tol = 1e-7;
    const OptResult r = quasi_newton_refine(p, opt);
    CHECK(r.f_best - f_star < 1e-8);
    CHECK(r.termination == Termination::Converged);
    check_trace(r);
    const sensitivity::Vector g = sensitivity::fd_gradient(
        [&](const sensitivity::Vector& v) { return q(Point(v.data(), v.data() + v.size())); },
        Eigen::Map<const Eigen::VectorXd>(r.x_best.data(), 11), Eigen::VectorXd::Constant(11, 1e-4));
    CHECK(g.lpNorm<Eigen::Infinity>() < opt.grad_tol);
}

TEST_CASE("quasi-Newton: Rosenbrock") {
    const OptProblem p = box(rosenbrock, {-2, -2}, {2, 2}, {-1.2, 1});
    QuasiNewtonOptions opt;
    opt.grad_steps = {1e-5, 1e-5};
    opt.grad_tol = 1e-8;
    const OptResult r = quasi_newton_refine(p, opt);
    CHECK(std::fabs(r.x_best[0] - 1) < 1e-4);
    CHECK(std::fabs(r.x_best[1] - 1) < 1e-4);
}

TEST_CASE("quasi-Newton respects bounds") {
    bool violated = false;
    // unconstrained minimum at (3, 3) lies outside the box
    const OptProblem p = audited(
        box([](const Point& x) { return std::pow(x[0] - 3, 2) + std::pow(x[1] - 3, 2); }, {-1, -1}, {1, 2}, {0, 0}),
        violated);
    const OptResult r = quasi_newton_refine(p);
    CHECK(r.x_best[0] == Approx(1.0));
    CHECK(r.x_best[1] == Approx(2.0));
    CHECK_FALSE(violated);
}

TEST_CASE("crossover") {
    const Point g1{1, 4, -2}, g2{3, 0, 2};
    const Point lo(3, -100), hi(3, 100);
    {
        ScriptedRandom rng({}, {0, 0, 0, 0, 0, 0});  // r = q = 0.5
        const Children c = crossover(g1, g2, lo, hi, rng);
        CHECK(c.first == Point{2, 2, 0});
        CHECK(c.second == Point{2, 2, 0});
    }
    {
        ScriptedRandom rng({}, {1, 0, 1, 0, 1, 0});  // r = 1
        const Children c = crossover(g1, g2, lo, hi, rng);
        CHECK(c.first == g1);
    }
    {
        ScriptedRandom rng({}, {2, 0, 2, 0, 2, 0});  // r = 1.5: extrapolation beyond parent 1
        const Children c = crossover(g1, g2, lo, hi, rng);
        CHECK(c.first == Point{0, 6, -4});
    }
    {
        ScriptedRandom rng({}, {2, 0, 2, 0, 2, 0});
        const Children c = crossover(g1, g2, Point(3, -1), Point(3, 5), rng);
        CHECK(c.first == Point{0, 5, -1});  // clamped
    }
    ScriptedRandom rng;
    CHECK_THROWS_AS(crossover(g1, Point{1, 2}, lo, hi, rng), InvalidArgument);
}

TEST_CASE("mutation") {
    const Point lo(2, -10), hi(2, 10);
    Point g{2.0, -3.0};
    ScriptedRandom none;
    CHECK_FALSE(mutate(g, 0.0, lo, hi, none));
    CHECK(g == Point{2.0, -3.0});

    ScriptedRandom r1({}, {0.1, 0.0});
    CHECK(mutate(g, 1.0, lo, hi, r1));
    CHECK(g[0] == Approx(2.2).epsilon(1e-15));
    CHECK(g[1] == -3.0);

    // p_m = 0.5: the first gene's uniform draw rejects, the second accepts
    Point h{2.0, 4.0};
    ScriptedRandom r2({0.7, 0.2}, {4.0});
    CHECK(mutate(h, 0.5, lo, hi, r2));
    CHECK(h == Point{2.0, 10.0});  // 4 * 5 clamped
}

TEST_CASE("roulette selection") {
    Rng rng(2026);
    const auto picks = roulette_select({2.0, 1.0}, 100000, rng);
    const auto zeros = std::count(picks.begin(), picks.end(), 0u);
    const double ratio = static_cast<double>(zeros) / static_cast<double>(picks.size() - zeros);
    CHECK(ratio == Approx(2.0).epsilon(0.02));

    const auto uniform = roulette_select({1, 1, 1, 1}, 40000, rng);
    for (std::size_t k = 0; k < 4; ++k)
        CHECK(std::count(uniform.begin(), uniform.end(), k) == doctest::Approx(10000).epsilon(0.05));

    const auto dom = roulette_select({0.1, 5.0, 0.1, 0.1, 0.1}, 5, rng);
    std::array<int, 5> counts{};
    for (auto k : dom) ++counts[k];
    CHECK(*std::max_element(counts.begin(), counts.end()) == counts[1]);

    ScriptedRandom forced({0.0, 0.65, 0.999}, {});
    // weights sorted descending: slot 2 (0.6), slot 0 (0.3), slot 1 (0.1)
    CHECK(roulette_select({0.3, 0.1, 0.6}, 3, forced) == std::vector<std::size_t>{2, 0, 1});
    CHECK_THROWS_AS(roulette_select({}, 1, rng), InvalidArgument);
    CHECK_THROWS_AS(roulette_select({0, 0}, 1, rng), InvalidArgument);
}

TEST_CASE("minimization weights") {
    const auto w = minimization_weights({1.0, 2.0, 3.0, std::numeric_limits<double>::infinity()});
    CHECK(w[0] > w[1]);
    CHECK(w[1] > w[2]);
    CHECK(w[2] > 0.0);
    CHECK(w[3] == 0.0);
    CHECK((w[0] - w[2]) / (w[1] - w[2]) == Approx(2.0));
}

TEST_CASE("genetic algorithm: 11-d sphere") {
    auto sphere = [](const Point& x) {
        double s = 0;
        for (double v : x) s += v * v;
        return s;
    };
    GAConfig cfg;
    cfg.n_tot = 30;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        bool violated = false;
        const OptProblem p = audited(box(sphere, Point(11, -5), Point(11, 5), Point(11, 3.0), 100000), violated);
        const OptResult r = genetic_run(p, cfg, seed);
        CAPTURE(seed);
        REQUIRE(r.generations.size() > 200);
        CHECK(r.generations[200].best < 1e-3);
        CHECK_FALSE(violated);
        check_trace(r);
        for (std::size_t g = 1; g < r.generations.size(); ++g) {
            CHECK(r.generations[g].best <= r.generations[g - 1].best);
            CHECK(r.generations[g].gene_variance.size() == 11);
        }
    }
}

TEST_CASE("genetic algorithm is reproducible") {
    const OptProblem p = box(rosenbrock, {-2, -2}, {2, 2}, {-1.2, 1}, 3000);
    const OptResult a = genetic_run(p, GAConfig{}, 17);
    const OptResult b = genetic_run(p, GAConfig{}, 17);
    CHECK(a.f_best == b.f_best);
    CHECK(a.x_best == b.x_best);
    CHECK(a.n_evals == b.n_evals);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) CHECK(a.trace[i].f == b.trace[i].f);
    const OptResult c = genetic_run(p, GAConfig{}, 18);
    CHECK(c.trace.size() > 0);
}

TEST_CASE("genetic algorithm stops only after a stall") {
    // constant objective: never improves after generation 0
    const OptProblem flat = box([](const Point&) { return 1.0; }, {-1, -1}, {1, 1}, {0, 0}, 1000000);
    GAConfig cfg;
    cfg.generations_per_block = 10;
    cfg.stall_window = 20;
    const OptResult r = genetic_run(flat, cfg, 1);
    CHECK(r.termination == Termination::Stalled);
    // blocks end at 10 and 20; the first with a 20-generation stall is 20
    CHECK(r.generations.back().generation == 20);

    GAConfig bad;
    bad.n_elite = bad.n_tot;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = GAConfig{};
    bad.p_c = 1.5;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("seek-refine reaches the quadratic minimum") {
    const Quadratic11 q(4);
    const Eigen::VectorXd x_star = q.m.ldlt().solve(q.c);
    const double f_star = q(Point(x_star.data(), x_star.data() + 11));
    const OptProblem p = box(q, Point(11, -20), Point(11, 20), Point(11, 0.0), 20000);
    QuasiNewtonOptions qn;
    qn.grad_steps = Point(11, 1e-4);
    const OptResult r = seek_refine(p, SeekOptions{}, qn, 9);
    CHECK(r.f_best - f_star < 1e-8);
    check_trace(r);
}
