#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "heliotower/optimize.hpp"
#include "tracker.hpp"

namespace heliotower {

Children crossover(const Point& g1, const Point& g2, const Point& lower, const Point& upper,
                   RandomSource& rng) {
    if (g1.size() != g2.size() || g1.size() != lower.size() || g1.size() != upper.size())
        throw InvalidArgument("crossover parents differ in length");
    Children c{g1, g2};
    for (std::size_t i = 0; i < g1.size(); ++i) {
        const double r = 0.5 + 0.5 * rng.normal();
        const double q = 0.5 + 0.5 * rng.normal();
        c.first[i] = std::clamp(r * g1[i] + (1.0 - r) * g2[i], lower[i], upper[i]);
        c.second[i] = std::clamp(q * g1[i] + (1.0 - q) * g2[i], lower[i], upper[i]);
    }
    return c;
}

bool mutate(Point& g, double p_m, const Point& lower, const Point& upper, RandomSource& rng) {
    if (p_m <= 0.0) return false;
    bool any = false;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (p_m < 1.0 && !(rng.uniform() < p_m)) continue;
        g[i] = std::clamp(g[i] * (1.0 + rng.normal()), lower[i], upper[i]);
        any = true;
    }
    return any;
}

std::vector<double> minimization_weights(const std::vector<double>& f) {
    double worst = -std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    for (double v : f) {
        if (!std::isfinite(v)) continue;
        worst = std::max(worst, v);
        best = std::min(best, v);
    }
    std::vector<double> w(f.size(), 1.0);
    if (!std::isfinite(worst)) return w;
    const double tiny = 1e-12 * std::max(1.0, worst - best);
    for (std::size_t i = 0; i < f.size(); ++i) w[i] = std::isfinite(f[i]) ? worst - f[i] + tiny : 0.0;
    return w;
}

std::vector<std::size_t> roulette_select(const std::vector<double>& weights, std::size_t n_pick,
                                         RandomSource& rng) {
    if (weights.empty()) throw InvalidArgument("roulette over an empty population");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("roulette weights must be finite and >= 0");
        total += w;
    }
    if (!(total > 0.0)) throw InvalidArgument("roulette weights sum to zero");

    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return weights[a] > weights[b]; });
    std::vector<double> cum(order.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        acc += weights[order[k]];
        cum[k] = acc / total;
    }

    std::vector<std::size_t> picks;
    picks.reserve(n_pick);
    for (std::size_t n = 0; n < n_pick; ++n) {
        const double u = rng.uniform();
        const auto it = std::upper_bound(cum.begin(), cum.end(), u);
        // Rounding can leave the last cumulative value just below 1.
        std::size_t k = it == cum.end() ? cum.size() - 1 : static_cast<std::size_t>(it - cum.begin());
        while (weights[order[k]] == 0.0 && k > 0) --k;
        picks.push_back(order[k]);
    }
    return picks;
}

namespace {

struct Member {
    Point x;
    double f = 0.0;
    bool changed = false;
};

GenerationRecord summarize(std::size_t generation, const std::vector<Member>& pop) {
    GenerationRecord r;
    r.generation = generation;
    r.best = std::numeric_limits<double>::infinity();
    const std::size_t n = pop.front().x.size();
    r.gene_variance.assign(n, 0.0);
    double sum = 0.0;
    std::size_t finite = 0;
    for (const Member& m : pop) {
        r.best = std::min(r.best, m.f);
        if (std::isfinite(m.f)) sum += m.f, ++finite;
    }
    r.mean = finite > 0 ? sum / static_cast<double>(finite) : std::numeric_limits<double>::infinity();
    const auto count = static_cast<double>(pop.size());
    for (std::size_t i = 0; i < n; ++i) {
        double mean = 0.0;
        for (const Member& m : pop) mean += m.x[i];
        mean /= count;
        double var = 0.0;
        for (const Member& m : pop) var += (m.x[i] - mean) * (m.x[i] - mean);
        r.gene_variance[i] = var / count;
    }
    return r;
}

Termination run_ga(detail::Tracker& ev, const GAConfig& config, RandomSource& rng) {
    const OptProblem& p = ev.problem();
    const std::size_t n = p.dimension();
    auto& generations = ev.result().generations;

    std::vector<Member> pop(config.n_tot);
    pop[0].x = p.x0;
    for (std::size_t m = 1; m < config.n_tot; ++m) {
        pop[m].x.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            pop[m].x[i] = std::min(p.lower[i] + rng.uniform() * (p.upper[i] - p.lower[i]), p.upper[i]);
    }
    for (Member& m : pop) m.f = ev(m.x);

    generations.push_back(summarize(0, pop));
    double best = generations.back().best;
    std::size_t last_improvement = 0;
    std::size_t block_end = config.generations_per_block;

    for (std::size_t gen = 1;; ++gen) {
        std::stable_sort(pop.begin(), pop.end(), [](const Member& a, const Member& b) { return a.f < b.f; });
        std::vector<Member> next(pop.begin(), pop.begin() + static_cast<std::ptrdiff_t>(config.n_elite));

        std::vector<Member> pool = pop;
        for (Member& m : pool) m.changed = false;
        std::vector<std::size_t> perm(pool.size());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t i = perm.size() - 1; i > 0; --i) {
            const auto j = std::min(static_cast<std::size_t>(rng.uniform() * static_cast<double>(i + 1)), i);
            std::swap(perm[i], perm[j]);
        }
        const std::size_t parents = pool.size();
        for (std::size_t k = 0; k + 1 < parents; k += 2) {
            if (!(rng.uniform() < config.p_c)) continue;
            Children c = crossover(pool[perm[k]].x, pool[perm[k + 1]].x, p.lower, p.upper, rng);
            pool.push_back({std::move(c.first), 0.0, true});
            pool.push_back({std::move(c.second), 0.0, true});
        }
        for (Member& m : pool)
            if (mutate(m.x, config.p_m, p.lower, p.upper, rng)) m.changed = true;
        for (Member& m : pool)
            if (m.changed) m.f = ev(m.x);

        std::vector<double> f(pool.size());
        for (std::size_t k = 0; k < pool.size(); ++k) f[k] = pool[k].f;
        for (std::size_t k : roulette_select(minimization_weights(f), config.n_tot - config.n_elite, rng))
            next.push_back(pool[k]);
        pop = std::move(next);

        generations.push_back(summarize(gen, pop));
        if (generations.back().best < best - p.tol_f) {
            best = generations.back().best;
            last_improvement = gen;
        }
        if (gen >= block_end) {
            if (gen - last_improvement >= config.stall_window) return Termination::Stalled;
            block_end += config.generations_per_block;
        }
    }
}

}  // namespace

OptResult genetic_run(const OptProblem& problem, const GAConfig& config, std::uint64_t seed) {
    Rng rng = Rng::stream(seed, "genetic");
    return genetic_run(problem, config, rng);
}

OptResult genetic_run(const OptProblem& problem, const GAConfig& config, RandomSource& rng) {
    config.validate();
    detail::Tracker ev(problem, "genetic");
    try {
        return ev.finish(run_ga(ev, config, rng));
    } catch (const detail::BudgetExhausted&) {
        return ev.finish(Termination::Budget);
    }
}

}  // namespace heliotower
