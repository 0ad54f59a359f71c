#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "heliotower/random.hpp"

namespace heliotower {

using Point = std::vector<double>;

/// Index of the only coordinate changed since the previous call, or -1.
/// Lets an objective with staged caches skip work; it may be ignored.
using Objective = std::function<double(const Point& x, int changed)>;

struct OptProblem {
    Objective eval;
    Point lower;
    Point upper;
    Point x0;
    double tol_f = 1e-9;
    std::size_t budget = 10000;

    std::size_t dimension() const noexcept { return x0.size(); }
    Point range() const;
    Point clamp(Point x) const;
    bool contains(const Point& x) const noexcept;

    /// Throws InvalidArgument on mismatched sizes, lo >= hi, x0 outside the
    /// box, a zero budget or a missing objective.
    void validate() const;
};

enum class Termination {
    Converged,   // step or gradient tolerance reached
    Budget,      // evaluation budget exhausted
    Steps,       // fixed step count completed
    Stalled,     // no improvement within the stall window
    LineSearch,  // no descent along the current direction
};

std::string_view to_string(Termination t) noexcept;

struct TracePoint {
    std::size_t eval_index = 0;  // 1-based
    double f = 0.0;
    double best = 0.0;  // running minimum up to and including this call
    Point x;
};

/// Per-generation GA summary.
struct GenerationRecord {
    std::size_t generation = 0;
    double best = 0.0;
    double mean = 0.0;
    std::vector<double> gene_variance;
};

struct OptResult {
    std::string algorithm;
    Point x_best;
    double f_best = 0.0;
    std::size_t n_evals = 0;
    std::vector<TracePoint> trace;
    Termination termination = Termination::Converged;
    std::vector<GenerationRecord> generations;  // genetic_run only
    std::vector<std::string> notes;             // metric resets and similar events
};

struct CoordinateOptions {
    Point h0;  // initial step per variable; empty means 5% of the range
    int refinements = 6;
};

struct SeekOptions {
    std::size_t n_steps = 300;
    double step_scale = 0.02;  // Gaussian step width as a fraction of the range
    double t_rel = 0.1;        // temperature relative to the current objective
    bool literal = false;      // acceptance min(1, exp((E_old - E_new) / E_old))
};

struct QuasiNewtonOptions {
    Point grad_steps;  // empty means 1e-4 of the range
    double grad_tol = 1e-6;
    int max_backtracks = 40;
    double armijo = 1e-4;
};

struct GAConfig {
    std::size_t n_tot = 30;
    double p_c = 0.05;
    double p_m = 0.1;
    std::size_t n_elite = 5;
    std::size_t generations_per_block = 200;
    std::size_t stall_window = 20;

    void validate() const;
};

OptResult coordinate_cycle(const OptProblem& problem, const CoordinateOptions& options = {});

OptResult metropolis_seek(const OptProblem& problem, const SeekOptions& options, std::uint64_t seed);
OptResult metropolis_seek(const OptProblem& problem, const SeekOptions& options, RandomSource& rng);

OptResult quasi_newton_refine(const OptProblem& problem, const QuasiNewtonOptions& options = {});

/// Metropolis search followed by quasi-Newton refinement of its best point,
/// sharing one budget and one trace.
OptResult seek_refine(const OptProblem& problem, const SeekOptions& seek, const QuasiNewtonOptions& qn,
                      std::uint64_t seed);

/// Metropolis acceptance probability for a move from e_old to e_new.
double acceptance_probability(double e_old, double e_new, const SeekOptions& options);

struct Children {
    Point first;
    Point second;
};

/// Blend crossover with weights r, q ~ N(0.5, 0.5) per gene, clamped to the box.
Children crossover(const Point& g1, const Point& g2, const Point& lower, const Point& upper,
                   RandomSource& rng);

/// Each gene with probability p_m becomes gene * (1 + r), r ~ N(0, 1), clamped.
/// Returns true when any gene was drawn for mutation.
bool mutate(Point& g, double p_m, const Point& lower, const Point& upper, RandomSource& rng);

/// Roulette wheel over positive weights: sorted by weight, cumulative
/// normalized, the first slot whose cumulative value exceeds a uniform draw.
std::vector<std::size_t> roulette_select(const std::vector<double>& weights, std::size_t n_pick,
                                         RandomSource& rng);

/// Roulette weights for minimization: f_worst - f + tiny. Non-finite values
/// get weight 0.
std::vector<double> minimization_weights(const std::vector<double>& f);

OptResult genetic_run(const OptProblem& problem, const GAConfig& config, std::uint64_t seed);
OptResult genetic_run(const OptProblem& problem, const GAConfig& config, RandomSource& rng);

}  // namespace heliotower
