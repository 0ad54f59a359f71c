#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "heliotower/error.hpp"
#include "heliotower/optimize.hpp"

namespace heliotower::detail {

struct BudgetExhausted {};

// Counts calls, audits bounds and keeps the running best and trace.
class Tracker {
public:
    Tracker(const OptProblem& problem, std::string algorithm) : problem_(problem) {
        problem.validate();
        result_.algorithm = std::move(algorithm);
        result_.f_best = std::numeric_limits<double>::infinity();
        result_.x_best = problem.x0;
    }

    double operator()(const Point& x, int changed = -1) {
        if (result_.n_evals >= problem_.budget) throw BudgetExhausted{};
        if (!problem_.contains(x)) throw InvalidArgument("optimizer produced a point outside the bounds");
        const double f = problem_.eval(x, changed);
        ++result_.n_evals;
        if (f < result_.f_best) {
            result_.f_best = f;
            result_.x_best = x;
        }
        result_.trace.push_back({result_.n_evals, f, result_.f_best, x});
        return f;
    }

    bool exhausted() const noexcept { return result_.n_evals >= problem_.budget; }
    const OptProblem& problem() const noexcept { return problem_; }
    OptResult& result() noexcept { return result_; }

    OptResult finish(Termination t) {
        result_.termination = t;
        return std::move(result_);
    }

private:
    const OptProblem& problem_;
    OptResult result_;
};

}  // namespace heliotower::detail
