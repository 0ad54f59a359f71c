#include <algorithm>
#include <cmath>

#include "heliotower/error.hpp"
#include "heliotower/optimize.hpp"

namespace heliotower {

Point OptProblem::range() const {
    Point r(x0.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = upper[i] - lower[i];
    return r;
}

Point OptProblem::clamp(Point x) const {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
    return x;
}

bool OptProblem::contains(const Point& x) const noexcept {
    if (x.size() != lower.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
    return true;
}

void OptProblem::validate() const {
    if (!eval) throw InvalidArgument("optimization problem has no objective");
    if (x0.empty()) throw InvalidArgument("optimization problem has no variables");
    if (lower.size() != x0.size() || upper.size() != x0.size())
        throw InvalidArgument("bounds and start point differ in size");
    for (std::size_t i = 0; i < x0.size(); ++i) {
        if (!(std::isfinite(lower[i]) && std::isfinite(upper[i]) && lower[i] < upper[i]))
            throw InvalidArgument("bounds of variable " + std::to_string(i) + " are empty or not finite");
    }
    if (!contains(x0)) throw InvalidArgument("start point is outside the bounds");
    if (budget == 0) throw InvalidArgument("evaluation budget must be positive");
    if (!(tol_f >= 0.0)) throw InvalidArgument("tol_f must be non-negative");
}

std::string_view to_string(Termination t) noexcept {
    switch (t) {
        case Termination::Converged: return "converged";
        case Termination::Budget: return "budget";
        case Termination::Steps: return "steps";
        case Termination::Stalled: return "stalled";
        case Termination::LineSearch: return "line_search";
    }
    return "unknown";
}

void GAConfig::validate() const {
    if (n_tot < 2) throw InvalidArgument("population needs at least two members");
    if (n_elite >= n_tot) throw InvalidArgument("n_elite must be smaller than n_tot");
    if (!(p_c >= 0.0 && p_c <= 1.0)) throw InvalidArgument("p_c must lie in [0, 1]");
    if (!(p_m >= 0.0 && p_m <= 1.0)) throw InvalidArgument("p_m must lie in [0, 1]");
    if (generations_per_block == 0) throw InvalidArgument("generations_per_block must be positive");
    if (stall_window == 0) throw InvalidArgument("stall_window must be positive");
}

}  // namespace heliotower
