#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "heliotower/config.hpp"
#include "heliotower/energy.hpp"
#include "heliotower/optimize.hpp"
#include "heliotower/sensitivity.hpp"

namespace heliotower {

/// The scalar objective of a run over flat design vectors. For the plant,
/// designs the layout generator cannot host evaluate to +inf.
struct RunObjective {
    std::shared_ptr<PlantModel> model;  // null for the quadratic test objective
    ReceiverKind kind = ReceiverKind::Cavity;
    std::function<double(const Point&)> f;
};

/// `insolation` is required for the plant objective and ignored otherwise.
RunObjective make_objective(const RunConfig& config, const InsolationTable* insolation);

OptProblem make_problem(const RunConfig& config, const RunObjective& objective, const Point& x0);
OptProblem make_problem(const RunConfig& config, const RunObjective& objective);

enum class Algorithm { Coordinate, SeekRefine, Genetic };

std::string_view to_string(Algorithm a) noexcept;

/// "coord", "seek-refine", "genetic"; "all" expands to the three.
std::vector<Algorithm> parse_algorithms(std::string_view text);

OptResult run_algorithm(Algorithm algorithm, const RunConfig& config, const OptProblem& problem,
                        std::uint64_t seed);

/// Sensitivity analysis of the run objective at x_star with steps scaled to
/// the variable ranges.
sensitivity::HessianReport analyze_at(const RunConfig& config, const RunObjective& objective, const Point& x_star);

/// Human-readable guidance: variables whose sigma exceeds the configured
/// fraction of their range and pairs with |rho| above the threshold.
std::vector<std::string> sensitivity_findings(const RunConfig& config, const sensitivity::HessianReport& report,
                                              ReceiverKind kind);

}  // namespace heliotower
