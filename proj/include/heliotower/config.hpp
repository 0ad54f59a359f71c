#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "heliotower/design.hpp"
#include "heliotower/layout.hpp"
#include "heliotower/optimize.hpp"
#include "heliotower/plant.hpp"
#include "heliotower/sensitivity.hpp"

namespace heliotower {

using VariableArray = std::array<double, DesignVector::kSize>;

struct OptimizerSettings {
    std::size_t budget = 4000;
    double tol_f = 1e-7;
    double coord_step = 0.05;  // initial coordinate step, fraction of each range
    int refinements = 4;
    SeekOptions seek;
    double grad_step = 1e-3;  // quasi-Newton difference step, fraction of each range
    double grad_tol = 1e-6;
    GAConfig ga;
};

struct AnalysisSettings {
    double epsilon = 0.001;
    double step_init = 0.02;  // first candidate step, fraction of each range
    sensitivity::StepOptions steps;
    sensitivity::SigmaConvention convention = sensitivity::SigmaConvention::Exact;
    double irrelevant_sigma = 0.5;  // flag sigma above this fraction of the range
    double rho_threshold = 0.9;
};

/// Analytic test objective f0 + (x - c)^T M (x - c) over the same variables.
struct QuadraticObjective {
    double f0 = 1.0;
    VariableArray center{};
    std::vector<double> matrix;  // row-major 11 x 11
};

enum class ObjectiveKind { Plant, Quadratic };

struct RunConfig {
    DesignVector design;
    PlantParams plant;
    LayoutConfig layout;
    VariableArray lower{};
    VariableArray upper{};
    OptimizerSettings optimizer;
    AnalysisSettings analysis;
    ObjectiveKind objective = ObjectiveKind::Plant;
    QuadraticObjective quadratic;
    std::filesystem::path insolation;  // optional; resolved against the config file

    /// Default bounds for the receiver kind of `design`.
    static std::pair<VariableArray, VariableArray> default_bounds(ReceiverKind kind);

    void validate() const;
};

/// Parses the key = value format with [section] headers and # comments.
/// Throws ParseError carrying the line and column of the offending text.
RunConfig parse_config(std::string_view text);

/// Reads and parses a config file; a relative insolation path is resolved
/// against the file's directory.
RunConfig load_config(const std::filesystem::path& path);

/// Re-runnable [design] section; values round-trip exactly.
std::string design_snippet(const DesignVector& design);

}  // namespace heliotower
