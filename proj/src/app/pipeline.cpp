#include "heliotower/pipeline.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "heliotower/error.hpp"

namespace heliotower {

RunObjective make_objective(const RunConfig& config, const InsolationTable* insolation) {
    RunObjective obj;
    obj.kind = config.design.kind();
    if (config.objective == ObjectiveKind::Quadratic) {
        const QuadraticObjective q = config.quadratic;
        if (q.matrix.size() != DesignVector::kSize * DesignVector::kSize)
            throw InvalidArgument("quadratic objective needs a matrix");
        obj.f = [q](const Point& x) {
            constexpr std::size_t n = DesignVector::kSize;
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double row = 0.0;
                for (std::size_t j = 0; j < n; ++j) row += q.matrix[i * n + j] * (x[j] - q.center[j]);
                s += (x[i] - q.center[i]) * row;
            }
            return q.f0 + s;
        };
        return obj;
    }
    if (!insolation) throw InvalidArgument("the plant objective needs an insolation table");
    obj.model = std::make_shared<PlantModel>(config.plant, config.layout, *insolation);
    const ReceiverKind kind = obj.kind;
    obj.f = [model = obj.model, kind](const Point& x) {
        try {
            return model->objective(DesignVector::from_array(x, kind)).objective;
        } catch (const CapacityError&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    return obj;
}

OptProblem make_problem(const RunConfig& config, const RunObjective& objective, const Point& x0) {
    OptProblem p;
    p.eval = [f = objective.f](const Point& x, int) { return f(x); };
    p.lower.assign(config.lower.begin(), config.lower.end());
    p.upper.assign(config.upper.begin(), config.upper.end());
    p.x0 = x0;
    p.tol_f = config.optimizer.tol_f;
    p.budget = config.optimizer.budget;
    p.validate();
    return p;
}

OptProblem make_problem(const RunConfig& config, const RunObjective& objective) {
    const auto x = config.design.to_array();
    return make_problem(config, objective, Point(x.begin(), x.end()));
}

std::string_view to_string(Algorithm a) noexcept {
    switch (a) {
        case Algorithm::Coordinate: return "coord";
        case Algorithm::SeekRefine: return "seek-refine";
        case Algorithm::Genetic: return "genetic";
    }
    return "unknown";
}

std::vector<Algorithm> parse_algorithms(std::string_view text) {
    if (text == "coord") return {Algorithm::Coordinate};
    if (text == "seek-refine") return {Algorithm::SeekRefine};
    if (text == "genetic") return {Algorithm::Genetic};
    if (text == "all") return {Algorithm::Coordinate, Algorithm::SeekRefine, Algorithm::Genetic};
    throw InvalidArgument("unknown algorithm '" + std::string(text) + "' (coord, seek-refine, genetic, all)");
}

OptResult run_algorithm(Algorithm algorithm, const RunConfig& config, const OptProblem& problem, std::uint64_t seed) {
    const Point range = problem.range();
    switch (algorithm) {
        case Algorithm::Coordinate: {
            CoordinateOptions o;
            o.refinements = config.optimizer.refinements;
            for (double r : range) o.h0.push_back(config.optimizer.coord_step * r);
            return coordinate_cycle(problem, o);
        }
        case Algorithm::SeekRefine: {
            QuasiNewtonOptions q;
            q.grad_tol = config.optimizer.grad_tol;
            for (double r : range) q.grad_steps.push_back(config.optimizer.grad_step * r);
            return seek_refine(problem, config.optimizer.seek, q, seed);
        }
        case Algorithm::Genetic:
            return genetic_run(problem, config.optimizer.ga, seed);
    }
    throw InvalidArgument("unknown algorithm");
}

sensitivity::HessianReport analyze_at(const RunConfig& config, const RunObjective& objective, const Point& x_star) {
    const auto n = static_cast<Eigen::Index>(x_star.size());
    sensitivity::Vector x(n), h(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        x[i] = x_star[k];
        h[i] = config.analysis.step_init * (config.upper[k] - config.lower[k]);
    }
    auto f = [&objective](const sensitivity::Vector& v) {
        return objective.f(Point(v.data(), v.data() + v.size()));
    };
    sensitivity::AnalysisOptions options;
    options.steps = config.analysis.steps;
    options.epsilon = config.analysis.epsilon;
    options.convention = config.analysis.convention;
    return sensitivity::analyze(f, x, h, options);
}

std::vector<std::string> sensitivity_findings(const RunConfig& config, const sensitivity::HessianReport& report,
                                              ReceiverKind kind) {
    std::vector<std::string> out;
    const auto names = variable_names(kind);
    const Eigen::Index n = report.sigma.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double range = config.upper[k] - config.lower[k];
        if (report.sigma[i] > config.analysis.irrelevant_sigma * range) {
            std::ostringstream s;
            s << "irrelevant: " << names[k] << " sigma=" << report.sigma[i] << " exceeds "
              << config.analysis.irrelevant_sigma << " of its range";
            out.push_back(s.str());
        }
    }
    double top = -1.0;
    Eigen::Index ti = 0, tj = 1;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double r = report.rho(i, j);
            if (std::abs(r) > top) top = std::abs(r), ti = i, tj = j;
            if (std::abs(r) > config.analysis.rho_threshold) {
                std::ostringstream s;
                s << "correlated: " << names[static_cast<std::size_t>(i)] << " and "
                  << names[static_cast<std::size_t>(j)] << " rho=" << r;
                out.push_back(s.str());
            }
        }
    }
    if (n > 1) {
        std::ostringstream s;
        s << "largest |rho|: " << names[static_cast<std::size_t>(ti)] << " and " << names[static_cast<std::size_t>(tj)]
          << " rho=" << report.rho(ti, tj);
        out.push_back(s.str());
    }
    if (report.pseudo_inverse) out.push_back("warning: Hessian condition above 1e12, pseudo-inverse used");
    return out;
}

}  // namespace heliotower
