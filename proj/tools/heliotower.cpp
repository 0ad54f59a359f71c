// heliotower: batch front-end for layout generation, plant evaluation,
// optimization and sensitivity analysis.
//
// Exit codes: 0 ok, 1 internal error, 2 bad input (parse error, missing
// file, invalid option), 3 infeasible design, 4 Hessian or step failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "heliotower/config.hpp"
#include "heliotower/energy.hpp"
#include "heliotower/error.hpp"
#include "heliotower/io.hpp"
#include "heliotower/pipeline.hpp"

namespace fs = std::filesystem;
using namespace heliotower;

namespace {

enum Exit { kOk = 0, kInternal = 1, kInput = 2, kInfeasible = 3, kAnalysis = 4 };

struct Options {
    std::string config;
    std::string insolation;
    std::string algo = "coord";
    std::uint64_t seed = 1;
    std::optional<std::size_t> budget;
    std::optional<double> epsilon;
    std::string out = ".";
    bool analyze = false;
    std::string x_star;
    double latitude_deg = 37.39695528818883;
};

struct Loaded {
    RunConfig config;
    std::optional<InsolationTable> insolation;
};

Loaded load(const Options& o) {
    Loaded l;
    if (o.config.empty()) throw ParseError("--config is required");
    l.config = load_config(o.config);
    if (o.budget) l.config.optimizer.budget = *o.budget;
    if (o.epsilon) l.config.analysis.epsilon = *o.epsilon;
    l.config.validate();
    if (l.config.objective == ObjectiveKind::Plant) {
        fs::path path = o.insolation.empty() ? l.config.insolation : fs::path(o.insolation);
        if (path.empty()) throw ParseError("no insolation data: pass --insolation or set [run] insolation");
        if (!fs::exists(path)) throw ParseError("insolation file not found: " + path.string());
        l.insolation = read_insolation(path);
    }
    return l;
}

const InsolationTable* table(const Loaded& l) { return l.insolation ? &*l.insolation : nullptr; }

std::string to_text(const std::function<void(std::ostream&)>& fn) {
    std::ostringstream s;
    fn(s);
    return s.str();
}

Evaluation evaluate_config(const Loaded& l) {
    if (l.config.objective != ObjectiveKind::Plant) throw ParseError("layout and evaluate need the plant objective");
    PlantModel model(l.config.plant, l.config.layout, *l.insolation);
    return model.evaluate(l.config.design);
}

int cmd_layout(const Options& o) {
    const Loaded l = load(o);
    const Evaluation e = evaluate_config(l);
    const fs::path out = o.out;
    write_text_file(out / "layout.csv", to_text([&](std::ostream& s) { write_layout_csv(s, e.layout); }));
    std::printf("generated %zu heliostats, selected %zu\n", e.layout.heliostats.size(), e.layout.selected_count());
    if (!e.value.feasible) {
        std::fprintf(stderr, "infeasible design: zero annual energy\n");
        return kInfeasible;
    }
    return kOk;
}

int cmd_evaluate(const Options& o) {
    const Loaded l = load(o);
    const Evaluation e = evaluate_config(l);
    const fs::path out = o.out;
    write_text_file(out / "layout.csv", to_text([&](std::ostream& s) { write_layout_csv(s, e.layout); }));
    write_text_file(out / "energy.csv", to_text([&](std::ostream& s) { write_energy_csv(s, e); }));
    const EfficiencyBreakdown& f = e.plant_factors;
    std::ostringstream summary;
    summary << "heliostats_generated = " << e.layout.heliostats.size() << '\n'
            << "heliostats_selected = " << e.layout.selected_count() << '\n'
            << "annual_energy_kwh = " << format_double(e.value.annual_energy) << '\n'
            << "total_cost = " << format_double(e.value.total_cost) << '\n'
            << "objective = " << format_double(e.value.objective) << '\n'
            << "mean_cosine = " << format_double(f.cosine) << '\n'
            << "mean_shadow_block = " << format_double(f.shadow_block) << '\n'
            << "mean_attenuation = " << format_double(f.attenuation) << '\n'
            << "mean_interception = " << format_double(f.interception) << '\n'
            << "reflectivity = " << format_double(f.reflectivity) << '\n';
    write_text_file(out / "summary.txt", summary.str());
    std::cout << summary.str();
    if (!e.value.feasible) {
        std::fprintf(stderr, "infeasible design: zero annual energy\n");
        return kInfeasible;
    }
    return kOk;
}

void write_report(const fs::path& out, const RunConfig& config, const sensitivity::HessianReport& report,
                  ReceiverKind kind) {
    write_text_file(out / "sensitivity.csv",
                    to_text([&](std::ostream& s) { write_sensitivity_csv(s, report, kind); }));
    write_text_file(out / "rho.csv", to_text([&](std::ostream& s) { write_rho_csv(s, report, kind); }));
    std::printf("f_star = %.17g, epsilon = %g, condition = %.3g\n", report.f_star, report.epsilon, report.condition);
    const auto names = variable_names(kind);
    for (Eigen::Index i = 0; i < report.sigma.size(); ++i)
        std::printf("  %-8s value %-14.8g sigma %.6g\n", std::string(names[static_cast<std::size_t>(i)]).c_str(),
                    report.x_star[i], report.sigma[i]);
    for (const std::string& line : sensitivity_findings(config, report, kind)) std::printf("%s\n", line.c_str());
}

int cmd_optimize(const Options& o, bool compare) {
    const std::vector<Algorithm> algos = parse_algorithms(compare ? "all" : o.algo);
    const Loaded l = load(o);
    const RunObjective objective = make_objective(l.config, table(l));
    const OptProblem problem = make_problem(l.config, objective);
    const ReceiverKind kind = objective.kind;
    const fs::path out = o.out;

    std::vector<OptResult> results;
    for (Algorithm a : algos) {
        OptResult r = run_algorithm(a, l.config, problem, o.seed);
        const std::string name(to_string(a));
        write_text_file(out / ("convergence_" + name + ".jsonl"),
                        to_text([&](std::ostream& s) { write_convergence_log(s, r, kind); }));
        if (!r.generations.empty())
            write_text_file(out / ("generations_" + name + ".jsonl"),
                            to_text([&](std::ostream& s) { write_generation_log(s, r, kind); }));
        write_text_file(out / ("best_" + name + ".conf"),
                        design_snippet(DesignVector::from_array(r.x_best, kind)));
        std::printf("%-12s f_best = %.17g  n_evals = %zu  termination_reason = %s\n", name.c_str(), r.f_best,
                    r.n_evals, std::string(to_string(r.termination)).c_str());
        for (const std::string& note : r.notes) std::printf("  note: %s\n", note.c_str());
        results.push_back(std::move(r));
    }

    std::vector<double> sigma;
    int code = kOk;
    if (o.analyze) {
        const OptResult* best = &results.front();
        for (const OptResult& r : results)
            if (r.f_best < best->f_best) best = &r;
        try {
            const auto report = analyze_at(l.config, objective, best->x_best);
            sigma.assign(report.sigma.data(), report.sigma.data() + report.sigma.size());
            write_report(out, l.config, report, kind);
        } catch (const StepSelectionError& e) {
            std::fprintf(stderr, "analysis failed: %s\n", e.what());
            code = kAnalysis;
        } catch (const NotPositiveDefinite& e) {
            std::fprintf(stderr, "analysis failed: %s\n", e.what());
            code = kAnalysis;
        }
    }
    if (results.size() > 1 || o.analyze)
        write_text_file(out / "comparison.csv",
                        to_text([&](std::ostream& s) { write_comparison_csv(s, results, kind, sigma); }));
    for (const OptResult& r : results)
        if (!std::isfinite(r.f_best) && code == kOk) code = kInfeasible;
    return code;
}

int cmd_analyze(const Options& o) {
    const Loaded l = load(o);
    const RunObjective objective = make_objective(l.config, table(l));
    DesignVector x = l.config.design;
    if (!o.x_star.empty()) {
        const RunConfig snippet = load_config(o.x_star);
        if (snippet.design.kind() != x.kind()) throw ParseError("--x-star receiver kind differs from the config");
        x = snippet.design;
    }
    const auto a = x.to_array();
    const double f = objective.f(Point(a.begin(), a.end()));
    if (!std::isfinite(f)) {
        std::fprintf(stderr, "infeasible design at x_star\n");
        return kInfeasible;
    }
    const auto report = analyze_at(l.config, objective, Point(a.begin(), a.end()));
    write_report(o.out, l.config, report, objective.kind);
    return kOk;
}

int cmd_make_insolation(const Options& o) {
    const InsolationTable t = synthetic_insolation(o.latitude_deg * std::numbers::pi / 180.0);
    write_insolation(o.out, t);
    std::printf("wrote %s/hourly.csv and months.csv\n", o.out.c_str());
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"heliotower: heliostat field layout, plant evaluation, optimization and sensitivity analysis"};
    app.require_subcommand(1);
    Options o;

    auto common = [&o](CLI::App* c, bool needs_config = true) {
        if (needs_config) {
            c->add_option("--config", o.config, "run configuration file")->required();
            c->add_option("--insolation", o.insolation, "insolation directory or hourly.csv");
        }
        c->add_option("--out", o.out, "output directory");
    };
    auto* layout = app.add_subcommand("layout", "generate and select the field, write layout.csv");
    common(layout);
    auto* evaluate = app.add_subcommand("evaluate", "evaluate the configured design");
    common(evaluate);
    auto* optimize = app.add_subcommand("optimize", "minimize cost per energy");
    common(optimize);
    optimize->add_option("--algo", o.algo, "coord, seek-refine, genetic or all");
    auto* compare = app.add_subcommand("compare", "run all algorithms and write comparison.csv");
    common(compare);
    for (CLI::App* c : {optimize, compare}) {
        c->add_option("--seed", o.seed, "seed of the stochastic algorithms");
        c->add_option("--budget", o.budget, "objective evaluations per algorithm");
        c->add_option("--epsilon", o.epsilon, "objective rise defining sigma");
        c->add_flag("--analyze", o.analyze, "sensitivity analysis at the best design");
    }
    auto* analyze = app.add_subcommand("analyze", "Hessian, sigma and rho at a minimum");
    common(analyze);
    analyze->add_option("--x-star", o.x_star, "design snippet (e.g. best_coord.conf); default: the config design");
    analyze->add_option("--epsilon", o.epsilon, "objective rise defining sigma");
    auto* make_ins = app.add_subcommand("make-insolation", "write a synthetic clear-sky insolation table");
    common(make_ins, false);
    make_ins->add_option("--latitude-deg", o.latitude_deg, "site latitude [deg]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInput;
    }

    try {
        if (*layout) return cmd_layout(o);
        if (*evaluate) return cmd_evaluate(o);
        if (*optimize) return cmd_optimize(o, false);
        if (*compare) return cmd_optimize(o, true);
        if (*analyze) return cmd_analyze(o);
        if (*make_ins) return cmd_make_insolation(o);
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kInput;
    } catch (const InvalidArgument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kInput;
    } catch (const CapacityError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kInput;
    } catch (const InfeasibleDesign& e) {
        std::fprintf(stderr, "infeasible: %s\n", e.what());
        return kInfeasible;
    } catch (const StepSelectionError& e) {
        std::fprintf(stderr, "analysis failed: %s\n", e.what());
        return kAnalysis;
    } catch (const NotPositiveDefinite& e) {
        std::fprintf(stderr, "analysis failed: %s\n", e.what());
        return kAnalysis;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return kInternal;
    }
    return kInternal;
}
