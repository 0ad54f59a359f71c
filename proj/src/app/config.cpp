#include "heliotower/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "heliotower/error.hpp"

namespace heliotower {

namespace {

constexpr std::size_t kN = DesignVector::kSize;

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// A value with the 1-based column where it starts.
struct Field {
    std::string_view text;
    int line = 0;
    int column = 0;

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line, column); }

    double number() const {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v))
            fail("expected a number, got '" + std::string(text) + "'");
        return v;
    }

    long integer() const {
        long v = 0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || ptr != text.data() + text.size())
            fail("expected an integer, got '" + std::string(text) + "'");
        return v;
    }

    std::size_t count() const {
        const long v = integer();
        if (v < 0) fail("expected a non-negative integer");
        return static_cast<std::size_t>(v);
    }

    bool boolean() const {
        if (text == "true" || text == "yes" || text == "1") return true;
        if (text == "false" || text == "no" || text == "0") return false;
        fail("expected true or false, got '" + std::string(text) + "'");
    }

    std::vector<double> numbers() const {
        std::vector<double> out;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = text.find(',', pos);
            const std::string_view raw = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
            const std::size_t lead = raw.find_first_not_of(" \t");
            Field item{trim(raw), line, column + static_cast<int>(pos + (lead == std::string_view::npos ? 0 : lead))};
            if (item.text.empty()) item.fail("empty list element");
            out.push_back(item.number());
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
        return out;
    }
};

using Setter = std::function<void(RunConfig&, const Field&)>;

int variable_index(std::string_view name) {
    for (ReceiverKind kind : {ReceiverKind::Cavity, ReceiverKind::Cylindrical}) {
        const auto names = variable_names(kind);
        for (std::size_t i = 0; i < kN; ++i)
            if (names[i] == name) return static_cast<int>(i);
    }
    if (name == "tower_height") return static_cast<int>(DesignVector::kTowerHeightIndex);
    return -1;
}

void set_design_value(RunConfig& c, std::size_t i, double v) {
    auto x = c.design.to_array();
    x[i] = v;
    c.design = DesignVector::from_array(x, c.design.kind());
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        auto num = [&t](std::string key, auto member) {
            t[std::move(key)] = [member](RunConfig& c, const Field& f) { member(c) = f.number(); };
        };
        num("plant.sigma_h", [](RunConfig& c) -> double& { return c.plant.sigma_h; });
        num("plant.L_h", [](RunConfig& c) -> double& { return c.plant.L_h; });
        num("plant.L_v", [](RunConfig& c) -> double& { return c.plant.L_v; });
        num("plant.reflectivity", [](RunConfig& c) -> double& { return c.plant.reflectivity; });
        num("plant.m_N", [](RunConfig& c) -> double& { return c.plant.m_N; });
        num("plant.m_W", [](RunConfig& c) -> double& { return c.plant.m_W; });
        num("plant.sigma_sun", [](RunConfig& c) -> double& { return c.plant.sigma_sun; });
        num("plant.eta_cycle", [](RunConfig& c) -> double& { return c.plant.eta_cycle; });
        num("plant.loss_coeff", [](RunConfig& c) -> double& { return c.plant.loss_coeff; });
        t["plant.latitude_deg"] = [](RunConfig& c, const Field& f) {
            c.plant.phi = f.number() * std::numbers::pi / 180.0;
        };
        num("cost.c_fixed", [](RunConfig& c) -> double& { return c.plant.cost.c_fixed; });
        num("cost.c_heliostat", [](RunConfig& c) -> double& { return c.plant.cost.c_heliostat; });
        num("cost.c_tower", [](RunConfig& c) -> double& { return c.plant.cost.c_tower; });
        num("cost.c_receiver", [](RunConfig& c) -> double& { return c.plant.cost.c_receiver; });

        num("layout.r_base", [](RunConfig& c) -> double& { return c.layout.r_base; });
        num("layout.r_min", [](RunConfig& c) -> double& { return c.layout.r_min; });
        num("layout.d_min", [](RunConfig& c) -> double& { return c.layout.d_min; });
        num("layout.n_overgen", [](RunConfig& c) -> double& { return c.layout.n_overgen; });
        t["layout.n_hel"] = [](RunConfig& c, const Field& f) { c.layout.n_hel = f.count(); };
        t["layout.extend_groups"] = [](RunConfig& c, const Field& f) { c.layout.extend_groups = f.boolean(); };
        t["layout.group_lines"] = [](RunConfig& c, const Field& f) {
            c.layout.group_lines.clear();
            for (double v : f.numbers()) {
                if (v != std::floor(v) || v < 1) f.fail("group line counts must be positive integers");
                c.layout.group_lines.push_back(static_cast<int>(v));
            }
        };

        t["optimizer.budget"] = [](RunConfig& c, const Field& f) { c.optimizer.budget = f.count(); };
        num("optimizer.tol_f", [](RunConfig& c) -> double& { return c.optimizer.tol_f; });
        num("optimizer.coord_step", [](RunConfig& c) -> double& { return c.optimizer.coord_step; });
        t["optimizer.refinements"] = [](RunConfig& c, const Field& f) {
            c.optimizer.refinements = static_cast<int>(f.count());
        };
        t["optimizer.seek_steps"] = [](RunConfig& c, const Field& f) { c.optimizer.seek.n_steps = f.count(); };
        num("optimizer.seek_scale", [](RunConfig& c) -> double& { return c.optimizer.seek.step_scale; });
        num("optimizer.t_rel", [](RunConfig& c) -> double& { return c.optimizer.seek.t_rel; });
        t["optimizer.literal_metropolis"] = [](RunConfig& c, const Field& f) {
            c.optimizer.seek.literal = f.boolean();
        };
        num("optimizer.grad_step", [](RunConfig& c) -> double& { return c.optimizer.grad_step; });
        num("optimizer.grad_tol", [](RunConfig& c) -> double& { return c.optimizer.grad_tol; });
        t["optimizer.ga_population"] = [](RunConfig& c, const Field& f) { c.optimizer.ga.n_tot = f.count(); };
        num("optimizer.ga_pc", [](RunConfig& c) -> double& { return c.optimizer.ga.p_c; });
        num("optimizer.ga_pm", [](RunConfig& c) -> double& { return c.optimizer.ga.p_m; });
        t["optimizer.ga_elite"] = [](RunConfig& c, const Field& f) { c.optimizer.ga.n_elite = f.count(); };
        t["optimizer.ga_block"] = [](RunConfig& c, const Field& f) {
            c.optimizer.ga.generations_per_block = f.count();
        };
        t["optimizer.ga_stall"] = [](RunConfig& c, const Field& f) { c.optimizer.ga.stall_window = f.count(); };

        num("analysis.epsilon", [](RunConfig& c) -> double& { return c.analysis.epsilon; });
        num("analysis.step_init", [](RunConfig& c) -> double& { return c.analysis.step_init; });
        t["analysis.trials"] = [](RunConfig& c, const Field& f) {
            c.analysis.steps.trials = static_cast<int>(f.count());
        };
        num("analysis.first_deriv_tol", [](RunConfig& c) -> double& { return c.analysis.steps.first_deriv_tol; });
        num("analysis.stability_tol", [](RunConfig& c) -> double& { return c.analysis.steps.stability_tol; });
        num("analysis.curvature_floor", [](RunConfig& c) -> double& { return c.analysis.steps.curvature_floor; });
        num("analysis.irrelevant_sigma", [](RunConfig& c) -> double& { return c.analysis.irrelevant_sigma; });
        num("analysis.rho_threshold", [](RunConfig& c) -> double& { return c.analysis.rho_threshold; });
        t["analysis.sigma_convention"] = [](RunConfig& c, const Field& f) {
            if (f.text == "exact")
                c.analysis.convention = sensitivity::SigmaConvention::Exact;
            else if (f.text == "literal")
                c.analysis.convention = sensitivity::SigmaConvention::Literal;
            else
                f.fail("sigma_convention must be exact or literal");
        };

        t["objective.kind"] = [](RunConfig& c, const Field& f) {
            if (f.text == "plant")
                c.objective = ObjectiveKind::Plant;
            else if (f.text == "quadratic")
                c.objective = ObjectiveKind::Quadratic;
            else
                f.fail("objective kind must be plant or quadratic");
        };
        num("objective.f0", [](RunConfig& c) -> double& { return c.quadratic.f0; });
        t["objective.center"] = [](RunConfig& c, const Field& f) {
            const auto v = f.numbers();
            if (v.size() != kN) f.fail("center needs 11 values");
            std::copy(v.begin(), v.end(), c.quadratic.center.begin());
        };
        t["objective.matrix"] = [](RunConfig& c, const Field& f) {
            auto v = f.numbers();
            if (v.size() == kN) {
                std::vector<double> m(kN * kN, 0.0);
                for (std::size_t i = 0; i < kN; ++i) m[i * kN + i] = v[i];
                v = std::move(m);
            }
            if (v.size() != kN * kN) f.fail("matrix needs 11 diagonal or 121 row-major values");
            c.quadratic.matrix = std::move(v);
        };
        t["run.insolation"] = [](RunConfig& c, const Field& f) { c.insolation = std::string(f.text); };
        return t;
    }();
    return table;
}

}  // namespace

std::pair<VariableArray, VariableArray> RunConfig::default_bounds(ReceiverKind kind) {
    VariableArray lo{1.0, 0.0, -20.0, -3.0, 0.0, 0.0, -0.5, 13.0, 60.0, 2.0, 0.0};
    VariableArray hi{15.0, 0.12, 20.0, 3.0, 10.0, 1.0, 0.5, 30.0, 250.0, 16.0, 1.2};
    if (kind == ReceiverKind::Cylindrical) {
        lo[10] = 2.0;
        hi[10] = 25.0;
    }
    return {lo, hi};
}

void RunConfig::validate() const {
    design.validate();
    plant.validate();
    layout.validate(plant.L_h);
    const auto x = design.to_array();
    for (std::size_t i = 0; i < kN; ++i) {
        if (!(lower[i] < upper[i])) throw InvalidArgument("empty bounds for variable " + std::to_string(i));
        if (x[i] < lower[i] || x[i] > upper[i])
            throw InvalidArgument("design value " + std::to_string(i) + " lies outside its bounds");
    }
    if (objective == ObjectiveKind::Quadratic && quadratic.matrix.size() != kN * kN)
        throw InvalidArgument("quadratic objective needs a matrix");
    optimizer.ga.validate();
    if (!(analysis.epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
}

RunConfig parse_config(std::string_view text) {
    RunConfig c;
    std::string section;
    std::map<std::string, Field> design_fields;
    std::map<std::string, Field> bound_fields;
    Field receiver_field;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view raw = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        const std::size_t hash = raw.find('#');
        if (hash != std::string_view::npos) raw = raw.substr(0, hash);
        const std::string_view line = trim(raw);
        if (line.empty()) continue;
        const int indent = static_cast<int>(raw.find_first_not_of(" \t")) + 1;

        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError("unterminated section header", line_no, indent);
            section = std::string(trim(line.substr(1, line.size() - 2)));
            static const char* known[] = {"design", "layout", "plant", "cost", "bounds",
                                          "optimizer", "analysis", "objective", "run"};
            if (std::find(std::begin(known), std::end(known), section) == std::end(known))
                throw ParseError("unknown section [" + section + "]", line_no, indent + 1);
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected key = value", line_no, indent);
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view after = line.substr(eq + 1);
        const std::size_t lead = after.find_first_not_of(" \t");
        Field value{trim(after), line_no, indent + static_cast<int>(eq + 1 + (lead == std::string_view::npos ? 0 : lead))};
        if (section.empty()) throw ParseError("key outside of any section", line_no, indent);
        if (value.text.empty()) value.fail("missing value for '" + key + "'");

        if (section == "design") {
            if (key == "receiver") {
                receiver_field = value;
            } else if (variable_index(key) >= 0) {
                design_fields[key] = value;
            } else {
                throw ParseError("unknown design variable '" + key + "'", line_no, indent);
            }
            continue;
        }
        if (section == "bounds") {
            if (variable_index(key) < 0) throw ParseError("unknown design variable '" + key + "'", line_no, indent);
            bound_fields[key] = value;
            continue;
        }
        const auto it = setters().find(section + "." + key);
        if (it == setters().end()) throw ParseError("unknown key '" + key + "' in [" + section + "]", line_no, indent);
        it->second(c, value);
    }

    // Receiver kind first, since it decides the last variable's meaning.
    if (!receiver_field.text.empty()) {
        try {
            const ReceiverKind kind = parse_receiver_kind(receiver_field.text);
            if (kind == ReceiverKind::Cylindrical) c.design.receiver = CylindricalReceiver{};
        } catch (const Error& e) {
            receiver_field.fail(e.what());
        }
    }
    const ReceiverKind kind = c.design.kind();
    const auto names = variable_names(kind);
    auto check_kind = [&](const std::string& key, const Field& f) {
        const int i = variable_index(key);
        if (i == 10 && names[10] != key) f.fail("'" + key + "' does not apply to a " + std::string(to_string(kind)) + " receiver");
        return static_cast<std::size_t>(i);
    };
    for (const auto& [key, f] : design_fields) set_design_value(c, check_kind(key, f), f.number());

    std::tie(c.lower, c.upper) = RunConfig::default_bounds(kind);
    for (const auto& [key, f] : bound_fields) {
        const std::size_t i = check_kind(key, f);
        const auto v = f.numbers();
        if (v.size() != 2 || !(v[0] < v[1])) f.fail("bounds need 'lo, hi' with lo < hi");
        c.lower[i] = v[0];
        c.upper[i] = v[1];
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    RunConfig c;
    try {
        c = parse_config(buf.str());
    } catch (const ParseError& e) {
        throw e.prefixed(path.string() + ":");
    }
    if (!c.insolation.empty() && c.insolation.is_relative()) c.insolation = path.parent_path() / c.insolation;
    return c;
}

std::string design_snippet(const DesignVector& design) {
    std::string out = "[design]\nreceiver = " + std::string(to_string(design.kind())) + "\n";
    const auto names = variable_names(design.kind());
    const auto x = design.to_array();
    for (std::size_t i = 0; i < kN; ++i) {
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof buf, x[i]);
        out += std::string(names[i]) + " = " + std::string(buf, res.ptr) + "\n";
    }
    return out;
}

}  // namespace heliotower
