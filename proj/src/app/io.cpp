#include "heliotower/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "heliotower/error.hpp"
#include "json.hpp"

namespace heliotower {

namespace {

using json = nlohmann::ordered_json;

struct Cell {
    std::string text;
    int column = 0;
};

// Minimal CSV: comma-separated, no quoting; blank lines and # comments skipped.
std::vector<std::pair<int, std::vector<Cell>>> parse_csv(const std::string& text, const std::string& name) {
    std::vector<std::pair<int, std::vector<Cell>>> rows;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        std::vector<Cell> cells;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            std::string raw = line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            const auto b = raw.find_first_not_of(" \t");
            const auto e = raw.find_last_not_of(" \t");
            cells.push_back({b == std::string::npos ? std::string() : raw.substr(b, e - b + 1),
                             static_cast<int>(pos + (b == std::string::npos ? 0 : b)) + 1});
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        rows.emplace_back(line_no, std::move(cells));
    }
    if (rows.empty()) throw ParseError(name + ": empty file");
    return rows;
}

double cell_number(const Cell& c, int line, const std::string& name) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(c.text.data(), c.text.data() + c.text.size(), v);
    if (c.text.empty() || ec != std::errc{} || ptr != c.text.data() + c.text.size() || !std::isfinite(v))
        throw ParseError(name + ": expected a number, got '" + c.text + "'", line, c.column);
    return v;
}

void expect_header(const std::pair<int, std::vector<Cell>>& row, const std::vector<std::string>& names,
                   const std::string& file) {
    const auto& cells = row.second;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i >= cells.size() || cells[i].text != names[i])
            throw ParseError(file + ": expected column '" + names[i] + "'", row.first,
                             i < cells.size() ? cells[i].column : 1);
    }
    if (cells.size() != names.size())
        throw ParseError(file + ": unexpected extra column", row.first, cells[names.size()].column);
}

int month_of(const Cell& c, int line, const std::string& name) {
    const double m = cell_number(c, line, name);
    if (m != std::floor(m) || m < 1 || m > 12) throw ParseError(name + ": month must be 1..12", line, c.column);
    return static_cast<int>(m) - 1;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json design_object(const Point& x, ReceiverKind kind) {
    json o = json::object();
    const auto names = variable_names(kind);
    for (std::size_t i = 0; i < x.size() && i < names.size(); ++i) o[std::string(names[i])] = x[i];
    return o;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

InsolationTable parse_insolation(const std::string& hourly_csv, const std::string& months_csv) {
    InsolationTable table;
    for (auto& m : table.months) m.days = 0;

    const auto months = parse_csv(months_csv, "months.csv");
    expect_header(months.front(), {"month", "clear_ratio", "days"}, "months.csv");
    std::array<bool, 12> seen{};
    for (std::size_t r = 1; r < months.size(); ++r) {
        const auto& [line, cells] = months[r];
        if (cells.size() != 3) throw ParseError("months.csv: expected 3 columns", line, 1);
        const int m = month_of(cells[0], line, "months.csv");
        if (seen[static_cast<std::size_t>(m)]) throw ParseError("months.csv: duplicate month", line, cells[0].column);
        seen[static_cast<std::size_t>(m)] = true;
        auto& month = table.months[static_cast<std::size_t>(m)];
        month.clear_ratio = cell_number(cells[1], line, "months.csv");
        const double days = cell_number(cells[2], line, "months.csv");
        if (days != std::floor(days)) throw ParseError("months.csv: days must be an integer", line, cells[2].column);
        month.days = static_cast<int>(days);
    }
    for (std::size_t m = 0; m < 12; ++m)
        if (!seen[m]) throw ParseError("months.csv: month " + std::to_string(m + 1) + " is missing");

    const auto hourly = parse_csv(hourly_csv, "hourly.csv");
    expect_header(hourly.front(), {"month", "hour", "dni", "t_amb"}, "hourly.csv");
    for (std::size_t r = 1; r < hourly.size(); ++r) {
        const auto& [line, cells] = hourly[r];
        if (cells.size() != 4) throw ParseError("hourly.csv: expected 4 columns", line, 1);
        auto& month = table.months[static_cast<std::size_t>(month_of(cells[0], line, "hourly.csv"))];
        const double hour = cell_number(cells[1], line, "hourly.csv");
        if (!month.hours.empty() && !(hour > month.hours.back()))
            throw ParseError("hourly.csv: hours must increase within a month", line, cells[1].column);
        month.hours.push_back(hour);
        month.dni.push_back(cell_number(cells[2], line, "hourly.csv"));
        month.t_amb.push_back(cell_number(cells[3], line, "hourly.csv"));
    }
    table.validate();
    return table;
}

InsolationTable read_insolation(const std::filesystem::path& path) {
    std::filesystem::path hourly = path;
    std::filesystem::path months;
    if (std::filesystem::is_directory(path)) {
        hourly = path / "hourly.csv";
        months = path / "months.csv";
    } else {
        months = path.parent_path() / "months.csv";
    }
    if (!std::filesystem::exists(hourly)) throw ParseError("insolation file not found: " + hourly.string());
    if (!std::filesystem::exists(months)) throw ParseError("insolation file not found: " + months.string());
    try {
        return parse_insolation(read_file(hourly), read_file(months));
    } catch (const ParseError& e) {
        throw e.prefixed(path.string() + ": ");
    }
}

void write_insolation(const std::filesystem::path& dir, const InsolationTable& table) {
    std::ostringstream h, m;
    h << "month,hour,dni,t_amb\n";
    m << "month,clear_ratio,days\n";
    for (std::size_t k = 0; k < 12; ++k) {
        const MonthInsolation& month = table.months[k];
        for (std::size_t i = 0; i < month.hours.size(); ++i)
            h << k + 1 << ',' << format_double(month.hours[i]) << ',' << format_double(month.dni[i]) << ','
              << format_double(month.t_amb[i]) << '\n';
        m << k + 1 << ',' << format_double(month.clear_ratio) << ',' << month.days << '\n';
    }
    write_text_file(dir / "hourly.csv", h.str());
    write_text_file(dir / "months.csv", m.str());
}

void write_layout_csv(std::ostream& out, const FieldLayout& layout) {
    out << "id,theta_rad,radius_m,x_m,y_m,z_m,group,line,annual_kwh,selected\n";
    for (const Heliostat& h : layout.heliostats)
        out << h.id << ',' << format_double(h.theta) << ',' << format_double(h.radius) << ',' << format_double(h.x)
            << ',' << format_double(h.y) << ',' << format_double(h.z) << ',' << h.group << ',' << h.line << ','
            << format_double(h.annual_energy) << ',' << (h.selected ? 1 : 0) << '\n';
}

void write_energy_csv(std::ostream& out, const Evaluation& e) {
    out << "id,selected,annual_kwh,cosine,shadow_block,attenuation,interception,reflectivity\n";
    const auto& hs = e.layout.heliostats;
    for (std::size_t i = 0; i < hs.size(); ++i) {
        const EfficiencyBreakdown& f = e.energy.factors[i];
        out << hs[i].id << ',' << (hs[i].selected ? 1 : 0) << ',' << format_double(e.energy.heliostat_energy[i]) << ','
            << format_double(f.cosine) << ',' << format_double(f.shadow_block) << ','
            << format_double(f.attenuation) << ',' << format_double(f.interception) << ','
            << format_double(f.reflectivity) << '\n';
    }
}

void write_convergence_log(std::ostream& out, const OptResult& result, ReceiverKind kind) {
    for (const TracePoint& t : result.trace) {
        json rec;
        rec["eval"] = t.eval_index;
        rec["algorithm"] = result.algorithm;
        rec["f"] = t.f;
        rec["best"] = t.best;
        rec["x"] = design_object(t.x, kind);
        out << rec.dump() << '\n';
    }
}

void write_generation_log(std::ostream& out, const OptResult& result, ReceiverKind kind) {
    for (const GenerationRecord& g : result.generations) {
        json rec;
        rec["generation"] = g.generation;
        rec["best"] = g.best;
        rec["mean"] = g.mean;
        rec["gene_variance"] = design_object(g.gene_variance, kind);
        out << rec.dump() << '\n';
    }
}

void write_comparison_csv(std::ostream& out, const std::vector<OptResult>& results, ReceiverKind kind,
                          const std::vector<double>& sigma) {
    out << "variable";
    for (const OptResult& r : results) {
        std::string name = r.algorithm;
        for (char& c : name)
            if (c == '-') c = '_';
        out << ',' << name;
    }
    if (!sigma.empty()) out << ",sigma";
    out << '\n';
    const auto names = variable_names(kind);
    for (std::size_t i = 0; i < names.size(); ++i) {
        out << names[i];
        for (const OptResult& r : results) out << ',' << format_double(r.x_best[i]);
        if (!sigma.empty()) out << ',' << format_double(sigma[i]);
        out << '\n';
    }
    out << "objective";
    for (const OptResult& r : results) out << ',' << format_double(r.f_best);
    if (!sigma.empty()) out << ',';
    out << '\n';
    out << "evaluations";
    for (const OptResult& r : results) out << ',' << r.n_evals;
    if (!sigma.empty()) out << ',';
    out << '\n';
}

void write_sensitivity_csv(std::ostream& out, const sensitivity::HessianReport& report, ReceiverKind kind) {
    out << "variable,value_at_min,step,sigma,first_deriv_residual,stability_ratio\n";
    const auto names = variable_names(kind);
    for (Eigen::Index i = 0; i < report.x_star.size(); ++i) {
        const auto k = static_cast<std::size_t>(i);
        out << names[k] << ',' << format_double(report.x_star[i]) << ',' << format_double(report.steps[i]) << ','
            << format_double(report.sigma[i]) << ',' << format_double(report.diagnostics[k].first_deriv_residual)
            << ',' << format_double(report.diagnostics[k].stability_ratio) << '\n';
    }
}

void write_rho_csv(std::ostream& out, const sensitivity::HessianReport& report, ReceiverKind kind) {
    const auto names = variable_names(kind);
    const Eigen::Index n = report.rho.rows();
    out << "variable";
    for (Eigen::Index j = 0; j < n; ++j) out << ',' << names[static_cast<std::size_t>(j)];
    out << '\n';
    for (Eigen::Index i = 0; i < n; ++i) {
        out << names[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < n; ++j) out << ',' << format_double(report.rho(i, j));
        out << '\n';
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("failed writing " + path.string());
}

}  // namespace heliotower
