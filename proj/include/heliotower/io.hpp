#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "heliotower/design.hpp"
#include "heliotower/energy.hpp"
#include "heliotower/optimize.hpp"
#include "heliotower/plant.hpp"
#include "heliotower/sensitivity.hpp"

namespace heliotower {

// Insolation files:
//   hourly.csv  month,hour,dni,t_amb   (month 1-12, solar hour, W/m^2, C)
//   months.csv  month,clear_ratio,days
// `path` is either a directory holding both or the hourly file, in which
// case months.csv is looked up next to it.
InsolationTable read_insolation(const std::filesystem::path& path);
InsolationTable parse_insolation(const std::string& hourly_csv, const std::string& months_csv);
void write_insolation(const std::filesystem::path& dir, const InsolationTable& table);

/// id,theta_rad,radius_m,x_m,y_m,z_m,group,line,annual_kwh,selected
void write_layout_csv(std::ostream& out, const FieldLayout& layout);

/// id,selected,annual_kwh,cosine,shadow_block,attenuation,interception,reflectivity
void write_energy_csv(std::ostream& out, const Evaluation& evaluation);

/// One JSON object per line:
///   {"eval":1,"algorithm":"coord","f":0.18,"best":0.18,"x":{"a0":5.0,...}}
void write_convergence_log(std::ostream& out, const OptResult& result, ReceiverKind kind);

/// Per-generation GA record: {"generation":0,"best":..,"mean":..,"gene_variance":{...}}
void write_generation_log(std::ostream& out, const OptResult& result, ReceiverKind kind);

/// variable,<algorithm>...,sigma
void write_comparison_csv(std::ostream& out, const std::vector<OptResult>& results, ReceiverKind kind,
                          const std::vector<double>& sigma);

/// variable,value_at_min,step,sigma,first_deriv_residual,stability_ratio
void write_sensitivity_csv(std::ostream& out, const sensitivity::HessianReport& report, ReceiverKind kind);

/// Square matrix with a header row and column of variable names.
void write_rho_csv(std::ostream& out, const sensitivity::HessianReport& report, ReceiverKind kind);

/// Writes `text` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Shortest text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace heliotower
