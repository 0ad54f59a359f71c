#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace heliotower {

/// Annualized cost coefficients. Total cost is
/// fixed + heliostat * mirror_area + tower * h_T^1.5 + receiver * receiver_area.
struct CostModel {
    double c_fixed = 1.5e6;
    double c_heliostat = 28.0;   // per m^2 of mirror
    double c_tower = 1200.0;     // per m^1.5 of tower height
    double c_receiver = 2500.0;  // per m^2 of receiver area
};

/// Fixed plant parameters: heliostat optics and geometry, site, power block.
struct PlantParams {
    double sigma_h = 2.9;        // heliostat optical error [mrad]
    double L_h = 12.0;           // heliostat width [m]
    double L_v = 10.0;           // heliostat height [m]
    double reflectivity = 0.88;  // [-]
    double phi = 0.6527;         // latitude [rad]
    double m_N = 0.0;            // north-south slope, z rises northwards
    double m_W = 0.0;            // east-west slope, z rises westwards
    double sigma_sun = 4.65;     // sunshape width [mrad]
    double eta_cycle = 0.38;     // power-block peak efficiency [-]
    double loss_coeff = 30.0;    // receiver loss per receiver area [kW/m^2]
    CostModel cost;

    double mirror_area() const noexcept { return L_h * L_v; }

    /// Terrain elevation [m] at a plant-frame ground point.
    double terrain_height(double x, double y) const noexcept { return m_N * y - m_W * x; }

    void validate() const;
};

/// Hourly samples on the 21st of one month plus the monthly statistics that
/// scale the design day to the whole month.
struct MonthInsolation {
    std::vector<double> hours;  // solar time [h], strictly increasing
    std::vector<double> dni;    // [W/m^2]
    std::vector<double> t_amb;  // [C]
    double clear_ratio = 1.0;   // [0, 1]
    int days = 30;
};

struct InsolationTable {
    std::array<MonthInsolation, 12> months;

    /// Throws ParseError describing the first violated invariant.
    void validate() const;
};

/// Day-of-year (1-based, non-leap) of the 21st of a 0-based month.
int design_day_of_year(int month) noexcept;

/// Days per month of a non-leap year.
int days_in_month(int month) noexcept;

/// Clear-sky design-day table built from a simple air-mass attenuation model.
/// Used for the shipped sample data and as a deterministic test fixture.
InsolationTable synthetic_insolation(double phi, double first_hour = 4.0, double last_hour = 20.0);

}  // namespace heliotower
