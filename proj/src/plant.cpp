#include "heliotower/plant.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "heliotower/error.hpp"
#include "heliotower/sun.hpp"

namespace heliotower {

namespace {
constexpr std::array<int, 12> kDaysInMonth{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
}

int days_in_month(int month) noexcept { return kDaysInMonth[static_cast<std::size_t>(month)]; }

int design_day_of_year(int month) noexcept {
    int day = 21;
    for (int m = 0; m < month; ++m) day += kDaysInMonth[static_cast<std::size_t>(m)];
    return day;
}

void PlantParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw InvalidArgument(std::string(name) + " must be positive and finite");
        }
    };
    positive(sigma_h, "sigma_h");
    positive(L_h, "L_h");
    positive(L_v, "L_v");
    positive(sigma_sun, "sigma_sun");
    positive(loss_coeff, "loss_coeff");
    if (!(reflectivity > 0.0 && reflectivity <= 1.0)) {
        throw InvalidArgument("reflectivity must lie in (0, 1]");
    }
    if (!(eta_cycle > 0.0 && eta_cycle <= 1.0)) {
        throw InvalidArgument("eta_cycle must lie in (0, 1]");
    }
    if (!std::isfinite(phi) || !std::isfinite(m_N) || !std::isfinite(m_W)) {
        throw InvalidArgument("site parameters must be finite");
    }
    if (cost.c_fixed < 0 || cost.c_heliostat < 0 || cost.c_tower < 0 || cost.c_receiver < 0) {
        throw InvalidArgument("cost coefficients must be non-negative");
    }
}

void InsolationTable::validate() const {
    for (std::size_t m = 0; m < months.size(); ++m) {
        const auto& month = months[m];
        const std::string where = "month " + std::to_string(m + 1) + ": ";
        if (month.hours.empty()) throw ParseError(where + "no hourly samples");
        if (month.dni.size() != month.hours.size() || month.t_amb.size() != month.hours.size()) {
            throw ParseError(where + "hourly columns have different lengths");
        }
        for (std::size_t i = 0; i < month.hours.size(); ++i) {
            if (!std::isfinite(month.hours[i]) || !std::isfinite(month.dni[i]) ||
                !std::isfinite(month.t_amb[i])) {
                throw ParseError(where + "non-finite sample");
            }
            if (month.dni[i] < 0.0) throw ParseError(where + "negative DNI");
            if (i > 0 && !(month.hours[i] > month.hours[i - 1])) {
                throw ParseError(where + "hours must be strictly increasing");
            }
        }
        if (!(month.clear_ratio >= 0.0 && month.clear_ratio <= 1.0)) {
            throw ParseError(where + "clear_ratio must lie in [0, 1]");
        }
        if (month.days <= 0 || month.days > 31) throw ParseError(where + "days must lie in 1..31");
    }
}

InsolationTable synthetic_insolation(double phi, double first_hour, double last_hour) {
    // Monthly clear-day ratios and mean temperatures of a dry mid-latitude site.
    constexpr std::array<double, 12> kClear{0.55, 0.60, 0.66, 0.70, 0.78, 0.86,
                                            0.92, 0.90, 0.80, 0.66, 0.56, 0.52};
    constexpr std::array<double, 12> kMeanTemp{10.5, 12.0, 15.0, 17.0, 21.0, 25.5,
                                               28.5, 28.5, 25.5, 20.5, 15.0, 11.5};
    InsolationTable table;
    for (int m = 0; m < 12; ++m) {
        auto& month = table.months[static_cast<std::size_t>(m)];
        month.clear_ratio = kClear[static_cast<std::size_t>(m)];
        month.days = days_in_month(m);
        const int day = design_day_of_year(m);
        for (double h = first_hour; h <= last_hour + 1e-9; h += 1.0) {
            const SunPosition sun = sun_position(phi, day, h);
            double dni = 0.0;
            if (sun.elevation > 0.0) {
                // Meinel clear-sky model.
                const double air_mass = 1.0 / std::sin(sun.elevation);
                dni = 1353.0 * std::pow(0.7, std::pow(air_mass, 0.678));
            }
            month.hours.push_back(h);
            month.dni.push_back(std::round(dni * 10.0) / 10.0);
            const double swing = 6.0 * std::sin(std::numbers::pi * (h - 9.0) / 12.0);
            month.t_amb.push_back(
                std::round((kMeanTemp[static_cast<std::size_t>(m)] + swing) * 10.0) / 10.0);
        }
    }
    return table;
}

}  // namespace heliotower
