#include "heliotower/sun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace heliotower {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kMaxDeclination = 23.45 * kPi / 180.0;
}  // namespace

double declination(int day_of_year) noexcept {
    return kMaxDeclination * std::sin(2.0 * kPi * (284.0 + day_of_year) / 365.0);
}

SunPosition sun_position(double phi, int day_of_year, double solar_hour) noexcept {
    const double decl = declination(day_of_year);
    const double omega = (solar_hour - 12.0) * kPi / 12.0;
    const double sin_elev =
        std::sin(phi) * std::sin(decl) + std::cos(phi) * std::cos(decl) * std::cos(omega);
    const double elevation = std::asin(std::clamp(sin_elev, -1.0, 1.0));
    // East component is positive before noon (omega < 0).
    const double east = -std::cos(decl) * std::sin(omega);
    const double north =
        std::sin(decl) * std::cos(phi) - std::cos(decl) * std::sin(phi) * std::cos(omega);
    double azimuth = std::atan2(east, north);
    if (azimuth < 0.0) azimuth += 2.0 * kPi;
    return {azimuth, elevation};
}

Vec3 sun_vector(const SunPosition& sun) noexcept {
    const double ce = std::cos(sun.elevation);
    return {ce * std::sin(sun.azimuth), ce * std::cos(sun.azimuth), std::sin(sun.elevation)};
}

}  // namespace heliotower
