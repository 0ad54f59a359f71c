#pragma once

#include "heliotower/geometry.hpp"

namespace heliotower {

struct SunPosition {
    double azimuth;    // [rad], 0 at north, clockwise (east = pi/2)
    double elevation;  // [rad], negative below the horizon
};

/// Solar declination [rad] (Cooper's formula).
double declination(int day_of_year) noexcept;

/// Sun position from latitude, day of year and solar hour (12 = solar noon).
SunPosition sun_position(double phi, int day_of_year, double solar_hour) noexcept;

/// Unit vector pointing from the plant towards the sun.
Vec3 sun_vector(const SunPosition& sun) noexcept;

}  // namespace heliotower
