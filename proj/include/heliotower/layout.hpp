#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "heliotower/design.hpp"
#include "heliotower/plant.hpp"

namespace heliotower {

struct LayoutConfig {
    double r_base = 100.0;  // first-line distance to the tower at theta = 0 [m]
    double r_min = 6.5;     // minimal radial spacing between consecutive lines [m]
    double d_min = 13.0;    // minimal azimuthal arc spacing within a line [m]
    std::vector<int> group_lines{2, 3, 3, 4, 4, 5, 5, 6, 6, 7, 7};
    bool extend_groups = true;  // continue the 2-3-3-4-4-5-... pattern past the list
    std::size_t n_hel = 900;
    double n_overgen = 1.5;

    /// Lines in group `g`, or 0 when the list is exhausted and not extended.
    int lines_in_group(std::size_t g) const noexcept;

    /// Heliostats to generate before stopping: ceil(n_hel * n_overgen).
    std::size_t generation_target() const noexcept;

    void validate(double heliostat_width) const;
};

struct Heliostat {
    int id = 0;
    double theta = 0.0;   // azimuth [rad], 0 at north, clockwise
    double radius = 0.0;  // horizontal distance to the tower [m]
    double x = 0.0;       // east [m]
    double y = 0.0;       // north [m]
    double z = 0.0;       // terrain elevation at the heliostat foot [m]
    int group = 0;
    int line = 0;         // index within the group
    double annual_energy = 0.0;  // [kWh], filled after evaluation
    bool selected = false;
};

struct FieldLayout {
    std::vector<Heliostat> heliostats;
    DesignVector design;
    LayoutConfig config;

    std::size_t selected_count() const noexcept;
};

/// Radial profile of one heliostat line: base radius plus the azimuthal
/// correction. Azimuths whose radius falls below `r_floor` host no heliostat.
struct LineShape {
    double base_radius = 0.0;
    double d_theta = 0.0;
    double r_floor = 0.0;

    double radius_at(double theta) const noexcept;
};

/// Base radii of `n_lines` consecutive lines starting at r_base, each at least
/// r_min beyond its predecessor.
std::vector<double> radial_distances(double a0, double a1, double r_base, double r_min,
                                     std::size_t n_lines);

/// Radial increment for azimuth theta in [0, 2pi); symmetric about south.
double azimuthal_shift(double d_theta, double theta) noexcept;

/// Extra clearance added in front of the first line of a group. `r_prev` is the
/// radius of the line just before the transition.
double transition_gap(double a0, double a1, double r_prev, double delta, double epsilon);

/// North spacing of the next group from the previous one.
double group_start_spacing(double b, double d0_prev);

/// Arc spacing between two heliostats measured at the smaller radius.
double arc_spacing(double theta_a, double radius_a, double theta_b, double radius_b) noexcept;

/// First line of a group: one heliostat at north, then outward east and west
/// with the spacing recursion D_k = max(D_{k-1} + e_theta * theta_{k-1}, d_min).
/// Returned heliostats carry theta and radius only, sorted by theta.
std::vector<Heliostat> place_group_first_line(double d0, double e_theta, const LineShape& shape,
                                              double d_min);

/// Radially staggered line: each heliostat sits at the mean azimuth of two
/// adjacent heliostats of `prev`. Pairs separated by an open gap (more than
/// three times the typical spacing) are skipped, as are candidates closer than
/// d_min to an already placed one.
std::vector<Heliostat> place_staggered_line(std::span<const Heliostat> prev,
                                            const LineShape& shape, double d_min);

/// Expands a design into a field with at least config.generation_target()
/// heliostats. Throws CapacityError when the group list cannot host them.
FieldLayout generate_field(const DesignVector& design, const PlantParams& params,
                           const LayoutConfig& config);

/// Flags the n_hel heliostats with the highest energy. Ties go to the smaller
/// radius, then the smaller angular distance from north, then the smaller id.
/// Also copies the energies into the heliostat records.
FieldLayout select_top(FieldLayout layout, std::span<const double> energy, std::size_t n_hel);

/// Index order used by select_top (best first).
std::vector<std::size_t> rank_heliostats(std::span<const Heliostat> heliostats,
                                         std::span<const double> energy);

}  // namespace heliotower
