#pragma once

#include <span>

#include "heliotower/design.hpp"
#include "heliotower/geometry.hpp"

namespace heliotower {

/// Cosine of the incidence angle on a tracking mirror: cos of half the angle
/// between the sun direction and the heliostat-to-target direction.
double cosine_efficiency(const Vec3& sun, const Vec3& heliostat, const Vec3& target) noexcept;

/// Clear-day atmospheric transmittance over a slant range [m]: quadratic up to
/// 1000 m, exponential beyond, clamped to [0, 1].
double attenuation(double slant_range) noexcept;

/// Standard deviation [m] of the reflected image at the receiver, combining
/// twice the mirror slope error with the sunshape (both in mrad).
double beam_sigma(double sigma_h, double sigma_sun, double slant_range);

/// Fraction of a circular Gaussian of width sigma inside a centred disc.
double disc_capture(double radius, double sigma);

/// Aperture normal of a cavity, pointing north and tilted down by `tilt`.
Vec3 aperture_normal(double tilt) noexcept;

/// Interception efficiency for a heliostat seen along `beam`, the unit vector
/// from the receiver centre to the heliostat. Throws on non-positive sigma.
double interception(double sigma_h, double sigma_sun, double slant_range, const Receiver& receiver,
                    const Vec3& beam);

/// Receiver and power-block efficiency at one time sample.
double receiver_cycle_efficiency(double power_in, double receiver_area, double t_amb,
                                 double eta_cycle, double loss_coeff) noexcept;

/// Mirror pose of a tracking heliostat: centre, unit normal (bisector of sun
/// and target directions), horizontal width axis and in-plane height axis.
struct MirrorFrame {
    Vec3 center;
    Vec3 normal;
    Vec3 width_axis;
    Vec3 height_axis;
};

MirrorFrame tracking_frame(const Vec3& center, const Vec3& sun, const Vec3& target_dir) noexcept;

/// Lost mirror fractions; their sum can exceed one when occluders overlap.
struct OcclusionFractions {
    double shadowed = 0.0;
    double blocked = 0.0;
};

/// Overlap of each neighbour's mirror, projected along the sun ray (shadow)
/// and along the reflected ray (block), with the heliostat's own mirror.
OcclusionFractions occlusion_fractions(const MirrorFrame& heliostat,
                                       std::span<const MirrorFrame> neighbors, const Vec3& sun,
                                       const Vec3& target_dir, double L_h, double L_v) noexcept;

/// 1 - (shadowed + blocked), clamped to [0, 1].
double shadow_block_factor(const MirrorFrame& heliostat, std::span<const MirrorFrame> neighbors,
                           const Vec3& sun, const Vec3& target_dir, double L_h,
                           double L_v) noexcept;

}  // namespace heliotower
