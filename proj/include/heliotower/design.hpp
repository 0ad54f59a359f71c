#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <variant>

namespace heliotower {

enum class ReceiverKind { Cavity, Cylindrical };

/// North-facing circular aperture tilted down towards the field.
struct CavityReceiver {
    double tower_height = 120.0;  // [m]
    double radius = 8.0;          // aperture radius [m]
    double tilt = 0.4;            // aperture inclination [rad], 0 = vertical

    bool operator==(const CavityReceiver&) const = default;
};

/// Omnidirectional cylinder absorbing from every azimuth.
struct CylindricalReceiver {
    double tower_height = 140.0;  // [m]
    double radius = 8.0;          // [m]
    double height = 8.0;          // [m]

    bool operator==(const CylindricalReceiver&) const = default;
};

using Receiver = std::variant<CavityReceiver, CylindricalReceiver>;

/// The eleven optimization variables. Indices in the flat form follow the
/// member order below, with the receiver's three values last.
struct DesignVector {
    double a0 = 5.0;       // initial row spacing [m]
    double a1 = 0.03;      // row-spacing growth [-]
    double d_theta = 0.0;  // radial correction with azimuth [m/rad]
    double e_theta = 0.0;  // azimuthal spacing growth [m/rad]
    double epsilon = 1.0;  // transition extra distance [m]
    double delta = 0.1;    // transition distance growth [-]
    double b = 0.03;       // group start-spacing growth [-]
    double d0_1 = 17.0;    // first-line north azimuthal spacing [m]
    Receiver receiver = CavityReceiver{};

    static constexpr std::size_t kSize = 11;
    static constexpr std::size_t kLayoutVariables = 8;
    static constexpr std::size_t kTowerHeightIndex = 8;

    ReceiverKind kind() const noexcept;
    double tower_height() const noexcept;
    double receiver_radius() const noexcept;

    std::array<double, kSize> to_array() const noexcept;
    static DesignVector from_array(std::span<const double> values, ReceiverKind kind);

    /// Throws InvalidArgument when a field invariant is violated.
    void validate() const;

    bool operator==(const DesignVector&) const = default;
};

/// Absorbing area used by the loss and cost models: aperture disc for a
/// cavity, lateral surface for a cylinder.
double receiver_area(const Receiver& receiver) noexcept;

/// Short variable names in flat-vector order ("a0", ..., "e_L" or "h_r").
std::array<std::string_view, DesignVector::kSize> variable_names(ReceiverKind kind) noexcept;

std::string_view to_string(ReceiverKind kind) noexcept;
ReceiverKind parse_receiver_kind(std::string_view text);

}  // namespace heliotower
