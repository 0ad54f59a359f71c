#include "heliotower/design.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "heliotower/error.hpp"

namespace heliotower {

ReceiverKind DesignVector::kind() const noexcept {
    return std::holds_alternative<CavityReceiver>(receiver) ? ReceiverKind::Cavity
                                                            : ReceiverKind::Cylindrical;
}

double DesignVector::tower_height() const noexcept {
    return std::visit([](const auto& r) { return r.tower_height; }, receiver);
}

double DesignVector::receiver_radius() const noexcept {
    return std::visit([](const auto& r) { return r.radius; }, receiver);
}

std::array<double, DesignVector::kSize> DesignVector::to_array() const noexcept {
    std::array<double, kSize> v{a0, a1, d_theta, e_theta, epsilon, delta, b, d0_1};
    if (const auto* cav = std::get_if<CavityReceiver>(&receiver)) {
        v[8] = cav->tower_height;
        v[9] = cav->radius;
        v[10] = cav->tilt;
    } else {
        const auto& cyl = std::get<CylindricalReceiver>(receiver);
        v[8] = cyl.tower_height;
        v[9] = cyl.radius;
        v[10] = cyl.height;
    }
    return v;
}

DesignVector DesignVector::from_array(std::span<const double> v, ReceiverKind kind) {
    if (v.size() != kSize) {
        throw InvalidArgument("design vector needs " + std::to_string(kSize) + " values, got " +
                              std::to_string(v.size()));
    }
    DesignVector d;
    d.a0 = v[0];
    d.a1 = v[1];
    d.d_theta = v[2];
    d.e_theta = v[3];
    d.epsilon = v[4];
    d.delta = v[5];
    d.b = v[6];
    d.d0_1 = v[7];
    if (kind == ReceiverKind::Cavity) {
        d.receiver = CavityReceiver{v[8], v[9], v[10]};
    } else {
        d.receiver = CylindricalReceiver{v[8], v[9], v[10]};
    }
    return d;
}

void DesignVector::validate() const {
    for (double x : to_array()) {
        if (!std::isfinite(x)) throw InvalidArgument("design vector contains a non-finite value");
    }
    if (a0 < 0.0) throw InvalidArgument("a0 must be >= 0");
    if (a1 <= -1.0) throw InvalidArgument("a1 must be > -1");
    if (b <= -1.0) throw InvalidArgument("b must be > -1");
    if (d0_1 <= 0.0) throw InvalidArgument("d0_1 must be > 0");
    if (tower_height() <= 0.0) throw InvalidArgument("tower height must be > 0");
    if (receiver_radius() <= 0.0) throw InvalidArgument("receiver radius must be > 0");
    if (const auto* cav = std::get_if<CavityReceiver>(&receiver)) {
        if (cav->tilt < 0.0 || cav->tilt > std::numbers::pi / 2) {
            throw InvalidArgument("aperture tilt must lie in [0, pi/2]");
        }
    } else if (std::get<CylindricalReceiver>(receiver).height <= 0.0) {
        throw InvalidArgument("receiver height must be > 0");
    }
}

double receiver_area(const Receiver& receiver) noexcept {
    constexpr double pi = std::numbers::pi;
    if (const auto* cav = std::get_if<CavityReceiver>(&receiver)) {
        return pi * cav->radius * cav->radius;
    }
    const auto& cyl = std::get<CylindricalReceiver>(receiver);
    return 2.0 * pi * cyl.radius * cyl.height;
}

std::array<std::string_view, DesignVector::kSize> variable_names(ReceiverKind kind) noexcept {
    return {"a0", "a1", "d_theta", "e_theta", "epsilon", "delta", "b", "d0_1", "h_T", "r",
            kind == ReceiverKind::Cavity ? "e_L" : "h_r"};
}

std::string_view to_string(ReceiverKind kind) noexcept {
    return kind == ReceiverKind::Cavity ? "cavity" : "cylindrical";
}

ReceiverKind parse_receiver_kind(std::string_view text) {
    if (text == "cavity") return ReceiverKind::Cavity;
    if (text == "cylindrical" || text == "cylinder") return ReceiverKind::Cylindrical;
    throw InvalidArgument("unknown receiver kind '" + std::string(text) + "'");
}

}  // namespace heliotower
