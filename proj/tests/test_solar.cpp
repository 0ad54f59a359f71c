#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "doctest.h"
#include "heliotower/energy.hpp"
#include "heliotower/error.hpp"
#include "heliotower/optics.hpp"
#include "heliotower/sun.hpp"

using namespace heliotower;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

// Frozen values from tests/oracles/oracles.py.
constexpr double kSolsticeNoonElevation = 1.3800722463494841;  // phi = 0.6, day 172
constexpr double kAttenuation1000 = 0.89531000000000005;
constexpr double kDiscAtSigma = 0.39346934028736658;

InsolationTable constant_table(double dni, double first, double last, double clear) {
    InsolationTable t;
    for (int m = 0; m < 12; ++m) {
        auto& month = t.months[static_cast<std::size_t>(m)];
        month.days = days_in_month(m);
        month.clear_ratio = clear;
        for (double h = first; h <= last; h += 1.0) {
            month.hours.push_back(h);
            month.dni.push_back(dni);
            month.t_amb.push_back(25.0);
        }
    }
    return t;
}

FieldLayout single_heliostat(double x, double y) {
    FieldLayout f;
    Heliostat h;
    h.x = x;
    h.y = y;
    h.radius = std::hypot(x, y);
    h.theta = std::atan2(x, y);
    if (h.theta < 0) h.theta += 2 * kPi;
    f.heliostats.push_back(h);
    return f;
}

// Fraction of sample points of the heliostat mirror whose ray along `dir`
// hits the neighbour's mirror rectangle.
double sampled_fraction(const MirrorFrame& h, const MirrorFrame& nb, const Vec3& dir, double L_h, double L_v,
                        int grid) {
    int hit = 0;
    const double dn = dot(dir, nb.normal);
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            const double u = ((i + 0.5) / grid - 0.5) * L_h;
            const double v = ((j + 0.5) / grid - 0.5) * L_v;
            const Vec3 p = h.center + h.width_axis * u + h.height_axis * v;
            if (std::fabs(dn) < 1e-12) continue;
            const double tau = dot(nb.center - p, nb.normal) / dn;
            if (tau <= 0.0) continue;
            const Vec3 q = p + dir * tau - nb.center;
            if (std::fabs(dot(q, nb.width_axis)) <= 0.5 * L_h && std::fabs(dot(q, nb.height_axis)) <= 0.5 * L_v)
                ++hit;
        }
    }
    return static_cast<double>(hit) / (grid * grid);
}

}  // namespace

TEST_CASE("sun position") {
    // day 81: Cooper declination vanishes
    CHECK(std::fabs(declination(81)) < 1e-12);
    auto s = sun_position(0.6, 81, 12.0);
    CHECK(s.elevation == Approx(kPi / 2 - 0.6).epsilon(1e-12));
    s = sun_position(0.0, 81, 6.0);
    CHECK(std::fabs(s.elevation) < 1e-12);
    CHECK(s.azimuth == Approx(kPi / 2));  // sunrise due east
    s = sun_position(0.6, 172, 12.0);
    CHECK(s.elevation == Approx(kSolsticeNoonElevation).epsilon(1e-12));
    CHECK(s.elevation <= kPi / 2);
    // night
    CHECK(sun_position(0.6, 172, 0.0).elevation < 0);
    const Vec3 v = sun_vector(sun_position(0.6, 100, 9.3));
    CHECK(norm(v) == Approx(1.0).epsilon(1e-14));
    CHECK(v.x > 0);  // morning sun in the east
}

TEST_CASE("cosine efficiency") {
    const Vec3 h{0, 0, 0};
    CHECK(cosine_efficiency({0, 0, 1}, h, {0, 0, 50}) == Approx(1.0));
    CHECK(cosine_efficiency({1, 0, 0}, h, {0, 0, 50}) == Approx(std::cos(kPi / 4)).epsilon(1e-14));
    CHECK(cosine_efficiency({0, 0, -1}, h, {0, 0, 50}) == Approx(0.0));
}

TEST_CASE("attenuation") {
    CHECK(attenuation(0) == Approx(0.99321).epsilon(1e-15));
    CHECK(attenuation(1000) == Approx(kAttenuation1000).epsilon(1e-14));
    double prev = attenuation(0);
    for (double s = 10; s < 5000; s += 10) {
        const double a = attenuation(s);
        CHECK(a <= prev);
        CHECK(a >= 0.0);
        prev = a;
    }
}

TEST_CASE("interception") {
    CHECK(disc_capture(std::numeric_limits<double>::infinity(), 1.0) == 1.0);
    CHECK(disc_capture(0.0, 1.0) == 0.0);
    CHECK(disc_capture(2.5, 2.5) == Approx(kDiscAtSigma).epsilon(1e-14));
    CHECK_THROWS_AS(disc_capture(1.0, 0.0), InvalidArgument);
    CHECK_THROWS_AS(beam_sigma(0.0, 0.0, 100.0), InvalidArgument);

    // cavity seen along its normal: r_proj = r
    const double sigma = beam_sigma(2.9, 4.65, 500.0);
    CHECK(sigma == Approx(500.0 * std::sqrt(4 * 2.9 * 2.9 + 4.65 * 4.65) * 1e-3));
    CavityReceiver cav;
    cav.tilt = 0.3;
    cav.radius = sigma;
    CHECK(interception(2.9, 4.65, 500.0, cav, aperture_normal(0.3)) == Approx(kDiscAtSigma).epsilon(1e-12));
    // behind the aperture
    CHECK(interception(2.9, 4.65, 500.0, cav, -aperture_normal(0.3)) == 0.0);
    // oblique view shrinks the projected radius
    const Vec3 oblique = normalized(aperture_normal(0.3) + Vec3{0.6, 0, 0});
    CHECK(interception(2.9, 4.65, 500.0, cav, oblique) < kDiscAtSigma);

    CylindricalReceiver cyl;
    cyl.radius = 1e6;
    cyl.height = 1e6;
    CHECK(interception(2.9, 4.65, 500.0, cyl, normalized(Vec3{1, 1, -0.3})) == Approx(1.0));
    cyl.radius = 4.0;
    cyl.height = 8.0;
    const double near = interception(2.9, 4.65, 200.0, cyl, normalized(Vec3{1, 0, -0.3}));
    const double far = interception(2.9, 4.65, 800.0, cyl, normalized(Vec3{1, 0, -0.3}));
    CHECK(near > far);
    CHECK(near <= 1.0);
    CHECK(far >= 0.0);
}

TEST_CASE("shadow and block: limiting cases") {
    const Vec3 sun = normalized(Vec3{0.2, -0.5, 0.8});
    const Vec3 target = normalized(Vec3{0.0, 0.6, 0.7});
    const MirrorFrame h = tracking_frame({0, 100, 5}, sun, target);
    CHECK(shadow_block_factor(h, {}, sun, target, 12, 10) == 1.0);
    const MirrorFrame same = h;
    CHECK(shadow_block_factor(h, std::span<const MirrorFrame>(&same, 1), sun, target, 12, 10) == 0.0);
}

TEST_CASE("shadow and block: half-covered mirror") {
    // Neighbour 30 m up the sun ray, offset half a mirror width sideways.
    const Vec3 sun = normalized(Vec3{0.0, -0.6, 0.8});
    const Vec3 target = normalized(Vec3{0.0, 0.8, 0.6});
    const MirrorFrame h = tracking_frame({0, 100, 5}, sun, target);
    MirrorFrame nb = h;
    nb.center = h.center + sun * 30.0 + h.width_axis * 6.0;
    const auto f = occlusion_fractions(h, std::span<const MirrorFrame>(&nb, 1), sun, target, 12, 10);
    CHECK(f.shadowed == Approx(0.5).epsilon(1e-12));
    CHECK(f.blocked == 0.0);
    CHECK(shadow_block_factor(h, std::span<const MirrorFrame>(&nb, 1), sun, target, 12, 10) ==
          Approx(0.5).epsilon(1e-12));
    CHECK(sampled_fraction(h, nb, sun, 12, 10, 200) == Approx(0.5).epsilon(0.01));
}

TEST_CASE("shadow and block against point sampling") {
    std::mt19937_64 gen(7);
    auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); };
    const Vec3 aim{0, 0, 120};
    const double L_h = 12, L_v = 10;
    double worst = 0.0;
    int overlapping = 0;
    for (int scene = 0; scene < 50; ++scene) {
        const double elev = uni(0.15, 1.3);
        const double az = uni(-1.4, 1.4) + kPi;  // southern sky
        const Vec3 sun{std::cos(elev) * std::sin(az), std::cos(elev) * std::cos(az), std::sin(elev)};
        const double r = uni(80, 400), th = uni(-2.5, 2.5);
        const Vec3 c{r * std::sin(th), r * std::cos(th), 5.0};
        const Vec3 t = normalized(aim - c);
        const MirrorFrame h = tracking_frame(c, sun, t);
        // neighbour somewhere along the sun or the reflected ray, jittered sideways
        const Vec3 ray = scene % 2 == 0 ? sun : t;
        Vec3 nc = c + ray * uni(16, 45) + h.width_axis * uni(-10, 10) + h.height_axis * uni(-8, 8);
        nc.z = std::max(nc.z, 5.0);
        const MirrorFrame nb = tracking_frame(nc, sun, normalized(aim - nc));
        const double model = shadow_block_factor(h, std::span<const MirrorFrame>(&nb, 1), sun, t, L_h, L_v);
        const double oracle = std::clamp(
            1.0 - sampled_fraction(h, nb, sun, L_h, L_v, 160) - sampled_fraction(h, nb, t, L_h, L_v, 160), 0.0, 1.0);
        if (oracle < 1.0) ++overlapping;
        worst = std::max(worst, std::fabs(model - oracle));
    }
    CHECK(worst < 0.02);
    CHECK(overlapping > 10);  // the scenes actually exercise the clipping
}

TEST_CASE("receiver and cycle efficiency") {
    CHECK(receiver_cycle_efficiency(1e15, 50, 25, 0.38, 30) == Approx(0.38));
    CHECK(receiver_cycle_efficiency(30 * 50, 50, 25, 0.38, 30) == 0.0);
    CHECK(receiver_cycle_efficiency(0, 50, 25, 0.38, 30) == 0.0);
    const double loss1 = 1 - receiver_cycle_efficiency(6000, 50, 25, 0.38, 30) / 0.38;
    const double loss2 = 1 - receiver_cycle_efficiency(12000, 50, 25, 0.38, 30) / 0.38;
    CHECK(loss2 == Approx(loss1 / 2).epsilon(1e-12));
    // hotter air, larger losses
    CHECK(receiver_cycle_efficiency(6000, 50, 40, 0.38, 30) < receiver_cycle_efficiency(6000, 50, 10, 0.38, 30));
}

TEST_CASE("time samples use trapezoid weights") {
    const InsolationTable t = constant_table(800, 8, 16, 0.5);
    const auto samples = build_time_samples(t, 0.6527);
    CHECK(samples.size() == 12 * 9);
    double hours = 0.0;
    for (const auto& s : samples)
        if (s.month == 0) hours += s.weight;
    CHECK(hours == Approx(8.0 * 31 * 0.5));
    // night samples are dropped even with DNI
    const auto night = build_time_samples(constant_table(800, 0, 3, 1.0), 0.6527);
    CHECK(night.empty());
}

TEST_CASE("degenerate integrand") {
    PlantParams params;
    params.reflectivity = 1.0;
    const double D = 800.0;
    const InsolationTable t = constant_table(D, 8, 16, 1.0);
    ModelOptions off;
    off.cosine = off.shadow_block = off.attenuation = off.interception = false;
    const FieldLayout field = single_heliostat(0, 150);
    const EnergyResult e = annual_energy(field, DesignVector{}, params, t, off);
    REQUIRE(e.heliostat_energy.size() == 1);
    // kWh: W/m^2 x m^2 x h / 1000
    CHECK(e.heliostat_energy[0] == Approx(D * params.L_h * params.L_v * 8.0 * 365 / 1000.0).epsilon(1e-12));
    CHECK(e.plant_energy <= params.eta_cycle * e.heliostat_energy[0]);
}

TEST_CASE("zero clear ratio annihilates energy") {
    PlantParams params;
    LayoutConfig config;
    config.n_hel = 200;
    const InsolationTable t = constant_table(800, 6, 18, 0.0);
    PlantModel model(params, config, t);
    const ObjectiveValue v = model.objective(DesignVector{});
    CHECK(v.annual_energy == 0.0);
    CHECK_FALSE(v.feasible);
    CHECK(std::isinf(v.objective));
}

TEST_CASE("plant model properties") {
    PlantParams params;
    LayoutConfig config;
    config.n_hel = 300;
    const InsolationTable ins = synthetic_insolation(params.phi);
    PlantModel model(params, config, ins);
    const Evaluation e = model.evaluate(DesignVector{});
    REQUIRE(e.value.feasible);
    CHECK(e.layout.selected_count() == 300);
    CHECK(e.value.objective == e.value.total_cost / e.value.annual_energy);
    CHECK(e.value.total_cost == total_cost(DesignVector{}, params, 300));

    double sum_selected = 0.0;
    for (std::size_t i = 0; i < e.layout.heliostats.size(); ++i) {
        const auto& f = e.energy.factors[i];
        for (double v : {f.cosine, f.shadow_block, f.attenuation, f.interception, f.reflectivity}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        if (e.layout.heliostats[i].selected) sum_selected += e.energy.heliostat_energy[i];
    }
    CHECK(e.value.annual_energy <= params.eta_cycle * sum_selected);

    // more reflective mirrors, cheaper energy
    PlantParams brighter = params;
    brighter.reflectivity = 0.95;
    PlantModel bright_model(brighter, config, ins);
    CHECK(bright_model.objective(DesignVector{}).objective < e.value.objective);
}

TEST_CASE("energy does not depend on heliostat order") {
    PlantParams params;
    LayoutConfig config;
    config.n_hel = 200;
    const InsolationTable ins = synthetic_insolation(params.phi);
    const DesignVector d;
    const FieldLayout field = generate_field(d, params, config);
    FieldLayout shuffled = field;
    std::mt19937 gen(3);
    std::shuffle(shuffled.heliostats.begin(), shuffled.heliostats.end(), gen);
    const EnergyResult a = annual_energy(field, d, params, ins);
    const EnergyResult b = annual_energy(shuffled, d, params, ins);
    for (std::size_t i = 0; i < shuffled.heliostats.size(); ++i) {
        const auto id = static_cast<std::size_t>(shuffled.heliostats[i].id);
        CHECK(b.heliostat_energy[i] == Approx(a.heliostat_energy[id]).epsilon(1e-12));
    }
    CHECK(b.plant_energy == Approx(a.plant_energy).epsilon(1e-12));
}
