#include "heliotower/optics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "heliotower/error.hpp"

namespace heliotower {

namespace {

struct Point2 {
    double u;
    double v;
};

using Polygon = std::array<Point2, 12>;

// Clips a convex polygon against the half-plane sign * coord(p) <= limit.
int clip_edge(const Polygon& in, int n, Polygon& out, bool use_u, double sign, double limit) {
    auto value = [&](const Point2& p) { return sign * (use_u ? p.u : p.v) - limit; };
    int m = 0;
    for (int i = 0; i < n; ++i) {
        const Point2& a = in[static_cast<std::size_t>(i)];
        const Point2& b = in[static_cast<std::size_t>((i + 1) % n)];
        const double va = value(a);
        const double vb = value(b);
        if (va <= 0.0) out[static_cast<std::size_t>(m++)] = a;
        if ((va <= 0.0) != (vb <= 0.0)) {
            const double t = va / (va - vb);
            out[static_cast<std::size_t>(m++)] = {a.u + t * (b.u - a.u), a.v + t * (b.v - a.v)};
        }
    }
    return m;
}

double polygon_area(const Polygon& p, int n) {
    double twice = 0.0;
    for (int i = 0; i < n; ++i) {
        const Point2& a = p[static_cast<std::size_t>(i)];
        const Point2& b = p[static_cast<std::size_t>((i + 1) % n)];
        twice += a.u * b.v - b.u * a.v;
    }
    return 0.5 * std::fabs(twice);
}

// Area of the neighbour mirror projected along `dir` onto the heliostat plane
// and clipped to the heliostat rectangle.
double projected_overlap(const MirrorFrame& h, const MirrorFrame& nb, const Vec3& dir,
                         double half_w, double half_h) {
    const double dn = dot(dir, h.normal);
    if (dn <= 1e-9) return 0.0;
    const Vec3 offset = nb.center - h.center;
    const double along = dot(offset, h.normal) / dn;
    if (along < -1e-9 * (norm(offset) + 1.0)) return 0.0;

    const Vec3 axis_u = h.width_axis - h.normal * (dot(dir, h.width_axis) / dn);
    const Vec3 axis_v = h.height_axis - h.normal * (dot(dir, h.height_axis) / dn);
    const double cu = dot(offset, axis_u);
    const double cv = dot(offset, axis_v);
    const double wu = half_w * dot(nb.width_axis, axis_u);
    const double wv = half_w * dot(nb.width_axis, axis_v);
    const double hu = half_h * dot(nb.height_axis, axis_u);
    const double hv = half_h * dot(nb.height_axis, axis_v);
    if (std::fabs(cu) >= half_w + std::fabs(wu) + std::fabs(hu)) return 0.0;
    if (std::fabs(cv) >= half_h + std::fabs(wv) + std::fabs(hv)) return 0.0;

    Polygon a{};
    Polygon b{};
    a[0] = {cu + wu + hu, cv + wv + hv};
    a[1] = {cu - wu + hu, cv - wv + hv};
    a[2] = {cu - wu - hu, cv - wv - hv};
    a[3] = {cu + wu - hu, cv + wv - hv};
    int n = 4;
    n = clip_edge(a, n, b, true, 1.0, half_w);
    n = clip_edge(b, n, a, true, -1.0, half_w);
    n = clip_edge(a, n, b, false, 1.0, half_h);
    n = clip_edge(b, n, a, false, -1.0, half_h);
    return n >= 3 ? polygon_area(a, n) : 0.0;
}

}  // namespace

double cosine_efficiency(const Vec3& sun, const Vec3& heliostat, const Vec3& target) noexcept {
    const Vec3 t = normalized(target - heliostat);
    const double c = 0.5 * (1.0 + dot(normalized(sun), t));
    return std::sqrt(std::max(0.0, c));
}

double attenuation(double slant_range) noexcept {
    const double s = std::max(0.0, slant_range);
    const double value = s <= 1000.0 ? 0.99321 - 1.176e-4 * s + 1.97e-8 * s * s
                                     : std::exp(-1.106e-4 * s);
    return std::clamp(value, 0.0, 1.0);
}

double beam_sigma(double sigma_h, double sigma_sun, double slant_range) {
    const double spread = std::sqrt(4.0 * sigma_h * sigma_h + sigma_sun * sigma_sun);
    const double sigma = slant_range * spread * 1e-3;
    if (!(sigma > 0.0)) throw InvalidArgument("beam_sigma: effective beam width must be > 0");
    return sigma;
}

double disc_capture(double radius, double sigma) {
    if (!(sigma > 0.0)) throw InvalidArgument("disc_capture: sigma must be > 0");
    if (radius <= 0.0) return 0.0;
    if (std::isinf(radius)) return 1.0;
    return 1.0 - std::exp(-radius * radius / (2.0 * sigma * sigma));
}

Vec3 aperture_normal(double tilt) noexcept { return {0.0, std::cos(tilt), -std::sin(tilt)}; }

double interception(double sigma_h, double sigma_sun, double slant_range, const Receiver& receiver,
                    const Vec3& beam) {
    const double sigma = beam_sigma(sigma_h, sigma_sun, slant_range);
    if (const auto* cav = std::get_if<CavityReceiver>(&receiver)) {
        const double c = dot(aperture_normal(cav->tilt), beam);
        if (c <= 0.0) return 0.0;
        return disc_capture(cav->radius * c, sigma);
    }
    const auto& cyl = std::get<CylindricalReceiver>(receiver);
    const double horizontal = std::sqrt(beam.x * beam.x + beam.y * beam.y);
    const double half_height = 0.5 * cyl.height * horizontal;
    const double scale = 1.0 / (std::numbers::sqrt2 * sigma);
    return std::erf(cyl.radius * scale) * std::erf(half_height * scale);
}

double receiver_cycle_efficiency(double power_in, double receiver_area, double t_amb,
                                 double eta_cycle, double loss_coeff) noexcept {
    if (!(power_in > 0.0)) return 0.0;
    const double loss = loss_coeff * (1.0 + 0.005 * (t_amb - 25.0)) * receiver_area;
    return eta_cycle * std::max(0.0, 1.0 - loss / power_in);
}

MirrorFrame tracking_frame(const Vec3& center, const Vec3& sun, const Vec3& target_dir) noexcept {
    MirrorFrame f;
    f.center = center;
    const Vec3 bisector = sun + target_dir;
    f.normal = norm(bisector) > 1e-12 ? normalized(bisector) : Vec3{0.0, 0.0, 1.0};
    const Vec3 w{-f.normal.y, f.normal.x, 0.0};
    f.width_axis = norm(w) > 1e-12 ? normalized(w) : Vec3{1.0, 0.0, 0.0};
    f.height_axis = cross(f.normal, f.width_axis);
    return f;
}

OcclusionFractions occlusion_fractions(const MirrorFrame& heliostat,
                                       std::span<const MirrorFrame> neighbors, const Vec3& sun,
                                       const Vec3& target_dir, double L_h, double L_v) noexcept {
    const double half_w = 0.5 * L_h;
    const double half_h = 0.5 * L_v;
    const double area = L_h * L_v;
    OcclusionFractions out;
    for (const auto& nb : neighbors) {
        out.shadowed += projected_overlap(heliostat, nb, sun, half_w, half_h) / area;
        out.blocked += projected_overlap(heliostat, nb, target_dir, half_w, half_h) / area;
    }
    return out;
}

double shadow_block_factor(const MirrorFrame& heliostat, std::span<const MirrorFrame> neighbors,
                           const Vec3& sun, const Vec3& target_dir, double L_h,
                           double L_v) noexcept {
    const auto f = occlusion_fractions(heliostat, neighbors, sun, target_dir, L_h, L_v);
    return std::clamp(1.0 - (f.shadowed + f.blocked), 0.0, 1.0);
}

}  // namespace heliotower
