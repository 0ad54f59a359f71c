#include "heliotower/layout.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "heliotower/error.hpp"

namespace heliotower {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Relative slack on spacing comparisons; absorbs the rounding of theta sums.
constexpr double kSpacingSlack = 1e-12;
// A pair of neighbours further apart than this multiple of the typical gap is
// an open end of the line, not two facing heliostats.
constexpr double kOpenGapRatio = 3.0;
constexpr std::size_t kMaxLines = 4000;

double wrap_angle(double theta) noexcept {
    theta = std::fmod(theta, kTwoPi);
    if (theta < 0.0) theta += kTwoPi;
    if (theta >= kTwoPi) theta = 0.0;
    return theta;
}

void require_finite(std::initializer_list<double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) throw InvalidArgument(std::string(what) + ": non-finite input");
    }
}

// Angular step from `theta` that keeps an arc of at least `spacing` at the
// smaller of the two endpoint radii.
double angular_step(const LineShape& shape, double theta, double spacing) {
    auto radius = [&](double t) { return std::max(shape.radius_at(t), shape.r_floor); };
    const double r0 = radius(theta);
    double step = spacing / r0;
    for (int iter = 0; iter < 64; ++iter) {
        const double r_low = std::min(r0, radius(theta + step));
        if (r_low * step >= spacing * (1.0 - kSpacingSlack)) break;
        step = spacing / r_low;
    }
    return step;
}

Heliostat bare(double theta, double radius) {
    Heliostat h;
    h.theta = theta;
    h.radius = radius;
    return h;
}

}  // namespace

int LayoutConfig::lines_in_group(std::size_t g) const noexcept {
    if (g < group_lines.size()) return group_lines[g];
    if (!extend_groups) return 0;
    const int canonical = 2 + static_cast<int>((g + 1) / 2);
    return std::max(group_lines.empty() ? 0 : group_lines.back(), canonical);
}

std::size_t LayoutConfig::generation_target() const noexcept {
    return static_cast<std::size_t>(std::ceil(static_cast<double>(n_hel) * n_overgen - 1e-9));
}

void LayoutConfig::validate(double heliostat_width) const {
    require_finite({r_base, r_min, d_min, n_overgen}, "layout config");
    if (!(r_base > 0.0)) throw InvalidArgument("r_base must be > 0");
    if (!(r_min > 0.0)) throw InvalidArgument("r_min must be > 0");
    if (d_min < heliostat_width) throw InvalidArgument("d_min must be >= the heliostat width");
    if (group_lines.empty()) throw InvalidArgument("group_lines must not be empty");
    for (int n : group_lines) {
        if (n < 1) throw InvalidArgument("every group needs at least one line");
    }
    if (!(n_overgen >= 1.0)) throw InvalidArgument("n_overgen must be >= 1");
    if (n_hel == 0) throw InvalidArgument("n_hel must be >= 1");
}

std::size_t FieldLayout::selected_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(heliostats.begin(), heliostats.end(), [](const Heliostat& h) { return h.selected; }));
}

double LineShape::radius_at(double theta) const noexcept {
    return base_radius + azimuthal_shift(d_theta, wrap_angle(theta));
}

std::vector<double> radial_distances(double a0, double a1, double r_base, double r_min,
                                     std::size_t n_lines) {
    require_finite({a0, a1, r_base, r_min}, "radial_distances");
    if (n_lines < 1) throw InvalidArgument("radial_distances: n_lines must be >= 1");
    if (!(r_base > 0.0)) throw InvalidArgument("radial_distances: r_base must be > 0");
    if (!(r_min > 0.0)) throw InvalidArgument("radial_distances: r_min must be > 0");
    std::vector<double> radii(n_lines);
    radii[0] = r_base;
    for (std::size_t n = 1; n < n_lines; ++n) {
        const double prev = radii[n - 1];
        radii[n] = std::max(a0 + (a1 + 1.0) * prev, prev + r_min);
    }
    return radii;
}

double azimuthal_shift(double d_theta, double theta) noexcept {
    return theta <= kPi ? d_theta * theta : d_theta * (kTwoPi - theta);
}

double transition_gap(double a0, double a1, double r_prev, double delta, double epsilon) {
    require_finite({a0, a1, r_prev, delta, epsilon}, "transition_gap");
    if (r_prev < 0.0) throw InvalidArgument("transition_gap: radius must be >= 0");
    return (1.0 + a0 + a1 * r_prev) * delta + epsilon;
}

double group_start_spacing(double b, double d0_prev) {
    require_finite({b, d0_prev}, "group_start_spacing");
    if (b <= -1.0) throw InvalidArgument("group_start_spacing: b must be > -1");
    if (!(d0_prev > 0.0)) throw InvalidArgument("group_start_spacing: spacing must be > 0");
    return (b + 1.0) * d0_prev;
}

double arc_spacing(double theta_a, double radius_a, double theta_b, double radius_b) noexcept {
    double diff = std::fabs(theta_a - theta_b);
    diff = std::min(diff, kTwoPi - diff);
    return std::min(radius_a, radius_b) * diff;
}

std::vector<Heliostat> place_group_first_line(double d0, double e_theta, const LineShape& shape,
                                              double d_min) {
    require_finite({d0, e_theta, shape.base_radius, shape.d_theta, d_min}, "place_group_first_line");
    if (!(d0 > 0.0) || !(d_min > 0.0)) {
        throw InvalidArgument("place_group_first_line: spacings must be > 0");
    }
    // East half, north to south.
    std::vector<double> east{0.0};
    double spacing = d0;
    for (;;) {
        const double prev_theta = east.back();
        if (east.size() > 1) spacing = std::max(spacing + e_theta * prev_theta, d_min);
        else spacing = std::max(spacing, d_min);
        const double next = prev_theta + angular_step(shape, prev_theta, spacing);
        if (next > kPi) break;
        east.push_back(next);
    }
    // Close the seam at south: the last east heliostat and its west mirror
    // must be d_min apart; a lone heliostat exactly at south fits if both of
    // its arcs do.
    auto seam_radius = [&](double t) { return std::max(shape.radius_at(t), shape.r_floor); };
    bool south = false;
    if (east.back() == kPi) {
        east.pop_back();
        south = true;
    }
    while (east.size() > 1) {
        const double t = east.back();
        if (2.0 * (kPi - t) * seam_radius(t) >= d_min * (1.0 - kSpacingSlack)) break;
        east.pop_back();
    }
    if (!south && east.size() > 1) {
        const double t = east.back();
        const double r_low = std::min(seam_radius(t), seam_radius(kPi));
        south = (kPi - t) * r_low >= d_min * (1.0 - kSpacingSlack);
    }

    std::vector<Heliostat> line;
    line.reserve(2 * east.size() + 1);
    auto emit = [&](double theta) {
        const double r = shape.radius_at(theta);
        if (r >= shape.r_floor) line.push_back(bare(theta, r));
    };
    for (double t : east) emit(t);
    if (south) emit(kPi);
    for (auto it = east.rbegin(); it != east.rend(); ++it) {
        if (*it > 0.0) emit(kTwoPi - *it);
    }
    return line;
}

std::vector<Heliostat> place_staggered_line(std::span<const Heliostat> prev,
                                            const LineShape& shape, double d_min) {
    if (prev.empty()) throw InvalidArgument("place_staggered_line: previous line is empty");
    require_finite({shape.base_radius, shape.d_theta, d_min}, "place_staggered_line");
    std::vector<double> thetas;
    thetas.reserve(prev.size());
    for (const auto& h : prev) thetas.push_back(h.theta);
    std::sort(thetas.begin(), thetas.end());
    const std::size_t n = thetas.size();
    if (n < 2) return {};

    std::vector<double> gaps(n);
    for (std::size_t i = 0; i + 1 < n; ++i) gaps[i] = thetas[i + 1] - thetas[i];
    gaps[n - 1] = thetas[0] + kTwoPi - thetas[n - 1];
    std::vector<double> sorted_gaps = gaps;
    const auto mid = sorted_gaps.begin() + static_cast<std::ptrdiff_t>((n - 1) / 2);
    std::nth_element(sorted_gaps.begin(), mid, sorted_gaps.end());
    const double max_gap = kOpenGapRatio * *mid;

    std::vector<double> candidates;
    candidates.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (gaps[i] > max_gap) continue;
        const double mean = i + 1 < n ? 0.5 * (thetas[i] + thetas[i + 1])
                                      : wrap_angle(0.5 * (thetas[n - 1] + thetas[0] + kTwoPi));
        candidates.push_back(mean);
    }
    std::sort(candidates.begin(), candidates.end());

    std::vector<Heliostat> line;
    line.reserve(candidates.size());
    for (double t : candidates) {
        const double r = shape.radius_at(t);
        if (r < shape.r_floor) continue;
        if (!line.empty() &&
            arc_spacing(line.back().theta, line.back().radius, t, r) < d_min * (1.0 - kSpacingSlack)) {
            continue;
        }
        line.push_back(bare(t, r));
    }
    if (line.size() > 1) {
        const auto& first = line.front();
        const auto& last = line.back();
        if (arc_spacing(first.theta, first.radius, last.theta, last.radius) <
            d_min * (1.0 - kSpacingSlack)) {
            line.pop_back();
        }
    }
    return line;
}

FieldLayout generate_field(const DesignVector& design, const PlantParams& params,
                           const LayoutConfig& config) {
    design.validate();
    params.validate();
    config.validate(params.L_h);

    FieldLayout field;
    field.design = design;
    field.config = config;
    const std::size_t target = config.generation_target();
    field.heliostats.reserve(target + 256);

    std::vector<Heliostat> prev;
    double r_prev = config.r_base;
    double d0 = design.d0_1;
    std::size_t line_count = 0;
    int next_id = 0;

    for (std::size_t g = 0;; ++g) {
        const int lines = config.lines_in_group(g);
        if (lines == 0) {
            throw CapacityError("layout: " + std::to_string(config.group_lines.size()) +
                                " groups host only " + std::to_string(field.heliostats.size()) +
                                " of the " + std::to_string(target) + " heliostats required");
        }
        if (g > 0) d0 = group_start_spacing(design.b, d0);
        for (int l = 0; l < lines; ++l, ++line_count) {
            if (line_count >= kMaxLines) {
                throw CapacityError("layout: no room for " + std::to_string(target) +
                                    " heliostats within " + std::to_string(kMaxLines) + " lines");
            }
            double radius = config.r_base;
            if (line_count > 0) {
                radius = std::max(design.a0 + (design.a1 + 1.0) * r_prev, r_prev + config.r_min);
                if (l == 0) {
                    radius += transition_gap(design.a0, design.a1, r_prev, design.delta,
                                             design.epsilon);
                    radius = std::max(radius, r_prev + config.r_min);
                }
            }
            // r_base holds in the north; a negative d_theta pulls the south
            // part of every line inward, down to one mirror width from the tower.
            const LineShape shape{radius, design.d_theta, params.L_h};
            std::vector<Heliostat> line;
            if (l == 0) {
                line = place_group_first_line(d0, design.e_theta, shape, config.d_min);
            } else if (!prev.empty()) {
                line = place_staggered_line(prev, shape, config.d_min);
            }
            for (auto& h : line) {
                h.id = next_id++;
                h.group = static_cast<int>(g);
                h.line = l;
                h.x = h.radius * std::sin(h.theta);
                h.y = h.radius * std::cos(h.theta);
                h.z = params.terrain_height(h.x, h.y);
                field.heliostats.push_back(h);
            }
            prev = std::move(line);
            r_prev = radius;
            if (field.heliostats.size() >= target) return field;
        }
    }
}

std::vector<std::size_t> rank_heliostats(std::span<const Heliostat> heliostats,
                                         std::span<const double> energy) {
    if (energy.size() != heliostats.size()) {
        throw InvalidArgument("rank_heliostats: one energy per heliostat required");
    }
    std::vector<std::size_t> order(heliostats.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto north_distance = [](double theta) { return std::min(theta, kTwoPi - theta); };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (energy[a] != energy[b]) return energy[a] > energy[b];
        const auto& ha = heliostats[a];
        const auto& hb = heliostats[b];
        if (ha.radius != hb.radius) return ha.radius < hb.radius;
        const double na = north_distance(ha.theta);
        const double nb = north_distance(hb.theta);
        if (na != nb) return na < nb;
        return ha.id < hb.id;
    });
    return order;
}

FieldLayout select_top(FieldLayout layout, std::span<const double> energy, std::size_t n_hel) {
    auto& hs = layout.heliostats;
    if (n_hel > hs.size()) {
        throw InvalidArgument("select_top: " + std::to_string(n_hel) + " requested but only " +
                              std::to_string(hs.size()) + " generated");
    }
    const auto order = rank_heliostats(hs, energy);
    for (std::size_t i = 0; i < hs.size(); ++i) {
        hs[i].annual_energy = energy[i];
        hs[i].selected = false;
    }
    for (std::size_t k = 0; k < n_hel; ++k) hs[order[k]].selected = true;
    return layout;
}

}  // namespace heliotower
