#include "heliotower/energy.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <mutex>
#include <numbers>
#include <utility>

#include "heliotower/error.hpp"
#include "heliotower/kernels.hpp"
#include "heliotower/optics.hpp"
#include "heliotower/parallel.hpp"
#include "heliotower/sun.hpp"

namespace heliotower {

namespace {

constexpr std::size_t kNeighbors = 8;
constexpr std::size_t kNoNeighbor = std::numeric_limits<std::size_t>::max();

// Lowest elevation used to bound the shadow reach.
constexpr double kMinElevation = 2.0 * std::numbers::pi / 180.0;

}  // namespace

std::vector<TimeSample> build_time_samples(const InsolationTable& insolation, double phi) {
    insolation.validate();
    std::vector<TimeSample> samples;
    for (int m = 0; m < 12; ++m) {
        const MonthInsolation& month = insolation.months[static_cast<std::size_t>(m)];
        const std::size_t n = month.hours.size();
        const int day = design_day_of_year(m);
        for (std::size_t i = 0; i < n; ++i) {
            const double lo = i == 0 ? month.hours[i] : 0.5 * (month.hours[i - 1] + month.hours[i]);
            const double hi = i + 1 == n ? month.hours[i] : 0.5 * (month.hours[i] + month.hours[i + 1]);
            const double width = hi - lo;
            if (width <= 0.0 || month.dni[i] <= 0.0) continue;
            const SunPosition pos = sun_position(phi, day, month.hours[i]);
            if (pos.elevation <= 0.0) continue;
            TimeSample s;
            s.month = m;
            s.hour = month.hours[i];
            s.sun = sun_vector(pos);
            s.elevation = pos.elevation;
            s.dni = month.dni[i];
            s.t_amb = month.t_amb[i];
            s.weight = width * month.days * month.clear_ratio;
            samples.push_back(s);
        }
    }
    return samples;
}

double total_cost(const DesignVector& design, const PlantParams& params, std::size_t n_hel) noexcept {
    const CostModel& c = params.cost;
    return c.c_fixed + c.c_heliostat * static_cast<double>(n_hel) * params.mirror_area() +
           c.c_tower * std::pow(design.tower_height(), 1.5) + c.c_receiver * receiver_area(design.receiver);
}

struct PlantModel::LayoutStage {
    FieldLayout layout;
    std::vector<double> px, py, pz;        // mirror pivots
    std::vector<std::size_t> neighbors;    // kNeighbors per heliostat, padded with kNoNeighbor
};

struct PlantModel::OpticsStage {
    std::shared_ptr<const LayoutStage> layout;
    std::vector<double> tx, ty, tz;  // unit vectors pivot -> aim point
    std::vector<double> slant, sigma, attenuation;
    std::vector<double> power;   // [sample][heliostat] incident on the aperture plane [kW]
    std::vector<double> energy;  // sum over samples of weight x power [kWh]
    std::vector<double> mean_cosine, mean_shadow_block;
};

template <class Stage>
struct PlantModel::Cache {
    using Key = std::vector<double>;

    explicit Cache(std::size_t capacity) : capacity(std::max<std::size_t>(capacity, 1)) {}

    std::shared_ptr<const Stage> find(const Key& key) const {
        std::shared_lock lock(mutex);
        for (const auto& [k, v] : entries)
            if (k == key) return v;
        return nullptr;
    }

    void insert(Key key, std::shared_ptr<const Stage> value) {
        std::unique_lock lock(mutex);
        for (const auto& e : entries)
            if (e.first == key) return;
        if (entries.size() >= capacity) entries.pop_front();
        entries.emplace_back(std::move(key), std::move(value));
    }

    std::size_t capacity;
    mutable std::shared_mutex mutex;
    std::deque<std::pair<Key, std::shared_ptr<const Stage>>> entries;
};

namespace {

using LayoutStage = PlantModel::LayoutStage;
using OpticsStage = PlantModel::OpticsStage;

double neighbor_cutoff(const PlantParams& params, const std::vector<TimeSample>& samples) {
    double elev = std::numbers::pi / 2.0;
    for (const TimeSample& s : samples) elev = std::min(elev, s.elevation);
    elev = std::max(elev, kMinElevation);
    return 3.0 * std::max(params.L_h, params.L_v) / std::tan(elev);
}

// Nearest kNeighbors pivots within `cutoff`, found by expanding rings of a
// uniform grid until the ring distance exceeds the current k-th distance.
std::vector<std::size_t> nearest_neighbors(const std::vector<double>& px, const std::vector<double>& py,
                                           double cutoff) {
    const std::size_t n = px.size();
    std::vector<std::size_t> out(n * kNeighbors, kNoNeighbor);
    if (n < 2) return out;

    double xmin = px[0], xmax = px[0], ymin = py[0], ymax = py[0];
    for (std::size_t i = 1; i < n; ++i) {
        xmin = std::min(xmin, px[i]);
        xmax = std::max(xmax, px[i]);
        ymin = std::min(ymin, py[i]);
        ymax = std::max(ymax, py[i]);
    }
    const double area = std::max((xmax - xmin) * (ymax - ymin), 1.0);
    const double cell = std::max(std::sqrt(area * 4.0 / static_cast<double>(n)), 1.0);
    const auto nx = static_cast<long>((xmax - xmin) / cell) + 1;
    const auto ny = static_cast<long>((ymax - ymin) / cell) + 1;
    std::vector<std::vector<std::size_t>> grid(static_cast<std::size_t>(nx * ny));
    auto cell_of = [&](double x, double y) {
        return std::pair{static_cast<long>((x - xmin) / cell), static_cast<long>((y - ymin) / cell)};
    };
    for (std::size_t i = 0; i < n; ++i) {
        auto [cx, cy] = cell_of(px[i], py[i]);
        grid[static_cast<std::size_t>(cy * nx + cx)].push_back(i);
    }

    const double cutoff2 = cutoff * cutoff;
    const long max_ring = static_cast<long>(std::ceil(cutoff / cell)) + 1;
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        std::vector<std::pair<double, std::size_t>> found;
        for (std::size_t i = begin; i < end; ++i) {
            found.clear();
            auto [cx, cy] = cell_of(px[i], py[i]);
            for (long ring = 0; ring <= max_ring; ++ring) {
                for (long gy = cy - ring; gy <= cy + ring; ++gy) {
                    if (gy < 0 || gy >= ny) continue;
                    for (long gx = cx - ring; gx <= cx + ring; ++gx) {
                        if (gx < 0 || gx >= nx) continue;
                        if (std::max(std::labs(gx - cx), std::labs(gy - cy)) != ring) continue;
                        for (std::size_t j : grid[static_cast<std::size_t>(gy * nx + gx)]) {
                            if (j == i) continue;
                            const double dx = px[j] - px[i], dy = py[j] - py[i];
                            const double d2 = dx * dx + dy * dy;
                            if (d2 <= cutoff2) found.emplace_back(d2, j);
                        }
                    }
                }
                // Anything in later rings is at least ring * cell away.
                if (found.size() >= kNeighbors) {
                    std::nth_element(found.begin(), found.begin() + (kNeighbors - 1), found.end());
                    const double kth = found[kNeighbors - 1].first;
                    const double reach = static_cast<double>(ring) * cell;
                    if (reach * reach >= kth) break;
                }
            }
            // ties broken by position so the result does not depend on input order
            std::sort(found.begin(), found.end(), [&](const auto& a, const auto& b) {
                if (a.first != b.first) return a.first < b.first;
                if (px[a.second] != px[b.second]) return px[a.second] < px[b.second];
                return py[a.second] < py[b.second];
            });
            const std::size_t k = std::min(found.size(), kNeighbors);
            for (std::size_t m = 0; m < k; ++m) out[i * kNeighbors + m] = found[m].second;
        }
    });
    return out;
}

std::shared_ptr<LayoutStage> build_layout_stage(FieldLayout layout, const PlantParams& params,
                                                double cutoff) {
    auto stage = std::make_shared<LayoutStage>();
    const std::size_t n = layout.heliostats.size();
    stage->px.resize(n);
    stage->py.resize(n);
    stage->pz.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Heliostat& h = layout.heliostats[i];
        stage->px[i] = h.x;
        stage->py[i] = h.y;
        stage->pz[i] = h.z + 0.5 * params.L_v;
    }
    stage->neighbors = nearest_neighbors(stage->px, stage->py, cutoff);
    stage->layout = std::move(layout);
    return stage;
}

std::shared_ptr<OpticsStage> build_optics_stage(std::shared_ptr<const LayoutStage> layout, double tower_height,
                                                const PlantParams& params, const ModelOptions& options,
                                                const std::vector<TimeSample>& samples) {
    const kernels::KernelTable& k = kernels::active();
    auto stage = std::make_shared<OpticsStage>();
    const std::size_t n = layout->px.size();
    const std::size_t ns = samples.size();

    stage->tx.resize(n);
    stage->ty.resize(n);
    stage->tz.resize(n);
    stage->slant.resize(n);
    stage->sigma.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 t{-layout->px[i], -layout->py[i], tower_height - layout->pz[i]};
        const double s = norm(t);
        if (!(s > 0.0)) throw InvalidArgument("heliostat pivot coincides with the aim point");
        stage->slant[i] = s;
        stage->tx[i] = t.x / s;
        stage->ty[i] = t.y / s;
        stage->tz[i] = t.z / s;
        stage->sigma[i] = beam_sigma(params.sigma_h, params.sigma_sun, s);
    }
    stage->attenuation.assign(n, 1.0);
    if (options.attenuation) k.attenuation(stage->slant.data(), stage->attenuation.data(), n);

    // Per-sample normals and cosines, sample-major.
    std::vector<double> nx(ns * n), ny(ns * n), nz(ns * n), cosine(ns * n, 1.0);
    for (std::size_t t = 0; t < ns; ++t) {
        const Vec3& sun = samples[t].sun;
        k.bisector(sun, stage->tx.data(), stage->ty.data(), stage->tz.data(), nx.data() + t * n,
                   ny.data() + t * n, nz.data() + t * n, n);
        if (options.cosine)
            k.cosine(sun, stage->tx.data(), stage->ty.data(), stage->tz.data(), cosine.data() + t * n, n);
    }

    stage->power.resize(ns * n);
    stage->energy.assign(n, 0.0);
    stage->mean_cosine.assign(n, 0.0);
    stage->mean_shadow_block.assign(n, 0.0);
    const double area = params.mirror_area();
    const double scale = area * params.reflectivity / 1000.0;

    auto frame_at = [&](std::size_t i, std::size_t t) {
        const std::size_t j = t * n + i;
        MirrorFrame f;
        f.center = {layout->px[i], layout->py[i], layout->pz[i]};
        f.normal = {nx[j], ny[j], nz[j]};
        const double hl = std::hypot(f.normal.x, f.normal.y);
        f.width_axis = hl > 1e-12 ? Vec3{-f.normal.y / hl, f.normal.x / hl, 0.0} : Vec3{1.0, 0.0, 0.0};
        f.height_axis = cross(f.normal, f.width_axis);
        return f;
    };

    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        std::array<MirrorFrame, kNeighbors> near{};
        for (std::size_t i = begin; i < end; ++i) {
            const Vec3 target{stage->tx[i], stage->ty[i], stage->tz[i]};
            double energy = 0.0, wsum = 0.0, csum = 0.0, sbsum = 0.0;
            for (std::size_t t = 0; t < ns; ++t) {
                const TimeSample& s = samples[t];
                double sb = 1.0;
                if (options.shadow_block) {
                    std::size_t m = 0;
                    for (std::size_t q = 0; q < kNeighbors; ++q) {
                        const std::size_t j = layout->neighbors[i * kNeighbors + q];
                        if (j == kNoNeighbor) break;
                        near[m++] = frame_at(j, t);
                    }
                    if (m > 0)
                        sb = shadow_block_factor(frame_at(i, t), std::span<const MirrorFrame>(near.data(), m),
                                                 s.sun, target, params.L_h, params.L_v);
                }
                const double c = cosine[t * n + i];
                const double p = s.dni * scale * c * sb * stage->attenuation[i];
                stage->power[t * n + i] = p;
                energy += s.weight * p;
                const double w = s.weight * s.dni;
                wsum += w;
                csum += w * c;
                sbsum += w * sb;
            }
            stage->energy[i] = energy;
            stage->mean_cosine[i] = wsum > 0.0 ? csum / wsum : 0.0;
            stage->mean_shadow_block[i] = wsum > 0.0 ? sbsum / wsum : 0.0;
        }
    });
    stage->layout = std::move(layout);
    return stage;
}

std::vector<double> interception_factors(const OpticsStage& optics, const DesignVector& design,
                                         const PlantParams& params, const ModelOptions& options) {
    const std::size_t n = optics.slant.size();
    std::vector<double> out(n, 1.0);
    if (!options.interception) return out;
    if (const auto* cav = std::get_if<CavityReceiver>(&design.receiver)) {
        // Beam points from the receiver to the heliostat, i.e. -t.
        const Vec3 ap = aperture_normal(cav->tilt);
        std::vector<double> radius(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double proj = -(ap.x * optics.tx[i] + ap.y * optics.ty[i] + ap.z * optics.tz[i]);
            radius[i] = cav->radius * std::max(0.0, proj);
        }
        kernels::active().disc_capture(radius.data(), optics.sigma.data(), out.data(), n);
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const Vec3 beam{-optics.tx[i], -optics.ty[i], -optics.tz[i]};
            out[i] = interception(params.sigma_h, params.sigma_sun, optics.slant[i], design.receiver, beam);
        }
    }
    return out;
}

// Electric energy of the heliostats with non-zero weight.
double plant_energy(const OpticsStage& optics, const std::vector<double>& weights, const DesignVector& design,
                    const PlantParams& params, const std::vector<TimeSample>& samples) {
    const kernels::KernelTable& k = kernels::active();
    const std::size_t n = weights.size();
    const double area = receiver_area(design.receiver);
    double total = 0.0;
    for (std::size_t t = 0; t < samples.size(); ++t) {
        const double p = k.dot(weights.data(), optics.power.data() + t * n, n);
        const double eta = receiver_cycle_efficiency(p, area, samples[t].t_amb, params.eta_cycle, params.loss_coeff);
        total += samples[t].weight * eta * p;
    }
    return total;
}

std::vector<EfficiencyBreakdown> breakdown(const OpticsStage& optics, const std::vector<double>& intercept,
                                           const PlantParams& params) {
    std::vector<EfficiencyBreakdown> out(intercept.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].cosine = optics.mean_cosine[i];
        out[i].shadow_block = optics.mean_shadow_block[i];
        out[i].attenuation = optics.attenuation[i];
        out[i].interception = intercept[i];
        out[i].reflectivity = params.reflectivity;
    }
    return out;
}

ObjectiveValue make_value(double energy, double cost) {
    ObjectiveValue v;
    v.annual_energy = energy;
    v.total_cost = cost;
    v.feasible = energy > 0.0 && std::isfinite(energy);
    v.objective = v.feasible ? cost / energy : std::numeric_limits<double>::infinity();
    return v;
}

}  // namespace

EnergyResult annual_energy(const FieldLayout& layout, const DesignVector& design, const PlantParams& params,
                           const InsolationTable& insolation, const ModelOptions& options) {
    design.validate();
    params.validate();
    const std::vector<TimeSample> samples = build_time_samples(insolation, params.phi);
    auto ls = build_layout_stage(layout, params, neighbor_cutoff(params, samples));
    auto os = build_optics_stage(ls, design.tower_height(), params, options, samples);
    const std::vector<double> intercept = interception_factors(*os, design, params, options);

    EnergyResult r;
    const std::size_t n = intercept.size();
    r.heliostat_energy.resize(n);
    for (std::size_t i = 0; i < n; ++i) r.heliostat_energy[i] = intercept[i] * os->energy[i];
    r.factors = breakdown(*os, intercept, params);

    // With a selection present only selected heliostats feed the receiver.
    std::vector<double> weights = intercept;
    if (layout.selected_count() > 0)
        for (std::size_t i = 0; i < n; ++i)
            if (!layout.heliostats[i].selected) weights[i] = 0.0;
    r.plant_energy = plant_energy(*os, weights, design, params, samples);
    return r;
}

PlantModel::PlantModel(PlantParams params, LayoutConfig config, InsolationTable insolation, ModelOptions options,
                       std::size_t cache_entries)
    : params_(std::move(params)),
      config_(std::move(config)),
      insolation_(std::move(insolation)),
      options_(options),
      layout_cache_(std::make_unique<Cache<LayoutStage>>(cache_entries)),
      optics_cache_(std::make_unique<Cache<OpticsStage>>(cache_entries)),
      result_cache_(std::make_unique<Cache<ObjectiveValue>>(std::max<std::size_t>(cache_entries, 1) * 64)) {
    params_.validate();
    config_.validate(params_.L_h);
    samples_ = build_time_samples(insolation_, params_.phi);
    if (samples_.empty()) throw InvalidArgument("insolation table has no daylight samples");
    neighbor_cutoff_ = neighbor_cutoff(params_, samples_);
}

PlantModel::~PlantModel() = default;

ObjectiveValue PlantModel::objective(const DesignVector& design) const { return compute(design, true, nullptr); }

ObjectiveValue PlantModel::objective_uncached(const DesignVector& design) const {
    return compute(design, false, nullptr);
}

Evaluation PlantModel::evaluate(const DesignVector& design) const {
    Evaluation e;
    e.value = compute(design, false, &e);
    return e;
}

PlantModel::Stats PlantModel::stats() const noexcept {
    Stats s;
    s.evaluations = evaluations_.load();
    s.layout_builds = layout_builds_.load();
    s.optics_builds = optics_builds_.load();
    s.receiver_builds = receiver_builds_.load();
    s.result_hits = result_hits_.load();
    return s;
}

void PlantModel::reset_stats() noexcept {
    evaluations_ = 0;
    layout_builds_ = 0;
    optics_builds_ = 0;
    receiver_builds_ = 0;
    result_hits_ = 0;
}

ObjectiveValue PlantModel::compute(const DesignVector& design, bool use_cache, Evaluation* detail) const {
    design.validate();
    ++evaluations_;
    const auto x = design.to_array();
    const double kind = design.kind() == ReceiverKind::Cavity ? 0.0 : 1.0;

    std::vector<double> full_key(x.begin(), x.end());
    full_key.push_back(kind);
    if (use_cache) {
        if (auto hit = result_cache_->find(full_key)) {
            ++result_hits_;
            return *hit;
        }
    }

    std::vector<double> layout_key(x.begin(), x.begin() + DesignVector::kLayoutVariables);
    std::shared_ptr<const LayoutStage> ls = use_cache ? layout_cache_->find(layout_key) : nullptr;
    if (!ls) {
        ++layout_builds_;
        ls = build_layout_stage(generate_field(design, params_, config_), params_, neighbor_cutoff_);
        if (use_cache) layout_cache_->insert(layout_key, ls);
    }

    std::vector<double> optics_key = layout_key;
    optics_key.push_back(design.tower_height());
    std::shared_ptr<const OpticsStage> os = use_cache ? optics_cache_->find(optics_key) : nullptr;
    if (!os) {
        ++optics_builds_;
        os = build_optics_stage(ls, design.tower_height(), params_, options_, samples_);
        if (use_cache) optics_cache_->insert(optics_key, os);
    }

    ++receiver_builds_;
    const std::vector<double> intercept = interception_factors(*os, design, params_, options_);
    const std::size_t n = intercept.size();
    std::vector<double> energy(n);
    for (std::size_t i = 0; i < n; ++i) energy[i] = intercept[i] * os->energy[i];

    const std::size_t n_hel = std::min(config_.n_hel, n);
    const std::vector<std::size_t> order = rank_heliostats(ls->layout.heliostats, energy);
    std::vector<double> weights(n, 0.0);
    for (std::size_t r = 0; r < n_hel; ++r) weights[order[r]] = intercept[order[r]];

    const double e_plant = plant_energy(*os, weights, design, params_, samples_);
    const ObjectiveValue value = make_value(e_plant, total_cost(design, params_, config_.n_hel));
    if (use_cache) result_cache_->insert(std::move(full_key), std::make_shared<const ObjectiveValue>(value));

    if (detail) {
        detail->layout = select_top(ls->layout, energy, n_hel);
        detail->energy.heliostat_energy = energy;
        detail->energy.factors = breakdown(*os, intercept, params_);
        detail->energy.plant_energy = e_plant;
        EfficiencyBreakdown mean;
        for (std::size_t r = 0; r < n_hel; ++r) {
            const EfficiencyBreakdown& f = detail->energy.factors[order[r]];
            mean.cosine += f.cosine;
            mean.shadow_block += f.shadow_block;
            mean.attenuation += f.attenuation;
            mean.interception += f.interception;
        }
        if (n_hel > 0) {
            const double inv = 1.0 / static_cast<double>(n_hel);
            mean.cosine *= inv;
            mean.shadow_block *= inv;
            mean.attenuation *= inv;
            mean.interception *= inv;
        }
        mean.reflectivity = params_.reflectivity;
        detail->plant_factors = mean;
    }
    return value;
}

}  // namespace heliotower
