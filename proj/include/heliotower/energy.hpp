#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <vector>

#include "heliotower/design.hpp"
#include "heliotower/geometry.hpp"
#include "heliotower/layout.hpp"
#include "heliotower/plant.hpp"

namespace heliotower {

/// Switches for individual efficiency factors; a disabled factor is 1.
struct ModelOptions {
    bool cosine = true;
    bool shadow_block = true;
    bool attenuation = true;
    bool interception = true;
};

/// One daylight sample of the design-day grid.
struct TimeSample {
    int month = 0;
    double hour = 0.0;
    Vec3 sun;
    double elevation = 0.0;
    double dni = 0.0;     // [W/m^2]
    double t_amb = 0.0;   // [C]
    double weight = 0.0;  // trapezoid width [h] x days x clear_ratio
};

/// Daylight samples (sun above the horizon, DNI > 0) with their annual weights.
std::vector<TimeSample> build_time_samples(const InsolationTable& insolation, double phi);

/// Annual means of each factor, weighted by DNI x sample weight.
struct EfficiencyBreakdown {
    double cosine = 0.0;
    double shadow_block = 0.0;
    double attenuation = 0.0;
    double interception = 0.0;
    double reflectivity = 0.0;
};

struct ObjectiveValue {
    double annual_energy = 0.0;  // electric [kWh]
    double total_cost = 0.0;     // [currency]
    double objective = 0.0;      // cost per kWh; +inf when infeasible
    bool feasible = false;

    bool operator==(const ObjectiveValue&) const = default;
};

struct EnergyResult {
    std::vector<double> heliostat_energy;  // reaching the receiver [kWh], per heliostat
    std::vector<EfficiencyBreakdown> factors;
    double plant_energy = 0.0;  // electric [kWh] of the contributing heliostats
};

/// Full evaluation of one design: the selected layout, its energies and cost.
struct Evaluation {
    FieldLayout layout;
    EnergyResult energy;
    EfficiencyBreakdown plant_factors;  // mean over selected heliostats
    ObjectiveValue value;
};

/// Per-heliostat energies and plant energy of every heliostat in `layout`.
EnergyResult annual_energy(const FieldLayout& layout, const DesignVector& design,
                           const PlantParams& params, const InsolationTable& insolation,
                           const ModelOptions& options = {});

/// Annualized plant cost for `n_hel` heliostats.
double total_cost(const DesignVector& design, const PlantParams& params, std::size_t n_hel) noexcept;

/// The objective with a three-stage cache:
///   1. layout (V01-V08): heliostat positions and neighbour lists;
///   2. optics (V01-V09): cosine, shadow/block, attenuation per heliostat
///      and time sample;
///   3. receiver (V10-V11): interception, selection, receiver/cycle integration.
/// Changing only the aperture radius, tilt or receiver height reuses stages 1
/// and 2. The tower height moves the aim point, so it invalidates stage 2.
class PlantModel {
public:
    struct Stats {
        std::size_t evaluations = 0;
        std::size_t layout_builds = 0;
        std::size_t optics_builds = 0;  // each one recomputes shadowing/blocking
        std::size_t receiver_builds = 0;
        std::size_t result_hits = 0;
    };

    PlantModel(PlantParams params, LayoutConfig config, InsolationTable insolation,
               ModelOptions options = {}, std::size_t cache_entries = 4);
    ~PlantModel();

    PlantModel(const PlantModel&) = delete;
    PlantModel& operator=(const PlantModel&) = delete;

    /// Cached objective.
    ObjectiveValue objective(const DesignVector& design) const;

    /// Same computation without reading or filling any cache.
    ObjectiveValue objective_uncached(const DesignVector& design) const;

    /// Uncached evaluation with the full layout and per-heliostat detail.
    Evaluation evaluate(const DesignVector& design) const;

    Stats stats() const noexcept;
    void reset_stats() noexcept;

    const PlantParams& params() const noexcept { return params_; }
    const LayoutConfig& config() const noexcept { return config_; }
    const InsolationTable& insolation() const noexcept { return insolation_; }
    const std::vector<TimeSample>& samples() const noexcept { return samples_; }

    struct LayoutStage;
    struct OpticsStage;

private:
    template <class Stage>
    struct Cache;

    ObjectiveValue compute(const DesignVector& design, bool use_cache, Evaluation* detail) const;

    PlantParams params_;
    LayoutConfig config_;
    InsolationTable insolation_;
    ModelOptions options_;
    std::vector<TimeSample> samples_;
    double neighbor_cutoff_ = 0.0;

    std::unique_ptr<Cache<LayoutStage>> layout_cache_;
    std::unique_ptr<Cache<OpticsStage>> optics_cache_;
    std::unique_ptr<Cache<ObjectiveValue>> result_cache_;

    mutable std::atomic<std::size_t> evaluations_{0};
    mutable std::atomic<std::size_t> layout_builds_{0};
    mutable std::atomic<std::size_t> optics_builds_{0};
    mutable std::atomic<std::size_t> receiver_builds_{0};
    mutable std::atomic<std::size_t> result_hits_{0};
};

}  // namespace heliotower
