#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <string_view>

namespace heliotower {

/// Source of the two draws every stochastic optimizer needs.
class RandomSource {
public:
    virtual ~RandomSource() = default;
    /// Uniform on [0, 1).
    virtual double uniform() = 0;
    /// Standard normal.
    virtual double normal() = 0;
};

/// mt19937_64 with portable transforms: 53-bit uniforms and Box-Muller
/// normals, so a seed gives the same stream on every platform.
class Rng final : public RandomSource {
public:
    explicit Rng(std::uint64_t seed);

    /// Independent stream for one phase of a run, derived from the run seed.
    static Rng stream(std::uint64_t seed, std::string_view phase);

    double uniform() override;
    double normal() override;

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

/// Replays fixed values; throws InvalidArgument once a queue runs dry.
class ScriptedRandom final : public RandomSource {
public:
    ScriptedRandom() = default;
    ScriptedRandom(std::deque<double> uniforms, std::deque<double> normals);

    void push_uniform(double u) { uniforms_.push_back(u); }
    void push_normal(double n) { normals_.push_back(n); }

    double uniform() override;
    double normal() override;

private:
    std::deque<double> uniforms_;
    std::deque<double> normals_;
};

}  // namespace heliotower
