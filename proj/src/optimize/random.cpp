#include "heliotower/random.hpp"

#include <cmath>
#include <numbers>

#include "heliotower/error.hpp"

namespace heliotower {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

Rng Rng::stream(std::uint64_t seed, std::string_view phase) {
    // FNV-1a of the phase name
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : phase) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return Rng(splitmix64(seed) ^ h);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    if (spare_) {
        const double v = *spare_;
        spare_.reset();
        return v;
    }
    double u1 = 0.0;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    return r * std::cos(a);
}

ScriptedRandom::ScriptedRandom(std::deque<double> uniforms, std::deque<double> normals)
    : uniforms_(std::move(uniforms)), normals_(std::move(normals)) {}

double ScriptedRandom::uniform() {
    if (uniforms_.empty()) throw InvalidArgument("scripted uniform draws exhausted");
    const double v = uniforms_.front();
    uniforms_.pop_front();
    return v;
}

double ScriptedRandom::normal() {
    if (normals_.empty()) throw InvalidArgument("scripted normal draws exhausted");
    const double v = normals_.front();
    normals_.pop_front();
    return v;
}

}  // namespace heliotower
