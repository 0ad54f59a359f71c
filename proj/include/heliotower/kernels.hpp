#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "heliotower/geometry.hpp"

namespace heliotower::kernels {

// Batched inner loops of the energy model over structure-of-arrays heliostat
// data. Every variant performs the same IEEE operations in the same order,
// except the exponential: the scalar reference calls std::exp, the vector
// variants use a polynomial accurate to a few ulp.
struct KernelTable {
    std::string_view name;

    // out[i] = sqrt(max(0, 0.5 * (1 + sun . t_i)))
    void (*cosine)(const Vec3& sun, const double* tx, const double* ty, const double* tz,
                   double* out, std::size_t n);

    // n_i = (sun + t_i) / |sun + t_i|
    void (*bisector)(const Vec3& sun, const double* tx, const double* ty, const double* tz,
                     double* nx, double* ny, double* nz, std::size_t n);

    // out[i] = attenuation(slant[i])
    void (*attenuation)(const double* slant, double* out, std::size_t n);

    // out[i] = 1 - exp(-r_i^2 / (2 sigma_i^2))
    void (*disc_capture)(const double* radius, const double* sigma, double* out, std::size_t n);

    // Sum of a_i * b_i accumulated in four interleaved lanes (i mod 4), the
    // lanes combined as (l0 + l1) + (l2 + l3), then the tail added in order.
    double (*dot)(const double* a, const double* b, std::size_t n);

    // y_i += alpha * x_i
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

enum class Isa { Scalar, Avx2 };

const KernelTable& scalar_table() noexcept;

/// nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* avx2_table() noexcept;

/// Every variant usable on this machine, scalar first.
std::vector<const KernelTable*> available_tables();

/// Table used by the energy model. Chosen once from CPU features; the
/// HELIOTOWER_SIMD environment variable ("scalar" or "avx2") overrides.
const KernelTable& active() noexcept;

/// Forces a variant; returns false (and changes nothing) if unavailable.
bool select(Isa isa) noexcept;

}  // namespace heliotower::kernels
