#include <algorithm>
#include <cmath>

#include "heliotower/kernels.hpp"
#include "heliotower/optics.hpp"

namespace heliotower::kernels {

namespace {

void cosine(const Vec3& sun, const double* tx, const double* ty, const double* tz, double* out,
            std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double d = sun.x * tx[i] + sun.y * ty[i] + sun.z * tz[i];
        out[i] = std::sqrt(std::max(0.0, 0.5 * (1.0 + d)));
    }
}

void bisector(const Vec3& sun, const double* tx, const double* ty, const double* tz, double* nx,
              double* ny, double* nz, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double hx = sun.x + tx[i];
        const double hy = sun.y + ty[i];
        const double hz = sun.z + tz[i];
        const double len = std::sqrt(hx * hx + hy * hy + hz * hz);
        nx[i] = hx / len;
        ny[i] = hy / len;
        nz[i] = hz / len;
    }
}

void attenuation_batch(const double* slant, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = heliotower::attenuation(slant[i]);
}

void disc_capture_batch(const double* radius, const double* sigma, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double r = std::max(0.0, radius[i]);
        const double x = (r * r) / (2.0 * (sigma[i] * sigma[i]));
        out[i] = 1.0 - std::exp(-x);
    }
}

double dot(const double* a, const double* b, std::size_t n) {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    const std::size_t n4 = n & ~std::size_t{3};
    for (std::size_t i = 0; i < n4; i += 4) {
        lane[0] += a[i] * b[i];
        lane[1] += a[i + 1] * b[i + 1];
        lane[2] += a[i + 2] * b[i + 2];
        lane[3] += a[i + 3] * b[i + 3];
    }
    double sum = (lane[0] + lane[1]) + (lane[2] + lane[3]);
    for (std::size_t i = n4; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

const KernelTable& scalar_table() noexcept {
    static const KernelTable table{"scalar", cosine, bisector, attenuation_batch,
                                   disc_capture_batch, dot, axpy};
    return table;
}

}  // namespace heliotower::kernels
