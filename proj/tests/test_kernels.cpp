#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "doctest.h"
#include "heliotower/energy.hpp"
#include "heliotower/kernels.hpp"
#include "heliotower/optics.hpp"

using namespace heliotower;
namespace k = heliotower::kernels;

namespace {

struct Soa {
    std::vector<double> x, y, z;
};

// Unit vectors from heliostats towards an aim point, including odd lengths so
// the vector tails are exercised.
Soa directions(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> pos(-600, 600);
    Soa s;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 t = normalized(Vec3{0, 0, 130} - Vec3{pos(gen), pos(gen), 2.0});
        s.x.push_back(t.x);
        s.y.push_back(t.y);
        s.z.push_back(t.z);
    }
    return s;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("scalar table matches the reference formulas") {
    const k::KernelTable& s = k::scalar_table();
    const Soa d = directions(37, 1);
    const Vec3 sun = normalized(Vec3{0.3, -0.4, 0.7});
    std::vector<double> out(37);
    s.cosine(sun, d.x.data(), d.y.data(), d.z.data(), out.data(), 37);
    for (std::size_t i = 0; i < 37; ++i)
        CHECK(out[i] == doctest::Approx(cosine_efficiency(sun, {0, 0, 0}, {d.x[i], d.y[i], d.z[i]})).epsilon(1e-14));

    std::vector<double> slant{0, 250, 999.9, 1000, 1000.1, 4000};
    std::vector<double> att(slant.size());
    s.attenuation(slant.data(), att.data(), slant.size());
    for (std::size_t i = 0; i < slant.size(); ++i) CHECK(att[i] == attenuation(slant[i]));

    std::vector<double> a{1, 2, 3, 4, 5, 6, 7};
    std::vector<double> b{7, 6, 5, 4, 3, 2, 1};
    // lanes (7 + 12) + (15 + 16), then the tail 15 + 12 + 7
    CHECK(s.dot(a.data(), b.data(), 7) == 84.0);
    s.axpy(2.0, a.data(), b.data(), 7);
    CHECK(b == std::vector<double>{9, 10, 11, 12, 13, 14, 15});
}

TEST_CASE("vector kernels are equivalent to the scalar reference") {
    const auto tables = k::available_tables();
    const k::KernelTable& ref = k::scalar_table();
    if (tables.size() < 2) {
        MESSAGE("no vector kernels on this machine; only the scalar table is checked");
    }
    for (const k::KernelTable* t : tables) {
        CAPTURE(t->name);
        for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 8u, 13u, 1021u}) {
            CAPTURE(n);
            const Soa d = directions(n, 10 + n);
            const Vec3 sun = normalized(Vec3{-0.2, -0.5, 0.6});
            std::vector<double> r(n), v(n);
            ref.cosine(sun, d.x.data(), d.y.data(), d.z.data(), r.data(), n);
            t->cosine(sun, d.x.data(), d.y.data(), d.z.data(), v.data(), n);
            CHECK(same_bits(r, v));

            std::vector<double> rx(n), ry(n), rz(n), vx(n), vy(n), vz(n);
            ref.bisector(sun, d.x.data(), d.y.data(), d.z.data(), rx.data(), ry.data(), rz.data(), n);
            t->bisector(sun, d.x.data(), d.y.data(), d.z.data(), vx.data(), vy.data(), vz.data(), n);
            CHECK(same_bits(rx, vx));
            CHECK(same_bits(ry, vy));
            CHECK(same_bits(rz, vz));

            std::vector<double> slant(n), sigma(n), radius(n);
            for (std::size_t i = 0; i < n; ++i) {
                slant[i] = 40.0 + 3.1 * static_cast<double>(i);  // crosses the 1000 m branch
                sigma[i] = 0.5 + 0.01 * static_cast<double>(i);
                radius[i] = 0.2 * static_cast<double>(i % 50);
            }
            ref.attenuation(slant.data(), r.data(), n);
            t->attenuation(slant.data(), v.data(), n);
            for (std::size_t i = 0; i < n; ++i) CHECK(std::fabs(r[i] - v[i]) <= 4e-16);

            ref.disc_capture(radius.data(), sigma.data(), r.data(), n);
            t->disc_capture(radius.data(), sigma.data(), v.data(), n);
            for (std::size_t i = 0; i < n; ++i) CHECK(std::fabs(r[i] - v[i]) <= 4e-16);

            CHECK(ref.dot(slant.data(), sigma.data(), n) == t->dot(slant.data(), sigma.data(), n));
            std::vector<double> y1 = sigma, y2 = sigma;
            ref.axpy(0.37, slant.data(), y1.data(), n);
            t->axpy(0.37, slant.data(), y2.data(), n);
            CHECK(same_bits(y1, y2));
        }
    }
}

TEST_CASE("plant objective agrees across kernel variants") {
    PlantParams params;
    LayoutConfig config;
    config.n_hel = 250;
    const InsolationTable ins = synthetic_insolation(params.phi);
    const DesignVector d;
    std::vector<double> values;
    const k::KernelTable* before = &k::active();
    for (const k::KernelTable* t : k::available_tables()) {
        REQUIRE(k::select(t == &k::scalar_table() ? k::Isa::Scalar : k::Isa::Avx2));
        PlantModel model(params, config, ins);
        values.push_back(model.objective_uncached(d).objective);
    }
    k::select(before == &k::scalar_table() ? k::Isa::Scalar : k::Isa::Avx2);
    for (double v : values) CHECK(v == doctest::Approx(values.front()).epsilon(1e-13));
}
