#include "doctest.h"

#include <cmath>
#include <random>

#include "fds/fft.hpp"

using namespace fds;

TEST_CASE("fft2 inverse round trip is exact to machine precision") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> unif(-1, 1);
    Array2D<Complex> a(48, 60);
    for (auto& v : a.raw()) v = {unif(rng), unif(rng)};
    Array2D<Complex> orig = a;
    fft2(a, -1);
    ifft2_normalized(a);
    double err = 0;
    for (std::size_t i = 0; i < a.size(); ++i) err += std::norm(a.raw()[i] - orig.raw()[i]);
    CHECK(std::sqrt(err / a.size()) < 1e-13);
}

TEST_CASE("fft2 satisfies Parseval") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> unif(-1, 1);
    Array2D<Complex> a(32, 32);
    for (auto& v : a.raw()) v = {unif(rng), unif(rng)};
    double e_space = 0;
    for (auto& v : a.raw()) e_space += std::norm(v);
    fft2(a, -1);
    double e_freq = 0;
    for (auto& v : a.raw()) e_freq += std::norm(v);
    CHECK(e_freq / a.size() == doctest::Approx(e_space).epsilon(1e-12));
}

TEST_CASE("fft2 matches a direct DFT on a small grid") {
    const std::size_t n = 8;
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> unif(-1, 1);
    Array2D<Complex> a(n, n);
    for (auto& v : a.raw()) v = {unif(rng), unif(rng)};
    Array2D<Complex> ref(n, n);
    for (std::size_t ky = 0; ky < n; ++ky)
        for (std::size_t kx = 0; kx < n; ++kx) {
            Complex acc{};
            for (std::size_t y = 0; y < n; ++y)
                for (std::size_t x = 0; x < n; ++x)
                    acc += a(y, x) * std::polar(1.0, -2 * M_PI *
                                                         (double(ky * y) / n + double(kx * x) / n));
            ref(ky, kx) = acc;
        }
    fft2(a, -1);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(std::abs(a.raw()[i] - ref.raw()[i]) < 1e-10);
}

TEST_CASE("Rfft3 agrees with the complex 3D transform and round trips") {
    const std::size_t nz = 3, ny = 10, nx = 12;
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> unif(-1, 1);
    Array3D<Real> r(nz, ny, nx);
    for (auto& v : r.raw()) v = unif(rng);

    Array3D<Complex> c(nz, ny, nx);
    for (std::size_t i = 0; i < r.size(); ++i) c.raw()[i] = r.raw()[i];
    fft3(c, -1);

    Rfft3 fft(nz, ny, nx);
    std::vector<Complex> half;
    fft.forward(r, half);
    const std::size_t sx = nx / 2 + 1;
    for (std::size_t z = 0; z < nz; ++z)
        for (std::size_t y = 0; y < ny; ++y)
            for (std::size_t x = 0; x < sx; ++x)
                CHECK(std::abs(half[(z * ny + y) * sx + x] - c(z, y, x)) < 1e-10);

    Array3D<Real> back(nz, ny, nx);
    fft.inverse(half, back);
    for (std::size_t i = 0; i < r.size(); ++i)
        CHECK(back.raw()[i] == doctest::Approx(r.raw()[i]).epsilon(1e-12));
}
