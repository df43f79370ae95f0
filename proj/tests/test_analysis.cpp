#include "doctest.h"

#include <cmath>

#include "fds/analysis.hpp"
#include "test_util.hpp"

using namespace fds;

namespace {

Array2D<Real> gaussian_blob(std::size_t n, double cy, double cx, double sigma) {
    Array2D<Real> img(n, n);
    for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x)
            img(y, x) = std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) /
                                 (2 * sigma * sigma));
    return img;
}

}  // namespace

TEST_CASE("two-point dip criterion on synthetic volumes") {
    // Two clean peaks with an empty gap: resolved.
    Array3D<Real> v(1, 9, 21, 0.0);
    v(0, 4, 5) = 1.0;
    v(0, 4, 15) = 0.9;
    CHECK(two_points_resolved(v, {0, 4, 5}, {0, 4, 15}));
    // Fill the valley to 95% of the weaker peak: unresolved.
    for (std::size_t x = 6; x < 15; ++x) v(0, 4, x) = 0.9 * 0.95;
    CHECK(!two_points_resolved(v, {0, 4, 5}, {0, 4, 15}));
    // A 25% dip relative to the weaker peak: resolved again.
    for (std::size_t x = 6; x < 15; ++x) v(0, 4, x) = 0.9 * 0.75;
    CHECK(two_points_resolved(v, {0, 4, 5}, {0, 4, 15}));
    // Coincident peaks never count.
    CHECK(!two_points_resolved(v, {0, 4, 5}, {0, 4, 5}));
}

TEST_CASE("fourier shift moves content by the requested amount") {
    Array2D<Real> img = gaussian_blob(64, 32, 32, 3.0);
    Array2D<Real> moved = fourier_shift(img, 2.0, -3.0);
    Array2D<Real> expect = gaussian_blob(64, 34, 29, 3.0);
    for (std::size_t i = 0; i < img.size(); ++i)
        CHECK(moved.raw()[i] == doctest::Approx(expect.raw()[i]).epsilon(1e-6));
}

TEST_CASE("phase-correlation registration recovers integer and subpixel shifts") {
    Array2D<Real> a = gaussian_blob(64, 30, 34, 4.0);
    SUBCASE("integer") {
        Array2D<Real> b = fourier_shift(a, 5.0, -7.0);
        auto s = register_translation(a, b);
        REQUIRE(s.has_value());
        CHECK((*s)[0] == doctest::Approx(-5.0).epsilon(0.02));
        CHECK((*s)[1] == doctest::Approx(7.0).epsilon(0.02));
    }
    SUBCASE("subpixel") {
        Array2D<Real> b = fourier_shift(a, 2.4, -1.7);
        auto s = register_translation(a, b);
        REQUIRE(s.has_value());
        CHECK(std::abs((*s)[0] + 2.4) < 0.25);
        CHECK(std::abs((*s)[1] - 1.7) < 0.25);
    }
    SUBCASE("no content fails cleanly") {
        Array2D<Real> z(64, 64, 0.0);
        CHECK(!register_translation(z, z).has_value());
    }
}

TEST_CASE("cosine similarity: identical, shifted and disjoint images") {
    Array2D<Real> a = gaussian_blob(64, 32, 32, 4.0);
    Array2D<Real> shifted = fourier_shift(a, 6.0, 6.0);
    // Analytic oracle: centered 2D Gaussians of widths s1, s2 have cosine
    // similarity 2*s1*s2/(s1^2+s2^2).
    Array2D<Real> wide = gaussian_blob(64, 32, 32, 8.0);
    const double oracle = 2.0 * 4.0 * 8.0 / (16.0 + 64.0);

    SimilarityProfile prof =
        cosine_similarity_profile(a, {a, shifted, wide}, {0.0, 6.0, 0.0});
    CHECK(prof.cosine_similarity[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(prof.cosine_similarity[1] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(prof.cosine_similarity[2] == doctest::Approx(oracle).epsilon(0.02));

    // Invariant to global intensity scaling of either argument.
    Array2D<Real> a5 = a;
    for (auto& v : a5.raw()) v *= 5.0;
    SimilarityProfile scaled = cosine_similarity_profile(a, {a5}, {0.0});
    CHECK(scaled.cosine_similarity[0] == doctest::Approx(1.0).epsilon(1e-9));
    // Symmetric in its two arguments.
    SimilarityProfile sym1 = cosine_similarity_profile(a, {shifted}, {0.0});
    SimilarityProfile sym2 = cosine_similarity_profile(shifted, {a}, {0.0});
    CHECK(sym1.cosine_similarity[0] ==
          doctest::Approx(sym2.cosine_similarity[0]).epsilon(1e-6));
}

TEST_CASE("psnr cases") {
    Array2D<Real> gt(4, 4, 1.0);
    CHECK(std::isinf(psnr(gt, gt)));
    Array2D<Real> off(4, 4, 0.0);  // MSE = max(gt)^2 -> 0 dB
    CHECK(psnr(off, gt) == doctest::Approx(0.0));
    // One wrong pixel by 0.5: MSE = 0.25/16, PSNR = 10*log10(64).
    Array2D<Real> one = gt;
    one(2, 2) = 0.5;
    CHECK(psnr(one, gt) == doctest::Approx(10 * std::log10(64.0)).epsilon(1e-9));
}

TEST_CASE("spiral phantom geometry") {
    SpiralSpec spec;
    spec.lateral_pitch_um = 0.6154;
    SpiralPhantom ph = spiral_phantom(spec);
    REQUIRE(ph.centers_um.size() == 39);
    CHECK(ph.volume.intensities.nz() == 39);
    // z from +95 down to -95 in 5 um steps: 3 um free gap between 2 um spheres.
    CHECK(ph.centers_um.front()[2] == doctest::Approx(95.0));
    CHECK(ph.centers_um.back()[2] == doctest::Approx(-95.0));
    for (std::size_t i = 1; i < ph.centers_um.size(); ++i) {
        CHECK(ph.centers_um[i - 1][2] - ph.centers_um[i][2] == doctest::Approx(5.0));
        const double lat = std::hypot(ph.centers_um[i][0] - ph.centers_um[i - 1][0],
                                      ph.centers_um[i][1] - ph.centers_um[i - 1][1]);
        CHECK(lat >= 2.5);  // spacing rule stays near 3..7 um
        CHECK(lat <= 8.5);
    }
    for (const auto& c : ph.centers_um) CHECK(std::hypot(c[0], c[1]) <= 33.0 + 1e-9);
    // Every sphere voxelized somewhere.
    CHECK(sum_value(ph.volume.intensities) > 0);

    SpiralSpec single = spec;
    single.n_spheres = 1;
    SpiralPhantom one = spiral_phantom(single);
    CHECK(one.centers_um.size() == 1);
    CHECK(one.volume.intensities.nz() == 1);
}

TEST_CASE("voxelized sphere volume matches the analytic ball within 20%") {
    SpiralSpec spec;
    spec.n_spheres = 1;
    spec.sphere_diameter_um = 2.0;
    spec.lateral_pitch_um = 0.6154;
    spec.z_plane_spacing_um = 0.6154;  // isotropic fine grid for the oracle
    SpiralPhantom ph = spiral_phantom(spec);
    const double voxel = spec.lateral_pitch_um * spec.lateral_pitch_um * spec.z_plane_spacing_um;
    const double measured = sum_value(ph.volume.intensities) * voxel;
    const double analytic = 4.0 / 3.0 * M_PI;  // r = 1 um
    CHECK(measured == doctest::Approx(analytic).epsilon(0.20));
}

TEST_CASE("count_resolved_spheres trivial cases") {
    SpiralSpec spec;
    spec.lateral_pitch_um = 0.6154;
    SpiralPhantom ph = spiral_phantom(spec);
    // recon == phantom: every sphere has a matching local max.
    CHECK(count_resolved_spheres(ph.volume, ph.centers_um, 1.0) ==
          static_cast<int>(ph.centers_um.size()));
    Volume zeros = ph.volume;
    zeros.intensities.fill(0.0);
    CHECK(count_resolved_spheres(zeros, ph.centers_um, 1.0) == 0);
}

TEST_CASE("fov phantom: uniform pattern and 180-degree symmetry of the chart") {
    Array2D<Real> u = fov_phantom(100.0, "uniform", 1.0);
    for (Real v : u.raw()) CHECK(v == 1.0);
    Array2D<Real> chart = fov_phantom(157.5, "chart", 0.6154);
    const std::size_t n = chart.rows();
    CHECK(sum_value(chart) > 0);
    for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x)
            CHECK(chart(y, x) == chart(n - 1 - y, n - 1 - x));
    CHECK_THROWS_AS(fov_phantom(100.0, "bogus", 1.0), std::invalid_argument);
    CHECK_THROWS_AS(fov_phantom(-1.0, "chart", 1.0), std::invalid_argument);
}
