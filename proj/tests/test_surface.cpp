#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "fds/design.hpp"
#include "fds/surface.hpp"
#include "test_util.hpp"

using namespace fds;

TEST_CASE("random placement keeps every pair of centers apart") {
    const double aperture = 1.8, pitch = 0.36;
    auto centers = place_centers_random(aperture, 25, pitch, 42);
    REQUIRE(centers.size() == 25);
    for (std::size_t i = 0; i < centers.size(); ++i) {
        CHECK(std::abs(centers[i][0]) <= aperture / 2);
        CHECK(std::abs(centers[i][1]) <= aperture / 2);
        for (std::size_t j = i + 1; j < centers.size(); ++j) {
            const double d = std::hypot(centers[i][0] - centers[j][0],
                                        centers[i][1] - centers[j][1]);
            CHECK(d >= 0.7 * pitch);
        }
    }
}

TEST_CASE("random placement is deterministic per seed and varies across seeds") {
    auto a = place_centers_random(1.8, 25, 0.36, 42);
    auto b = place_centers_random(1.8, 25, 0.36, 42);
    auto c = place_centers_random(1.8, 25, 0.36, 43);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("infeasible placement fails with a clear error") {
    CHECK_THROWS_WITH_AS(place_centers_random(0.1, 400, 0.36, 1),
                         doctest::Contains("placement infeasible"), std::runtime_error);
}

TEST_CASE("grid placement tiles the aperture symmetrically") {
    auto centers = place_centers_grid(1.8, 5);
    REQUIRE(centers.size() == 25);
    // Center lenslet on axis; extremes at +-2 pitches.
    CHECK(centers[12][0] == doctest::Approx(0.0));
    CHECK(centers[12][1] == doctest::Approx(0.0));
    CHECK(centers[0][0] == doctest::Approx(-2 * 0.36));
    CHECK(centers[24][1] == doctest::Approx(2 * 0.36));
}

TEST_CASE("spherical sag matches the lensmaker curvature near the vertex") {
    LensletSpec lens{{0, 0}, 5.85, 0.36};
    const double n_mask = 1.56;
    const double R_mm = 5.85 * (n_mask - 1.0);
    CHECK(sag_profile(lens, n_mask, {0, 0}) == doctest::Approx(0.0));
    // Paraxial sag r^2/(2R) near the vertex.
    const double r = 0.05;
    const double expected_um = r * r / (2 * R_mm) * MM_TO_UM;
    CHECK(sag_profile(lens, n_mask, {r, 0}) == doctest::Approx(expected_um).epsilon(1e-3));
    // Clamped at the hemisphere edge.
    CHECK(sag_profile(lens, n_mask, {R_mm + 1, 0}) == doctest::Approx(R_mm * MM_TO_UM));
}

TEST_CASE("composed surface heights are nonnegative with min zero") {
    const OpticalSystem sys = testutil::desk_system();
    DiffuserSurface s = generate_surface(sys, LayoutKind::RUM, 1.56, 4.0, 100.0, 7);
    Real mn = 1e300, mx = -1e300;
    for (Real h : s.height_map_um.raw()) {
        mn = std::min(mn, h);
        mx = std::max(mx, h);
    }
    CHECK(mn == doctest::Approx(0.0));
    CHECK(mx > 0.0);
    CHECK(s.extent_mm() == doctest::Approx(sys.n_lenslets_1d * sys.pitch_mm));
}

TEST_CASE("MLA surface is uniform-focal on a regular grid") {
    const OpticalSystem sys = testutil::desk_system();
    DiffuserSurface s = generate_surface(sys, LayoutKind::MLA, 1.56, 4.0, 100.0, 7);
    REQUIRE(s.lenslets.size() == 25);
    for (const auto& l : s.lenslets) CHECK(l.focal_mm == doctest::Approx(sys.f_ave_mm));
    // The height map inherits the grid periodicity: shifting by one pitch
    // reproduces the profile away from the aperture edge.
    const auto pitch_px = static_cast<std::size_t>(sys.pitch_mm * MM_TO_UM / s.grid_pitch_um);
    const std::size_t n = s.height_map_um.rows();
    for (std::size_t y = n / 2 - 20; y < n / 2 + 20; ++y)
        for (std::size_t x = n / 2 - 20; x < n / 2 + 20; ++x)
            CHECK(s.height_map_um(y, x) ==
                  doctest::Approx(s.height_map_um(y + pitch_px, x)).epsilon(1e-9));
}

TEST_CASE("RMM surface draws its focal lengths from the dioptric schedule") {
    const OpticalSystem sys = testutil::desk_system();
    DiffuserSurface s = generate_surface(sys, LayoutKind::RMM, 1.56, 4.0, 100.0, 7);
    auto sched = focal_length_schedule(sys, 100.0, 25);
    std::vector<double> got;
    for (const auto& l : s.lenslets) got.push_back(l.focal_mm);
    std::sort(got.begin(), got.end());
    std::sort(sched.begin(), sched.end());
    REQUIRE(got.size() == sched.size());
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(got[i] == doctest::Approx(sched[i]).epsilon(1e-12));
    // The permutation actually shuffles.
    std::vector<double> unshuffled = focal_length_schedule(sys, 100.0, 25);
    std::vector<double> assigned;
    for (const auto& l : s.lenslets) assigned.push_back(l.focal_mm);
    CHECK(assigned != unshuffled);
}

TEST_CASE("phase screen has unit modulus everywhere") {
    const OpticalSystem sys = testutil::desk_system();
    DiffuserSurface s = generate_surface(sys, LayoutKind::RMM, 1.56, 4.0, 100.0, 3);
    auto t = phase_screen(s, sys.wavelength_um);
    double worst = 0;
    for (const auto& v : t.raw()) worst = std::max(worst, std::abs(std::abs(v) - 1.0));
    CHECK(worst < 1e-12);
}

TEST_CASE("governing lenslet is the one whose cap is closest at the point") {
    const OpticalSystem sys = testutil::desk_system();
    DiffuserSurface s = generate_surface(sys, LayoutKind::MLA, 1.56, 4.0, 100.0, 0);
    for (std::size_t i : {0ul, 7ul, 12ul, 24ul})
        CHECK(governing_lenslet(s, s.lenslets[i].center_xy_mm) == i);
}

TEST_CASE("surface generation is reproducible for a fixed seed") {
    const OpticalSystem sys = testutil::desk_system();
    DiffuserSurface a = generate_surface(sys, LayoutKind::RMM, 1.56, 4.0, 100.0, 11);
    DiffuserSurface b = generate_surface(sys, LayoutKind::RMM, 1.56, 4.0, 100.0, 11);
    CHECK(a.height_map_um.raw() == b.height_map_um.raw());
}
