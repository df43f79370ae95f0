#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fds/array.hpp"
#include "fds/optical_system.hpp"

namespace fds {

struct LensletSpec {
    std::array<double, 2> center_xy_mm{};  // relative to the optical axis
    double focal_mm = 0;
    double pitch_mm = 0;
};

// Phase-mask height map plus the lenslet metadata it was generated from.
// Heights are lens material thickness in um, min-normalized to 0; the map is
// the point-wise maximum over the per-lenslet spherical caps.
struct DiffuserSurface {
    Array2D<Real> height_map_um;
    double grid_pitch_um = 0;
    double refractive_index = 0;  // mask material, not the immersion medium
    std::vector<LensletSpec> lenslets;
    LayoutKind layout_kind = LayoutKind::MLA;
    std::uint64_t rng_seed = 0;
    double aperture_mm = 0;

    double extent_mm() const { return height_map_um.cols() * grid_pitch_um / MM_TO_UM; }
};

// Uniform draws in the square aperture, rejection-sampled so every pair of
// centers is >= 0.7*pitch apart. Full restart when a draw gets stuck; fails
// after max_restarts with "placement infeasible".
std::vector<std::array<double, 2>> place_centers_random(double aperture_mm, int n_lenslets,
                                                        double pitch_mm, std::uint64_t seed,
                                                        int max_restarts = 10000);

// Regular n_1d x n_1d grid centered on the optical axis, pitch = aperture/n_1d.
std::vector<std::array<double, 2>> place_centers_grid(double aperture_mm, int n_1d);

// Spherical sag h(r) = R - sqrt(R^2 - r^2) from the vertex plane, um, with
// R = f*(n_r - 1); clamped to R for r >= R.
double sag_profile(const LensletSpec& lens, double mask_index,
                   const std::array<double, 2>& xy_mm);

// Point-wise maximum over per-lenslet caps (common vertex plane), min height
// normalized to 0.
DiffuserSurface compose_surface(const std::vector<LensletSpec>& lenslets, double grid_pitch_um,
                                double aperture_mm, double mask_index, LayoutKind kind,
                                std::uint64_t seed);

// Convenience generator for the three layouts. For RMM the focal lengths come
// from focal_length_schedule over +-z_half_range and are assigned to positions
// by a seeded random permutation.
DiffuserSurface generate_surface(const OpticalSystem& sys, LayoutKind kind, double mask_index,
                                 double grid_pitch_um, double z_half_range_um,
                                 std::uint64_t seed);

// Index of the lenslet governing (closest cap surface at) the given point.
std::size_t governing_lenslet(const DiffuserSurface& surface,
                              const std::array<double, 2>& xy_mm);

// t(x,y) = exp(i*2pi/lambda*(n_r-1)*h(x,y)); unit modulus everywhere.
Array2D<Complex> phase_screen(const DiffuserSurface& surface, double wavelength_um);

}  // namespace fds
