#include "fds/surface.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fds/design.hpp"
#include "fds/rng.hpp"

namespace fds {

std::vector<std::array<double, 2>> place_centers_random(double aperture_mm, int n_lenslets,
                                                        double pitch_mm, std::uint64_t seed,
                                                        int max_restarts) {
    if (n_lenslets < 1) throw std::invalid_argument("place_centers_random: n_lenslets < 1");
    if (!(aperture_mm > 0 && pitch_mm > 0))
        throw std::invalid_argument("place_centers_random: aperture and pitch must be > 0");
    const double min_dist = 0.7 * pitch_mm;
    // Feasibility: each accepted center excludes a disk of radius min_dist.
    if (n_lenslets * min_dist * min_dist > aperture_mm * aperture_mm * 2.0)
        throw std::runtime_error("placement infeasible: aperture too small for lenslet count");

    auto rng = substream(seed, "placement");
    std::uniform_real_distribution<double> unif(-aperture_mm / 2.0, aperture_mm / 2.0);

    const int tries_per_point = 200;
    for (int restart = 0; restart < max_restarts; ++restart) {
        std::vector<std::array<double, 2>> centers;
        centers.reserve(n_lenslets);
        bool stuck = false;
        while (static_cast<int>(centers.size()) < n_lenslets && !stuck) {
            bool placed = false;
            for (int t = 0; t < tries_per_point; ++t) {
                std::array<double, 2> c{unif(rng), unif(rng)};
                bool ok = true;
                for (const auto& o : centers) {
                    const double dx = c[0] - o[0], dy = c[1] - o[1];
                    if (dx * dx + dy * dy < min_dist * min_dist) {
                        ok = false;
                        break;
                    }
                }
                if (ok) {
                    centers.push_back(c);
                    placed = true;
                    break;
                }
            }
            if (!placed) stuck = true;
        }
        if (!stuck) return centers;
    }
    throw std::runtime_error("placement infeasible: exceeded restart budget");
}

std::vector<std::array<double, 2>> place_centers_grid(double aperture_mm, int n_1d) {
    if (n_1d < 1) throw std::invalid_argument("place_centers_grid: n_1d < 1");
    const double pitch = aperture_mm / n_1d;
    std::vector<std::array<double, 2>> centers;
    centers.reserve(static_cast<std::size_t>(n_1d) * n_1d);
    for (int iy = 0; iy < n_1d; ++iy)
        for (int ix = 0; ix < n_1d; ++ix)
            centers.push_back({(ix - (n_1d - 1) / 2.0) * pitch, (iy - (n_1d - 1) / 2.0) * pitch});
    return centers;
}

double sag_profile(const LensletSpec& lens, double mask_index,
                   const std::array<double, 2>& xy_mm) {
    const double radius_mm = lens.focal_mm * (mask_index - 1.0);  // plano-convex lensmaker
    const double dx = xy_mm[0] - lens.center_xy_mm[0];
    const double dy = xy_mm[1] - lens.center_xy_mm[1];
    const double r2 = dx * dx + dy * dy;
    if (r2 >= radius_mm * radius_mm) return radius_mm * MM_TO_UM;  // hemisphere edge clamp
    return (radius_mm - std::sqrt(radius_mm * radius_mm - r2)) * MM_TO_UM;
}

DiffuserSurface compose_surface(const std::vector<LensletSpec>& lenslets, double grid_pitch_um,
                                double aperture_mm, double mask_index, LayoutKind kind,
                                std::uint64_t seed) {
    if (lenslets.empty()) throw std::invalid_argument("compose_surface: need >= 1 lenslet");
    const auto n = static_cast<std::size_t>(std::lround(aperture_mm * MM_TO_UM / grid_pitch_um));
    DiffuserSurface s;
    s.height_map_um = Array2D<Real>(n, n);
    s.grid_pitch_um = grid_pitch_um;
    s.refractive_index = mask_index;
    s.lenslets = lenslets;
    s.layout_kind = kind;
    s.rng_seed = seed;
    s.aperture_mm = aperture_mm;

    // All caps share a common vertex plane: surface_j = -sag_j; point-wise max
    // then shift so min(height) = 0. Only phase differences matter.
    Real min_h = std::numeric_limits<Real>::infinity();
    for (std::size_t iy = 0; iy < n; ++iy) {
        const double y = (static_cast<double>(iy) - (n - 1) / 2.0) * grid_pitch_um / MM_TO_UM;
        for (std::size_t ix = 0; ix < n; ++ix) {
            const double x = (static_cast<double>(ix) - (n - 1) / 2.0) * grid_pitch_um / MM_TO_UM;
            Real best = -std::numeric_limits<Real>::infinity();
            for (const auto& lens : lenslets)
                best = std::max(best, -sag_profile(lens, mask_index, {x, y}));
            s.height_map_um(iy, ix) = best;
            min_h = std::min(min_h, best);
        }
    }
    for (auto& h : s.height_map_um.raw()) h -= min_h;
    return s;
}

DiffuserSurface generate_surface(const OpticalSystem& sys, LayoutKind kind, double mask_index,
                                 double grid_pitch_um, double z_half_range_um,
                                 std::uint64_t seed) {
    const int n1d = sys.n_lenslets_1d;
    const int count = n1d * n1d;
    const double aperture = n1d * sys.pitch_mm;

    std::vector<std::array<double, 2>> centers;
    if (kind == LayoutKind::MLA)
        centers = place_centers_grid(aperture, n1d);
    else
        centers = place_centers_random(aperture, count, sys.pitch_mm, seed);

    std::vector<double> focals(count, sys.f_ave_mm);
    if (kind == LayoutKind::RMM) {
        focals = focal_length_schedule(sys, z_half_range_um, count);
        auto rng = substream(seed, "permutation");
        std::shuffle(focals.begin(), focals.end(), rng);
    }

    std::vector<LensletSpec> lenslets(count);
    for (int i = 0; i < count; ++i)
        lenslets[i] = LensletSpec{centers[i], focals[i], sys.pitch_mm};
    return compose_surface(lenslets, grid_pitch_um, aperture, mask_index, kind, seed);
}

std::size_t governing_lenslet(const DiffuserSurface& surface,
                              const std::array<double, 2>& xy_mm) {
    std::size_t best = 0;
    double best_sag = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < surface.lenslets.size(); ++i) {
        const double sag = sag_profile(surface.lenslets[i], surface.refractive_index, xy_mm);
        if (sag < best_sag) {
            best_sag = sag;
            best = i;
        }
    }
    return best;
}

Array2D<Complex> phase_screen(const DiffuserSurface& surface, double wavelength_um) {
    const auto& h = surface.height_map_um;
    Array2D<Complex> t(h.rows(), h.cols());
    const double k = 2.0 * M_PI / wavelength_um * (surface.refractive_index - 1.0);
    for (std::size_t i = 0; i < h.size(); ++i)
        t.raw()[i] = std::polar(1.0, k * h.raw()[i]);
    return t;
}

}  // namespace fds
