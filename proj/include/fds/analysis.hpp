#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fds/recon.hpp"
#include "fds/surface.hpp"
#include "fds/wavesim.hpp"

namespace fds {

// Two-point resolution curve per layout (one entry per probed depth).
struct ResolutionCurve {
    std::vector<double> z_positions_um;
    std::vector<double> lateral_res_um;  // 0 entries where the axis was not probed
    std::vector<double> axial_res_um;
    LayoutKind layout_kind = LayoutKind::MLA;
};

struct SimilarityProfile {
    std::vector<double> shift_positions_um;
    std::vector<double> cosine_similarity;
    std::vector<bool> registration_failed;
};

// Result of one separation scan; unresolved at the bound reports
// resolved=false with separation_um = the bound.
struct ResolutionResult {
    double separation_um = 0;
    bool resolved = false;
};

// 20%-dip Rayleigh-style criterion on a reconstructed two-point volume: the
// trilinear profile along the segment joining the two recovered peaks must
// drop below 0.8x the weaker peak.
bool two_points_resolved(const Array3D<Real>& recon,
                         const std::array<double, 3>& p0_idx,
                         const std::array<double, 3>& p1_idx, double dip_fraction = 0.2);

// Two-point resolution harness: builds two-point scenes by Fourier-shifting
// cached PSF kernels (exact under the shift-invariant model), reconstructs
// with a fixed number of RL iterations on a small central window, and scans
// separations from small to large.
class TwoPointHarness {
public:
    TwoPointHarness(const OpticalSystem& sys, const DiffuserSurface& surface,
                    const SimGrid& grid, int rl_iters = 8, std::size_t recon_window = 64);

    // Smallest separation (scanned in search_step increments up to
    // max_separation) whose own trial and all larger trials resolve.
    ResolutionResult lateral_resolution(double z_um, double search_step_um,
                                        double max_separation_um);
    // Pairs on-axis, symmetric about z; PSF depths quantized to the axial
    // step grid. recon_halfspan/recon_step set the RL depth stack.
    ResolutionResult axial_resolution(double z_um, double search_step_um,
                                      double max_separation_um, double recon_halfspan_um = 20,
                                      double recon_step_um = 2);

    const Array2D<Real>& psf_at(double z_um);
    double object_pitch_um() const { return object_pitch_um_; }

private:
    const OpticalSystem& sys_;
    const DiffuserSurface& surface_;
    SimGrid grid_;
    int rl_iters_;
    std::size_t window_;
    double object_pitch_um_;
    std::map<long long, Array2D<Real>> psf_cache_;  // keyed by z in nm
};

// Subpixel phase-correlation registration followed by the normalized inner
// product of the registered pair. shifts lists the nominal lateral offsets
// (um) of the off-axis PSFs, recorded verbatim in the profile.
SimilarityProfile cosine_similarity_profile(const Array2D<Real>& psf_onaxis,
                                            const std::vector<Array2D<Real>>& psf_offaxis,
                                            const std::vector<double>& shifts_um);

// Register b to a by phase correlation (parabolic subpixel refinement),
// returning the (dy, dx) shift in pixels, or nullopt when no usable peak.
std::optional<std::array<double, 2>> register_translation(const Array2D<Real>& a,
                                                          const Array2D<Real>& b);

// Cyclic Fourier-domain translation by (dy, dx) pixels.
Array2D<Real> fourier_shift(const Array2D<Real>& img, double dy, double dx);

// 10*log10(max(gt)^2 / MSE); +infinity when the arrays are identical.
double psnr(const Array3D<Real>& recon, const Array3D<Real>& ground_truth);
double psnr(const Array2D<Real>& recon, const Array2D<Real>& ground_truth);

struct SpiralSpec {
    int n_spheres = 39;
    double sphere_diameter_um = 2.0;
    double z_top_um = 95.0;    // first sphere; subsequent ones step downward
    double z_step_um = 5.0;
    double spacing_start_um = 3.0;  // lateral center-to-center gap, grows linearly
    double spacing_end_um = 7.0;
    double max_radius_um = 33.0;    // half the 66 um lateral extent
    double lateral_pitch_um = 0;    // voxel pitch (required)
    std::size_t lateral_size = 128;
    double z_plane_spacing_um = 0;  // 0: one plane per sphere depth; else isotropic fine grid
};

struct SpiralPhantom {
    Volume volume;
    std::vector<std::array<double, 3>> centers_um;  // (x, y, z) relative to volume center
};

SpiralPhantom spiral_phantom(const SpiralSpec& spec);

// A sphere counts as resolved when a detected local maximum lies within one
// sphere radius of its true center (one-to-one nearest matching) and is
// separated from the nearest other detected maximum by a >=20% dip.
int count_resolved_spheres(const Volume& recon, const std::vector<std::array<double, 3>>& centers,
                           double sphere_radius_um);

// Indices into `centers` of the spheres that pass the resolved criterion.
std::vector<int> resolved_sphere_indices(const Volume& recon,
                                         const std::vector<std::array<double, 3>>& centers,
                                         double sphere_radius_um);

// Deterministic resolution-chart slice spanning extent_um, symmetric under
// 180-degree rotation. pattern: "chart" or "uniform".
Array2D<Real> fov_phantom(double extent_um, const std::string& pattern, double pitch_um);

}  // namespace fds
