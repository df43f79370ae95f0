#include "fds/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "fds/design.hpp"
#include "fds/fft.hpp"

namespace fds {

namespace {

// Trilinear interpolation in index space (z, y, x), clamped at the borders.
double trilinear(const Array3D<Real>& v, double z, double y, double x) {
    auto clampd = [](double t, double hi) { return std::min(std::max(t, 0.0), hi); };
    z = clampd(z, static_cast<double>(v.nz() - 1));
    y = clampd(y, static_cast<double>(v.ny() - 1));
    x = clampd(x, static_cast<double>(v.nx() - 1));
    const std::size_t z0 = static_cast<std::size_t>(z), y0 = static_cast<std::size_t>(y),
                      x0 = static_cast<std::size_t>(x);
    const std::size_t z1 = std::min(z0 + 1, v.nz() - 1), y1 = std::min(y0 + 1, v.ny() - 1),
                      x1 = std::min(x0 + 1, v.nx() - 1);
    const double fz = z - z0, fy = y - y0, fx = x - x0;
    auto lerp = [](double a, double b, double t) { return a + (b - a) * t; };
    const double c00 = lerp(v(z0, y0, x0), v(z0, y0, x1), fx);
    const double c01 = lerp(v(z0, y1, x0), v(z0, y1, x1), fx);
    const double c10 = lerp(v(z1, y0, x0), v(z1, y0, x1), fx);
    const double c11 = lerp(v(z1, y1, x0), v(z1, y1, x1), fx);
    return lerp(lerp(c00, c01, fy), lerp(c10, c11, fy), fz);
}

}  // namespace

bool two_points_resolved(const Array3D<Real>& recon, const std::array<double, 3>& p0,
                         const std::array<double, 3>& p1, double dip_fraction) {
    const double v0 = trilinear(recon, p0[0], p0[1], p0[2]);
    const double v1 = trilinear(recon, p1[0], p1[1], p1[2]);
    const double peak = std::min(v0, v1);
    if (!(peak > 0)) return false;
    const double dist = std::hypot(p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2]);
    if (dist < 1.0) return false;  // peaks collapsed onto (nearly) the same voxel
    const int n = std::max(8, static_cast<int>(std::ceil(4 * dist)));
    double vmin = std::numeric_limits<double>::infinity();
    for (int i = 1; i < n; ++i) {
        const double t = static_cast<double>(i) / n;
        vmin = std::min(vmin, trilinear(recon, p0[0] + t * (p1[0] - p0[0]),
                                        p0[1] + t * (p1[1] - p0[1]),
                                        p0[2] + t * (p1[2] - p0[2])));
    }
    return vmin <= (1.0 - dip_fraction) * peak;
}

TwoPointHarness::TwoPointHarness(const OpticalSystem& sys, const DiffuserSurface& surface,
                                 const SimGrid& grid, int rl_iters, std::size_t recon_window)
    : sys_(sys), surface_(surface), grid_(grid), rl_iters_(rl_iters), window_(recon_window) {
    object_pitch_um_ = sys.pixel_um / magnification(sys);
}

const Array2D<Real>& TwoPointHarness::psf_at(double z_um) {
    const long long key = llround(z_um * 1e3);  // nm quantization for the cache
    auto it = psf_cache_.find(key);
    if (it != psf_cache_.end()) return it->second;
    Array2D<Real> psf = simulate_psf(sys_, surface_, grid_, {0, 0, key * 1e-3});
    return psf_cache_.emplace(key, std::move(psf)).first->second;
}

namespace {

// Scan separations upward; the reported resolution is the start of the final
// run of resolved trials. Three consecutive resolved trials end the scan (the
// monotone-consistency convention: isolated resolved flukes below that point
// do not count).
ResolutionResult scan_separations(double step, double max_sep,
                                  const std::function<bool(double)>& resolved_at) {
    double candidate = -1;
    int streak = 0;
    for (double d = step; d <= max_sep + 1e-9; d += step) {
        if (resolved_at(d)) {
            if (streak == 0) candidate = d;
            if (++streak >= 3) return {candidate, true};
        } else {
            streak = 0;
            candidate = -1;
        }
    }
    if (streak > 0) return {candidate, true};
    return {max_sep, false};
}

}  // namespace

ResolutionResult TwoPointHarness::lateral_resolution(double z_um, double search_step_um,
                                                     double max_separation_um) {
    const Array2D<Real>& psf = psf_at(z_um);
    const double mag = magnification(sys_);
    PSFStack stack;
    stack.kernels.push_back(psf);
    stack.z_positions_um = {z_um};
    stack.sensor_pitch_um = sys_.pixel_um;

    auto trial = [&](double d_um) {
        const double dpix = d_um * mag / sys_.pixel_um;  // sensor-pixel separation
        Array2D<Real> a = fourier_shift(psf, 0, +dpix / 2);
        Array2D<Real> b = fourier_shift(psf, 0, -dpix / 2);
        Measurement meas{Array2D<Real>(psf.rows(), psf.cols()), sys_.pixel_um};
        for (std::size_t i = 0; i < a.size(); ++i)
            meas.image.raw()[i] = std::max<Real>(0.0, a.raw()[i] + b.raw()[i]);
        ReconResult rr = richardson_lucy(meas, stack, rl_iters_, window_, window_);
        const auto& vol = rr.volume.intensities;
        // Expected peak voxels: window center +- half the separation along x.
        const double cx = window_ / 2.0, cy = window_ / 2.0;
        const double dvox = d_um / object_pitch_um_;
        // Recover each peak as the argmax of its half-plane.
        auto argmax_half = [&](bool right) {
            std::array<double, 3> best{0, cy, cx};
            double bv = -1;
            for (std::size_t y = 0; y < vol.ny(); ++y)
                for (std::size_t x = 0; x < vol.nx(); ++x) {
                    const bool in_right = x >= static_cast<std::size_t>(cx);
                    if (in_right != right) continue;
                    if (vol(0, y, x) > bv) {
                        bv = vol(0, y, x);
                        best = {0, static_cast<double>(y), static_cast<double>(x)};
                    }
                }
            return best;
        };
        auto p0 = argmax_half(false), p1 = argmax_half(true);
        // Guard against shoulder picks wandering far from the true geometry.
        if (std::abs((p1[2] - p0[2]) - dvox) > std::max(2.0, 0.75 * dvox)) return false;
        return two_points_resolved(vol, p0, p1);
    };
    return scan_separations(search_step_um, max_separation_um, trial);
}

ResolutionResult TwoPointHarness::axial_resolution(double z_um, double search_step_um,
                                                   double max_separation_um,
                                                   double recon_halfspan_um,
                                                   double recon_step_um) {
    // Fixed reconstruction depth stack centered on z.
    std::vector<double> z_list;
    for (double z = z_um - recon_halfspan_um; z <= z_um + recon_halfspan_um + 1e-9;
         z += recon_step_um)
        z_list.push_back(z);
    PSFStack stack;
    for (double z : z_list) stack.kernels.push_back(psf_at(z));
    stack.z_positions_um = z_list;
    stack.sensor_pitch_um = sys_.pixel_um;

    auto trial = [&](double d_um) {
        const Array2D<Real>& ha = psf_at(z_um + d_um / 2);
        const Array2D<Real>& hb = psf_at(z_um - d_um / 2);
        Measurement meas{Array2D<Real>(ha.rows(), ha.cols()), sys_.pixel_um};
        for (std::size_t i = 0; i < meas.image.size(); ++i)
            meas.image.raw()[i] = ha.raw()[i] + hb.raw()[i];
        ReconResult rr = richardson_lucy(meas, stack, rl_iters_, window_, window_);
        const auto& vol = rr.volume.intensities;
        const std::size_t zc = z_list.size() / 2;
        auto argmax_band = [&](std::size_t z_lo, std::size_t z_hi) {
            std::array<double, 3> best{static_cast<double>(z_lo), 0, 0};
            double bv = -1;
            for (std::size_t z = z_lo; z < z_hi; ++z)
                for (std::size_t y = 0; y < vol.ny(); ++y)
                    for (std::size_t x = 0; x < vol.nx(); ++x)
                        if (vol(z, y, x) > bv) {
                            bv = vol(z, y, x);
                            best = {static_cast<double>(z), static_cast<double>(y),
                                    static_cast<double>(x)};
                        }
            return best;
        };
        auto p0 = argmax_band(0, zc), p1 = argmax_band(zc, z_list.size());
        const double dvox = d_um / recon_step_um;
        if (std::abs((p1[0] - p0[0]) - dvox) > std::max(1.5, 0.75 * dvox)) return false;
        return two_points_resolved(vol, p0, p1);
    };
    return scan_separations(search_step_um, max_separation_um, trial);
}

Array2D<Real> fourier_shift(const Array2D<Real>& img, double dy, double dx) {
    const std::size_t ny = img.rows(), nx = img.cols();
    Array2D<Complex> f(ny, nx);
    for (std::size_t i = 0; i < img.size(); ++i) f.raw()[i] = img.raw()[i];
    fft2(f, -1);
    for (std::size_t y = 0; y < ny; ++y) {
        const double ky = (y <= ny / 2 ? static_cast<double>(y) : static_cast<double>(y) - ny) /
                          static_cast<double>(ny);
        for (std::size_t x = 0; x < nx; ++x) {
            const double kx =
                (x <= nx / 2 ? static_cast<double>(x) : static_cast<double>(x) - nx) /
                static_cast<double>(nx);
            f(y, x) *= std::exp(Complex(0, -2 * M_PI * (ky * dy + kx * dx)));
        }
    }
    ifft2_normalized(f);
    Array2D<Real> out(ny, nx);
    for (std::size_t i = 0; i < out.size(); ++i) out.raw()[i] = f.raw()[i].real();
    return out;
}

std::optional<std::array<double, 2>> register_translation(const Array2D<Real>& a,
                                                          const Array2D<Real>& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("register_translation: shape mismatch");
    const std::size_t ny = a.rows(), nx = a.cols();
    Array2D<Complex> fa(ny, nx), fb(ny, nx);
    for (std::size_t i = 0; i < a.size(); ++i) {
        fa.raw()[i] = a.raw()[i];
        fb.raw()[i] = b.raw()[i];
    }
    fft2(fa, -1);
    fft2(fb, -1);
    // Cross-power spectrum, magnitude-normalized. The normalization is
    // regularized so frequencies with negligible energy (whose phases are
    // numerical noise) do not dilute the correlation peak.
    double mmax = 0;
    for (std::size_t i = 0; i < fa.size(); ++i)
        mmax = std::max(mmax, std::abs(fa.raw()[i] * std::conj(fb.raw()[i])));
    if (mmax <= 0) return std::nullopt;
    for (std::size_t i = 0; i < fa.size(); ++i) {
        const Complex c = fa.raw()[i] * std::conj(fb.raw()[i]);
        fa.raw()[i] = c / (std::abs(c) + 1e-6 * mmax);
    }
    ifft2_normalized(fa);
    double best = -1;
    std::size_t py = 0, px = 0;
    for (std::size_t y = 0; y < ny; ++y)
        for (std::size_t x = 0; x < nx; ++x) {
            const double v = fa(y, x).real();
            if (v > best) {
                best = v;
                py = y;
                px = x;
            }
        }
    // A clean correlation peak stands far above the map's own fluctuation
    // level; a noise-only map peaks within a few standard deviations.
    double mean = 0, sq = 0;
    for (std::size_t y = 0; y < ny; ++y)
        for (std::size_t x = 0; x < nx; ++x) {
            mean += fa(y, x).real();
            sq += fa(y, x).real() * fa(y, x).real();
        }
    mean /= static_cast<double>(ny * nx);
    const double sd = std::sqrt(std::max(0.0, sq / static_cast<double>(ny * nx) - mean * mean));
    if (!(best > mean + 8.0 * sd)) return std::nullopt;

    auto at = [&](std::size_t y, std::size_t x) {
        return fa((y + ny) % ny, (x + nx) % nx).real();
    };
    auto parabola = [](double vm, double v0, double vp) {
        const double denom = vm - 2 * v0 + vp;
        if (std::abs(denom) < 1e-300) return 0.0;
        double off = 0.5 * (vm - vp) / denom;
        return std::clamp(off, -0.5, 0.5);
    };
    const double sy = parabola(at(py + ny - 1, px), best, at(py + 1, px));
    const double sx = parabola(at(py, px + nx - 1), best, at(py, px + 1));
    double dy = static_cast<double>(py) + sy;
    double dx = static_cast<double>(px) + sx;
    if (dy > ny / 2.0) dy -= ny;
    if (dx > nx / 2.0) dx -= nx;
    return std::array<double, 2>{dy, dx};
}

SimilarityProfile cosine_similarity_profile(const Array2D<Real>& psf_onaxis,
                                            const std::vector<Array2D<Real>>& psf_offaxis,
                                            const std::vector<double>& shifts_um) {
    if (psf_offaxis.size() != shifts_um.size())
        throw std::invalid_argument("cosine_similarity_profile: shifts/PSF count mismatch");
    SimilarityProfile prof;
    prof.shift_positions_um = shifts_um;
    const double na = std::sqrt(dot_value(psf_onaxis, psf_onaxis));
    for (const auto& off : psf_offaxis) {
        auto shift = register_translation(psf_onaxis, off);
        if (!shift || !(na > 0)) {
            prof.cosine_similarity.push_back(0);
            prof.registration_failed.push_back(true);
            continue;
        }
        Array2D<Real> reg = fourier_shift(off, (*shift)[0], (*shift)[1]);
        const double nb = std::sqrt(dot_value(reg, reg));
        double cs = nb > 0 ? dot_value(psf_onaxis, reg) / (na * nb) : 0.0;
        prof.cosine_similarity.push_back(std::clamp(cs, 0.0, 1.0));
        prof.registration_failed.push_back(false);
    }
    return prof;
}

namespace {

template <typename A>
double psnr_impl(const A& recon, const A& gt) {
    double mse = 0, gmax = 0;
    for (std::size_t i = 0; i < gt.raw().size(); ++i) {
        const double d = recon.raw()[i] - gt.raw()[i];
        mse += d * d;
        gmax = std::max(gmax, static_cast<double>(gt.raw()[i]));
    }
    mse /= static_cast<double>(gt.raw().size());
    if (mse == 0) return std::numeric_limits<double>::infinity();
    return 10 * std::log10(gmax * gmax / mse);
}

}  // namespace

double psnr(const Array3D<Real>& recon, const Array3D<Real>& gt) {
    if (!recon.same_shape(gt)) throw std::invalid_argument("psnr: shape mismatch");
    return psnr_impl(recon, gt);
}

double psnr(const Array2D<Real>& recon, const Array2D<Real>& gt) {
    if (!recon.same_shape(gt)) throw std::invalid_argument("psnr: shape mismatch");
    return psnr_impl(recon, gt);
}

SpiralPhantom spiral_phantom(const SpiralSpec& spec) {
    if (spec.n_spheres < 1 || spec.sphere_diameter_um <= 0 || spec.lateral_pitch_um <= 0)
        throw std::invalid_argument("spiral_phantom: invalid spec");
    const int n = spec.n_spheres;
    const double r_sphere = spec.sphere_diameter_um / 2;

    // Archimedean walk r = a*theta with arc steps interpolating the
    // center-to-center spacing rule.
    std::vector<std::array<double, 3>> centers;
    double total = 0;
    for (int k = 0; k + 1 < n; ++k)
        total += spec.spacing_start_um +
                 (spec.spacing_end_um - spec.spacing_start_um) * (n > 2 ? k / double(n - 2) : 0.0);
    const double a = std::max(spec.max_radius_um * spec.max_radius_um / (2 * std::max(total, 1.0)),
                              0.3);
    double theta = spec.spacing_start_um / a;
    for (int k = 0; k < n; ++k) {
        const double r = std::min(a * theta, spec.max_radius_um);
        const double z = spec.z_top_um - k * spec.z_step_um;
        centers.push_back({r * std::cos(theta), r * std::sin(theta), z});
        if (k + 1 < n) {
            const double s = spec.spacing_start_um +
                             (spec.spacing_end_um - spec.spacing_start_um) *
                                 (n > 2 ? k / double(n - 2) : 0.0);
            theta += s / std::max(r, 1.0);
        }
    }

    // z planes: either one per sphere depth or an isotropic fine grid.
    const double z_lo = spec.z_top_um - (n - 1) * spec.z_step_um;
    std::vector<double> z_planes;
    if (spec.z_plane_spacing_um <= 0) {
        for (double z = std::min(z_lo, spec.z_top_um); z <= std::max(z_lo, spec.z_top_um) + 1e-9;
             z += spec.z_step_um)
            z_planes.push_back(z);
    } else {
        for (double z = std::min(z_lo, spec.z_top_um) - r_sphere;
             z <= std::max(z_lo, spec.z_top_um) + r_sphere + 1e-9; z += spec.z_plane_spacing_um)
            z_planes.push_back(z);
    }

    SpiralPhantom out;
    out.centers_um = centers;
    const std::size_t nlat = spec.lateral_size;
    out.volume.intensities = Array3D<Real>(z_planes.size(), nlat, nlat, 0.0);
    out.volume.lateral_pitch_um = spec.lateral_pitch_um;
    out.volume.z_positions_um = z_planes;
    auto coord = [&](std::size_t i) {
        return (static_cast<double>(i) - static_cast<double>(nlat / 2)) * spec.lateral_pitch_um;
    };
    for (const auto& c : centers)
        for (std::size_t zi = 0; zi < z_planes.size(); ++zi) {
            const double dz = z_planes[zi] - c[2];
            if (std::abs(dz) > r_sphere) continue;
            for (std::size_t y = 0; y < nlat; ++y)
                for (std::size_t x = 0; x < nlat; ++x) {
                    const double dx = coord(x) - c[0], dy = coord(y) - c[1];
                    if (dx * dx + dy * dy + dz * dz <= r_sphere * r_sphere)
                        out.volume.intensities(zi, y, x) = 1.0;
                }
        }
    return out;
}

int count_resolved_spheres(const Volume& recon, const std::vector<std::array<double, 3>>& centers,
                           double sphere_radius_um) {
    return static_cast<int>(resolved_sphere_indices(recon, centers, sphere_radius_um).size());
}

std::vector<int> resolved_sphere_indices(const Volume& recon,
                                         const std::vector<std::array<double, 3>>& centers,
                                         double sphere_radius_um) {
    const auto& v = recon.intensities;
    const double vmax = max_value(v);
    if (!(vmax > 0)) return {};
    const double thresh = 0.05 * vmax;
    const std::size_t nz = v.nz(), ny = v.ny(), nx = v.nx();

    // 26-neighborhood local maxima above a small floor; index tie-break keeps
    // plateaus from double-counting.
    struct Peak {
        std::size_t z, y, x;
        double val;
    };
    std::vector<Peak> peaks;
    for (std::size_t z = 0; z < nz; ++z)
        for (std::size_t y = 0; y < ny; ++y)
            for (std::size_t x = 0; x < nx; ++x) {
                const double val = v(z, y, x);
                if (val < thresh) continue;
                const std::size_t me = (z * ny + y) * nx + x;
                bool is_max = true;
                for (int dz = -1; dz <= 1 && is_max; ++dz)
                    for (int dy = -1; dy <= 1 && is_max; ++dy)
                        for (int dx = -1; dx <= 1 && is_max; ++dx) {
                            if (!dz && !dy && !dx) continue;
                            const long zz = static_cast<long>(z) + dz,
                                       yy = static_cast<long>(y) + dy,
                                       xx = static_cast<long>(x) + dx;
                            if (zz < 0 || yy < 0 || xx < 0 || zz >= static_cast<long>(nz) ||
                                yy >= static_cast<long>(ny) || xx >= static_cast<long>(nx))
                                continue;
                            const double o = v(zz, yy, xx);
                            const std::size_t other = (zz * ny + yy) * nx + xx;
                            if (o > val || (o == val && other < me)) is_max = false;
                        }
                if (is_max) peaks.push_back({z, y, x, val});
            }
    if (peaks.empty()) return {};

    auto phys = [&](const Peak& p) {
        return std::array<double, 3>{
            (static_cast<double>(p.x) - static_cast<double>(nx / 2)) * recon.lateral_pitch_um,
            (static_cast<double>(p.y) - static_cast<double>(ny / 2)) * recon.lateral_pitch_um,
            recon.z_positions_um[p.z]};
    };

    // One-to-one greedy nearest matching of peaks to true centers.
    struct Pair {
        double d;
        std::size_t ci, pi;
    };
    std::vector<Pair> pairs;
    for (std::size_t ci = 0; ci < centers.size(); ++ci)
        for (std::size_t pi = 0; pi < peaks.size(); ++pi) {
            const auto p = phys(peaks[pi]);
            const double d = std::hypot(p[0] - centers[ci][0], p[1] - centers[ci][1],
                                        p[2] - centers[ci][2]);
            if (d <= sphere_radius_um) pairs.push_back({d, ci, pi});
        }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        return std::tie(a.d, a.ci, a.pi) < std::tie(b.d, b.ci, b.pi);
    });
    std::vector<int> center_match(centers.size(), -1);
    std::vector<bool> peak_used(peaks.size(), false);
    for (const auto& pr : pairs) {
        if (center_match[pr.ci] >= 0 || peak_used[pr.pi]) continue;
        center_match[pr.ci] = static_cast<int>(pr.pi);
        peak_used[pr.pi] = true;
    }

    // Dip test toward each adjacent sphere along the list (the physically
    // neighboring spheres), using the neighbor's matched peak when it exists
    // and its expected location otherwise. A sphere whose reconstruction
    // merges with a neighbor's shows no dip and does not count as resolved.
    auto center_index = [&](std::size_t ci) {
        std::size_t zi = 0;
        double bestd = std::numeric_limits<double>::infinity();
        for (std::size_t z = 0; z < recon.z_positions_um.size(); ++z) {
            const double d = std::abs(recon.z_positions_um[z] - centers[ci][2]);
            if (d < bestd) {
                bestd = d;
                zi = z;
            }
        }
        return std::array<double, 3>{
            static_cast<double>(zi),
            centers[ci][1] / recon.lateral_pitch_um + static_cast<double>(ny / 2),
            centers[ci][0] / recon.lateral_pitch_um + static_cast<double>(nx / 2)};
    };
    auto peak_or_expected = [&](std::size_t ci) {
        if (center_match[ci] >= 0) {
            const Peak& p = peaks[center_match[ci]];
            return std::array<double, 3>{static_cast<double>(p.z), static_cast<double>(p.y),
                                         static_cast<double>(p.x)};
        }
        return center_index(ci);
    };
    // Plane-dominance gate. A deconvolved volume from a poorly depth-coded
    // system carries broadband clutter on out-of-focus planes, and a clutter
    // bump can land within the matching radius of a truly unrecovered sphere.
    // A genuine recovery concentrates energy at the sphere, so its peak must
    // be at least as bright as everything else in its z-plane outside small
    // exclusion disks around the known sphere positions on that plane.
    std::vector<std::vector<std::array<double, 2>>> plane_centers(nz);
    for (std::size_t ci = 0; ci < centers.size(); ++ci) {
        const auto c = center_index(ci);
        plane_centers[static_cast<std::size_t>(c[0])].push_back({c[1], c[2]});
    }
    const double excl_px = 2.0 * sphere_radius_um / recon.lateral_pitch_um + 1.0;
    auto background_max = [&](std::size_t zi) {
        double bg = 0;
        for (std::size_t y = 0; y < ny; ++y)
            for (std::size_t x = 0; x < nx; ++x) {
                bool near = false;
                for (const auto& c : plane_centers[zi])
                    if (std::hypot(static_cast<double>(y) - c[0],
                                   static_cast<double>(x) - c[1]) <= excl_px) {
                        near = true;
                        break;
                    }
                if (!near) bg = std::max(bg, v(zi, y, x));
            }
        return bg;
    };

    std::vector<int> resolved;
    for (std::size_t ci = 0; ci < centers.size(); ++ci) {
        if (center_match[ci] < 0) continue;
        const std::array<double, 3> me = peak_or_expected(ci);
        const double vme = trilinear(v, me[0], me[1], me[2]);
        if (vme < background_max(static_cast<std::size_t>(center_index(ci)[0]))) continue;
        bool ok = true;
        for (long nb : {static_cast<long>(ci) - 1, static_cast<long>(ci) + 1}) {
            if (nb < 0 || nb >= static_cast<long>(centers.size())) continue;
            const std::array<double, 3> pn = peak_or_expected(static_cast<std::size_t>(nb));
            // A (nearly) dark neighbor is trivially distinguishable.
            if (trilinear(v, pn[0], pn[1], pn[2]) < 0.05 * vme) continue;
            ok = ok && two_points_resolved(v, me, pn);
        }
        if (ok) resolved.push_back(static_cast<int>(ci));
    }
    return resolved;
}

Array2D<Real> fov_phantom(double extent_um, const std::string& pattern, double pitch_um) {
    if (extent_um <= 0 || pitch_um <= 0)
        throw std::invalid_argument("fov_phantom: extent and pitch must be positive");
    const std::size_t n = static_cast<std::size_t>(std::lround(extent_um / pitch_um));
    if (n < 8) throw std::invalid_argument("fov_phantom: grid too small");
    Array2D<Real> img(n, n, 0.0);
    if (pattern == "uniform") {
        img.fill(1.0);
        return img;
    }
    if (pattern != "chart")
        throw std::invalid_argument("fov_phantom: unknown pattern '" + pattern + "'");

    // Resolution-target-style chart: frame, concentric rings, an even number
    // of radial spokes and a dot lattice. Every feature is symmetric under
    // 180-degree rotation about the grid center n/2.
    const double c = (n - 1) / 2.0;
    for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x) {
            const double u = (x - c) / c, v = (y - c) / c;  // [-1, 1]
            const double r = std::hypot(u, v);
            double val = 0;
            if (std::max(std::abs(u), std::abs(v)) > 0.92 &&
                std::max(std::abs(u), std::abs(v)) < 0.97)
                val = 1;  // frame
            for (double rr : {0.25, 0.5, 0.75})
                if (std::abs(r - rr) < 0.02) val = 1;  // rings
            if (r > 0.08 && r < 0.88) {
                const double ang = std::atan2(v, u);
                for (int k = 0; k < 8; ++k) {
                    const double target = k * M_PI / 4 - M_PI;
                    double d = std::remainder(ang - target, 2 * M_PI);
                    if (std::abs(d) * r < 0.015) val = 1;  // spokes
                }
            }
            for (double gy : {-0.8, -0.4, 0.4, 0.8})
                for (double gx : {-0.8, -0.4, 0.4, 0.8})
                    if (std::hypot(u - gx, v - gy) < 0.03) val = 1;  // dots
            img(y, x) = val;
        }
    return img;
}

}  // namespace fds
