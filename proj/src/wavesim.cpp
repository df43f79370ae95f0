#include "fds/wavesim.hpp"

#include <cmath>
#include <stdexcept>

#include "fds/design.hpp"
#include "fds/fft.hpp"

namespace fds {

double FieldGrid::power() const {
    Real s = 0;
    for (const auto& v : amplitude.raw()) s += std::norm(v);
    return s * sample_pitch_um * sample_pitch_um;
}

FieldGrid pupil_field(const OpticalSystem& sys, const SimGrid& grid,
                      const std::array<double, 3>& source_xyz_um) {
    const double sx = source_xyz_um[0], sy = source_xyz_um[1], sz = source_xyz_um[2];
    const double fov_half_um = sys.obj_fov_mm * MM_TO_UM / 2.0;
    if (std::hypot(sx, sy) > fov_half_um)
        throw std::invalid_argument("pupil_field: lateral source position outside FOV_obj/2");

    const double lambda = sys.wavelength_um;
    const double k = 2.0 * M_PI / lambda;
    const double pitch = grid.sim_pitch_um;
    const std::size_t n = grid.sim_size;
    const double pupil_radius_um =
        0.5 * sys.pupil_diameter_mm * (sys.relay_focal_mm / sys.tube_focal_mm) * MM_TO_UM;
    const double mag = magnification(sys);
    const double f_ave_um = sys.f_ave_mm * MM_TO_UM;

    // Defocus: incoming curvature power C = -K*z. Exact spherical wavefront
    // from/toward a point at distance d = 1/|C|; the stable r^2/(d+sqrt(..))
    // form avoids cancellation at small defocus, so no paraxial branch is
    // needed.
    const double k_power_per_um =
        defocus_power_per_mm(sys) / (MM_TO_UM * MM_TO_UM);  // 1/um^2
    const double curvature = -k_power_per_um * sz;          // 1/um, <0 diverging
    const double defocus_sign = curvature < 0 ? +1.0 : -1.0;
    const double d_um = curvature != 0 ? 1.0 / std::abs(curvature) : 0.0;

    // Tilt shifting the sensor pattern by M * (sx, sy): direction cosines of
    // the chief ray toward the shifted image point at distance f_ave.
    const double tx = mag * sx, ty = mag * sy;
    const double chief_len = std::sqrt(f_ave_um * f_ave_um + tx * tx + ty * ty);
    const double alpha_x = tx / chief_len, alpha_y = ty / chief_len;

    // Validity: the analytic phase gradient (defocus at pupil edge + tilt)
    // must stay well under the grid Nyquist, leaving headroom for the mask.
    const double nyquist = 1.0 / (2.0 * pitch);
    const double defocus_freq =
        d_um > 0 ? pupil_radius_um / (lambda * std::sqrt(d_um * d_um +
                                                         pupil_radius_um * pupil_radius_um))
                 : 0.0;
    const double tilt_freq = std::hypot(alpha_x, alpha_y) / lambda;
    if (defocus_freq + tilt_freq > 0.7 * nyquist)
        throw std::invalid_argument(
            "pupil_field: source outside simulation validity range (phase undersampled)");

    FieldGrid out;
    out.amplitude = Array2D<Complex>(n, n);
    out.sample_pitch_um = pitch;
    out.wavelength_um = lambda;

    const double half = (static_cast<double>(n) - 1) / 2.0;
    for (std::size_t iy = 0; iy < n; ++iy) {
        const double y = (static_cast<double>(iy) - half) * pitch;
        for (std::size_t ix = 0; ix < n; ++ix) {
            const double x = (static_cast<double>(ix) - half) * pitch;
            const double rho2 = x * x + y * y;
            if (rho2 > pupil_radius_um * pupil_radius_um) continue;  // zero outside pupil
            double amp = 1.0;
            if (grid.apodization == Apodization::SineCondition) {
                const double u = std::sqrt(rho2) / pupil_radius_um * sys.obj_na / sys.medium_index;
                amp = std::pow(std::max(1.0 - u * u, 1e-6), -0.25);
            }
            double phase = k * (alpha_x * x + alpha_y * y);
            if (curvature != 0) {
                const double sag = rho2 / (d_um + std::sqrt(d_um * d_um + rho2));
                phase += defocus_sign * k * sag;
            }
            out.amplitude(iy, ix) = std::polar(amp, phase);
        }
    }
    return out;
}

void angular_spectrum_propagate(FieldGrid& field, double distance_mm, double band_energy_tol) {
    const double d = distance_mm * MM_TO_UM;
    if (d == 0) return;
    const double lambda = field.wavelength_um;
    const std::size_t n = field.amplitude.rows();
    const double extent = static_cast<double>(n) * field.sample_pitch_um;
    const double df = 1.0 / extent;

    // Matsushima band limit per axis.
    const double ratio = 2.0 * std::abs(d) / extent;
    const double f_limit = 1.0 / (lambda * std::sqrt(ratio * ratio + 1.0));

    fft2(field.amplitude, -1);

    // Aliasing guard: energy beyond the band limit would wrap.
    Real total = 0, clipped = 0;
    std::vector<double> freq(n);  // wrapped: 0..n/2 positive, then negative
    for (std::size_t i = 0; i < n; ++i)
        freq[i] = (i <= n / 2) ? df * static_cast<double>(i)
                               : df * (static_cast<double>(i) - static_cast<double>(n));

    const double inv_l2 = 1.0 / (lambda * lambda);
    for (std::size_t iy = 0; iy < n; ++iy) {
        const double fy = freq[iy];
        for (std::size_t ix = 0; ix < n; ++ix) {
            const double fx = freq[ix];
            const Real e = std::norm(field.amplitude(iy, ix));
            total += e;
            const double f2 = fx * fx + fy * fy;
            // Evanescent cut is physical; only band-limit clipping counts as aliasing.
            if ((std::abs(fx) > f_limit || std::abs(fy) > f_limit) && f2 < inv_l2) clipped += e;
        }
    }
    if (total > 0 && clipped / total > band_energy_tol) {
        ifft2_normalized(field.amplitude);  // leave the caller's field untouched
        throw std::runtime_error("angular_spectrum_propagate: band-limit criterion violated");
    }
    for (std::size_t iy = 0; iy < n; ++iy) {
        const double fy = freq[iy];
        for (std::size_t ix = 0; ix < n; ++ix) {
            const double fx = freq[ix];
            auto& v = field.amplitude(iy, ix);
            const double f2 = fx * fx + fy * fy;
            if (std::abs(fx) > f_limit || std::abs(fy) > f_limit || f2 >= inv_l2) {
                v = 0;
            } else {
                const double kz = 2.0 * M_PI * std::sqrt(inv_l2 - f2);
                v *= std::polar(1.0, kz * d);
            }
        }
    }
    ifft2_normalized(field.amplitude);
}

Array2D<Real> bin_intensity(const FieldGrid& field, double sensor_pitch_um,
                            std::size_t sensor_size) {
    const double fac_d = sensor_pitch_um / field.sample_pitch_um;
    const auto fac = static_cast<std::size_t>(std::lround(fac_d));
    if (std::abs(fac_d - static_cast<double>(fac)) > 1e-9 || fac < 1)
        throw std::invalid_argument("bin_intensity: sensor pitch must be an integer multiple "
                                    "of the simulation pitch");
    const std::size_t n = field.amplitude.rows();
    if (sensor_size * fac > n)
        throw std::invalid_argument("bin_intensity: sensor extent exceeds simulation grid");
    const std::size_t start = n / 2 - (sensor_size / 2) * fac;
    const double cell = field.sample_pitch_um * field.sample_pitch_um;
    Array2D<Real> out(sensor_size, sensor_size);
    for (std::size_t py = 0; py < sensor_size; ++py)
        for (std::size_t px = 0; px < sensor_size; ++px) {
            Real acc = 0;
            for (std::size_t j = 0; j < fac; ++j)
                for (std::size_t i = 0; i < fac; ++i)
                    acc += std::norm(field.amplitude(start + py * fac + j, start + px * fac + i));
            out(py, px) = acc * cell;
        }
    return out;
}

Array2D<Real> simulate_psf(const OpticalSystem& sys, const DiffuserSurface& surface,
                           const SimGrid& grid, const std::array<double, 3>& source_xyz_um) {
    if (std::abs(surface.grid_pitch_um - grid.sim_pitch_um) > 1e-9)
        throw std::invalid_argument("simulate_psf: surface grid pitch != simulation pitch");
    FieldGrid field = pupil_field(sys, grid, source_xyz_um);

    // Multiply the centered-embedded diffuser transmission.
    const Array2D<Complex> screen = phase_screen(surface, sys.wavelength_um);
    const std::size_t n = grid.sim_size;
    const std::size_t m = screen.rows();
    if (m > n) throw std::invalid_argument("simulate_psf: surface larger than simulation grid");
    const std::size_t off = (n - m) / 2;
    for (std::size_t iy = 0; iy < m; ++iy)
        for (std::size_t ix = 0; ix < m; ++ix)
            field.amplitude(off + iy, off + ix) *= screen(iy, ix);

    angular_spectrum_propagate(field, sys.f_ave_mm);
    return bin_intensity(field, sys.pixel_um, grid.sensor_size);
}

PSFStack simulate_psf_stack(const OpticalSystem& sys, const DiffuserSurface& surface,
                            const SimGrid& grid, const std::vector<double>& z_list_um,
                            const std::array<double, 2>& lateral_offset_um) {
    for (std::size_t i = 1; i < z_list_um.size(); ++i)
        if (!(z_list_um[i] > z_list_um[i - 1]))
            throw std::invalid_argument("simulate_psf_stack: z list must be strictly ascending");
    PSFStack stack;
    stack.z_positions_um = z_list_um;
    stack.sensor_pitch_um = sys.pixel_um;
    stack.kernels.reserve(z_list_um.size());
    for (double z : z_list_um)
        stack.kernels.push_back(
            simulate_psf(sys, surface, grid, {lateral_offset_um[0], lateral_offset_um[1], z}));
    return stack;
}

}  // namespace fds
