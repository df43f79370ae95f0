#pragma once

#include <array>
#include <vector>

#include "fds/array.hpp"
#include "fds/optical_system.hpp"
#include "fds/surface.hpp"

namespace fds {

// Complex scalar field sampled on a square grid.
struct FieldGrid {
    Array2D<Complex> amplitude;
    double sample_pitch_um = 0;
    double wavelength_um = 0;

    double power() const;  // sum |u|^2 * pitch^2
};

// Ordered per-depth intensity kernels on the sensor grid.
struct PSFStack {
    std::vector<Array2D<Real>> kernels;
    std::vector<double> z_positions_um;  // strictly increasing
    double sensor_pitch_um = 0;

    std::size_t depth_count() const { return kernels.size(); }
};

enum class Apodization { Flat, SineCondition };

// Internal simulation grid. The phase screen grid pitch must equal
// sim_pitch_um; sensor_pitch_um must be an integer multiple of it.
struct SimGrid {
    std::size_t sim_size = 0;       // samples per side of the propagation grid
    double sim_pitch_um = 0;
    std::size_t sensor_size = 0;    // sensor pixels per side after binning
    Apodization apodization = Apodization::Flat;
};

// Field at the relayed pupil for a point source at source_xyz_um (object
// space; z > 0 toward the objective). Amplitude is the apodization inside the
// relayed pupil radius and zero outside; phase is the exact spherical defocus
// re-expansion plus a tilt linear in the lateral source position.
FieldGrid pupil_field(const OpticalSystem& sys, const SimGrid& grid,
                      const std::array<double, 3>& source_xyz_um);

// Exact scalar free-space propagation by the angular spectrum method with
// Matsushima band limiting; evanescent components are zeroed. Throws when the
// input carries more than `band_energy_tol` of its energy beyond the band
// limit (aliasing guard).
void angular_spectrum_propagate(FieldGrid& field, double distance_mm,
                                double band_energy_tol = 1e-3);

// Raw (unnormalized) sensor-plane intensity for one point source: pupil field
// times the diffuser phase screen, propagated by f_ave, |u|^2 binned by area
// integration to the sensor pixel pitch and cropped to sensor_size^2.
Array2D<Real> simulate_psf(const OpticalSystem& sys, const DiffuserSurface& surface,
                           const SimGrid& grid, const std::array<double, 3>& source_xyz_um);

PSFStack simulate_psf_stack(const OpticalSystem& sys, const DiffuserSurface& surface,
                            const SimGrid& grid, const std::vector<double>& z_list_um,
                            const std::array<double, 2>& lateral_offset_um = {0, 0});

// Bin |u|^2 of a field to sensor pixels (area integration), centered crop.
Array2D<Real> bin_intensity(const FieldGrid& field, double sensor_pitch_um,
                            std::size_t sensor_size);

}  // namespace fds
