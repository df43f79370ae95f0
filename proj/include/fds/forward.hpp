#pragma once

#include <cstdint>
#include <vector>

#include "fds/array.hpp"
#include "fds/wavesim.hpp"

namespace fds {

// 3D nonnegative intensity grid, ordered [z][y][x]. Lateral pitch is the PSF
// object-space pitch (sensor_pitch / M), so one voxel maps to one sensor
// pixel.
struct Volume {
    Array3D<Real> intensities;
    double lateral_pitch_um = 0;
    std::vector<double> z_positions_um;
};

struct Measurement {
    Array2D<Real> image;
    double sensor_pitch_um = 0;
};

// Multi-depth FFT convolution operator y = sum_z h_z * x_z with zero-padded
// linear convolution, output cropped centered to the sensor extent (the PSF
// kernel shape). Kernel spectra are precomputed once, so iterative solvers
// can reuse an instance cheaply.
class ConvOperator {
public:
    ConvOperator(const PSFStack& psfs, std::size_t vol_ny, std::size_t vol_nx);

    std::size_t depth_count() const { return kernel_ft_.size(); }
    std::size_t vol_ny() const { return vol_ny_; }
    std::size_t vol_nx() const { return vol_nx_; }
    std::size_t meas_ny() const { return meas_ny_; }
    std::size_t meas_nx() const { return meas_nx_; }

    Array2D<Real> forward(const Array3D<Real>& vol) const;
    Array3D<Real> adjoint(const Array2D<Real>& meas) const;

private:
    std::size_t vol_ny_, vol_nx_, meas_ny_, meas_nx_, pad_ny_, pad_nx_;
    std::vector<Array2D<Complex>> kernel_ft_;  // centered at origin, padded
};

// Smallest FFT-friendly size (factors 2,3,5,7) >= n.
std::size_t next_fast_size(std::size_t n);

// y = sum_z h_z * x_z (Eq. of the shift-invariant image formation model).
Measurement forward_project(const Volume& vol, const PSFStack& psfs);

// Exact adjoint of forward_project under the same padding/cropping.
Volume adjoint_project(const Measurement& meas, const PSFStack& psfs);

// Shift-varying block-wise model: partition the plane into square blocks of
// block_px voxels and convolve each block's content with its own PSF.
// psf_field[by][bx] is the simulated response to a point at the center of
// block (by, bx) and therefore already encodes the absolute pattern position;
// block content is embedded relative to the block center so that convolution
// contributes only the within-block offsets. Must cover ceil(plane/block_px)
// blocks per axis.
Measurement forward_project_blockwise(const Array2D<Real>& plane,
                                      const std::vector<std::vector<Array2D<Real>>>& psf_field,
                                      std::size_t block_px, double sensor_pitch_um);

// y + n with n ~ iid N(0, (level_fraction*max(y))^2); negatives clamped to 0.
Measurement add_gaussian_noise(const Measurement& meas, double level_fraction,
                               std::uint64_t seed);

}  // namespace fds
