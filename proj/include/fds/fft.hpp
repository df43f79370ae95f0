#pragma once

#include "fds/array.hpp"

namespace fds {

// In-place 2D complex FFT. Plans are cached per shape/direction and reused.
// All plans use FFTW_ESTIMATE so repeated runs are bit-identical.
void fft2(Array2D<Complex>& a, int sign);  // sign: -1 forward, +1 inverse (unnormalized)

// Forward then inverse leaves the array scaled by rows*cols; this helper
// applies the 1/(rows*cols) normalization.
void ifft2_normalized(Array2D<Complex>& a);

// In-place 3D complex FFT over an [z][y][x] volume.
void fft3(Array3D<Complex>& a, int sign);
void ifft3_normalized(Array3D<Complex>& a);

// Real-to-complex 3D transform pair over [z][y][x] volumes, half spectrum
// along x (nx/2+1 columns). Owns its plans; one instance per shape.
class Rfft3 {
public:
    Rfft3(std::size_t nz, std::size_t ny, std::size_t nx);
    ~Rfft3();
    Rfft3(const Rfft3&) = delete;
    Rfft3& operator=(const Rfft3&) = delete;

    std::size_t spectrum_size() const { return nz_ * ny_ * (nx_ / 2 + 1); }
    std::size_t volume_size() const { return nz_ * ny_ * nx_; }

    void forward(const Array3D<Real>& in, std::vector<Complex>& out) const;
    // Normalized inverse; `in` is destroyed.
    void inverse(std::vector<Complex>& in, Array3D<Real>& out) const;

private:
    std::size_t nz_, ny_, nx_;
    void* fwd_plan_;
    void* inv_plan_;
};

}  // namespace fds
