#include "fds/forward.hpp"

#include <cmath>
#include <stdexcept>

#include "fds/fft.hpp"
#include "fds/rng.hpp"

namespace fds {

namespace {

// Embed `src` centered in an nr x nc zero grid.
Array2D<Complex> embed_centered(const Array2D<Real>& src, std::size_t nr, std::size_t nc) {
    Array2D<Complex> out(nr, nc);
    const std::size_t oy = nr / 2 - src.rows() / 2;
    const std::size_t ox = nc / 2 - src.cols() / 2;
    for (std::size_t y = 0; y < src.rows(); ++y)
        for (std::size_t x = 0; x < src.cols(); ++x)
            out(oy + y, ox + x) = src(y, x);
    return out;
}

// Embed centered then circular-shift so the kernel center lands at index 0.
Array2D<Complex> embed_origin(const Array2D<Real>& src, std::size_t nr, std::size_t nc) {
    Array2D<Complex> c = embed_centered(src, nr, nc);
    Array2D<Complex> out(nr, nc);
    for (std::size_t y = 0; y < nr; ++y)
        for (std::size_t x = 0; x < nc; ++x)
            out(y, x) = c((y + nr / 2) % nr, (x + nc / 2) % nc);
    return out;
}

}  // namespace

std::size_t next_fast_size(std::size_t n) {
    auto smooth = [](std::size_t v) {
        for (std::size_t p : {2, 3, 5, 7})
            while (v % p == 0) v /= p;
        return v == 1;
    };
    while (!smooth(n)) ++n;
    return n;
}

ConvOperator::ConvOperator(const PSFStack& psfs, std::size_t vol_ny, std::size_t vol_nx)
    : vol_ny_(vol_ny), vol_nx_(vol_nx) {
    if (psfs.kernels.empty()) throw std::invalid_argument("ConvOperator: empty PSF stack");
    meas_ny_ = psfs.kernels[0].rows();
    meas_nx_ = psfs.kernels[0].cols();
    pad_ny_ = next_fast_size(meas_ny_ + vol_ny_ - 1);
    pad_nx_ = next_fast_size(meas_nx_ + vol_nx_ - 1);
    kernel_ft_.reserve(psfs.kernels.size());
    for (const auto& k : psfs.kernels) {
        if (k.rows() != meas_ny_ || k.cols() != meas_nx_)
            throw std::invalid_argument("ConvOperator: PSF kernels differ in shape");
        Array2D<Complex> f = embed_origin(k, pad_ny_, pad_nx_);
        fft2(f, -1);
        kernel_ft_.push_back(std::move(f));
    }
}

Array2D<Real> ConvOperator::forward(const Array3D<Real>& vol) const {
    if (vol.nz() != depth_count() || vol.ny() != vol_ny_ || vol.nx() != vol_nx_)
        throw std::invalid_argument("ConvOperator::forward: volume shape mismatch");
    Array2D<Complex> acc(pad_ny_, pad_nx_);
    Array2D<Complex> work(pad_ny_, pad_nx_);
    for (std::size_t z = 0; z < vol.nz(); ++z) {
        work.fill(Complex{});
        const std::size_t oy = pad_ny_ / 2 - vol_ny_ / 2, ox = pad_nx_ / 2 - vol_nx_ / 2;
        for (std::size_t y = 0; y < vol_ny_; ++y)
            for (std::size_t x = 0; x < vol_nx_; ++x)
                work(oy + y, ox + x) = vol(z, y, x);
        fft2(work, -1);
        const auto& kf = kernel_ft_[z];
        for (std::size_t i = 0; i < work.size(); ++i)
            acc.raw()[i] += work.raw()[i] * kf.raw()[i];
    }
    ifft2_normalized(acc);
    Array2D<Real> out(meas_ny_, meas_nx_);
    const std::size_t oy = pad_ny_ / 2 - meas_ny_ / 2, ox = pad_nx_ / 2 - meas_nx_ / 2;
    for (std::size_t y = 0; y < meas_ny_; ++y)
        for (std::size_t x = 0; x < meas_nx_; ++x)
            out(y, x) = acc(oy + y, ox + x).real();
    return out;
}

Array3D<Real> ConvOperator::adjoint(const Array2D<Real>& meas) const {
    if (meas.rows() != meas_ny_ || meas.cols() != meas_nx_)
        throw std::invalid_argument("ConvOperator::adjoint: measurement shape mismatch");
    Array2D<Complex> mf = embed_centered(meas, pad_ny_, pad_nx_);
    fft2(mf, -1);
    Array3D<Real> out(depth_count(), vol_ny_, vol_nx_);
    Array2D<Complex> work(pad_ny_, pad_nx_);
    const std::size_t oy = pad_ny_ / 2 - vol_ny_ / 2, ox = pad_nx_ / 2 - vol_nx_ / 2;
    for (std::size_t z = 0; z < depth_count(); ++z) {
        const auto& kf = kernel_ft_[z];
        for (std::size_t i = 0; i < work.size(); ++i)
            work.raw()[i] = mf.raw()[i] * std::conj(kf.raw()[i]);
        ifft2_normalized(work);
        for (std::size_t y = 0; y < vol_ny_; ++y)
            for (std::size_t x = 0; x < vol_nx_; ++x)
                out(z, y, x) = work(oy + y, ox + x).real();
    }
    return out;
}

Measurement forward_project(const Volume& vol, const PSFStack& psfs) {
    if (vol.intensities.nz() != psfs.depth_count())
        throw std::invalid_argument("forward_project: depth count mismatch");
    ConvOperator op(psfs, vol.intensities.ny(), vol.intensities.nx());
    return Measurement{op.forward(vol.intensities), psfs.sensor_pitch_um};
}

Volume adjoint_project(const Measurement& meas, const PSFStack& psfs) {
    ConvOperator op(psfs, meas.image.rows(), meas.image.cols());
    Volume v;
    v.intensities = op.adjoint(meas.image);
    v.z_positions_um = psfs.z_positions_um;
    v.lateral_pitch_um = meas.sensor_pitch_um;  // caller rescales by 1/M if needed
    return v;
}

Measurement forward_project_blockwise(const Array2D<Real>& plane,
                                      const std::vector<std::vector<Array2D<Real>>>& psf_field,
                                      std::size_t block_px, double sensor_pitch_um) {
    if (psf_field.empty() || psf_field[0].empty())
        throw std::invalid_argument("forward_project_blockwise: empty PSF field");
    const std::size_t nby = (plane.rows() + block_px - 1) / block_px;
    const std::size_t nbx = (plane.cols() + block_px - 1) / block_px;
    if (psf_field.size() < nby || psf_field[0].size() < nbx)
        throw std::invalid_argument("forward_project_blockwise: PSF field does not cover plane");
    const std::size_t mny = psf_field[0][0].rows(), mnx = psf_field[0][0].cols();
    const std::size_t pny = next_fast_size(mny + plane.rows() - 1);
    const std::size_t pnx = next_fast_size(mnx + plane.cols() - 1);

    Array2D<Complex> acc(pny, pnx);
    Array2D<Complex> work(pny, pnx);
    for (std::size_t by = 0; by < nby; ++by)
        for (std::size_t bx = 0; bx < nbx; ++bx) {
            const auto& psf = psf_field[by][bx];
            if (psf.rows() != mny || psf.cols() != mnx)
                throw std::invalid_argument("forward_project_blockwise: PSF shapes differ");
            work.fill(Complex{});
            bool any = false;
            // Each block's PSF is the response to a point at the block center
            // and already carries the absolute pattern position, so the block
            // content is embedded relative to its own center: convolution
            // supplies only the within-block offsets.
            const long cby = static_cast<long>(by * block_px + block_px / 2);
            const long cbx = static_cast<long>(bx * block_px + block_px / 2);
            for (std::size_t y = by * block_px; y < std::min((by + 1) * block_px, plane.rows()); ++y)
                for (std::size_t x = bx * block_px; x < std::min((bx + 1) * block_px, plane.cols());
                     ++x) {
                    const long ry = static_cast<long>(pny / 2) + static_cast<long>(y) - cby;
                    const long rx = static_cast<long>(pnx / 2) + static_cast<long>(x) - cbx;
                    work(static_cast<std::size_t>(ry), static_cast<std::size_t>(rx)) = plane(y, x);
                    any = any || plane(y, x) != 0;
                }
            if (!any) continue;
            fft2(work, -1);
            Array2D<Complex> kf = embed_origin(psf, pny, pnx);
            fft2(kf, -1);
            for (std::size_t i = 0; i < work.size(); ++i)
                acc.raw()[i] += work.raw()[i] * kf.raw()[i];
        }
    ifft2_normalized(acc);
    Array2D<Real> out(mny, mnx);
    const std::size_t cy = pny / 2 - mny / 2, cx = pnx / 2 - mnx / 2;
    for (std::size_t y = 0; y < mny; ++y)
        for (std::size_t x = 0; x < mnx; ++x)
            out(y, x) = acc(cy + y, cx + x).real();
    return Measurement{std::move(out), sensor_pitch_um};
}

Measurement add_gaussian_noise(const Measurement& meas, double level_fraction,
                               std::uint64_t seed) {
    if (level_fraction < 0)
        throw std::invalid_argument("add_gaussian_noise: level_fraction must be >= 0");
    Measurement out = meas;
    if (level_fraction == 0) return out;
    const Real sigma = level_fraction * max_value(meas.image);
    if (!(sigma > 0)) return out;
    auto rng = substream(seed, "noise");
    std::normal_distribution<Real> gauss(0.0, sigma);
    for (auto& v : out.image.raw()) v = std::max<Real>(0.0, v + gauss(rng));
    return out;
}

}  // namespace fds
