#include "fds/fft.hpp"

#include <fftw3.h>

#include <map>
#include <tuple>

namespace fds {
namespace {

// Plan cache keyed by (rank dims..., sign). Plans are created with
// FFTW_ESTIMATE on an alignment-compatible buffer and executed via the
// new-array interface.
struct PlanKey {
    int d0, d1, d2, sign;
    bool operator<(const PlanKey& o) const {
        return std::tie(d0, d1, d2, sign) < std::tie(o.d0, o.d1, o.d2, o.sign);
    }
};

std::map<PlanKey, fftw_plan>& plan_cache() {
    static std::map<PlanKey, fftw_plan> cache;
    return cache;
}

fftw_plan get_plan(int d0, int d1, int d2, int sign, fftw_complex* buf) {
    PlanKey key{d0, d1, d2, sign};
    auto& cache = plan_cache();
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    fftw_plan p;
    // FFTW_UNALIGNED: plans are reused on buffers with arbitrary alignment.
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    if (d0 == 1) {
        p = fftw_plan_dft_2d(d1, d2, buf, buf, sign, flags);
    } else {
        p = fftw_plan_dft_3d(d0, d1, d2, buf, buf, sign, flags);
    }
    cache.emplace(key, p);
    return p;
}

}  // namespace

void fft2(Array2D<Complex>& a, int sign) {
    auto* buf = reinterpret_cast<fftw_complex*>(a.data());
    fftw_plan p = get_plan(1, static_cast<int>(a.rows()), static_cast<int>(a.cols()), sign, buf);
    fftw_execute_dft(p, buf, buf);
}

void ifft2_normalized(Array2D<Complex>& a) {
    fft2(a, +1);
    const Real scale = 1.0 / static_cast<Real>(a.size());
    for (auto& v : a.raw()) v *= scale;
}

void fft3(Array3D<Complex>& a, int sign) {
    auto* buf = reinterpret_cast<fftw_complex*>(a.data());
    fftw_plan p = get_plan(static_cast<int>(a.nz()), static_cast<int>(a.ny()),
                           static_cast<int>(a.nx()), sign, buf);
    fftw_execute_dft(p, buf, buf);
}

void ifft3_normalized(Array3D<Complex>& a) {
    fft3(a, +1);
    const Real scale = 1.0 / static_cast<Real>(a.size());
    for (auto& v : a.raw()) v *= scale;
}

Rfft3::Rfft3(std::size_t nz, std::size_t ny, std::size_t nx) : nz_(nz), ny_(ny), nx_(nx) {
    std::vector<Real> rbuf(volume_size());
    std::vector<Complex> cbuf(spectrum_size());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fwd_plan_ = fftw_plan_dft_r2c_3d(static_cast<int>(nz), static_cast<int>(ny),
                                     static_cast<int>(nx), rbuf.data(),
                                     reinterpret_cast<fftw_complex*>(cbuf.data()), flags);
    inv_plan_ = fftw_plan_dft_c2r_3d(static_cast<int>(nz), static_cast<int>(ny),
                                     static_cast<int>(nx),
                                     reinterpret_cast<fftw_complex*>(cbuf.data()), rbuf.data(),
                                     flags);
}

Rfft3::~Rfft3() {
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_plan_));
    fftw_destroy_plan(static_cast<fftw_plan>(inv_plan_));
}

void Rfft3::forward(const Array3D<Real>& in, std::vector<Complex>& out) const {
    out.resize(spectrum_size());
    fftw_execute_dft_r2c(static_cast<fftw_plan>(fwd_plan_),
                         const_cast<Real*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
}

void Rfft3::inverse(std::vector<Complex>& in, Array3D<Real>& out) const {
    fftw_execute_dft_c2r(static_cast<fftw_plan>(inv_plan_),
                         reinterpret_cast<fftw_complex*>(in.data()), out.data());
    const Real scale = 1.0 / static_cast<Real>(volume_size());
    for (auto& v : out.raw()) v *= scale;
}

}  // namespace fds
