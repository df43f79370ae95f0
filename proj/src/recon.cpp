#include "fds/recon.hpp"

#include <cmath>
#include <stdexcept>

#include "fds/fft.hpp"

namespace fds {

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

void soft_threshold_inplace(std::vector<Real>& v, double t) {
    for (auto& x : v) x = soft_threshold(x, t);
}

GradientField gradient_op(const Array3D<Real>& vol, const TVWeights& w) {
    const std::size_t nz = vol.nz(), ny = vol.ny(), nx = vol.nx();
    if (ny < 2 || nx < 2)
        throw std::invalid_argument("gradient_op: need >= 2 samples along lateral axes");
    GradientField g{Array3D<Real>(nz, ny, nx), Array3D<Real>(nz, ny, nx),
                    Array3D<Real>(nz, ny, nx)};
    for (std::size_t z = 0; z < nz; ++z)
        for (std::size_t y = 0; y < ny; ++y)
            for (std::size_t x = 0; x < nx; ++x) {
                // Forward differences; replicate boundary makes the last one zero.
                g.gx(z, y, x) = x + 1 < nx ? w.gamma_xy * (vol(z, y, x + 1) - vol(z, y, x)) : 0;
                g.gy(z, y, x) = y + 1 < ny ? w.gamma_xy * (vol(z, y + 1, x) - vol(z, y, x)) : 0;
                g.gz(z, y, x) = z + 1 < nz ? w.gamma_z * (vol(z + 1, y, x) - vol(z, y, x)) : 0;
            }
    return g;
}

Array3D<Real> gradient_adjoint(const GradientField& g, const TVWeights& w) {
    const std::size_t nz = g.gx.nz(), ny = g.gx.ny(), nx = g.gx.nx();
    Array3D<Real> out(nz, ny, nx);
    for (std::size_t z = 0; z < nz; ++z)
        for (std::size_t y = 0; y < ny; ++y)
            for (std::size_t x = 0; x < nx; ++x) {
                Real acc = 0;
                if (x > 0) acc += w.gamma_xy * g.gx(z, y, x - 1);
                if (x + 1 < nx) acc -= w.gamma_xy * g.gx(z, y, x);
                if (y > 0) acc += w.gamma_xy * g.gy(z, y - 1, x);
                if (y + 1 < ny) acc -= w.gamma_xy * g.gy(z, y, x);
                if (z > 0) acc += w.gamma_z * g.gz(z - 1, y, x);
                if (z + 1 < nz) acc -= w.gamma_z * g.gz(z, y, x);
                out(z, y, x) = acc;
            }
    return out;
}

ReconResult richardson_lucy(const Measurement& meas, const PSFStack& psfs, int iters,
                            std::size_t vol_ny, std::size_t vol_nx) {
    if (iters < 1) throw std::invalid_argument("richardson_lucy: iters must be >= 1");
    if (vol_ny == 0) vol_ny = meas.image.rows();
    if (vol_nx == 0) vol_nx = meas.image.cols();
    ConvOperator op(psfs, vol_ny, vol_nx);

    ReconResult res;
    res.volume.lateral_pitch_um = meas.sensor_pitch_um;
    res.volume.z_positions_um = psfs.z_positions_um;

    const Real ymax = max_value(meas.image);
    if (!(ymax > 0)) {
        res.volume.intensities = Array3D<Real>(psfs.depth_count(), vol_ny, vol_nx, 0.0);
        res.warning = "all-zero measurement; returning zero volume";
        res.converged = true;
        return res;
    }
    const Real eps = 1e-12 * ymax;

    // Normalizer Fadj(1): per-voxel sensitivity (kernel sums in the interior,
    // exact at the borders).
    Array2D<Real> ones(meas.image.rows(), meas.image.cols(), 1.0);
    Array3D<Real> norm = op.adjoint(ones);
    for (auto& v : norm.raw()) v = std::max<Real>(v, eps);

    Array3D<Real> x(psfs.depth_count(), vol_ny, vol_nx, 1.0);
    Array2D<Real> ratio(meas.image.rows(), meas.image.cols());
    for (int it = 0; it < iters; ++it) {
        Array2D<Real> model = op.forward(x);
        double loglik = 0;
        for (std::size_t i = 0; i < model.size(); ++i) {
            const Real m = std::max(model.raw()[i], eps);
            const Real y = meas.image.raw()[i];
            if (y > 0) loglik += y * std::log(m);
            loglik -= m;
            ratio.raw()[i] = y / m;
        }
        Array3D<Real> corr = op.adjoint(ratio);
        for (std::size_t i = 0; i < x.size(); ++i) {
            Real v = x.raw()[i] * corr.raw()[i] / norm.raw()[i];
            x.raw()[i] = std::max<Real>(v, 0.0);
        }
        res.telemetry.push_back({it + 1, -loglik, 0, 0});
    }
    res.volume.intensities = std::move(x);
    res.converged = true;
    return res;
}

namespace {

// Circular forward differences and their adjoint, used only inside the ADMM
// x-update diagonalization.
void circular_gradient(const Array3D<Real>& v, const TVWeights& w, Array3D<Real>& gx,
                       Array3D<Real>& gy, Array3D<Real>& gz) {
    const std::size_t nz = v.nz(), ny = v.ny(), nx = v.nx();
    for (std::size_t z = 0; z < nz; ++z)
        for (std::size_t y = 0; y < ny; ++y)
            for (std::size_t x = 0; x < nx; ++x) {
                gx(z, y, x) = w.gamma_xy * (v(z, y, (x + 1) % nx) - v(z, y, x));
                gy(z, y, x) = w.gamma_xy * (v(z, (y + 1) % ny, x) - v(z, y, x));
                gz(z, y, x) = nz > 1 ? w.gamma_z * (v((z + 1) % nz, y, x) - v(z, y, x)) : 0;
            }
}

void circular_gradient_adjoint_accum(const Array3D<Real>& gx, const Array3D<Real>& gy,
                                     const Array3D<Real>& gz, const TVWeights& w,
                                     Array3D<Real>& out) {
    const std::size_t nz = out.nz(), ny = out.ny(), nx = out.nx();
    for (std::size_t z = 0; z < nz; ++z)
        for (std::size_t y = 0; y < ny; ++y)
            for (std::size_t x = 0; x < nx; ++x) {
                Real acc = w.gamma_xy * (gx(z, y, (x + nx - 1) % nx) - gx(z, y, x));
                acc += w.gamma_xy * (gy(z, (y + ny - 1) % ny, x) - gy(z, y, x));
                if (nz > 1) acc += w.gamma_z * (gz((z + nz - 1) % nz, y, x) - gz(z, y, x));
                out(z, y, x) += acc;
            }
}

}  // namespace

ReconResult admm_tv(const Measurement& meas, const PSFStack& psfs, const SolverConfig& cfg,
                    std::size_t vol_ny, std::size_t vol_nx) {
    if (cfg.tau < 0 || cfg.max_iters < 1 || !(cfg.admm_rho > 0) ||
        !(cfg.tv_weights.gamma_xy > 0) || !(cfg.tv_weights.gamma_z > 0))
        throw std::invalid_argument("admm_tv: invalid solver config");
    if (vol_ny == 0) vol_ny = meas.image.rows();
    if (vol_nx == 0) vol_nx = meas.image.cols();

    const std::size_t mny = meas.image.rows(), mnx = meas.image.cols();
    const std::size_t nz = psfs.depth_count();
    const std::size_t py = next_fast_size(mny + vol_ny - 1);
    const std::size_t px = next_fast_size(mnx + vol_nx - 1);

    ReconResult res;
    res.volume.lateral_pitch_um = meas.sensor_pitch_um;
    res.volume.z_positions_um = psfs.z_positions_um;

    const Real yscale = max_value(meas.image);
    if (!(yscale > 0)) {
        res.volume.intensities = Array3D<Real>(nz, vol_ny, vol_nx, 0.0);
        res.warning = "all-zero measurement; returning zero volume";
        res.converged = true;
        return res;
    }

    const TVWeights& w = cfg.tv_weights;
    const double rho = cfg.admm_rho;
    Rfft3 fft(nz, py, px);
    const std::size_t S = fft.spectrum_size();
    const std::size_t sx = px / 2 + 1;

    // 3D kernel: lateral ifftshift per depth, depth index reversed modulo nz so
    // the circular z-convolution evaluated at plane 0 equals sum_z h_z * x_z.
    std::vector<Complex> c_hat;
    {
        Array3D<Real> kern(nz, py, px, 0.0);
        const std::size_t oy = py / 2 - mny / 2, ox = px / 2 - mnx / 2;
        for (std::size_t z = 0; z < nz; ++z) {
            const std::size_t zi = (nz - z) % nz;
            const auto& h = psfs.kernels[z];
            for (std::size_t y = 0; y < mny; ++y)
                for (std::size_t x = 0; x < mnx; ++x)
                    kern(zi, (oy + y + py / 2) % py, (ox + x + px / 2) % px) = h(y, x);
        }
        fft.forward(kern, c_hat);
    }

    // Spectral weights of Psi^T Psi (circular gradient) on the half spectrum.
    std::vector<Real> lap_spec(S);
    for (std::size_t z = 0; z < nz; ++z)
        for (std::size_t y = 0; y < py; ++y)
            for (std::size_t x = 0; x < sx; ++x) {
                const std::size_t i = (z * py + y) * sx + x;
                double lap = w.gamma_xy * w.gamma_xy *
                             (4 * std::pow(std::sin(M_PI * static_cast<double>(y) / py), 2) +
                              4 * std::pow(std::sin(M_PI * static_cast<double>(x) / px), 2));
                if (nz > 1)
                    lap += w.gamma_z * w.gamma_z *
                           4 * std::pow(std::sin(M_PI * static_cast<double>(z) / nz), 2);
                lap_spec[i] = lap;
            }
    // x-update denominator |C|^2 + |Psi|^2 + 1 on the half spectrum.
    std::vector<Real> denom(S);
    for (std::size_t i = 0; i < S; ++i) denom[i] = std::norm(c_hat[i]) + lap_spec[i] + 1.0;

    // Embedded (normalized) measurement and its mask: z = 0 plane, central
    // lateral window.
    Array3D<Real> y_emb(nz, py, px, 0.0);
    const std::size_t oy = py / 2 - mny / 2, ox = px / 2 - mnx / 2;
    for (std::size_t y = 0; y < mny; ++y)
        for (std::size_t x = 0; x < mnx; ++x)
            y_emb(0, oy + y, ox + x) = meas.image(y, x) / yscale;
    auto in_mask = [&](std::size_t z, std::size_t y, std::size_t x) {
        return z == 0 && y >= oy && y < oy + mny && x >= ox && x < ox + mnx;
    };
    const std::size_t wy0 = py / 2 - vol_ny / 2, wx0 = px / 2 - vol_nx / 2;

    auto zeros = [&] { return Array3D<Real>(nz, py, px, 0.0); };
    Array3D<Real> x = zeros(), cx = zeros(), nu = zeros(), alpha = zeros();
    Array3D<Real> ux = zeros(), uy = zeros(), uz = zeros();
    Array3D<Real> bx = zeros(), by = zeros(), bz = zeros();
    Array3D<Real> wv = zeros(), gd = zeros();
    Array3D<Real> gx = zeros(), gy = zeros(), gz = zeros();
    Array3D<Real> rhs = zeros(), x_prev = zeros();
    std::vector<Complex> spec1, spec2;

    double prev_obj = std::numeric_limits<double>::infinity();
    for (int it = 0; it < cfg.max_iters; ++it) {
        // nu-update: (M^T y + rho*(Cx + alpha)) / (M + rho)
        for (std::size_t z = 0; z < nz; ++z)
            for (std::size_t y = 0; y < py; ++y)
                for (std::size_t xx = 0; xx < px; ++xx) {
                    const double m = in_mask(z, y, xx) ? 1.0 : 0.0;
                    nu(z, y, xx) =
                        (m * y_emb(z, y, xx) + rho * (cx(z, y, xx) + alpha(z, y, xx))) / (m + rho);
                }

        // u-update: soft threshold of Psi x + beta
        circular_gradient(x, w, gx, gy, gz);
        const double t = cfg.tau / rho;
        for (std::size_t i = 0; i < gx.size(); ++i) {
            ux.raw()[i] = soft_threshold(gx.raw()[i] + bx.raw()[i], t);
            uy.raw()[i] = soft_threshold(gy.raw()[i] + by.raw()[i], t);
            uz.raw()[i] = soft_threshold(gz.raw()[i] + bz.raw()[i], t);
        }

        // w-update: projection onto {x >= 0, supported on the volume window}.
        // Restricting the support keeps the padded circular domain equivalent
        // to the zero-padded linear model.
        for (std::size_t z = 0; z < nz; ++z)
            for (std::size_t y = 0; y < py; ++y)
                for (std::size_t xx = 0; xx < px; ++xx) {
                    const bool in_vol = y >= wy0 && y < wy0 + vol_ny && xx >= wx0 &&
                                        xx < wx0 + vol_nx;
                    wv(z, y, xx) =
                        in_vol ? std::max<Real>(x(z, y, xx) + gd(z, y, xx), 0.0) : 0.0;
                }

        // x-update in the 3D Fourier domain
        std::swap(x_prev, x);
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs.raw()[i] = nu.raw()[i] - alpha.raw()[i];
        fft.forward(rhs, spec1);
        rhs.fill(0.0);
        for (std::size_t i = 0; i < gx.size(); ++i) {
            gx.raw()[i] = ux.raw()[i] - bx.raw()[i];
            gy.raw()[i] = uy.raw()[i] - by.raw()[i];
            gz.raw()[i] = uz.raw()[i] - bz.raw()[i];
        }
        circular_gradient_adjoint_accum(gx, gy, gz, w, rhs);
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs.raw()[i] += wv.raw()[i] - gd.raw()[i];
        fft.forward(rhs, spec2);
        for (std::size_t i = 0; i < S; ++i)
            spec2[i] = (std::conj(c_hat[i]) * spec1[i] + spec2[i]) / denom[i];
        spec1 = spec2;  // keep x_hat for the Cx evaluation
        fft.inverse(spec2, x);
        for (std::size_t i = 0; i < S; ++i) spec1[i] *= c_hat[i];
        fft.inverse(spec1, cx);

        // dual updates
        circular_gradient(x, w, gx, gy, gz);
        double primal2 = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const Real r1 = cx.raw()[i] - nu.raw()[i];
            const Real r2x = gx.raw()[i] - ux.raw()[i];
            const Real r2y = gy.raw()[i] - uy.raw()[i];
            const Real r2z = gz.raw()[i] - uz.raw()[i];
            const Real r3 = x.raw()[i] - wv.raw()[i];
            alpha.raw()[i] += r1;
            bx.raw()[i] += r2x;
            by.raw()[i] += r2y;
            bz.raw()[i] += r2z;
            gd.raw()[i] += r3;
            primal2 += r1 * r1 + r2x * r2x + r2y * r2y + r2z * r2z + r3 * r3;
        }
        double dual2 = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const Real d = x.raw()[i] - x_prev.raw()[i];
            dual2 += d * d;
        }

        // True objective at the current iterate.
        double fid = 0, tv = 0;
        for (std::size_t y = 0; y < mny; ++y)
            for (std::size_t xx = 0; xx < mnx; ++xx) {
                const double r = cx(0, oy + y, ox + xx) - y_emb(0, oy + y, ox + xx);
                fid += r * r;
            }
        for (std::size_t i = 0; i < gx.size(); ++i)
            tv += std::abs(gx.raw()[i]) + std::abs(gy.raw()[i]) + std::abs(gz.raw()[i]);
        const double obj = 0.5 * fid + cfg.tau * tv;
        res.telemetry.push_back({it + 1, obj, std::sqrt(primal2), rho * std::sqrt(dual2)});

        if (std::isfinite(prev_obj) &&
            std::abs(obj - prev_obj) <= cfg.tolerance * std::max(std::abs(prev_obj), 1e-30)) {
            res.converged = true;
            prev_obj = obj;
            break;
        }
        prev_obj = obj;
    }
    if (!res.converged) res.warning = "admm_tv: max_iters reached before tolerance";

    // Output: the feasible (nonnegative) iterate, cropped and rescaled.
    Array3D<Real> out(nz, vol_ny, vol_nx);
    const std::size_t vy = py / 2 - vol_ny / 2, vx = px / 2 - vol_nx / 2;
    for (std::size_t z = 0; z < nz; ++z)
        for (std::size_t y = 0; y < vol_ny; ++y)
            for (std::size_t xx = 0; xx < vol_nx; ++xx)
                out(z, y, xx) = std::max<Real>(x(z, vy + y, vx + xx), 0.0) * yscale;
    res.volume.intensities = std::move(out);
    return res;
}

}  // namespace fds
