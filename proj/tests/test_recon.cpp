#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>

#include "fds/recon.hpp"
#include "test_util.hpp"

using namespace fds;

namespace {

// Direct adjoint (correlation) matching the centered-crop forward reference.
Array3D<Real> direct_adjoint(const Array2D<Real>& meas,
                             const std::vector<Array2D<Real>>& kernels, std::size_t vny,
                             std::size_t vnx) {
    const std::size_t mny = meas.rows(), mnx = meas.cols();
    Array3D<Real> out(kernels.size(), vny, vnx, 0.0);
    for (std::size_t z = 0; z < kernels.size(); ++z)
        for (std::size_t vy = 0; vy < vny; ++vy)
            for (std::size_t vx = 0; vx < vnx; ++vx) {
                Real acc = 0;
                for (std::size_t y = 0; y < mny; ++y)
                    for (std::size_t x = 0; x < mnx; ++x) {
                        const long ky = static_cast<long>(y + vny / 2) - static_cast<long>(vy);
                        const long kx = static_cast<long>(x + vnx / 2) - static_cast<long>(vx);
                        if (ky >= 0 && kx >= 0 && ky < static_cast<long>(mny) &&
                            kx < static_cast<long>(mnx))
                            acc += meas(y, x) * kernels[z](ky, kx);
                    }
                out(z, vy, vx) = acc;
            }
    return out;
}

double total_variation(const Array3D<Real>& v, const TVWeights& w) {
    GradientField g = gradient_op(v, w);
    double tv = 0;
    for (std::size_t i = 0; i < g.gx.size(); ++i)
        tv += std::abs(g.gx.raw()[i]) + std::abs(g.gy.raw()[i]) + std::abs(g.gz.raw()[i]);
    return tv;
}

}  // namespace

TEST_CASE("soft threshold") {
    CHECK(soft_threshold(3.0, 1.0) == doctest::Approx(2.0));
    CHECK(soft_threshold(-3.0, 1.0) == doctest::Approx(-2.0));
    CHECK(soft_threshold(0.5, 1.0) == 0.0);
    CHECK(soft_threshold(-0.7, 0.7) == 0.0);
    CHECK(soft_threshold(2.5, 0.0) == doctest::Approx(2.5));  // t = 0 is the identity
    std::vector<Real> v{3, -3, 0.5};
    soft_threshold_inplace(v, 1.0);
    CHECK(v == std::vector<Real>{2, -2, 0});
}

TEST_CASE("gradient operator: constant volumes, weighting and the adjoint identity") {
    TVWeights w{1.5, 0.5};
    Array3D<Real> c(3, 6, 5, 4.2);
    GradientField gc = gradient_op(c, w);
    CHECK(sum_value(gc.gx) == 0.0);
    CHECK(sum_value(gc.gy) == 0.0);
    CHECK(sum_value(gc.gz) == 0.0);

    Array3D<Real> x = testutil::random_volume(3, 6, 5, 1);
    GradientField g = gradient_op(x, w);
    // gamma_z = 0 silences axial variation.
    GradientField gz0 = gradient_op(x, TVWeights{1.0, 0.0});
    for (Real v : gz0.gz.raw()) CHECK(v == 0.0);

    // <Gx, g> == <x, G^T g> to 1e-9 relative.
    GradientField y{testutil::random_volume(3, 6, 5, 2), testutil::random_volume(3, 6, 5, 3),
                    testutil::random_volume(3, 6, 5, 4)};
    const double lhs =
        dot_value(g.gx, y.gx) + dot_value(g.gy, y.gy) + dot_value(g.gz, y.gz);
    const double rhs = dot_value(x, gradient_adjoint(y, w));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));

    // Single-slice volumes keep a well-defined (zero) z-gradient.
    Array3D<Real> single = testutil::random_volume(1, 6, 5, 5);
    GradientField gs = gradient_op(single, w);
    for (Real v : gs.gz.raw()) CHECK(v == 0.0);
}

TEST_CASE("one Richardson-Lucy iteration matches the hand-computed update") {
    PSFStack psfs = testutil::random_psf_stack(2, 12, 12, 30);
    Array3D<Real> x_true = testutil::random_volume(2, 6, 6, 31);
    Measurement meas{testutil::direct_forward(x_true, psfs.kernels), 1.0};

    ReconResult rr = richardson_lucy(meas, psfs, 1, 6, 6);

    // By hand: x1 = x0 * Fadj(y / F(x0)) / Fadj(1) from the uniform start.
    const double eps = 1e-12 * max_value(meas.image);
    Array3D<Real> x0(2, 6, 6, 1.0);
    Array2D<Real> model = testutil::direct_forward(x0, psfs.kernels);
    Array2D<Real> ratio(12, 12);
    for (std::size_t i = 0; i < ratio.size(); ++i)
        ratio.raw()[i] = meas.image.raw()[i] / std::max(model.raw()[i], eps);
    Array2D<Real> ones(12, 12, 1.0);
    Array3D<Real> norm = direct_adjoint(ones, psfs.kernels, 6, 6);
    Array3D<Real> corr = direct_adjoint(ratio, psfs.kernels, 6, 6);
    for (std::size_t i = 0; i < corr.size(); ++i) {
        const double expect = corr.raw()[i] / std::max(norm.raw()[i], eps);
        CHECK(rr.volume.intensities.raw()[i] == doctest::Approx(expect).epsilon(1e-8));
    }
    CHECK_THROWS_AS(richardson_lucy(meas, psfs, 0), std::invalid_argument);
}

TEST_CASE("Richardson-Lucy keeps the Poisson likelihood non-decreasing and flux bounded") {
    for (unsigned seed : {10u, 20u, 30u}) {
        PSFStack psfs = testutil::random_psf_stack(3, 16, 16, seed);
        Array3D<Real> x_true = testutil::random_volume(3, 8, 8, seed + 1);
        ConvOperator op(psfs, 8, 8);
        Measurement meas{op.forward(x_true), 1.0};
        ReconResult rr = richardson_lucy(meas, psfs, 8, 8, 8);
        REQUIRE(rr.telemetry.size() == 8);
        // telemetry.objective is the negative log-likelihood.
        for (std::size_t i = 1; i < rr.telemetry.size(); ++i)
            CHECK(rr.telemetry[i].objective <=
                  rr.telemetry[i - 1].objective + 1e-9 * std::abs(rr.telemetry[0].objective));
        for (Real v : rr.volume.intensities.raw()) CHECK(v >= 0);
        CHECK(sum_value(rr.volume.intensities) < 10 * sum_value(meas.image));
    }
}

TEST_CASE("Richardson-Lucy concentrates a single-kernel measurement at the right depth") {
    // Five well-separated blob kernels; the measurement is kernel 1 exactly.
    PSFStack psfs;
    for (int z = 0; z < 5; ++z) {
        Array2D<Real> k(32, 32, 0.0);
        const double cx = 6 + 5 * z, cy = 16;
        for (std::size_t y = 0; y < 32; ++y)
            for (std::size_t x = 0; x < 32; ++x)
                k(y, x) = std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / 4.0);
        psfs.kernels.push_back(k);
        psfs.z_positions_um.push_back(z);
    }
    psfs.sensor_pitch_um = 1.0;
    Measurement meas{psfs.kernels[1], 1.0};
    ReconResult rr = richardson_lucy(meas, psfs, 8, 16, 16);
    double mass_near = 0, mass_total = sum_value(rr.volume.intensities);
    for (std::size_t z = 0; z <= 2; ++z)
        for (std::size_t y = 0; y < 16; ++y)
            for (std::size_t x = 0; x < 16; ++x) mass_near += rr.volume.intensities(z, y, x);
    CHECK(mass_near >= 0.9 * mass_total);
}

TEST_CASE("all-zero measurements give zero volumes with a warning, not an exception") {
    PSFStack psfs = testutil::random_psf_stack(2, 8, 8, 77);
    Measurement meas{Array2D<Real>(8, 8, 0.0), 1.0};
    ReconResult rl = richardson_lucy(meas, psfs, 4);
    CHECK(sum_value(rl.volume.intensities) == 0.0);
    CHECK(!rl.warning.empty());
    SolverConfig cfg;
    cfg.tau = 1e-5;
    ReconResult ad = admm_tv(meas, psfs, cfg);
    CHECK(sum_value(ad.volume.intensities) == 0.0);
    CHECK(!ad.warning.empty());
}

TEST_CASE("ADMM with tau=0 matches the dense normal-equations solution") {
    // Overdetermined instance: 16x16 measurement, 3 depths of an 8x8 volume,
    // strictly positive ground truth so the constraint is inactive and the
    // least-squares solution is the unique optimum.
    const std::size_t mny = 16, mnx = 16, vny = 8, vnx = 8, nz = 3;
    PSFStack psfs = testutil::random_psf_stack(nz, mny, mnx, 400);
    Array3D<Real> x_true(nz, vny, vnx);
    {
        Array3D<Real> r = testutil::random_volume(nz, vny, vnx, 401);
        for (std::size_t i = 0; i < r.size(); ++i) x_true.raw()[i] = 0.5 + r.raw()[i];
    }
    Measurement meas{testutil::direct_forward(x_true, psfs.kernels), 1.0};

    // Dense H, one column per voxel, built from the direct-convolution oracle.
    const std::size_t ncols = nz * vny * vnx, nrows = mny * mnx;
    Eigen::MatrixXd H(nrows, ncols);
    for (std::size_t c = 0; c < ncols; ++c) {
        Array3D<Real> e(nz, vny, vnx, 0.0);
        e.raw()[c] = 1.0;
        Array2D<Real> col = testutil::direct_forward(e, psfs.kernels);
        for (std::size_t r = 0; r < nrows; ++r) H(r, c) = col.raw()[r];
    }
    Eigen::VectorXd y(nrows);
    for (std::size_t r = 0; r < nrows; ++r) y(r) = meas.image.raw()[r];
    Eigen::VectorXd x_ls = (H.transpose() * H).ldlt().solve(H.transpose() * y);

    SolverConfig cfg;
    cfg.tau = 0.0;
    cfg.max_iters = 16000;
    cfg.tolerance = 0;
    ReconResult rr = admm_tv(meas, psfs, cfg, vny, vnx);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < ncols; ++i) {
        const double d = rr.volume.intensities.raw()[i] - x_ls(i);
        num += d * d;
        den += x_ls(i) * x_ls(i);
    }
    CHECK(std::sqrt(num / den) < 1e-4);
}

TEST_CASE("ADMM objective is non-increasing after burn-in and runs are deterministic") {
    // Energy-normalized kernels, as produced by the wave simulation: raw
    // uniform-random kernels give the forward operator a DC gain of several
    // hundred, a conditioning regime no physical PSF stack reaches.
    PSFStack psfs = testutil::random_psf_stack(3, 16, 16, 500);
    for (auto& k : psfs.kernels) {
        const Real s = sum_value(k);
        for (auto& v : k.raw()) v /= s;
    }
    Array3D<Real> x_true = testutil::random_volume(3, 8, 8, 501);
    Measurement meas{testutil::direct_forward(x_true, psfs.kernels), 1.0};
    SolverConfig cfg;
    cfg.tau = 1e-3;
    cfg.max_iters = 60;
    cfg.tolerance = 0.0;  // run all iterations
    // A heavier penalty over-damps the ADMM transient; smaller rho converges
    // in fewer iterations but with a small objective ripple.
    cfg.admm_rho = 3.0;
    ReconResult a = admm_tv(meas, psfs, cfg, 8, 8);
    REQUIRE(a.telemetry.size() >= 50);
    for (std::size_t i = 6; i < a.telemetry.size(); ++i)
        CHECK(a.telemetry[i].objective <=
              a.telemetry[i - 1].objective + 1e-6 * a.telemetry[5].objective);
    ReconResult b = admm_tv(meas, psfs, cfg, 8, 8);
    CHECK(a.volume.intensities.raw() == b.volume.intensities.raw());
}

TEST_CASE("large tau drives the reconstruction toward gradient flatness") {
    PSFStack psfs = testutil::random_psf_stack(2, 16, 16, 600);
    Array3D<Real> x_true = testutil::random_volume(2, 8, 8, 601);
    Measurement meas{testutil::direct_forward(x_true, psfs.kernels), 1.0};
    SolverConfig cfg;
    cfg.tau = 10.0;
    cfg.max_iters = 200;
    cfg.tolerance = 1e-12;
    ReconResult rr = admm_tv(meas, psfs, cfg, 8, 8);
    ConvOperator op(psfs, 8, 8);
    Array3D<Real> backproj = op.adjoint(meas.image);
    TVWeights w;
    CHECK(total_variation(rr.volume.intensities, w) < total_variation(backproj, w));
}

TEST_CASE("ADMM tau=0 data fidelity is at least as good as 8-iteration RL") {
    PSFStack psfs = testutil::random_psf_stack(1, 16, 16, 700);
    Array3D<Real> x_true = testutil::random_volume(1, 8, 8, 701);
    Measurement meas{testutil::direct_forward(x_true, psfs.kernels), 1.0};
    ConvOperator op(psfs, 8, 8);
    auto fidelity = [&](const Array3D<Real>& x) {
        Array2D<Real> m = op.forward(x);
        double s = 0;
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double d = m.raw()[i] - meas.image.raw()[i];
            s += d * d;
        }
        return s;
    };
    SolverConfig cfg;
    cfg.tau = 0.0;
    cfg.max_iters = 2000;
    cfg.tolerance = 1e-13;
    ReconResult admm = admm_tv(meas, psfs, cfg, 8, 8);
    ReconResult rl = richardson_lucy(meas, psfs, 8, 8, 8);
    CHECK(fidelity(admm.volume.intensities) <= fidelity(rl.volume.intensities) + 1e-12);
}

TEST_CASE("solver config validation") {
    PSFStack psfs = testutil::random_psf_stack(1, 8, 8, 800);
    Measurement meas{testutil::random_image(8, 8, 801), 1.0};
    SolverConfig cfg;
    cfg.tau = -1;
    CHECK_THROWS_AS(admm_tv(meas, psfs, cfg), std::invalid_argument);
    cfg = {};
    cfg.admm_rho = 0;
    CHECK_THROWS_AS(admm_tv(meas, psfs, cfg), std::invalid_argument);
    cfg = {};
    cfg.max_iters = 0;
    CHECK_THROWS_AS(admm_tv(meas, psfs, cfg), std::invalid_argument);
}
