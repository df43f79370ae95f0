#pragma once

#include <string>
#include <vector>

#include "fds/forward.hpp"

namespace fds {

// Anisotropic weighting of the TV gradient components (gamma_xy, gamma_xy, gamma_z).
struct TVWeights {
    double gamma_xy = 1.0;
    double gamma_z = 1.0;
};

struct SolverConfig {
    double tau = 0;            // sparsity weight
    int max_iters = 50;
    double tolerance = 1e-4;   // relative objective change
    double admm_rho = 1.0;
    TVWeights tv_weights;
    bool nonneg_flag = true;   // always true here; kept for the record
};

struct IterStat {
    int iter = 0;
    double objective = 0;
    double primal_residual = 0;
    double dual_residual = 0;
};

struct ReconResult {
    Volume volume;
    bool converged = false;
    std::string warning;
    std::vector<IterStat> telemetry;
};

double soft_threshold(double v, double t);
void soft_threshold_inplace(std::vector<Real>& v, double t);

// Weighted forward-difference gradient with replicate boundary; z-gradient is
// zero for single-slice volumes.
struct GradientField {
    Array3D<Real> gx, gy, gz;
};
GradientField gradient_op(const Array3D<Real>& vol, const TVWeights& w);
// Exact adjoint (negative divergence under the replicate boundary).
Array3D<Real> gradient_adjoint(const GradientField& g, const TVWeights& w);

// Multi-depth Richardson-Lucy: x <- x * Fadj(y / F(x)) / Fadj(1), starting
// from a uniform volume, divisions floored at 1e-12*max(y). Telemetry records
// the Poisson log-likelihood per iteration. vol_ny/vol_nx = 0 means "same as
// the measurement".
ReconResult richardson_lucy(const Measurement& meas, const PSFStack& psfs, int iters,
                            std::size_t vol_ny = 0, std::size_t vol_nx = 0);

// ADMM for min_x>=0 0.5*||y - Hx||^2 + tau*||diag(gamma) grad x||_1.
// The measurement is normalized to max 1 before solving (so tau transfers
// between datasets) and the output is rescaled. Non-convergence returns the
// best iterate with converged=false, never an exception.
ReconResult admm_tv(const Measurement& meas, const PSFStack& psfs, const SolverConfig& cfg,
                    std::size_t vol_ny = 0, std::size_t vol_nx = 0);

}  // namespace fds
