#pragma once

#include <vector>

#include "qsl/potential.hpp"
#include "qsl/quasi_system.hpp"

namespace qsl {

// Modified Pruefer variables y = r sin(theta), y^[1] = k r cos(theta). The standard
// scaling is k = sqrt(lambda); eigenvalue shooting below zero uses k = 1.
struct PrueferTrajectory {
    double lambda = 0.0;
    double c = 0.0;
    double k = 1.0;
    double log_c1 = 0.0;
    std::vector<double> grid;
    std::vector<double> theta;
    std::vector<double> log_r; // empty until log_r_trajectory fills it
};

struct PrueferOptions {
    double tol = 1e-12; // absolute and relative local tolerance of the RK controller
};

PrueferTrajectory theta_trajectory(const Primitive& p, double lambda, double c,
                                   const std::vector<double>& grid, PrueferOptions opt = {});
PrueferTrajectory theta_trajectory(const Primitive& p, double lambda, double c, int grid_hint = 512,
                                   PrueferOptions opt = {});

// Same angle with an explicit scaling k > 0 (any k gives the same zero set of y).
PrueferTrajectory theta_trajectory_scaled(const Primitive& p, double lambda, double k, double c,
                                          const std::vector<double>& grid, PrueferOptions opt = {});

// theta at the right endpoint only.
double theta_end(const Primitive& p, double lambda, double k, double c, PrueferOptions opt = {});

// log r by quadrature of the exponent along the angle; c1 = exp(log_c1).
std::vector<double> log_r_trajectory(const Primitive& p, const PrueferTrajectory& traj,
                                     PrueferOptions opt = {});
// log r from the coupled ODE for (theta, log r); an independent check of the above.
std::vector<double> log_r_ode(const Primitive& p, const PrueferTrajectory& traj,
                              PrueferOptions opt = {});

// (y, y^[1]) samples; needs log_r filled.
SampledSolution<double> reconstruct_solution(const PrueferTrajectory& traj);

struct KernelValues {
    cplx b, a, A, B;
    double U = 0.0;
    cplx w, upsilon;
    double Upsilon = 0.0;
};

// Running kernels on a grid for fixed (c, lambda).
struct KernelProfile {
    cplx lambda;
    double c = 0.0;
    std::vector<double> grid;
    std::vector<cplx> b, a, A, B, w;
    std::vector<double> U;
    double Upsilon = 0.0;

    cplx upsilon(size_t i) const;
};

KernelProfile kernel_profile(const Primitive& p, double c, cplx lambda,
                             const std::vector<double>& grid);
KernelProfile kernel_profile(const Primitive& p, double c, cplx lambda, int grid_hint = 512);
KernelValues kernels(const Primitive& p, double c, double x, cplx lambda);
double upsilon_gauge(const Primitive& p, double c, cplx lambda);

} // namespace qsl
