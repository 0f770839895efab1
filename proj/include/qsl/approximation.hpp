#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "qsl/boundary.hpp"
#include "qsl/potential.hpp"
#include "qsl/quasi_system.hpp"

namespace qsl {

// One application y = (L - lambda)^{-1} f with boundary forms f_forms.
struct ResolventProbe {
    cplx lambda{};
    BoundaryForms forms;
    std::vector<double> grid;
    VecX<cplx> f, y, y1;
    cplx det{}; // Delta(lambda)
};

// Uniform grid of n intervals merged with the mesh points of every primitive.
std::vector<double> merged_grid(double a, double b, int n, const std::vector<Primitive>& ps);

ResolventProbe resolvent_apply(const Primitive& p, const BoundaryForms& forms, cplx lambda,
                               const std::vector<double>& grid, const VecX<cplx>& f,
                               double prop_tol = 1e-12);
ResolventProbe resolvent_apply(const Primitive& p, const BoundaryForms& forms, cplx lambda,
                               const std::function<cplx(double)>& f, int grid_hint = 8192);

// max over test functions of |int y^[1] phi' - int (u y^[1] + u^2 y + lambda y + f) phi|,
// using `count` random sine combinations vanishing at both endpoints.
double weak_residual(const Primitive& p, const ResolventProbe& r, int count = 8,
                     std::uint64_t seed = 7);

// max |R_l f - R_m f - (l - m) R_l R_m f| / ||f|| over `count` random smooth f.
double resolvent_identity_error(const Primitive& p, const BoundaryForms& forms, cplx l, cplx m,
                                int count = 3, std::uint64_t seed = 11, int grid_hint = 8192);

double l2_distance(const std::vector<double>& grid, const VecX<cplx>& y, const VecX<cplx>& z);

struct ConvergenceRow {
    double eps = 0;
    double u_dist = 0; // ||u_eps - u||_L2
    double y_dist = 0; // ||y_eps - y||_L2
    double weak = 0;   // weak residual of y_eps
};
std::vector<ConvergenceRow> convergence_experiment(const Primitive& p, const BoundaryForms& forms,
                                                   cplx lambda,
                                                   const std::function<cplx(double)>& f,
                                                   const std::vector<double>& eps_list,
                                                   int grid_n = 8192);

// Piecewise-linear tent on [-1, 1]: zero outside (-eps, eps), slope eps^{-exponent} on
// (-eps, 0) and its mirror on (0, eps). exponent = 3/2 keeps int u^2 = 2/3.
Primitive staircase(double eps, double exponent = 1.5);

struct DeltaLimitRow {
    double eps = 0;
    double dist_limit = 0; // ||y_eps - y_0||, y_0 for q = -(2/3) delta
    double dist_free = 0;  // ||y_eps - y_free||
    double v_tail = 0;     // int_{-1}^{eps} u_eps^2
    double v_total = 0;    // int_{-1}^{1} u_eps^2
    double l1 = 0, l15 = 0, l19 = 0; // ||u_eps||_{L_p}
    double weak = 0;                 // weak residual of y_eps
};
struct DeltaLimitTable {
    std::vector<DeltaLimitRow> rows;
    double limit_to_free = 0; // ||y_0 - y_free||
};
DeltaLimitTable delta_limit_experiment(const std::vector<double>& eps_list, cplx lambda,
                                       const std::function<cplx(double)>& f,
                                       double exponent = 1.5, int grid_n = 8192);

} // namespace qsl
