#pragma once

#include <functional>
#include <vector>

#include "qsl/magnus.hpp"
#include "qsl/potential.hpp"

namespace qsl {

// (y, y^[1]) with y^[1] = y' - u y, at location x.
template <typename Scalar>
struct QuasiState {
    Scalar y{};
    Scalar y1{};
    double x = 0.0;
};

template <typename Scalar>
struct FundamentalPair {
    Scalar lambda{};
    std::vector<double> grid;
    VecX<Scalar> phi, phi1, psi, psi1;

    Scalar wronskian(size_t i) const { return phi[i] * psi1[i] - psi[i] * phi1[i]; }
    size_t size() const { return grid.size(); }
};

// Samples of a solution and its quasi-derivative on a grid.
template <typename Scalar>
struct SampledSolution {
    std::vector<double> grid;
    VecX<Scalar> y, y1;
};

// Coefficients of the quasi-derivative system for a primitive u:
// A = [[u, 1], [-lambda - u^2, -u]].
template <typename Scalar>
class QuasiSource {
public:
    explicit QuasiSource(const Primitive& p);

    CellCoeffs<Scalar> cell(double x0, double x1) const;
    const std::vector<double>& mesh_points() const { return p_.mesh_points(); }
    const std::vector<double>& singular_points() const { return p_.singular_points(); }

private:
    Primitive p_;
    Scalar s_;
};

template <typename Scalar>
Mat2<Scalar> transfer_matrix(const Primitive& p, Scalar lambda, double x0, double x1,
                             double tol = 1e-10);

template <typename Scalar>
QuasiState<Scalar> propagate(const Primitive& p, Scalar lambda, double x0, double x1,
                             const QuasiState<Scalar>& s, double tol = 1e-10);

// Uniform grid of grid_hint points over the interval merged with the primitive's
// breakpoints and refinement points.
std::vector<double> default_grid(const Primitive& p, int grid_hint);

template <typename Scalar>
FundamentalPair<Scalar> fundamental_pair(const Primitive& p, Scalar lambda, int grid_hint = 256,
                                         double tol = 1e-10);

template <typename Scalar>
FundamentalPair<Scalar> fundamental_pair_on(const Primitive& p, Scalar lambda,
                                            const std::vector<double>& grid, double tol = 1e-10);

// z with z(a) = z^[1](a) = 0 solving l(z) - lambda z = f, where f is sampled on the
// pair's grid (trapezoidal accumulation).
template <typename Scalar>
SampledSolution<Scalar> solve_inhomogeneous(const FundamentalPair<Scalar>& pair,
                                            const VecX<Scalar>& f);

template <typename Scalar>
SampledSolution<Scalar> solve_inhomogeneous(const Primitive& p, Scalar lambda,
                                            const std::function<Scalar(double)>& f,
                                            int grid_hint = 1024);

template <typename Scalar>
VecX<Scalar> sample(const std::function<Scalar(double)>& f, const std::vector<double>& grid);

} // namespace qsl
