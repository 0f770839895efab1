#pragma once

#include <random>
#include <string>
#include <vector>

#include "qsl/quasi_system.hpp"

namespace qsl {

// U_j(y) = a_j1 y(a) + a_j2 y^[1](a) + b_j1 y(b) + b_j2 y^[1](b); columns in that order.
struct BoundaryForms {
    Eigen::Matrix<cplx, 2, 4> M = Eigen::Matrix<cplx, 2, 4>::Zero();

    BoundaryForms() = default;
    explicit BoundaryForms(const Eigen::Matrix<cplx, 2, 4>& m);

    static BoundaryForms dirichlet();
    static BoundaryForms neumann_quasi();
    static BoundaryForms periodic();
    static BoundaryForms antiperiodic();
    static BoundaryForms preset(const std::string& name);

    Mat2<cplx> left_block() const { return M.leftCols<2>(); }
    Mat2<cplx> right_block() const { return M.rightCols<2>(); }

    // (U_1, U_2) applied to endpoint data.
    Vec2<cplx> apply(cplx ya, cplx y1a, cplx yb, cplx y1b) const;
};

enum class Regularity { Regular1, Regular2, Regular3, Degenerate };
std::string to_string(Regularity r);

struct Minors {
    // J(al, be) with 1-based column indices
    Eigen::Matrix<cplx, 4, 4> J = Eigen::Matrix<cplx, 4, 4>::Zero();
    cplx operator()(int al, int be) const { return J(al - 1, be - 1); }
};

struct RegularityReport {
    Minors minors;
    Regularity cls = Regularity::Degenerate;
    bool strengthened = false;
    bool selfadjoint = false;
    cplx J0{}; // only meaningful for Regular2
};

Minors minors(const BoundaryForms& f);
RegularityReport classify(const BoundaryForms& f);
bool is_selfadjoint(const BoundaryForms& f, double tol = 1e-12);

template <typename Scalar>
cplx char_determinant(const BoundaryForms& f, const FundamentalPair<Scalar>& pair);
// Delta from the endpoint transfer matrix [[phi, psi], [phi1, psi1]] at b.
cplx char_determinant(const BoundaryForms& f, const Mat2<cplx>& T);

// Unperturbed characteristic determinant for u = 0 on an interval of length len.
cplx free_determinant(const BoundaryForms& f, cplx lambda, double len = pi);

struct UnperturbedEigenvalue {
    cplx lambda;
    int multiplicity = 1;
};
// Roots of the free determinant, sorted by modulus, with multiplicity expanded.
std::vector<cplx> unperturbed_spectrum(const BoundaryForms& f, int n_max, double len = pi);

// Self-adjoint forms from a unitary matrix via
// (U - 1)(y^[1](a), -y^[1](b))^T + i (U + 1)(y(a), y(b))^T = 0.
BoundaryForms selfadjoint_from_unitary(const Mat2<cplx>& U);
Mat2<cplx> random_unitary(std::mt19937_64& rng);

// Number of zeros (with multiplicity) of f inside the circle |z - z0| = r.
int winding_number(const std::function<cplx(cplx)>& f, cplx z0, double r, int samples = 256);

} // namespace qsl
