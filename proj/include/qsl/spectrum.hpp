#pragma once

#include <string>
#include <vector>

#include "qsl/boundary.hpp"
#include "qsl/potential.hpp"
#include "qsl/quasi_system.hpp"

namespace qsl {

struct SpectralResult {
    int index = 0;
    cplx lambda{};
    int multiplicity = 1;
    bool ok = true;
    std::string error; // set when ok == false

    // normalized eigenfunction samples (empty when eigenfunctions are not requested)
    std::vector<double> grid;
    VecX<cplx> y, y1;
    double norm = 0.0; // L2 norm after normalization
    double bc_residual[2] = {0.0, 0.0};
    double det_residual = 0.0;
    double achieved_tol = 0.0; // |theta - n pi| (Dirichlet) or |Delta| / scale (general)
    int sign_changes = -1;     // Dirichlet with real u only

    cplx lambda0{};
    cplx s{}; // sqrt(lambda) - sqrt(lambda0)
};

struct SpectrumOptions {
    double tol = 1e-10;      // target on |theta(b) - n pi| or on |Delta| / scale
    double prop_tol = 1e-13; // propagation tolerance
    bool eigenfunctions = true;
    int grid_hint = 0; // 0 picks a grid adapted to the index
    int jobs = 1;
};

// Dirichlet ladder by Pruefer shooting on theta(b, lambda) = n pi. Real u only.
std::vector<SpectralResult> dirichlet_eigenvalues(const Primitive& p, int n_lo, int n_hi,
                                                  SpectrumOptions opt = {});
SpectralResult dirichlet_eigenpair(const Primitive& p, int n, SpectrumOptions opt = {});

// General regular forms: secant on Delta(z^2) seeded at sqrt of the unperturbed ladder.
std::vector<SpectralResult> regular_eigenvalues(const Primitive& p, const BoundaryForms& f,
                                                int n_lo, int n_hi, SpectrumOptions opt = {});

// Delta(lambda) for the primitive and forms, with the scale used by the residual gates.
struct DeterminantValue {
    cplx value;
    double scale;
};
DeterminantValue characteristic(const Primitive& p, const BoundaryForms& f, cplx lambda,
                                double prop_tol = 1e-12);

// Normalized eigenfunction y = Phi U_2(Psi) - Psi U_2(Phi), or the U_1 analogue.
SampledSolution<cplx> eigenfunction(const Primitive& p, const BoundaryForms& f, cplx lambda,
                                    int grid_hint = 512, double prop_tol = 1e-12);

// Trapezoidal L2 norm on the sample grid.
double l2_norm(const std::vector<double>& grid, const VecX<cplx>& y);
cplx inner(const std::vector<double>& grid, const VecX<cplx>& y, const VecX<cplx>& z);

struct Comparison {
    std::vector<int> index;
    std::vector<cplx> s;
    // ||y_n - y_n^0|| after phase alignment; for a double unperturbed eigenvalue the
    // distance of y_n to the unperturbed eigenspace.
    std::vector<double> deviation;
};
Comparison comparison_sequences(const std::vector<SpectralResult>& results,
                                const BoundaryForms& f);

} // namespace qsl
