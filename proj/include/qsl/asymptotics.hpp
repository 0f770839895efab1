#pragma once

#include <vector>

#include "qsl/potential.hpp"
#include "qsl/spectrum.hpp"

namespace qsl {

// Second-order Dirichlet asymptotics on [0, pi]. With
//   b_n = (2/pi) int u sin(nt),  a_n = (2/pi) int u cos(nt),  A_n = (2/pi) int u^2 cos(nt),
//   w_n = (2/pi) int_0^pi int_0^t u(t) u(s) cos(nt) sin(ns) ds dt,  U = int u^2,
// mu_n = -b_{2n}/2 + A_{2n}/(4n) - w_{2n} - U/(2 pi n).
struct AsymptoticTerms {
    int n = 0;
    double b2n = 0, a2n = 0, A2n = 0, w2n = 0, U_pi = 0;
    double mu = 0;
    double simple = 0; // n - b_{2n}/2
    double full = 0;   // n + mu_n
    double r = 0;      // w_{2n} + U/(2 pi n) from the double integral
    double upsilon = 0; // gauge at lambda = n^2, c = 0 (only when requested)
};

AsymptoticTerms mu_n(const Primitive& p, int n, bool with_gauge = false);
std::vector<AsymptoticTerms> second_order_prediction(const Primitive& p, int n_lo, int n_hi,
                                                     bool with_gauge = false, int jobs = 1);

// r_n through the cosine-series representation. Coefficients a_k follow the
// convention u = a_0/2 + sum a_k cos(kx).
struct RnSeries {
    double r = 0;
    double gamma = 0;
    double series = 0;     // the truncated sum part
    double tail_bound = 0; // bound on the omitted part of the sum
    int K = 0;
    bool truncation_warning = false; // K below 8n
};
RnSeries rn_series(const Primitive& p, const std::vector<double>& a, int n, int K);
double rn_double_integral(const Primitive& p, int n);

struct Remainders {
    std::vector<int> n;
    std::vector<double> rho; // sqrt(lambda_n) - n - mu_n
    std::vector<double> s;   // sqrt(lambda_n) - n + b_{2n}/2
};
Remainders remainder_extraction(const std::vector<SpectralResult>& spectral,
                                const std::vector<AsymptoticTerms>& terms);

struct DecayFit {
    double slope = 0;
    double intercept = 0;
    double width = 0; // two standard errors of the slope
    int used = 0;
    int dropped = 0; // zero or non-finite entries
};
// Least squares of log|seq| against log n over n in [n_lo, n_hi].
DecayFit decay_fit(const std::vector<int>& n, const std::vector<double>& seq, int n_lo, int n_hi);

struct EigenfunctionPrediction {
    int n = 0;
    std::vector<double> grid;
    VecX<double> predicted, computed, psi;
    double sup_psi = 0;
};
// Computed y_n rescaled to ||y_n||^2 = pi/2 with int y_n sin(nx) > 0, compared with
// sin(nx)(1 - int_0^x u cos 2nt + int_0^pi u (1 - t/pi) cos 2nt)
//   + cos(nx)(int_0^x u sin 2nt - (x/pi) int_0^pi u sin 2nt).
EigenfunctionPrediction eigenfunction_prediction(const Primitive& p, const SpectralResult& r);

struct KspSum {
    double value = 0;
    bool convergent_trend = false;
    std::vector<double> block_increments; // over dyadic blocks (2^j, 2^{j+1}]
};
// sum_{2 <= k <= K} a_k^2 ln k, with a[k] indexed from 0.
KspSum ksp_sum(const std::vector<double>& a, int K);

// Lacunary cosine series with a_n = p^{-2} at n = 2 * 2^{p^4}, p = 1..P (P <= 2).
Primitive lacunary_potential(int P);

} // namespace qsl
