#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qsl/core.hpp"

namespace qsl {

enum class SingularVariant { Attract, Repel, Odd };
std::string to_string(SingularVariant v);
SingularVariant parse_variant(const std::string& s);

// q(x) = -c|x|^alpha (attract), +c|x|^alpha (repel) or c sign(x)|x|^alpha (odd) on [-1, 1],
// Dirichlet conditions at both ends.
struct SingularFamily {
    double alpha = 0.0;
    SingularVariant variant = SingularVariant::Attract;
    double c = 1.0;
    int terms = 96;           // cap on series levels
    double r0 = 0.25;         // matching radius
    bool limit_mode = false;  // allow alpha at an exceptional point (U_2 only)

    double m() const { return 2.0 + alpha; }
    // Coefficient of |x|^alpha in q on the side s (+1 right, -1 left).
    double kappa(int side) const;
    bool symmetric() const { return variant != SingularVariant::Odd; }
    // n with |alpha - (-2 + 1/n)| <= tol, or 0.
    int exceptional_index(double tol = 1e-10) const;
    void validate() const;
};

inline double exceptional_alpha(int n) { return -2.0 + 1.0 / n; }

// Values of the glued fundamental system of -y'' + (q - lambda) y = 0: U_1(0) = 1,
// U_1'(0) = 0 type (even gluing) and U_2(0) = 0, U_2'(0) = 1 (odd gluing).
struct FsrValues {
    cplx u1{}, u2{}, du1{}, du2{};
    int levels = 0;
    double last_term = 0.0; // largest term of the last level summed
};

// Power series in x^m and x^2, summed to machine precision at |x| (|x| <= 1).
class SeriesFsr {
public:
    SeriesFsr(const SingularFamily& fam, cplx lambda, double xmax, bool need_u1 = true);
    FsrValues at(double x) const;

private:
    struct Series {
        std::vector<std::pair<double, cplx>> terms; // (exponent, coefficient)
        int levels = 0;
        double last = 0.0;
        void build(double m, double kappa, cplx lambda, int sigma, double tmax, int cap);
        void eval(double t, cplx& v, cplx& d) const;
    };
    Series s1_[2], s2_[2]; // [left, right]
    bool u1_ = true;
    bool symmetric_ = true;
};

FsrValues fsr_series(const SingularFamily& fam, double x, cplx lambda = 0.0);

// Max over sine test functions on [r0/2, r0] of |int y' phi' + (q - lambda) y phi| for U_1, U_2.
double fsr_weak_residual(const SingularFamily& fam, cplx lambda = 0.0, int side = 1);

// Truncated series solution of -w' + w^2 + kappa|x|^alpha = 0,
// w = sum_{k<=N} a_k |x|^{k alpha + 2k - 1} sign x.
struct RiccatiSeries {
    double alpha = 0.0, kappa = 1.0;
    int N = 0;
    std::vector<double> a; // a[1..N]
    int sign = +1;         // a_n = sign/(n alpha + 2n - 1) sum a_k a_{n-k}, chosen by the residual test
    double residual_exponent = 0.0; // measured for the chosen truncation
    double accepted_exponent = 0.0; // sign test (at least three terms), chosen sign
    double rejected_exponent = 0.0; // sign test, other sign
    std::string convention;

    static double exponent(double alpha, int k) { return k * alpha + 2.0 * k - 1.0; }
    double w(double x) const;
    double dw(double x) const;
    // -w' + w^2 + kappa|x|^alpha for x > 0, summed as a power series with the exactly
    // cancelling orders removed.
    double residual(double x) const;
};

int riccati_min_terms(double alpha);
RiccatiSeries riccati_coeffs(double alpha, int N = 0, double kappa = 1.0);

enum class SingularMethod { Series, Riccati, Quasi };
std::string to_string(SingularMethod m);

// phi(1, lambda) with phi(-1) = 0, phi'(-1) = 1 and the number of zeros in (-1, 1],
// which equals the number of eigenvalues below lambda.
struct Shot {
    double end = 0.0;
    int zeros = 0;
};
Shot dirichlet_shot(const SingularFamily& fam, double lambda,
                    SingularMethod method = SingularMethod::Series, double prop_tol = 1e-12);

// lambda_1 .. lambda_k_max by oscillation counting and bracketed refinement; `widths`
// receives the final bracket width of each eigenvalue.
std::vector<double> dirichlet_eigs_alpha(const SingularFamily& fam, int k_max,
                                         SingularMethod method = SingularMethod::Series,
                                         double prop_tol = 1e-12,
                                         std::vector<double>* widths = nullptr);

// Dirichlet eigenvalues of the half problems on [0, 1] (side = +1) or [-1, 0] (side = -1)
// with y(0) = 0; valid at exceptional alpha.
std::vector<double> half_dirichlet_eigs(const SingularFamily& fam, int side, int k_max,
                                        double prop_tol = 1e-12);

// Grid on [-1, 1] containing 0 and +-r0, graded geometrically towards 0.
std::vector<double> singular_grid(double r0, int n);

enum class ResolventMethod { Auto, Picard, Direct };

struct SingularResolvent {
    std::vector<double> grid;
    VecX<cplx> y;
    cplx A{}, B{};            // coefficients of U_1, U_2 (for Picard, of the last iterate)
    std::string method;       // "picard" or "direct"
    int iterations = 0;
    double contraction = 0.0; // C_1 |lambda|
    double increment = 0.0;   // last L2 increment (Picard)
};

// Hilbert-Schmidt norm of the lambda = 0 Dirichlet Green function (bounds ||L^{-1}||).
double picard_constant(const SingularFamily& fam, int grid_n = 4096);

// y = (L - lambda)^{-1} f with y = A U_1 + B U_2 + z, z(0) = z'(0) = 0.
SingularResolvent resolvent_singular(const SingularFamily& fam, cplx lambda,
                                     const std::function<cplx(double)>& f,
                                     ResolventMethod method = ResolventMethod::Auto,
                                     int grid_n = 4096);

// Resolvent of the direct sum of the two half-interval Dirichlet operators.
SingularResolvent direct_sum_resolvent(const SingularFamily& fam, cplx lambda,
                                       const std::function<cplx(double)>& f, int grid_n = 4096);

struct AlphaScan {
    std::vector<double> alpha;
    std::vector<std::vector<double>> lambda; // [point][k]
    std::vector<double> bracket;             // widest final bracket per point
    int refinements = 0;
    double max_rel_jump = 0.0;
};
// Eigenvalue curves over an alpha grid; steps with a relative jump above 5% are refined.
AlphaScan alpha_scan(const SingularFamily& base, std::vector<double> alphas, int k_max,
                     int jobs = 1);

struct ExceptionalRow {
    double delta = 0.0, alpha = 0.0;
    std::vector<double> lambda;      // k_max + 2 lowest eigenvalues of L(alpha)
    double eig_distance = 0.0;       // max_{k <= k_max} |lambda_k(alpha) - lambda_k(direct sum)|
    // Same after dropping the e lowest eigenvalues of L(alpha) (e = 0, 1, 2 minimizing),
    // i.e. the ones escaping to -infinity as alpha approaches the exceptional point.
    double aligned_distance = 0.0;
    int escaped = 0;
    double bracket = 0.0;            // widest final eigenvalue bracket
    double resolvent_distance = 0.0; // ||R(alpha) f - R_sum f|| at the probe point
};
struct ExceptionalLadder {
    int n = 0;
    double alpha_n = 0.0;
    std::vector<double> direct_sum;
    std::vector<ExceptionalRow> rows;
    bool decreasing = false;         // eig_distance strictly decreasing along the ladder
    bool aligned_decreasing = false; // aligned_distance strictly decreasing
    bool resolvent_decreasing = false;
    double floor = 0.0;   // smallest aligned_distance on the ladder
    bool stalled = false; // last aligned_distance above half the first
};
ExceptionalLadder exceptional_limit(const SingularFamily& base, int n,
                                    const std::vector<double>& deltas, int k_max = 6,
                                    cplx lambda = cplx(0.0, 1.0),
                                    const std::function<cplx(double)>& f = {});

} // namespace qsl
