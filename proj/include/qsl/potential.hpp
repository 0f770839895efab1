#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qsl/core.hpp"

namespace qsl {

struct SmoothnessClass {
    enum class Kind { BoundedVariation, Lipschitz, LipschitzIntegral, L2, Sobolev, KSP };

    Kind kind = Kind::L2;
    double alpha = 1.0; // Lipschitz exponent
    double p = 2.0;     // integral Lipschitz exponent
    double theta = 0.0; // Sobolev index, 0 <= theta < 1/2

    static SmoothnessClass bounded_variation() { return {Kind::BoundedVariation}; }
    static SmoothnessClass l2() { return {Kind::L2}; }
    static SmoothnessClass ksp() { return {Kind::KSP}; }
    static SmoothnessClass lipschitz(double a);
    static SmoothnessClass lipschitz_integral(double a, double p);
    static SmoothnessClass sobolev(double theta);

    std::string name() const;
};

// One term coef * |t|^exponent * sign(t)^odd with t = x - ref.
struct PowerTerm {
    double coef;
    double exponent;
    bool odd = false;
};

// Finite sum of power terms about a common reference point. Polynomials are
// the special case of integer exponents with odd = (exponent is odd).
struct GenPoly {
    double ref = 0.0;
    std::vector<PowerTerm> terms;

    static GenPoly polynomial(double ref, const std::vector<double>& coeffs);
    static GenPoly constant(double c) { return polynomial(0.0, {c}); }
    static GenPoly power(double ref, double coef, double exponent, bool odd = false);

    double operator()(double x) const;
    GenPoly operator*(const GenPoly& o) const;
    GenPoly operator+(const GenPoly& o) const;
    GenPoly scaled(double s) const;
    GenPoly derivative() const;
    void simplify();
    bool singular_at_ref() const;

    // Exact integral of f * (x - m)^k over [x0, x1] for k in {0, 1}; the cell must
    // not contain ref in its interior.
    double integral(double x0, double x1, int k = 0, double m = 0.0) const;
};

using CellFunction = std::function<double(double)>;
using Piece = std::variant<GenPoly, CellFunction>;

struct Moments {
    double u0 = 0, u1 = 0; // int u, int (x - mid) u
    double v0 = 0, v1 = 0; // int u^2, int (x - mid) u^2
};

enum class Side { Left, Right };

class Primitive {
public:
    enum class Kind { Piecewise, ClosedForm, CosineSeries };

    Primitive(); // u = 0 on [0, pi]

    static Primitive piecewise(double a, double b, std::vector<double> breakpoints,
                               std::vector<Piece> pieces,
                               SmoothnessClass cls = SmoothnessClass::bounded_variation());
    static Primitive closed_form(double a, double b, CellFunction u, std::vector<double> points,
                                 SmoothnessClass cls = SmoothnessClass::l2(),
                                 std::string name = {});
    // Coefficients a_0..a_K in the convention u = a_0/2 + sum_{k>=1} a_k cos(kx), on [0, pi].
    static Primitive cosine_series(const std::vector<double>& a,
                                   SmoothnessClass cls = SmoothnessClass::l2());
    static Primitive cosine_series_sparse(std::vector<std::pair<long, double>> a,
                                          SmoothnessClass cls = SmoothnessClass::l2());
    static Primitive constant(double a, double b, double c);

    Primitive scaled(cplx s) const;
    Primitive with_class(SmoothnessClass cls) const;

    double left() const;
    double right() const;
    Kind kind() const;
    const SmoothnessClass& smoothness() const;
    cplx scale() const { return scale_; }
    bool is_real() const { return scale_.imag() == 0.0; }
    const std::string& name() const;

    // Unscaled shape; value() applies the scale.
    double shape(double x, Side side = Side::Right) const;
    cplx value(double x, Side side = Side::Right) const { return scale_ * shape(x, side); }

    // Interior breakpoints and refinement points, sorted, without duplicates.
    const std::vector<double>& mesh_points() const;
    // Points where the shape itself has an integrable singularity (non-smooth power
    // terms, user-declared oscillation points).
    const std::vector<double>& singular_points() const;

    Moments moments(double x0, double x1) const;
    // True when moments() is exact (closed form) for the cell containing x.
    bool exact_on(double x) const;
    std::vector<std::pair<double, double>> jumps() const;

    // Sparse d_k with u = sum d_k cos(kx); only for CosineSeries.
    const std::vector<std::pair<long, double>>& cosine_terms() const;

    struct Impl;

private:
    std::shared_ptr<const Impl> impl_;
    cplx scale_{1.0, 0.0};
};

double eval_u(const Primitive& p, double x);
double integrate_u(const Primitive& p, double x0, double x1);
double integrate_u2(const Primitive& p, double x0, double x1);
std::vector<double> cosine_coeffs(const Primitive& p, int K);
Primitive from_delta_sum(const std::vector<double>& positions,
                         const std::vector<double>& strengths, double a = 0.0, double b = pi);
Primitive mollify(const Primitive& p, double eps);

// L2 distance between two primitives on a common interval.
double l2_distance(const Primitive& p, const Primitive& q);
double lp_norm(const Primitive& p, double pexp);

// Quadrature cells that respect breakpoints and grade towards singular points.
std::vector<double> quadrature_mesh(const Primitive& p, double x0, double x1, double hmax);

} // namespace qsl
