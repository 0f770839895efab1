#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "qsl/core.hpp"
#include "qsl/quadrature.hpp"

namespace qsl {

// Cell data for A(x) = [[a, 1], [c - lambda, -a]]:
// a0 = int a, a1 = int (x - mid) a, and likewise for c.
template <typename Scalar>
struct CellCoeffs {
    Scalar a0{}, a1{}, c0{}, c1{};
};

namespace detail {

template <typename Scalar>
Mat2<Scalar> expm_traceless(const Mat2<Scalar>& W)
{
    const Scalar s2 = W(0, 0) * W(0, 0) + W(0, 1) * W(1, 0);
    Scalar ch, sh; // cosh(s), sinh(s)/s
    if (std::abs(s2) < 1e-3) {
        ch = Scalar(1) + s2 * (Scalar(1.0 / 2) + s2 * (Scalar(1.0 / 24) + s2 * (Scalar(1.0 / 720) + s2 * Scalar(1.0 / 40320))));
        sh = Scalar(1) + s2 * (Scalar(1.0 / 6) + s2 * (Scalar(1.0 / 120) + s2 * (Scalar(1.0 / 5040) + s2 * Scalar(1.0 / 362880))));
    } else if constexpr (is_complex<Scalar>::value) {
        const Scalar s = std::sqrt(s2);
        ch = std::cosh(s);
        sh = std::sinh(s) / s;
    } else {
        if (s2 > 0) {
            const double s = std::sqrt(s2);
            ch = std::cosh(s);
            sh = std::sinh(s) / s;
        } else {
            const double s = std::sqrt(-s2);
            ch = std::cos(s);
            sh = std::sin(s) / s;
        }
    }
    Mat2<Scalar> E = sh * W;
    E(0, 0) += ch;
    E(1, 1) += ch;
    return E;
}

template <typename Scalar>
double maxabs(const Mat2<Scalar>& M)
{
    return M.cwiseAbs().maxCoeff();
}

template <typename Scalar>
Mat2<Scalar> inverse_unimodular(const Mat2<Scalar>& T)
{
    Mat2<Scalar> R;
    R << T(1, 1), -T(0, 1), -T(1, 0), T(0, 0);
    return R;
}

} // namespace detail

// Fourth-order Magnus propagation of y' = A(x) y driven only by cell moments of
// the coefficients. Source requirements:
//   CellCoeffs<Scalar> cell(double x0, double x1) const;
//   const std::vector<double>& mesh_points() const;    (cells never straddle these)
//   const std::vector<double>& singular_points() const; (initial grading)
template <typename Scalar, typename Source>
class MagnusPropagator {
public:
    MagnusPropagator(const Source& src, Scalar lambda, double tol = 1e-10, double hbase = 0.1)
        : src_(src), lambda_(lambda), tol_(tol), hbase_(hbase)
    {
        const double al = std::abs(lambda);
        if (al > 1.0)
            hbase_ = std::min(hbase_, 6.0 / std::sqrt(al));
    }

    Mat2<Scalar> step(double x0, double x1) const
    {
        const double h = x1 - x0;
        const CellCoeffs<Scalar> cc = src_.cell(x0, x1);
        Mat2<Scalar> B0, B1;
        B0 << cc.a0, Scalar(h), cc.c0 - lambda_ * h, -cc.a0;
        B1 << cc.a1, Scalar(0), cc.c1, -cc.a1;
        const Mat2<Scalar> W = B0 + (B1 * B0 - B0 * B1) / h;
        return detail::expm_traceless<Scalar>(W);
    }

    // Transfer matrix from x0 to x1 (either direction).
    Mat2<Scalar> transfer(double x0, double x1) const
    {
        if (x1 == x0)
            return Mat2<Scalar>::Identity();
        if (x1 < x0)
            return detail::inverse_unimodular<Scalar>(transfer(x1, x0));
        const auto mesh = quad::graded_mesh(x0, x1, hbase_, src_.mesh_points(),
                                            src_.singular_points(), 24);
        Mat2<Scalar> T = Mat2<Scalar>::Identity();
        for (size_t i = 0; i + 1 < mesh.size(); ++i) {
            const Mat2<Scalar> full = step(mesh[i], mesh[i + 1]);
            T = adapt(mesh[i], mesh[i + 1], full, 0) * T;
        }
        return T;
    }

    double tolerance() const { return tol_; }

private:
    Mat2<Scalar> adapt(double x0, double x1, const Mat2<Scalar>& full, int depth) const
    {
        const double xm = 0.5 * (x0 + x1);
        const Mat2<Scalar> L = step(x0, xm), R = step(xm, x1);
        const Mat2<Scalar> H = R * L;
        const double scale = 1.0 + detail::maxabs<Scalar>(H);
        if (!std::isfinite(scale))
            throw InstabilityError("non-finite transfer matrix", x0);
        const double err = detail::maxabs<Scalar>(Mat2<Scalar>(H - full));
        if (err <= tol_ * scale)
            return H;
        if (depth >= 60 || (x1 - x0) < 1e-13 * (1.0 + std::abs(x0)))
            throw AccuracyError("step-size underflow in propagation near x = " + std::to_string(x0),
                                err / scale);
        return adapt(xm, x1, R, depth + 1) * adapt(x0, xm, L, depth + 1);
    }

    const Source& src_;
    Scalar lambda_;
    double tol_;
    double hbase_;
};

} // namespace qsl
