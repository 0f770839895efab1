#include "qsl/quadrature.hpp"

#include <algorithm>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "qsl/core.hpp"

namespace qsl::quad {

namespace {

bool contains(const std::vector<double>& v, double x)
{
    for (double y : v)
        if (std::abs(y - x) <= 1e-14 * std::max(1.0, std::abs(x)))
            return true;
    return false;
}

} // namespace

std::vector<double> graded_mesh(double a, double b, double hmax,
                                const std::vector<double>& points,
                                const std::vector<double>& graded, int levels)
{
    std::vector<double> knots{a};
    for (double p : points)
        if (p > a && p < b)
            knots.push_back(p);
    knots.push_back(b);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    std::vector<double> mesh{a};
    for (size_t i = 0; i + 1 < knots.size(); ++i) {
        const double l = knots[i], r = knots[i + 1];
        const int n = std::max(1, static_cast<int>(std::ceil((r - l) / hmax - 1e-9)));
        const double h = (r - l) / n;
        const bool gl = contains(graded, l), gr = contains(graded, r);
        for (int j = 1; j <= n; ++j) {
            const double x0 = l + (j - 1) * h;
            const double x1 = (j == n) ? r : l + j * h;
            if (j == 1 && gl) {
                for (int k = levels; k >= 1; --k)
                    mesh.push_back(x0 + h * std::ldexp(1.0, -k));
            }
            if (j == n && gr) {
                for (int k = 1; k <= levels; ++k)
                    mesh.push_back(x1 - h * std::ldexp(1.0, -k));
                std::sort(mesh.end() - levels, mesh.end());
            }
            mesh.push_back(x1);
        }
    }
    std::sort(mesh.begin(), mesh.end());
    mesh.erase(std::unique(mesh.begin(), mesh.end()), mesh.end());
    return mesh;
}

double adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol,
                double abs_floor)
{
    if (a == b)
        return 0.0;
    double err = 0.0, l1 = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, a, b, 18, rel_tol * 0.1, &err, &l1);
    if (!std::isfinite(v) || err > std::max(rel_tol * std::abs(v), abs_floor))
        throw AccuracyError("adaptive quadrature did not converge on [" + std::to_string(a) +
                                ", " + std::to_string(b) + "]",
                            err);
    return v;
}

double endpoint_singular(const std::function<double(double)>& f, double a, double b,
                         double rel_tol, double abs_floor)
{
    if (a == b)
        return 0.0;
    boost::math::quadrature::tanh_sinh<double> ts(12);
    double err = 0.0, l1 = 0.0;
    const double v = ts.integrate(f, a, b, rel_tol * 0.1, &err, &l1);
    if (!std::isfinite(v) || err > std::max(rel_tol * std::abs(v), abs_floor))
        throw AccuracyError("tanh-sinh quadrature did not converge", err);
    return v;
}

} // namespace qsl::quad
