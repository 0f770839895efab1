#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace qsl::quad {

// Full Gauss-Legendre rule on [-1, 1] built from the half rule boost stores.
template <unsigned N>
struct GaussRule {
    std::array<double, N> x{};
    std::array<double, N> w{};

    GaussRule()
    {
        using G = boost::math::quadrature::gauss<double, N>;
        const auto& a = G::abscissa();
        const auto& wt = G::weights();
        unsigned k = 0;
        for (unsigned i = 0; i < a.size(); ++i) {
            if (a[i] == 0.0) {
                x[k] = 0.0;
                w[k++] = wt[i];
                continue;
            }
            x[k] = -a[i];
            w[k++] = wt[i];
            x[k] = a[i];
            w[k++] = wt[i];
        }
    }
};

template <unsigned N>
const GaussRule<N>& gauss_rule()
{
    static const GaussRule<N> rule;
    return rule;
}

template <unsigned N = 16, typename F>
auto gauss(F&& f, double a, double b) -> decltype(f(a))
{
    const auto& r = gauss_rule<N>();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    decltype(f(a)) s = f(c + h * r.x[0]) * r.w[0];
    for (unsigned i = 1; i < N; ++i)
        s += f(c + h * r.x[i]) * r.w[i];
    return s * h;
}

// Cells on [a, b] of width at most hmax, split at the given interior points,
// geometrically graded towards the entries of `graded`.
std::vector<double> graded_mesh(double a, double b, double hmax,
                                const std::vector<double>& points,
                                const std::vector<double>& graded, int levels = 40);

// Adaptive Gauss-Kronrod on a single smooth cell; throws AccuracyError when the
// estimate misses max(rel_tol*|I|, abs_floor).
double adaptive(const std::function<double(double)>& f, double a, double b,
                double rel_tol = 1e-10, double abs_floor = 1e-14);

// Double-exponential rule for cells with an endpoint singularity.
double endpoint_singular(const std::function<double(double)>& f, double a, double b,
                         double rel_tol = 1e-10, double abs_floor = 1e-14);

} // namespace qsl::quad
