#include <doctest.h>

#include <cmath>
#include <random>

#include "qsl/quasi_system.hpp"

using namespace qsl;

TEST_CASE("propagate: free equation and constant solution")
{
    const Primitive zero;
    for (double x1 : {0.3, 1.0, 2.5, pi}) {
        const auto s = propagate<double>(zero, 1.0, 0.0, x1, {0.0, 1.0, 0.0});
        CHECK(s.y == doctest::Approx(std::sin(x1)).epsilon(1e-10));
        CHECK(s.y1 == doctest::Approx(std::cos(x1)).scale(1.0).epsilon(1e-10));
        const auto c = propagate<double>(zero, 0.0, 0.0, x1, {1.0, 0.0, 0.0});
        CHECK(c.y == doctest::Approx(1.0));
        CHECK(std::abs(c.y1) < 1e-14);
    }
}

TEST_CASE("propagate: single delta matches the matching oracle")
{
    // y = sin x up to pi/2; y' jumps by y(pi/2) = 1, so y = sin x - cos x after it.
    // At pi: y = 1 and y^[1] = y' - u y = -1 - 1.
    const auto d = from_delta_sum({pi / 2}, {1.0});
    const auto s = propagate<double>(d, 1.0, 0.0, pi, {0.0, 1.0, 0.0});
    CHECK(s.y == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(s.y1 == doctest::Approx(-2.0).epsilon(1e-10));
    // backwards propagation inverts
    const auto b = propagate<double>(d, 1.0, pi, 0.0, {1.0, -2.0, pi});
    CHECK(std::abs(b.y) < 1e-10);
    CHECK(b.y1 == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("fundamental_pair: free closed forms")
{
    const Primitive zero;
    const auto fp = fundamental_pair<double>(zero, 4.0, 64);
    for (size_t i = 0; i < fp.size(); ++i) {
        const double x = fp.grid[i];
        CHECK(fp.phi[i] == doctest::Approx(std::cos(2 * x)).scale(1.0).epsilon(1e-10));
        CHECK(fp.psi[i] == doctest::Approx(std::sin(2 * x) / 2).scale(1.0).epsilon(1e-10));
    }
    const auto f0 = fundamental_pair<double>(zero, 0.0, 32);
    for (size_t i = 0; i < f0.size(); ++i) {
        CHECK(f0.phi[i] == doctest::Approx(1.0));
        CHECK(f0.psi[i] == doctest::Approx(f0.grid[i]).scale(1.0));
    }
}

TEST_CASE("Wronskian conservation over random potentials and complex lambda")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    for (int t = 0; t < 12; ++t) {
        const double j = 0.3 + 2.5 * (U(rng) + 2.0) / 4.0;
        const auto p = Primitive::piecewise(0.0, pi, {j},
                                            {GenPoly::polynomial(0.0, {U(rng), U(rng), U(rng)}),
                                             GenPoly::polynomial(0.0, {U(rng), U(rng)})});
        const cplx lam(10.0 * U(rng) + 20.0, 5.0 * U(rng));
        const auto fp = fundamental_pair<cplx>(p, lam, 128);
        double w = 0.0;
        for (size_t i = 0; i < fp.size(); ++i)
            w = std::max(w, std::abs(fp.wronskian(i) - 1.0));
        CHECK(w < 1e-8);
    }
}

TEST_CASE("solve_inhomogeneous")
{
    const Primitive zero;
    const auto z0 = solve_inhomogeneous<double>(zero, 2.0, [](double) { return 0.0; }, 256);
    CHECK(z0.y.cwiseAbs().maxCoeff() == 0.0);
    // l(z) = -z'' = 1 with zero data at 0 gives z = -x^2/2
    const auto z1 = solve_inhomogeneous<double>(zero, 0.0, [](double) { return 1.0; }, 1024);
    for (size_t i = 0; i < z1.grid.size(); i += 64) {
        const double x = z1.grid[i];
        CHECK(z1.y[i] == doctest::Approx(-x * x / 2).scale(1.0).epsilon(1e-6));
    }
    // -z'' - z = sin x gives z = (x cos x - sin x)/2
    const auto z2 = solve_inhomogeneous<double>(zero, 1.0, [](double x) { return std::sin(x); }, 2048);
    for (size_t i = 0; i < z2.grid.size(); i += 128) {
        const double x = z2.grid[i];
        CHECK(z2.y[i] == doctest::Approx((x * std::cos(x) - std::sin(x)) / 2).scale(1.0).epsilon(1e-6));
    }
}

TEST_CASE("transfer matrices are unimodular and compose")
{
    const auto p = from_delta_sum({1.0, 2.0}, {0.7, -1.3});
    const cplx lam(3.0, 1.0);
    const auto T = transfer_matrix<cplx>(p, lam, 0.0, pi);
    CHECK(std::abs(T.determinant() - 1.0) < 1e-10);
    const auto A = transfer_matrix<cplx>(p, lam, 0.0, 1.5);
    const auto B = transfer_matrix<cplx>(p, lam, 1.5, pi);
    CHECK((B * A - T).cwiseAbs().maxCoeff() < 1e-9);
}
