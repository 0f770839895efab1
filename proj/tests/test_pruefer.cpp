#include <doctest.h>

#include <cmath>

#include "qsl/pruefer.hpp"

using namespace qsl;

TEST_CASE("theta: free angle is linear")
{
    const Primitive zero;
    const auto tr = theta_trajectory(zero, 9.0, 0.4, 64);
    for (size_t i = 0; i < tr.grid.size(); ++i)
        CHECK(tr.theta[i] == doctest::Approx(0.4 + 3.0 * tr.grid[i]).epsilon(1e-11));
}

TEST_CASE("theta: constant u decouples as lambda grows")
{
    // q = 0, so theta(pi) = sqrt(lambda) pi exactly at lambda = n^2; sample off that lattice
    const auto one = Primitive::constant(0.0, pi, 1.0);
    double prev = INFINITY;
    for (double lam : {10.5 * 10.5, 100.5 * 100.5}) {
        const double d = std::abs(theta_end(one, lam, std::sqrt(lam), 0.0) - std::sqrt(lam) * pi);
        CHECK(d < prev);
        prev = d;
    }
    CHECK(prev < 1e-2);
}

TEST_CASE("theta is continuous through a jump of u")
{
    const auto st = Primitive::piecewise(0.0, pi, {1.0}, {GenPoly::constant(0.0), GenPoly::constant(1.0)});
    std::vector<double> g{0.0, 1.0 - 1e-9, 1.0, 1.0 + 1e-9, pi};
    const auto tr = theta_trajectory(st, 16.0, 0.0, g);
    CHECK(std::abs(tr.theta[1] - tr.theta[2]) < 1e-7);
    CHECK(std::abs(tr.theta[3] - tr.theta[2]) < 1e-7);
}

TEST_CASE("log r: free, and quadrature against the ODE form")
{
    const Primitive zero;
    auto tr = theta_trajectory(zero, 4.0, 0.0, 64);
    tr.log_c1 = std::log(0.7);
    const auto lr = log_r_trajectory(zero, tr);
    for (double v : lr)
        CHECK(v == doctest::Approx(std::log(0.7)));

    const auto one = Primitive::constant(0.0, pi, 1.0);
    auto t1 = theta_trajectory(one, 100.0, 0.0, 256);
    t1.log_r = log_r_trajectory(one, t1);
    const auto ode = log_r_ode(one, t1);
    for (size_t i = 0; i < ode.size(); ++i)
        CHECK(std::abs(ode[i] - t1.log_r[i]) < 1e-8);
    for (double v : t1.log_r)
        CHECK(std::isfinite(v)); // r = exp(log r) > 0
}

TEST_CASE("kernels for u = 1")
{
    const auto one = Primitive::constant(0.0, pi, 1.0);
    const auto kv = kernels(one, 0.0, 1.0, cplx(100.0));
    CHECK(kv.b.real() == doctest::Approx((1 - std::cos(20.0)) / 20).epsilon(1e-10));
    CHECK(kv.a.real() == doctest::Approx(std::sin(20.0) / 20).epsilon(1e-10));
    for (int n : {3, 7}) {
        const auto kw = kernels(one, 0.0, pi, cplx(n * n));
        CHECK(2.0 / pi * kw.w.real() == doctest::Approx(-1.0 / (2.0 * n)).epsilon(1e-10));
    }
    const Primitive zero;
    const auto kz = kernels(zero, 0.3, 1.2, cplx(25.0));
    CHECK(std::abs(kz.b) == 0.0);
    CHECK(std::abs(kz.w) == 0.0);
    CHECK(upsilon_gauge(zero, 0.0, 25.0) == 0.0);
    CHECK(upsilon_gauge(one, 0.0, 1e4) < upsilon_gauge(one, 0.0, 1e2));
}

TEST_CASE("reconstruction")
{
    const Primitive zero;
    const double lam = 9.0;
    auto tr = theta_trajectory(zero, lam, 0.0, 64);
    tr.log_c1 = std::log(1.0 / std::sqrt(lam));
    tr.log_r = log_r_trajectory(zero, tr);
    auto s = reconstruct_solution(tr);
    for (size_t i = 0; i < s.grid.size(); ++i)
        CHECK(s.y[i] == doctest::Approx(std::sin(3 * s.grid[i]) / 3).scale(1.0).epsilon(1e-10));

    auto tc = theta_trajectory(zero, lam, pi / 2, 64);
    tc.log_c1 = 0.0;
    tc.log_r = log_r_trajectory(zero, tc);
    s = reconstruct_solution(tc);
    for (size_t i = 0; i < s.grid.size(); ++i)
        CHECK(s.y[i] == doctest::Approx(std::cos(3 * s.grid[i])).scale(1.0).epsilon(1e-10));

    // step u, lambda = 25, against direct propagation of Psi
    const auto st = Primitive::piecewise(0.0, pi, {1.0}, {GenPoly::constant(0.0), GenPoly::constant(1.0)});
    auto t2 = theta_trajectory(st, 25.0, 0.0, 256);
    t2.log_c1 = std::log(0.2);
    t2.log_r = log_r_trajectory(st, t2);
    const auto r = reconstruct_solution(t2);
    const auto fp = fundamental_pair_on<double>(st, 25.0, t2.grid);
    double e = 0.0;
    for (size_t i = 0; i < r.grid.size(); ++i)
        e = std::max({e, std::abs(r.y[i] - fp.psi[i]), std::abs(r.y1[i] - fp.psi1[i])});
    CHECK(e < 1e-7);
}
