#include <doctest.h>

#include <cmath>

#include "qsl/singular.hpp"

using namespace qsl;

namespace {
SingularFamily family(double alpha, SingularVariant v = SingularVariant::Attract)
{
    SingularFamily f;
    f.alpha = alpha;
    f.variant = v;
    return f;
}
} // namespace

TEST_CASE("series fundamental system at alpha = 0 is cos and sin")
{
    const auto f = family(0.0);
    for (double x : {0.25, 0.5, 1.0, -0.7}) {
        const auto v = fsr_series(f, x);
        CHECK(std::abs(v.u1 - std::cos(x)) < 1e-10);
        CHECK(std::abs(v.u2 - std::sin(x)) < 1e-10);
        CHECK(std::abs(v.du1 + std::sin(x)) < 1e-10);
        CHECK(std::abs(v.du2 - std::cos(x)) < 1e-10);
    }
    CHECK(std::abs(fsr_series(f, 1.0).u1 - 0.5403023058681398) < 1e-12);
    const auto z = fsr_series(family(-1.2), 0.0);
    CHECK(z.u1 == cplx(1.0));
    CHECK(z.u2 == cplx(0.0));
    CHECK(z.du2 == cplx(1.0));
}

TEST_CASE("Wronskian and weak residual of the series system")
{
    for (auto v : {SingularVariant::Attract, SingularVariant::Repel, SingularVariant::Odd})
        for (double x : {0.5, -0.5, 0.9}) {
            const auto s = fsr_series(family(-1.2, v), x, cplx(2.0, 1.0));
            CHECK(std::abs(s.u1 * s.du2 - s.u2 * s.du1 - 1.0) < 1e-8);
        }
    CHECK(fsr_weak_residual(family(-1.2), 0.0, 1) < 1e-10);
    CHECK(fsr_weak_residual(family(-1.6, SingularVariant::Odd), cplx(2, 1), -1) < 1e-10);
}

TEST_CASE("exceptional points")
{
    CHECK(exceptional_alpha(1) == -1.0);
    CHECK(exceptional_alpha(2) == -1.5);
    CHECK(family(-1.5).exceptional_index() == 2);
    CHECK(family(-1.2).exceptional_index() == 0);
    CHECK_THROWS_AS(family(-1.5).validate(), UnsupportedError);
    CHECK_THROWS_AS(family(-2.0).validate(), DomainError);
    auto lim = family(-1.5);
    lim.limit_mode = true;
    CHECK_NOTHROW(lim.validate());
    CHECK_THROWS_AS(SeriesFsr(lim, 0.0, 1.0, true), UnsupportedError);
    // the odd solution survives at the exceptional point
    const SeriesFsr odd(lim, 0.0, 1.0, false);
    CHECK(std::isfinite(odd.at(0.5).u2.real()));
    CHECK(fsr_series(lim, 0.5).u2 == odd.at(0.5).u2);
}

TEST_CASE("alpha = 0 spectra are shifted free spectra")
{
    for (auto v : {SingularVariant::Attract, SingularVariant::Repel}) {
        const auto e = dirichlet_eigs_alpha(family(0.0, v), 5);
        const double s = v == SingularVariant::Attract ? -1.0 : 1.0;
        for (int k = 1; k <= 5; ++k)
            CHECK(std::abs(e[k - 1] - (std::pow(k * pi / 2, 2) + s)) < 1e-7);
    }
}

TEST_CASE("Riccati coefficients")
{
    const auto r0 = riccati_coeffs(0.0);
    CHECK(r0.N == 1);
    CHECK(r0.a[1] == doctest::Approx(1.0));
    CHECK(riccati_coeffs(-1.2).N == 2);
    CHECK(riccati_coeffs(-1.6).N == 3);
    CHECK(riccati_min_terms(-1.6) == 3);
    for (double a : {-0.5, -1.2, -1.6}) {
        const auto r = riccati_coeffs(a);
        CHECK(r.residual_exponent > -1.0);
        CHECK(r.sign == 1);
        CHECK(r.accepted_exponent > r.rejected_exponent);
        CHECK(r.a[1] == doctest::Approx(1.0 / (a + 1.0)));
    }
    // a_2 = a_1^2 / (2 alpha + 3)
    const auto r = riccati_coeffs(-1.2);
    CHECK(r.a[2] == doctest::Approx(r.a[1] * r.a[1] / (2 * -1.2 + 3)));
}

TEST_CASE("three shooting methods agree at alpha = -1.2")
{
    const auto f = family(-1.2);
    const auto s = dirichlet_eigs_alpha(f, 3, SingularMethod::Series);
    const auto r = dirichlet_eigs_alpha(f, 3, SingularMethod::Riccati);
    const auto q = dirichlet_eigs_alpha(f, 3, SingularMethod::Quasi);
    for (int k = 0; k < 3; ++k) {
        CHECK(std::abs(s[k] - r[k]) < 1e-7);
        CHECK(std::abs(s[k] - q[k]) < 1e-7);
    }
    CHECK(s[0] == doctest::Approx(3.106608428605).epsilon(1e-10));
    // the quasi-derivative primitive needs alpha > -3/2
    CHECK_THROWS(dirichlet_eigs_alpha(family(-1.6), 1, SingularMethod::Quasi));
}

TEST_CASE("singular resolvent")
{
    const auto f0 = family(0.0);
    const auto r = resolvent_singular(f0, 0.0, [](double) { return cplx(1.0); });
    double e = 0.0;
    for (size_t i = 0; i < r.grid.size(); ++i)
        e = std::max(e, std::abs(r.y[i] - (std::cos(r.grid[i]) / std::cos(1.0) - 1.0)));
    CHECK(e < 1e-6);

    const auto f = family(-1.2);
    const auto z = resolvent_singular(f, cplx(0.3, 0.2), [](double) { return cplx(0.0); });
    CHECK(z.y.cwiseAbs().maxCoeff() == 0.0);

    const auto even = resolvent_singular(f, cplx(0.1, 0.05), [](double x) { return cplx(1.0 + x * x); });
    const auto odd = resolvent_singular(f, cplx(0.1, 0.05), [](double x) { return cplx(x); });
    const size_t n = even.grid.size();
    for (size_t i = 0; i < n; ++i) {
        REQUIRE(std::abs(even.grid[i] + even.grid[n - 1 - i]) < 1e-14);
        CHECK(std::abs(even.y[i] - even.y[n - 1 - i]) < 1e-12);
        CHECK(std::abs(odd.y[i] + odd.y[n - 1 - i]) < 1e-12);
    }

    const auto pic = resolvent_singular(f, cplx(0.1, 0.05), [](double x) { return cplx(1.0 + x); },
                                        ResolventMethod::Picard);
    const auto dir = resolvent_singular(f, cplx(0.1, 0.05), [](double x) { return cplx(1.0 + x); },
                                        ResolventMethod::Direct);
    CHECK(pic.method == "picard");
    CHECK(pic.contraction < 0.5);
    CHECK((pic.y - dir.y).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("alpha scans")
{
    // the repel family approaches alpha = 0 continuously from both sides
    const auto s = alpha_scan(family(0.0, SingularVariant::Repel), {-0.02, 0.0, 0.02}, 2);
    CHECK(std::abs(s.lambda[0][0] - s.lambda[1][0]) < 0.05);
    CHECK(std::abs(s.lambda[2][0] - s.lambda[1][0]) < 0.05);
    CHECK(s.lambda[1][0] == doctest::Approx(pi * pi / 4 + 1).epsilon(1e-9));
    // attract ground state deepens as alpha decreases
    const auto a = alpha_scan(family(0.0), {-0.8, -0.6, -0.4, -0.2, 0.0}, 1, 2);
    for (size_t i = 1; i < a.alpha.size(); ++i)
        CHECK(a.lambda[i][0] > a.lambda[i - 1][0]);
    CHECK(a.max_rel_jump < 0.05);
    CHECK_THROWS_AS(alpha_scan(family(0.0), {-1.0005, -0.9}, 1), DomainError);
    // finite ground state just off the Coulomb-like point
    const auto near = dirichlet_eigs_alpha(family(-1.0 + 0.01), 1);
    CHECK(std::isfinite(near[0]));
}

TEST_CASE("exceptional-point ladders")
{
    const auto at = exceptional_limit(family(0.0), 1, {0.1, 0.05, 0.025}, 4);
    CHECK(at.alpha_n == -1.0);
    CHECK(at.aligned_decreasing);
    CHECK(at.resolvent_decreasing);
    for (const auto& r : at.rows)
        CHECK(r.escaped == 1);
    // the sorted ground state escapes, so the unaligned distance grows
    CHECK_FALSE(at.decreasing);

    const auto odd1 = exceptional_limit(family(0.0, SingularVariant::Odd), 1, {0.1, 0.05, 0.025}, 4);
    CHECK(odd1.stalled);
    CHECK(odd1.floor > 1.0);
    CHECK_FALSE(odd1.resolvent_decreasing);

    CHECK_THROWS_AS(exceptional_limit(family(0.0), 1, {}, 4), DomainError);
}
