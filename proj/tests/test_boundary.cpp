#include <doctest.h>

#include <cmath>

#include "qsl/boundary.hpp"

using namespace qsl;

namespace {
BoundaryForms rows(std::initializer_list<cplx> r1, std::initializer_list<cplx> r2)
{
    Eigen::Matrix<cplx, 2, 4> M;
    int j = 0;
    for (cplx v : r1)
        M(0, j++) = v;
    j = 0;
    for (cplx v : r2)
        M(1, j++) = v;
    return BoundaryForms(M);
}
} // namespace

TEST_CASE("minors")
{
    const auto d = minors(BoundaryForms::dirichlet());
    CHECK(d(1, 3) == cplx(1.0));
    CHECK(d(4, 2) == cplx(0.0));
    CHECK(d(1, 4) == cplx(0.0));
    CHECK(d(3, 2) == cplx(0.0));
    const auto n = minors(rows({0, 1, 0, 0}, {0, 0, 0, 1}));
    CHECK(n(2, 4) == cplx(1.0));
    CHECK(n(4, 2) == cplx(-1.0));
    for (int a = 1; a <= 4; ++a) {
        CHECK(n(a, a) == cplx(0.0));
        for (int b = 1; b <= 4; ++b)
            CHECK(n(a, b) == -n(b, a));
    }
}

TEST_CASE("classify")
{
    const auto d = classify(BoundaryForms::dirichlet());
    CHECK(d.cls == Regularity::Regular3);
    CHECK(d.selfadjoint);
    CHECK(classify(rows({0, 1, 0, 0}, {0, 0, 0, 1})).cls == Regularity::Regular1);
    const auto p = classify(BoundaryForms::periodic());
    CHECK(p.cls == Regularity::Regular2);
    CHECK(p.J0 == cplx(-1.0));
    CHECK_FALSE(p.strengthened);
    const auto ap = classify(BoundaryForms::antiperiodic());
    CHECK(ap.cls == Regularity::Regular2);
    CHECK(ap.J0 == cplx(1.0));
    CHECK_FALSE(ap.strengthened);
    // Cauchy data at 0 only: every condition fails
    CHECK(classify(rows({1, 0, 0, 0}, {0, 1, 0, 0})).cls == Regularity::Degenerate);
    CHECK(classify(rows({1, 0, 1, 0}, {0, 1, 0, 0})).cls == Regularity::Regular2);
}

TEST_CASE("is_selfadjoint")
{
    CHECK(is_selfadjoint(BoundaryForms::dirichlet()));
    CHECK_FALSE(is_selfadjoint(rows({1, 0, 0, 0}, {0, 0, cplx(0, 1), 1})));
    for (double al : {0.3, 1.1, 2.5}) {
        const auto f = rows({std::cos(al), std::sin(al), 0, 0}, {0, 0, std::cos(2 * al), std::sin(2 * al)});
        CHECK(is_selfadjoint(f));
    }
}

TEST_CASE("characteristic determinant of the free problem")
{
    const auto D = BoundaryForms::dirichlet();
    for (double lam : {0.7, 2.3, 10.0}) {
        const double k = std::sqrt(lam);
        CHECK(free_determinant(D, lam).real() == doctest::Approx(std::sin(k * pi) / k).scale(1.0));
    }
    const auto fp = fundamental_pair<cplx>(Primitive(), cplx(6.25), 64);
    CHECK(char_determinant(D, fp).real() == doctest::Approx(std::sin(2.5 * pi) / 2.5).scale(1.0).epsilon(1e-10));
    // Neumann-type forms vanish at the Neumann eigenvalues n^2
    const auto N = rows({0, 1, 0, 0}, {0, 0, 0, 1});
    for (int n = 1; n <= 4; ++n)
        CHECK(std::abs(free_determinant(N, double(n * n))) < 1e-10);
}

TEST_CASE("unperturbed spectra")
{
    const auto d = unperturbed_spectrum(BoundaryForms::dirichlet(), 6);
    for (int n = 1; n <= 6; ++n)
        CHECK(d[n - 1].real() == doctest::Approx(double(n * n)));
    const auto p = unperturbed_spectrum(BoundaryForms::periodic(), 5);
    const double per[] = {0, 4, 4, 16, 16};
    for (int i = 0; i < 5; ++i)
        CHECK(p[i].real() == doctest::Approx(per[i]).scale(1.0));
    const auto ap = unperturbed_spectrum(BoundaryForms::antiperiodic(), 4);
    const double anti[] = {1, 1, 9, 9};
    for (int i = 0; i < 4; ++i)
        CHECK(ap[i].real() == doctest::Approx(anti[i]));
}

TEST_CASE("random self-adjoint forms are regular")
{
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 200; ++i) {
        const auto U = random_unitary(rng);
        CHECK((U.adjoint() * U - Mat2<cplx>::Identity()).cwiseAbs().maxCoeff() < 1e-12);
        const auto r = classify(selfadjoint_from_unitary(U));
        CHECK(r.selfadjoint);
        CHECK(r.cls != Regularity::Degenerate);
    }
}

TEST_CASE("winding number counts zeros")
{
    const auto f = [](cplx z) { return (z - 1.0) * (z - 1.0) * (z + 3.0); };
    CHECK(winding_number(f, 1.0, 0.5) == 2);
    CHECK(winding_number(f, 0.0, 5.0) == 3);
}
