#include "qsl/boundary.hpp"

#include <algorithm>
#include <cmath>

namespace qsl {

namespace {

using Forms = Eigen::Matrix<cplx, 2, 4>;

Forms rows(std::initializer_list<double> r0, std::initializer_list<double> r1)
{
    Forms m;
    int j = 0;
    for (double v : r0)
        m(0, j++) = v;
    j = 0;
    for (double v : r1)
        m(1, j++) = v;
    return m;
}

double max_minor(const Minors& m)
{
    return m.J.cwiseAbs().maxCoeff();
}

bool is_zero(cplx v, double scale)
{
    return std::abs(v) <= 1e-12 * scale;
}

cplx sinc_pi(cplx z, double len)
{
    // sin(z len) / z, finite at z = 0
    const cplx w = z * len;
    if (std::abs(w) < 1e-4)
        return len * (1.0 - w * w / 6.0);
    return std::sin(w) / z;
}

} // namespace

BoundaryForms::BoundaryForms(const Eigen::Matrix<cplx, 2, 4>& m) : M(m)
{
    if (max_minor(minors(*this)) <= 1e-14 * std::max(1.0, M.squaredNorm()))
        throw DomainError("boundary forms must have rank 2");
}

BoundaryForms BoundaryForms::dirichlet()
{
    return BoundaryForms(rows({1, 0, 0, 0}, {0, 0, 1, 0}));
}

BoundaryForms BoundaryForms::neumann_quasi()
{
    return BoundaryForms(rows({0, 1, 0, 0}, {0, 0, 0, 1}));
}

BoundaryForms BoundaryForms::periodic()
{
    return BoundaryForms(rows({1, 0, -1, 0}, {0, 1, 0, -1}));
}

BoundaryForms BoundaryForms::antiperiodic()
{
    return BoundaryForms(rows({1, 0, 1, 0}, {0, 1, 0, 1}));
}

BoundaryForms BoundaryForms::preset(const std::string& name)
{
    if (name == "dirichlet")
        return dirichlet();
    if (name == "neumann_quasi")
        return neumann_quasi();
    if (name == "periodic")
        return periodic();
    if (name == "antiperiodic")
        return antiperiodic();
    throw DomainError("unknown boundary preset '" + name + "'");
}

Vec2<cplx> BoundaryForms::apply(cplx ya, cplx y1a, cplx yb, cplx y1b) const
{
    Eigen::Matrix<cplx, 4, 1> v(ya, y1a, yb, y1b);
    return M * v;
}

std::string to_string(Regularity r)
{
    switch (r) {
    case Regularity::Regular1: return "Regular1";
    case Regularity::Regular2: return "Regular2";
    case Regularity::Regular3: return "Regular3";
    case Regularity::Degenerate: return "Degenerate";
    }
    return "?";
}

Minors minors(const BoundaryForms& f)
{
    Minors m;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            m.J(a, b) = f.M(0, a) * f.M(1, b) - f.M(1, a) * f.M(0, b);
    return m;
}

RegularityReport classify(const BoundaryForms& f)
{
    RegularityReport r;
    r.minors = minors(f);
    const Minors& J = r.minors;
    const double scale = max_minor(J);
    if (scale <= 1e-14 * std::max(1.0, f.M.squaredNorm()))
        throw DomainError("boundary forms must have rank 2");
    const cplx s1 = J(1, 4) + J(3, 2);
    const cplx s0 = J(1, 2) + J(3, 4);
    if (!is_zero(J(4, 2), scale)) {
        r.cls = Regularity::Regular1;
        r.strengthened = true;
    } else if (!is_zero(s1, scale)) {
        r.cls = Regularity::Regular2;
        r.J0 = s0 / s1;
        r.strengthened = std::abs(r.J0 - 1.0) > 1e-10 && std::abs(r.J0 + 1.0) > 1e-10;
    } else if (is_zero(J(1, 4), scale) && is_zero(J(3, 2), scale) && is_zero(s0, scale) &&
               !is_zero(J(1, 3), scale)) {
        r.cls = Regularity::Regular3;
        r.strengthened = true;
    } else {
        r.cls = Regularity::Degenerate;
    }
    r.selfadjoint = is_selfadjoint(f);
    return r;
}

bool is_selfadjoint(const BoundaryForms& f, double tol)
{
    Mat2<cplx> Jm;
    Jm << 0, 1, -1, 0;
    const Mat2<cplx> A = f.left_block(), B = f.right_block();
    const Mat2<cplx> R = A * Jm * A.adjoint() - B * Jm * B.adjoint();
    return R.cwiseAbs().maxCoeff() <= tol * std::max(1.0, f.M.squaredNorm());
}

cplx char_determinant(const BoundaryForms& f, const Mat2<cplx>& T)
{
    const Minors J = minors(f);
    return J(1, 2) + J(3, 4) + J(1, 3) * T(0, 1) + J(1, 4) * T(1, 1) + J(3, 2) * T(0, 0) +
           J(4, 2) * T(1, 0);
}

template <typename Scalar>
cplx char_determinant(const BoundaryForms& f, const FundamentalPair<Scalar>& pair)
{
    const size_t e = pair.size() - 1;
    Mat2<cplx> T;
    T << cplx(pair.phi[e]), cplx(pair.psi[e]), cplx(pair.phi1[e]), cplx(pair.psi1[e]);
    return char_determinant(f, T);
}

template cplx char_determinant<double>(const BoundaryForms&, const FundamentalPair<double>&);
template cplx char_determinant<cplx>(const BoundaryForms&, const FundamentalPair<cplx>&);

cplx free_determinant(const BoundaryForms& f, cplx lambda, double len)
{
    const cplx z = std::sqrt(lambda);
    Mat2<cplx> T;
    const cplx c = std::cos(z * len);
    T << c, sinc_pi(z, len), -z * std::sin(z * len), c;
    return char_determinant(f, T);
}

int winding_number(const std::function<cplx(cplx)>& f, cplx z0, double r, int samples)
{
    double total = 0.0;
    cplx prev = f(z0 + r);
    for (int k = 1; k <= samples; ++k) {
        const double t = 2.0 * pi * k / samples;
        const cplx cur = f(z0 + r * std::polar(1.0, t));
        total += std::arg(cur / prev);
        prev = cur;
    }
    return static_cast<int>(std::lround(total / (2.0 * pi)));
}

namespace {

// Newton in lambda with a central-difference derivative.
bool newton_root(const std::function<cplx(cplx)>& D, cplx& lam)
{
    for (int it = 0; it < 80; ++it) {
        const double h = 1e-6 * std::max(1.0, std::abs(lam));
        const cplx d0 = D(lam);
        const cplx dd = (D(lam + h) - D(lam - h)) / (2.0 * h);
        if (!std::isfinite(std::abs(d0)) || std::abs(dd) == 0.0)
            return false;
        const cplx step = d0 / dd;
        lam -= step;
        if (std::abs(step) < 1e-13 * std::max(1.0, std::abs(lam)))
            return true;
    }
    return std::abs(D(lam)) < 1e-9;
}

} // namespace

std::vector<cplx> unperturbed_spectrum(const BoundaryForms& f, int n_max, double len)
{
    const RegularityReport rep = classify(f);
    if (rep.cls == Regularity::Degenerate)
        throw UnsupportedError("unperturbed spectrum needs regular boundary forms");
    if (n_max < 1)
        return {};
    const Minors& J = rep.minors;
    const double scale = max_minor(J);
    const double w = pi / len; // frequency unit
    std::vector<cplx> out;

    if (rep.cls == Regularity::Regular3) {
        for (int n = 1; n <= n_max; ++n)
            out.push_back(std::pow(n * w, 2));
        return out;
    }
    if (rep.cls == Regularity::Regular2 && is_zero(J(1, 3), scale)) {
        // cos(len z) = -J0; roots z = (acos(-J0) + 2 pi k) / len, k in Z
        const cplx a = std::acos(-rep.J0);
        const int K = n_max + 2;
        for (int k = -K; k <= K; ++k) {
            const cplx z = (a + 2.0 * pi * k) / len;
            out.push_back(z * z);
        }
        std::stable_sort(out.begin(), out.end(),
                         [](cplx x, cplx y) { return std::abs(x) < std::abs(y); });
        out.resize(n_max);
        return out;
    }

    const auto D = [&](cplx lam) { return free_determinant(f, lam, len); };
    std::vector<cplx> seeds;
    for (int k = 0; k <= 4 * (n_max + 4); ++k)
        seeds.push_back(std::pow(0.25 * k * w, 2));
    for (int m = 1; m <= n_max + 4; ++m)
        seeds.push_back(-std::pow(m * w, 2));
    for (int i = -4; i <= 4; ++i)
        for (int j = -4; j <= 4; ++j)
            seeds.emplace_back(2.5 * i, 2.5 * j);

    std::vector<cplx> roots;
    for (cplx s : seeds) {
        cplx lam = s;
        if (!newton_root(D, lam))
            continue;
        const double tol = 1e-6 * std::max(1.0, std::abs(lam));
        if (std::none_of(roots.begin(), roots.end(),
                         [&](cplx r) { return std::abs(r - lam) < tol; }))
            roots.push_back(lam);
    }
    std::sort(roots.begin(), roots.end(),
              [](cplx x, cplx y) { return std::abs(x) < std::abs(y); });
    for (size_t i = 0; i < roots.size() && static_cast<int>(out.size()) < n_max; ++i) {
        double gap = 1.0;
        for (size_t j = 0; j < roots.size(); ++j)
            if (j != i)
                gap = std::min(gap, std::abs(roots[j] - roots[i]));
        const double r = std::min(0.1, 0.4 * gap);
        const int mult = std::max(1, winding_number(D, roots[i], r));
        for (int k = 0; k < mult && static_cast<int>(out.size()) < n_max; ++k)
            out.push_back(roots[i]);
    }
    return out;
}

BoundaryForms selfadjoint_from_unitary(const Mat2<cplx>& U)
{
    const cplx I(0, 1);
    const Mat2<cplx> P = U - Mat2<cplx>::Identity();
    const Mat2<cplx> Q = I * (U + Mat2<cplx>::Identity());
    Eigen::Matrix<cplx, 2, 4> m;
    for (int j = 0; j < 2; ++j) {
        m(j, 0) = Q(j, 0);
        m(j, 1) = P(j, 0);
        m(j, 2) = Q(j, 1);
        m(j, 3) = -P(j, 1);
    }
    return BoundaryForms(m);
}

Mat2<cplx> random_unitary(std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    Mat2<cplx> Z;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            Z(i, j) = cplx(g(rng), g(rng));
    Eigen::HouseholderQR<Mat2<cplx>> qr(Z);
    Mat2<cplx> Q = qr.householderQ();
    const Mat2<cplx> R = qr.matrixQR().triangularView<Eigen::Upper>();
    // fix the phases so Q is Haar-distributed
    for (int j = 0; j < 2; ++j) {
        const cplx d = R(j, j);
        if (std::abs(d) > 0)
            Q.col(j) *= d / std::abs(d);
    }
    return Q;
}

} // namespace qsl
