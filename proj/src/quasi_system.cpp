#include "qsl/quasi_system.hpp"

#include <algorithm>
#include <cmath>

namespace qsl {

template <typename Scalar>
QuasiSource<Scalar>::QuasiSource(const Primitive& p) : p_(p)
{
    if constexpr (!is_complex<Scalar>::value) {
        if (!p.is_real())
            throw DomainError("complex primitive needs complex propagation");
    }
    s_ = from_complex<Scalar>(p.scale());
}

template <typename Scalar>
CellCoeffs<Scalar> QuasiSource<Scalar>::cell(double x0, double x1) const
{
    const Moments m = p_.moments(x0, x1);
    CellCoeffs<Scalar> c;
    c.a0 = s_ * m.u0;
    c.a1 = s_ * m.u1;
    c.c0 = -s_ * s_ * m.v0;
    c.c1 = -s_ * s_ * m.v1;
    return c;
}

namespace {

void check_inside(const Primitive& p, double x)
{
    const double tol = 1e-12 * std::max(1.0, p.right() - p.left());
    if (x < p.left() - tol || x > p.right() + tol)
        throw DomainError("propagation point outside the interval");
}

} // namespace

template <typename Scalar>
Mat2<Scalar> transfer_matrix(const Primitive& p, Scalar lambda, double x0, double x1, double tol)
{
    check_inside(p, x0);
    check_inside(p, x1);
    QuasiSource<Scalar> src(p);
    MagnusPropagator<Scalar, QuasiSource<Scalar>> prop(src, lambda, tol,
                                                      (p.right() - p.left()) / 16.0);
    return prop.transfer(x0, x1);
}

template <typename Scalar>
QuasiState<Scalar> propagate(const Primitive& p, Scalar lambda, double x0, double x1,
                             const QuasiState<Scalar>& s, double tol)
{
    if (s.x != x0)
        throw DomainError("state location differs from the propagation start");
    const Mat2<Scalar> T = transfer_matrix<Scalar>(p, lambda, x0, x1, tol);
    Vec2<Scalar> v(s.y, s.y1);
    v = T * v;
    if (!std::isfinite(std::abs(v[0])) || !std::isfinite(std::abs(v[1])))
        throw InstabilityError("non-finite state", x1);
    return {v[0], v[1], x1};
}

std::vector<double> default_grid(const Primitive& p, int grid_hint)
{
    if (grid_hint < 16)
        throw DomainError("grid_hint must be at least 16");
    const double a = p.left(), b = p.right();
    std::vector<double> g;
    g.reserve(grid_hint + p.mesh_points().size() + 1);
    for (int i = 0; i <= grid_hint; ++i)
        g.push_back(i == grid_hint ? b : a + (b - a) * i / grid_hint);
    g.insert(g.end(), p.mesh_points().begin(), p.mesh_points().end());
    std::sort(g.begin(), g.end());
    // drop near-duplicates created by breakpoints sitting on the uniform grid
    std::vector<double> out;
    for (double x : g)
        if (out.empty() || x - out.back() > 1e-13 * (b - a))
            out.push_back(x);
    out.back() = b;
    return out;
}

template <typename Scalar>
FundamentalPair<Scalar> fundamental_pair_on(const Primitive& p, Scalar lambda,
                                            const std::vector<double>& grid, double tol)
{
    if (grid.size() < 2 || grid.front() != p.left())
        throw DomainError("grid must start at the left endpoint");
    QuasiSource<Scalar> src(p);
    MagnusPropagator<Scalar, QuasiSource<Scalar>> prop(src, lambda, tol,
                                                      (p.right() - p.left()) / 16.0);
    FundamentalPair<Scalar> fp;
    fp.lambda = lambda;
    fp.grid = grid;
    const size_t n = grid.size();
    fp.phi.resize(n);
    fp.phi1.resize(n);
    fp.psi.resize(n);
    fp.psi1.resize(n);
    Mat2<Scalar> Y = Mat2<Scalar>::Identity();
    for (size_t i = 0; i < n; ++i) {
        if (i > 0) {
            if (!(grid[i] > grid[i - 1]))
                throw DomainError("grid must be strictly increasing");
            Y = prop.transfer(grid[i - 1], grid[i]) * Y;
        }
        fp.phi[i] = Y(0, 0);
        fp.phi1[i] = Y(1, 0);
        fp.psi[i] = Y(0, 1);
        fp.psi1[i] = Y(1, 1);
    }
    return fp;
}

template <typename Scalar>
FundamentalPair<Scalar> fundamental_pair(const Primitive& p, Scalar lambda, int grid_hint,
                                         double tol)
{
    return fundamental_pair_on<Scalar>(p, lambda, default_grid(p, grid_hint), tol);
}

template <typename Scalar>
SampledSolution<Scalar> solve_inhomogeneous(const FundamentalPair<Scalar>& pair,
                                            const VecX<Scalar>& f)
{
    const size_t n = pair.size();
    if (static_cast<size_t>(f.size()) != n)
        throw DomainError("right-hand side is not sampled on the pair's grid");
    SampledSolution<Scalar> z;
    z.grid = pair.grid;
    z.y.resize(n);
    z.y1.resize(n);
    Scalar ipsi{}, iphi{};
    for (size_t i = 0; i < n; ++i) {
        if (i > 0) {
            const double h = pair.grid[i] - pair.grid[i - 1];
            ipsi += 0.5 * h * (pair.psi[i - 1] * f[i - 1] + pair.psi[i] * f[i]);
            iphi += 0.5 * h * (pair.phi[i - 1] * f[i - 1] + pair.phi[i] * f[i]);
        }
        z.y[i] = pair.phi[i] * ipsi - pair.psi[i] * iphi;
        z.y1[i] = pair.phi1[i] * ipsi - pair.psi1[i] * iphi;
    }
    return z;
}

template <typename Scalar>
VecX<Scalar> sample(const std::function<Scalar(double)>& f, const std::vector<double>& grid)
{
    VecX<Scalar> v(grid.size());
    for (size_t i = 0; i < grid.size(); ++i)
        v[i] = f(grid[i]);
    return v;
}

template <typename Scalar>
SampledSolution<Scalar> solve_inhomogeneous(const Primitive& p, Scalar lambda,
                                            const std::function<Scalar(double)>& f,
                                            int grid_hint)
{
    const auto pair = fundamental_pair<Scalar>(p, lambda, grid_hint);
    return solve_inhomogeneous<Scalar>(pair, sample<Scalar>(f, pair.grid));
}

#define QSL_INSTANTIATE(S)                                                                        \
    template class QuasiSource<S>;                                                                \
    template Mat2<S> transfer_matrix<S>(const Primitive&, S, double, double, double);             \
    template QuasiState<S> propagate<S>(const Primitive&, S, double, double, const QuasiState<S>&, \
                                        double);                                                  \
    template FundamentalPair<S> fundamental_pair<S>(const Primitive&, S, int, double);            \
    template FundamentalPair<S> fundamental_pair_on<S>(const Primitive&, S,                       \
                                                       const std::vector<double>&, double);       \
    template SampledSolution<S> solve_inhomogeneous<S>(const FundamentalPair<S>&, const VecX<S>&); \
    template SampledSolution<S> solve_inhomogeneous<S>(const Primitive&, S,                       \
                                                       const std::function<S(double)>&, int);     \
    template VecX<S> sample<S>(const std::function<S(double)>&, const std::vector<double>&);

QSL_INSTANTIATE(double)
QSL_INSTANTIATE(cplx)

} // namespace qsl
