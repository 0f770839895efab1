#include "qsl/approximation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace qsl {

std::vector<double> merged_grid(double a, double b, int n, const std::vector<Primitive>& ps)
{
    if (n < 16)
        throw DomainError("grid needs at least 16 intervals");
    std::vector<double> g;
    for (int i = 0; i <= n; ++i)
        g.push_back(i == n ? b : a + (b - a) * i / n);
    for (const auto& p : ps)
        for (double x : p.mesh_points())
            if (x > a && x < b)
                g.push_back(x);
    std::sort(g.begin(), g.end());
    std::vector<double> out;
    for (double x : g)
        if (out.empty() || x - out.back() > 1e-13 * (b - a))
            out.push_back(x);
    out.back() = b;
    return out;
}

ResolventProbe resolvent_apply(const Primitive& p, const BoundaryForms& forms, cplx lambda,
                               const std::vector<double>& grid, const VecX<cplx>& f,
                               double prop_tol)
{
    const auto fp = fundamental_pair_on<cplx>(p, lambda, grid, prop_tol);
    const auto z = solve_inhomogeneous<cplx>(fp, f);
    const size_t e = fp.size() - 1;
    Mat2<cplx> B;
    B.col(0) = forms.apply(1.0, 0.0, fp.phi[e], fp.phi1[e]);
    B.col(1) = forms.apply(0.0, 1.0, fp.psi[e], fp.psi1[e]);
    const Vec2<cplx> rhs = -forms.apply(z.y[0], z.y1[0], z.y[e], z.y1[e]);
    const cplx det = B.determinant();
    const double tmax = std::max({1.0, std::abs(fp.phi[e]), std::abs(fp.phi1[e]),
                                  std::abs(fp.psi[e]), std::abs(fp.psi1[e])});
    const double scale = forms.M.cwiseAbs2().maxCoeff() * tmax;
    if (std::abs(det) <= 1e-10 * scale)
        throw NearSpectrumError("lambda is too close to the spectrum");
    // Cramer's rule
    const cplx c1 = (rhs[0] * B(1, 1) - B(0, 1) * rhs[1]) / det;
    const cplx c2 = (B(0, 0) * rhs[1] - rhs[0] * B(1, 0)) / det;

    ResolventProbe r;
    r.lambda = lambda;
    r.forms = forms;
    r.grid = grid;
    r.f = f;
    r.y = z.y + c1 * fp.phi + c2 * fp.psi;
    r.y1 = z.y1 + c1 * fp.phi1 + c2 * fp.psi1;
    r.det = det;
    return r;
}

ResolventProbe resolvent_apply(const Primitive& p, const BoundaryForms& forms, cplx lambda,
                               const std::function<cplx(double)>& f, int grid_hint)
{
    const auto grid = default_grid(p, grid_hint);
    return resolvent_apply(p, forms, lambda, grid, sample<cplx>(f, grid));
}

double l2_distance(const std::vector<double>& grid, const VecX<cplx>& y, const VecX<cplx>& z)
{
    double acc = 0.0;
    for (size_t i = 1; i < grid.size(); ++i)
        acc += 0.5 * (grid[i] - grid[i - 1]) * (std::norm(y[i - 1] - z[i - 1]) + std::norm(y[i] - z[i]));
    return std::sqrt(acc);
}

double weak_residual(const Primitive& p, const ResolventProbe& r, int count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    const double a = r.grid.front(), b = r.grid.back(), L = b - a;
    double worst = 0.0;
    for (int t = 0; t < count; ++t) {
        double c[4];
        for (double& v : c)
            v = g(rng);
        const auto phi = [&](double x, double& d) {
            double v = 0.0;
            d = 0.0;
            for (int k = 1; k <= 4; ++k) {
                const double w = k * pi / L;
                v += c[k - 1] * std::sin(w * (x - a));
                d += c[k - 1] * w * std::cos(w * (x - a));
            }
            return v;
        };
        // integrand at node i, with u taken from the side of the cell
        const auto integrand = [&](size_t i, Side side) {
            const double x = r.grid[i];
            double dphi;
            const double ph = phi(x, dphi);
            const cplx u = p.value(x, side);
            return r.y1[i] * dphi - (u * r.y1[i] + u * u * r.y[i] + r.lambda * r.y[i] + r.f[i]) * ph;
        };
        cplx acc = 0.0;
        for (size_t i = 1; i < r.grid.size(); ++i)
            acc += 0.5 * (r.grid[i] - r.grid[i - 1]) *
                   (integrand(i - 1, Side::Right) + integrand(i, Side::Left));
        worst = std::max(worst, std::abs(acc));
    }
    return worst;
}

double resolvent_identity_error(const Primitive& p, const BoundaryForms& forms, cplx l, cplx m,
                                int count, std::uint64_t seed, int grid_hint)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    const auto grid = default_grid(p, grid_hint);
    const double a = p.left(), L = p.right() - p.left();
    double worst = 0.0;
    for (int t = 0; t < count; ++t) {
        cplx c[4];
        for (cplx& v : c)
            v = cplx(g(rng), g(rng));
        const auto f = [&](double x) {
            cplx v = 0.0;
            for (int k = 0; k < 4; ++k)
                v += c[k] * std::cos(k * pi * (x - a) / L);
            return v;
        };
        const VecX<cplx> fs = sample<cplx>(f, grid);
        const auto rl = resolvent_apply(p, forms, l, grid, fs);
        const auto rm = resolvent_apply(p, forms, m, grid, fs);
        const auto rlm = resolvent_apply(p, forms, l, grid, rm.y);
        const VecX<cplx> diff = rl.y - rm.y - (l - m) * rlm.y;
        const VecX<cplx> zero = VecX<cplx>::Zero(fs.size());
        worst = std::max(worst, l2_distance(grid, diff, zero) / l2_distance(grid, fs, zero));
    }
    return worst;
}

std::vector<ConvergenceRow> convergence_experiment(const Primitive& p, const BoundaryForms& forms,
                                                   cplx lambda,
                                                   const std::function<cplx(double)>& f,
                                                   const std::vector<double>& eps_list,
                                                   int grid_n)
{
    if (eps_list.empty())
        throw DomainError("empty epsilon ladder");
    std::vector<Primitive> smooth;
    for (double eps : eps_list)
        smooth.push_back(mollify(p, eps));
    std::vector<Primitive> all = smooth;
    all.push_back(p);
    const auto grid = merged_grid(p.left(), p.right(), grid_n, all);
    const VecX<cplx> fs = sample<cplx>(f, grid);
    const auto y = resolvent_apply(p, forms, lambda, grid, fs);

    std::vector<ConvergenceRow> rows;
    for (size_t i = 0; i < eps_list.size(); ++i) {
        const auto ye = resolvent_apply(smooth[i], forms, lambda, grid, fs);
        ConvergenceRow row;
        row.eps = eps_list[i];
        row.u_dist = l2_distance(smooth[i], p);
        row.y_dist = l2_distance(grid, ye.y, y.y);
        row.weak = weak_residual(smooth[i], ye);
        rows.push_back(row);
    }
    return rows;
}

Primitive staircase(double eps, double exponent)
{
    if (!(eps > 0.0 && eps < 1.0))
        throw DomainError("staircase needs 0 < eps < 1");
    const double s = std::pow(eps, -exponent);
    return Primitive::piecewise(-1.0, 1.0, {-eps, 0.0, eps},
                                {GenPoly::constant(0.0), GenPoly::polynomial(0.0, {s * eps, s}),
                                 GenPoly::polynomial(0.0, {s * eps, -s}), GenPoly::constant(0.0)},
                                SmoothnessClass::bounded_variation());
}

DeltaLimitTable delta_limit_experiment(const std::vector<double>& eps_list, cplx lambda,
                                       const std::function<cplx(double)>& f, double exponent,
                                       int grid_n)
{
    if (eps_list.empty())
        throw DomainError("empty epsilon ladder");
    const Primitive limit = Primitive::piecewise(
        -1.0, 1.0, {0.0}, {GenPoly::constant(0.0), GenPoly::constant(-2.0 / 3.0)});
    const Primitive zero_u = Primitive::constant(-1.0, 1.0, 0.0);
    std::vector<Primitive> stairs;
    for (double eps : eps_list)
        stairs.push_back(staircase(eps, exponent));
    std::vector<Primitive> all = stairs;
    all.push_back(limit);
    // u_eps is steep on (-eps, eps); refine there so the weak-form quadrature resolves it
    auto grid = merged_grid(-1.0, 1.0, grid_n, all);
    for (double eps : eps_list)
        for (int i = 1; i < 2048; ++i)
            grid.push_back(-eps + 2.0 * eps * i / 2048);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end(),
                           [](double x, double y) { return y - x <= 1e-13; }),
               grid.end());
    const VecX<cplx> fs = sample<cplx>(f, grid);
    const auto forms = BoundaryForms::dirichlet();
    const auto y0 = resolvent_apply(limit, forms, lambda, grid, fs);
    const auto yf = resolvent_apply(zero_u, forms, lambda, grid, fs);

    DeltaLimitTable t;
    t.limit_to_free = l2_distance(grid, y0.y, yf.y);
    for (size_t i = 0; i < eps_list.size(); ++i) {
        const auto ye = resolvent_apply(stairs[i], forms, lambda, grid, fs);
        DeltaLimitRow row;
        row.eps = eps_list[i];
        row.dist_limit = l2_distance(grid, ye.y, y0.y);
        row.dist_free = l2_distance(grid, ye.y, yf.y);
        row.v_tail = integrate_u2(stairs[i], -1.0, eps_list[i]);
        row.v_total = integrate_u2(stairs[i], -1.0, 1.0);
        row.l1 = lp_norm(stairs[i], 1.0);
        row.l15 = lp_norm(stairs[i], 1.5);
        row.l19 = lp_norm(stairs[i], 1.9);
        row.weak = weak_residual(stairs[i], ye);
        t.rows.push_back(row);
    }
    return t;
}

} // namespace qsl
