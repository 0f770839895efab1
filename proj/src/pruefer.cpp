#include "qsl/pruefer.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <boost/numeric/odeint.hpp>

#include "qsl/quadrature.hpp"

namespace qsl {

namespace odeint = boost::numeric::odeint;

namespace {

std::vector<double> knots_of(const Primitive& p)
{
    std::vector<double> k{p.left()};
    k.insert(k.end(), p.mesh_points().begin(), p.mesh_points().end());
    k.push_back(p.right());
    return k;
}

// u inside the closed cell [l, r], using one-sided values at the ends and stepping
// off singular points.
struct CellU {
    const Primitive& p;
    double l, r, sr;
    bool sing_l, sing_r;

    double operator()(double x) const
    {
        if (sing_l && x <= l)
            x = l + 1e-14 * (r - l);
        if (sing_r && x >= r)
            x = r - 1e-14 * (r - l);
        return sr * p.shape(x, x >= r ? Side::Left : Side::Right);
    }
};

template <typename State, typename Rhs>
void integrate_cells(const Primitive& p, State& state, const std::vector<double>& times,
                     double dt0, double tol, const Rhs& rhs,
                     const std::function<void(size_t, const State&)>& observe)
{
    const auto knots = knots_of(p);
    const auto& sing = p.singular_points();
    auto is_sing = [&](double x) { return std::find(sing.begin(), sing.end(), x) != sing.end(); };
    const double sr = p.scale().real();
    auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_dopri5<State>());

    size_t ti = 0;
    for (size_t c = 0; c + 1 < knots.size(); ++c) {
        const double l = knots[c], r = knots[c + 1];
        CellU u{p, l, r, sr, is_sing(l), is_sing(r)};
        std::vector<double> tt{l};
        std::vector<long> idx{-1};
        while (ti < times.size() && times[ti] <= r) {
            if (times[ti] >= l) {
                if (times[ti] == tt.back())
                    idx.back() = static_cast<long>(ti);
                else {
                    tt.push_back(times[ti]);
                    idx.push_back(static_cast<long>(ti));
                }
            }
            ++ti;
        }
        // a time equal to r also belongs to the next cell; revisit it there
        if (ti > 0 && times[ti - 1] == r)
            --ti;
        if (tt.back() != r) {
            tt.push_back(r);
            idx.push_back(-1);
        }
        auto sys = [&](const State& s, State& ds, double x) { rhs(s, ds, x, u(x)); };
        size_t k = 0;
        odeint::integrate_times(stepper, sys, state, tt.begin(), tt.end(),
                                std::min(dt0, r - l), [&](const State& s, double) {
                                    if (idx[k] >= 0)
                                        observe(static_cast<size_t>(idx[k]), s);
                                    ++k;
                                });
    }
}

double theta_rhs(double th, double u, double lambda, double k)
{
    const double s = std::sin(th), c = std::cos(th);
    return k * c * c + 2.0 * u * s * c + (lambda + u * u) / k * s * s;
}

double logr_rhs(double th, double u, double lambda, double k)
{
    return -u * std::cos(2.0 * th) + 0.5 * std::sin(2.0 * th) * (k - (lambda + u * u) / k);
}

void check_real(const Primitive& p)
{
    if (!p.is_real())
        throw DomainError("Pruefer integration needs a real primitive");
}

double initial_dt(double lambda, double k, double len)
{
    const double freq = std::max({k, std::abs(lambda) / k, 1.0});
    return std::min(0.05 * len, 0.05 / freq);
}

std::vector<double> theta_at(const Primitive& p, double lambda, double k, double c,
                             const std::vector<double>& times, double tol)
{
    using State = std::array<double, 1>;
    State s{c};
    std::vector<double> out(times.size(), c);
    integrate_cells<State>(
        p, s, times, initial_dt(lambda, k, p.right() - p.left()), tol,
        [&](const State& x, State& dx, double, double u) { dx[0] = theta_rhs(x[0], u, lambda, k); },
        [&](size_t i, const State& x) {
            if (!std::isfinite(x[0]))
                throw AccuracyError("Pruefer angle became non-finite", 0.0);
            out[i] = x[0];
        });
    return out;
}

} // namespace

PrueferTrajectory theta_trajectory_scaled(const Primitive& p, double lambda, double k, double c,
                                          const std::vector<double>& grid, PrueferOptions opt)
{
    check_real(p);
    if (!(k > 0.0))
        throw DomainError("Pruefer scaling must be positive");
    if (grid.empty() || grid.front() != p.left())
        throw DomainError("Pruefer grid must start at the left endpoint");
    PrueferTrajectory t;
    t.lambda = lambda;
    t.c = c;
    t.k = k;
    t.grid = grid;
    t.theta = theta_at(p, lambda, k, c, grid, opt.tol);
    return t;
}

PrueferTrajectory theta_trajectory(const Primitive& p, double lambda, double c,
                                   const std::vector<double>& grid, PrueferOptions opt)
{
    if (!(lambda > 0.0))
        throw DomainError("theta_trajectory needs lambda > 0");
    return theta_trajectory_scaled(p, lambda, std::sqrt(lambda), c, grid, opt);
}

PrueferTrajectory theta_trajectory(const Primitive& p, double lambda, double c, int grid_hint,
                                   PrueferOptions opt)
{
    return theta_trajectory(p, lambda, c, default_grid(p, grid_hint), opt);
}

double theta_end(const Primitive& p, double lambda, double k, double c, PrueferOptions opt)
{
    check_real(p);
    return theta_at(p, lambda, k, c, {p.right()}, opt.tol).back();
}

std::vector<double> log_r_trajectory(const Primitive& p, const PrueferTrajectory& traj,
                                     PrueferOptions opt)
{
    check_real(p);
    const double lambda = traj.lambda, k = traj.k;
    std::vector<double> pts = p.mesh_points();
    pts.insert(pts.end(), traj.grid.begin(), traj.grid.end());
    const double hmax = std::min(0.05 * (p.right() - p.left()), 0.5 / std::max(k, std::abs(lambda) / k));
    const auto mesh = quad::graded_mesh(p.left(), p.right(), hmax, pts, p.singular_points(), 30);
    const auto& rule = quad::gauss_rule<8>();

    std::vector<double> nodes;
    nodes.reserve(mesh.size() * 9);
    for (size_t i = 0; i + 1 < mesh.size(); ++i) {
        nodes.push_back(mesh[i]);
        const double c = 0.5 * (mesh[i] + mesh[i + 1]), w = 0.5 * (mesh[i + 1] - mesh[i]);
        for (unsigned j = 0; j < 8; ++j)
            nodes.push_back(c + w * rule.x[j]);
    }
    nodes.push_back(mesh.back());
    std::sort(nodes.begin(), nodes.end());
    const auto th = theta_at(p, lambda, k, traj.c, nodes, opt.tol);

    const double sr = p.scale().real();
    std::vector<double> out(traj.grid.size());
    double acc = traj.log_c1;
    size_t gi = 0, ni = 0;
    for (size_t i = 0; i + 1 < mesh.size(); ++i) {
        while (gi < traj.grid.size() && traj.grid[gi] <= mesh[i]) {
            out[gi++] = acc;
        }
        const double c = 0.5 * (mesh[i] + mesh[i + 1]), w = 0.5 * (mesh[i + 1] - mesh[i]);
        while (nodes[ni] <= mesh[i])
            ++ni;
        for (unsigned j = 0; j < 8; ++j) {
            const double x = c + w * rule.x[j];
            // nodes are sorted, and the GL nodes of this cell follow mesh[i] in order
            const size_t at = std::lower_bound(nodes.begin(), nodes.end(), x) - nodes.begin();
            const double u = sr * p.shape(x);
            acc += rule.w[j] * w * logr_rhs(th[at], u, lambda, k);
        }
    }
    while (gi < traj.grid.size())
        out[gi++] = acc;
    return out;
}

std::vector<double> log_r_ode(const Primitive& p, const PrueferTrajectory& traj, PrueferOptions opt)
{
    check_real(p);
    using State = std::array<double, 2>;
    const double lambda = traj.lambda, k = traj.k;
    State s{traj.c, traj.log_c1};
    std::vector<double> out(traj.grid.size(), traj.log_c1);
    integrate_cells<State>(
        p, s, traj.grid, initial_dt(lambda, k, p.right() - p.left()), opt.tol,
        [&](const State& x, State& dx, double, double u) {
            dx[0] = theta_rhs(x[0], u, lambda, k);
            dx[1] = logr_rhs(x[0], u, lambda, k);
        },
        [&](size_t i, const State& x) { out[i] = x[1]; });
    return out;
}

SampledSolution<double> reconstruct_solution(const PrueferTrajectory& traj)
{
    if (traj.log_r.size() != traj.grid.size())
        throw DomainError("trajectory has no amplitude samples");
    SampledSolution<double> s;
    s.grid = traj.grid;
    const size_t n = traj.grid.size();
    s.y.resize(n);
    s.y1.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const double r = std::exp(traj.log_r[i]);
        s.y[i] = r * std::sin(traj.theta[i]);
        s.y1[i] = traj.k * r * std::cos(traj.theta[i]);
    }
    return s;
}

// ---------------------------------------------------------------------------
// kernels

cplx KernelProfile::upsilon(size_t i) const
{
    const cplx rl = 1.0 / std::sqrt(lambda);
    return b[i] + 0.5 * rl * U[i] + 2.0 * w[i] - 0.5 * rl * A[i];
}

KernelProfile kernel_profile(const Primitive& p, double c, cplx lambda,
                             const std::vector<double>& grid)
{
    check_real(p);
    if (lambda == 0.0)
        throw DomainError("kernels need lambda != 0");
    if (grid.empty() || grid.front() != p.left())
        throw DomainError("kernel grid must start at the left endpoint");
    const cplx sq = std::sqrt(lambda);
    const double sr = p.scale().real();
    const double freq = std::max(1.0, std::abs(sq));
    const double hmax = std::min(0.05 * (p.right() - p.left()), 0.4 / freq);
    std::vector<double> pts = p.mesh_points();
    pts.insert(pts.end(), grid.begin(), grid.end());
    const auto mesh = quad::graded_mesh(p.left(), p.right(), hmax, pts, p.singular_points(), 40);
    const auto& rule = quad::gauss_rule<16>();

    auto u = [&](double x) { return sr * p.shape(x); };
    auto sn = [&](double t) { return std::sin(2.0 * c + 2.0 * sq * t); };
    auto cs = [&](double t) { return std::cos(2.0 * c + 2.0 * sq * t); };

    KernelProfile kp;
    kp.lambda = lambda;
    kp.c = c;
    kp.grid = grid;
    const size_t n = grid.size();
    kp.b.resize(n);
    kp.a.resize(n);
    kp.A.resize(n);
    kp.B.resize(n);
    kp.w.resize(n);
    kp.U.resize(n);

    cplx b{}, a{}, A{}, B{}, w{};
    double U = 0.0;
    size_t gi = 0;
    for (size_t i = 0; i + 1 < mesh.size(); ++i) {
        const double l = mesh[i], r = mesh[i + 1];
        while (gi < n && grid[gi] <= l) {
            kp.b[gi] = b;
            kp.a[gi] = a;
            kp.A[gi] = A;
            kp.B[gi] = B;
            kp.w[gi] = w;
            kp.U[gi] = U;
            ++gi;
        }
        const double cm = 0.5 * (l + r), hw = 0.5 * (r - l);
        cplx db{}, da{}, dA{}, dB{}, dw{};
        double dU = 0.0;
        for (unsigned j = 0; j < 16; ++j) {
            const double x = cm + hw * rule.x[j], wt = rule.w[j] * hw;
            const double ux = u(x);
            const cplx s = sn(x), co = cs(x);
            db += wt * ux * s;
            da += wt * ux * co;
            dA += wt * ux * ux * co;
            dB += wt * ux * ux * s;
            dU += wt * ux * ux;
            // inner running integral of u sin(...) from l to x
            const double ic = 0.5 * (l + x), ih = 0.5 * (x - l);
            cplx inner{};
            for (unsigned q = 0; q < 16; ++q) {
                const double t = ic + ih * rule.x[q];
                inner += rule.w[q] * ih * u(t) * sn(t);
            }
            dw += wt * ux * co * (b + inner);
        }
        b += db;
        a += da;
        A += dA;
        B += dB;
        U += dU;
        w += dw;
    }
    while (gi < n) {
        kp.b[gi] = b;
        kp.a[gi] = a;
        kp.A[gi] = A;
        kp.B[gi] = B;
        kp.w[gi] = w;
        kp.U[gi] = U;
        ++gi;
    }
    const cplx rl = 1.0 / sq;
    double sup = 0.0;
    for (size_t i = 0; i < n; ++i)
        sup = std::max(sup, std::abs(kp.b[i]) + std::abs(kp.a[i]) + 2.0 * std::abs(kp.w[i]) +
                                0.5 * std::abs(rl * kp.A[i]));
    kp.Upsilon = sup + std::abs(rl) * kp.U.back();
    return kp;
}

KernelProfile kernel_profile(const Primitive& p, double c, cplx lambda, int grid_hint)
{
    return kernel_profile(p, c, lambda, default_grid(p, grid_hint));
}

KernelValues kernels(const Primitive& p, double c, double x, cplx lambda)
{
    if (x < p.left() || x > p.right())
        throw DomainError("x outside the interval");
    auto grid = default_grid(p, 512);
    grid.push_back(x);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    const auto kp = kernel_profile(p, c, lambda, grid);
    const size_t i = std::lower_bound(grid.begin(), grid.end(), x) - grid.begin();
    KernelValues kv;
    kv.b = kp.b[i];
    kv.a = kp.a[i];
    kv.A = kp.A[i];
    kv.B = kp.B[i];
    kv.U = kp.U[i];
    kv.w = kp.w[i];
    kv.upsilon = kp.upsilon(i);
    kv.Upsilon = kp.Upsilon;
    return kv;
}

double upsilon_gauge(const Primitive& p, double c, cplx lambda)
{
    return kernel_profile(p, c, lambda, 512).Upsilon;
}

} // namespace qsl
