#include "qsl/spectrum.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "qsl/pruefer.hpp"

namespace qsl {

namespace {

template <typename Fn>
void parallel_for(int count, int jobs, Fn&& fn)
{
    jobs = std::max(1, std::min(jobs, count));
    if (jobs == 1) {
        for (int i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j)
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++)
                fn(i);
        });
    for (auto& t : pool)
        t.join();
}

int adapted_grid(const SpectrumOptions& opt, double freq)
{
    if (opt.grid_hint > 0)
        return opt.grid_hint;
    return std::max(512, static_cast<int>(32 * freq));
}

int count_sign_changes(const VecX<cplx>& y)
{
    const double tiny = 1e-10 * y.cwiseAbs().maxCoeff();
    int changes = 0, last = 0;
    for (Eigen::Index i = 1; i + 1 < y.size(); ++i) {
        const double v = y[i].real();
        if (std::abs(v) <= tiny)
            continue;
        const int s = v > 0 ? 1 : -1;
        if (last != 0 && s != last)
            ++changes;
        last = s;
    }
    return changes;
}

Mat2<cplx> end_transfer(const FundamentalPair<cplx>& fp)
{
    const size_t e = fp.size() - 1;
    Mat2<cplx> T;
    T << fp.phi[e], fp.psi[e], fp.phi1[e], fp.psi1[e];
    return T;
}

void fill_residuals(SpectralResult& r, const BoundaryForms& f)
{
    const size_t e = r.y.size() - 1;
    const Vec2<cplx> U = f.apply(r.y[0], r.y1[0], r.y[e], r.y1[e]);
    const double sup = std::max(r.y.cwiseAbs().maxCoeff(), r.y1.cwiseAbs().maxCoeff());
    r.bc_residual[0] = std::abs(U[0]) / sup;
    r.bc_residual[1] = std::abs(U[1]) / sup;
}

} // namespace

double l2_norm(const std::vector<double>& grid, const VecX<cplx>& y)
{
    double acc = 0.0;
    for (size_t i = 1; i < grid.size(); ++i)
        acc += 0.5 * (grid[i] - grid[i - 1]) * (std::norm(y[i - 1]) + std::norm(y[i]));
    return std::sqrt(acc);
}

cplx inner(const std::vector<double>& grid, const VecX<cplx>& y, const VecX<cplx>& z)
{
    cplx acc = 0.0;
    for (size_t i = 1; i < grid.size(); ++i)
        acc += 0.5 * (grid[i] - grid[i - 1]) *
               (y[i - 1] * std::conj(z[i - 1]) + y[i] * std::conj(z[i]));
    return acc;
}

// ---------------------------------------------------------------------------
// Dirichlet by Pruefer shooting

SpectralResult dirichlet_eigenpair(const Primitive& p, int n, SpectrumOptions opt)
{
    if (!p.is_real())
        throw DomainError("Dirichlet shooting needs a real primitive");
    if (n < 1)
        throw DomainError("eigenvalue index starts at 1");
    const double a = p.left(), b = p.right(), len = b - a;
    const double target = n * pi;
    PrueferOptions po{opt.prop_tol};
    const auto g = [&](double lam) {
        return theta_end(p, lam, std::sqrt(std::max(lam, 1.0)), 0.0, po) - target;
    };

    SpectralResult r;
    r.index = n;
    r.lambda0 = std::pow(n * pi / len, 2);

    const double s = std::abs(p.scale());
    const double unorm2 = s * s * integrate_u2(p, a, b);
    double lo = -std::pow(1.0 + unorm2, 2);
    double hi = std::pow((n + 2) * pi / len, 2) + 1.0 + unorm2;
    double glo = g(lo), ghi = g(hi);
    for (int k = 0; glo > 0 && k < 40; ++k) {
        lo = 4.0 * lo - 1.0;
        glo = g(lo);
    }
    for (int k = 0; ghi < 0 && k < 40; ++k) {
        hi = 2.0 * hi + 1.0;
        ghi = g(hi);
    }
    if (glo > 0 || ghi < 0)
        throw SearchError("no bracket for Dirichlet eigenvalue " + std::to_string(n));

    // bisection down to a narrow bracket, then Illinois
    while (hi - lo > 1e-3 * std::max(1.0, std::abs(lo) + std::abs(hi)) * 0.5) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        (gm < 0 ? lo : hi) = mid;
        (gm < 0 ? glo : ghi) = gm;
    }
    double lam = lo, gl = glo;
    int side = 0;
    bool collapsed = false;
    for (int it = 0; it < 200; ++it) {
        lam = (lo * ghi - hi * glo) / (ghi - glo);
        if (!(lam > lo && lam < hi))
            lam = 0.5 * (lo + hi);
        gl = g(lam);
        if (std::abs(gl) < opt.tol * 1e-2)
            break;
        // bracket at machine resolution: the residual left is integration noise
        if (hi - lo < 1e-15 * std::max(1.0, std::abs(lam))) {
            collapsed = true;
            break;
        }
        if (gl < 0) {
            lo = lam;
            glo = gl;
            if (side == -1)
                ghi *= 0.5;
            side = -1;
        } else {
            hi = lam;
            ghi = gl;
            if (side == 1)
                glo *= 0.5;
            side = 1;
        }
    }
    r.lambda = lam;
    r.achieved_tol = std::abs(gl);
    if (r.achieved_tol > opt.tol && !(collapsed && r.achieved_tol < 1e3 * opt.tol)) {
        r.ok = false;
        r.error = "theta residual " + std::to_string(r.achieved_tol) + " above tolerance";
    }
    r.s = std::sqrt(r.lambda) - std::sqrt(r.lambda0);

    if (opt.eigenfunctions) {
        const auto grid = default_grid(p, adapted_grid(opt, n * pi / len));
        auto traj = theta_trajectory_scaled(p, lam, std::sqrt(std::max(lam, 1.0)), 0.0, grid, po);
        traj.log_r = log_r_trajectory(p, traj, po);
        const auto sol = reconstruct_solution(traj);
        r.grid = sol.grid;
        r.y = sol.y.cast<cplx>();
        r.y1 = sol.y1.cast<cplx>();
        const double nrm = l2_norm(r.grid, r.y);
        r.y /= nrm;
        r.y1 /= nrm;
        r.norm = l2_norm(r.grid, r.y);
        fill_residuals(r, BoundaryForms::dirichlet());
        r.sign_changes = count_sign_changes(r.y);
        const Mat2<double> T = transfer_matrix<double>(p, lam, a, b, opt.prop_tol);
        r.det_residual = std::abs(T(0, 1)) / std::max(1.0, T.cwiseAbs().maxCoeff());
    }
    return r;
}

std::vector<SpectralResult> dirichlet_eigenvalues(const Primitive& p, int n_lo, int n_hi,
                                                  SpectrumOptions opt)
{
    if (n_lo < 1 || n_hi < n_lo)
        throw DomainError("invalid index range");
    std::vector<SpectralResult> out(n_hi - n_lo + 1);
    parallel_for(static_cast<int>(out.size()), opt.jobs, [&](int i) {
        try {
            out[i] = dirichlet_eigenpair(p, n_lo + i, opt);
        } catch (const Error& e) {
            out[i].index = n_lo + i;
            out[i].ok = false;
            out[i].error = e.what();
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// general regular forms

DeterminantValue characteristic(const Primitive& p, const BoundaryForms& f, cplx lambda,
                                double prop_tol)
{
    const Mat2<cplx> T = transfer_matrix<cplx>(p, lambda, p.left(), p.right(), prop_tol);
    const double jmax = minors(f).J.cwiseAbs().maxCoeff();
    return {char_determinant(f, T), jmax * std::max(1.0, T.cwiseAbs().maxCoeff())};
}

SampledSolution<cplx> eigenfunction(const Primitive& p, const BoundaryForms& f, cplx lambda,
                                    int grid_hint, double prop_tol)
{
    const auto fp = fundamental_pair<cplx>(p, lambda, grid_hint, prop_tol);
    const Mat2<cplx> T = end_transfer(fp);
    // U_j(Phi), U_j(Psi) for j = 0, 1
    const Vec2<cplx> Uphi = f.apply(1.0, 0.0, T(0, 0), T(1, 0));
    const Vec2<cplx> Upsi = f.apply(0.0, 1.0, T(0, 1), T(1, 1));
    const double gate = 1e-10 * f.M.cwiseAbs().maxCoeff() * std::max(1.0, T.cwiseAbs().maxCoeff());
    cplx cphi = 1.0, cpsi = 0.0;
    for (int j : {1, 0}) {
        if (std::max(std::abs(Uphi[j]), std::abs(Upsi[j])) > gate) {
            cphi = Upsi[j];
            cpsi = -Uphi[j];
            break;
        }
    }
    // with every U_j(Phi), U_j(Psi) negligible the eigenspace is two-dimensional; Phi is a member
    SampledSolution<cplx> s;
    s.grid = fp.grid;
    s.y = cphi * fp.phi + cpsi * fp.psi;
    s.y1 = cphi * fp.phi1 + cpsi * fp.psi1;
    const double nrm = l2_norm(s.grid, s.y);
    if (!(nrm > 0))
        throw DomainError("degenerate eigenfunction combination");
    // fix the phase so that the largest sample is real and positive
    Eigen::Index im = 0;
    s.y.cwiseAbs().maxCoeff(&im);
    const cplx ph = std::conj(s.y[im]) / std::abs(s.y[im]) / nrm;
    s.y *= ph;
    s.y1 *= ph;
    return s;
}

namespace {

struct SecantOutcome {
    cplx z;
    double resid; // |Delta| / scale
    bool ok;
};

// secant in z on Delta(z^2); near z = 0 the iteration runs in lambda instead
SecantOutcome secant_root(const std::function<DeterminantValue(cplx)>& D, cplx seed, double d,
                          double tol)
{
    const bool in_lambda = std::abs(seed) < 1.0;
    const auto F = [&](cplx v) { return D(in_lambda ? v : v * v); };
    cplx x0 = in_lambda ? seed * seed : seed;
    cplx x1 = x0 + d;
    DeterminantValue f0 = F(x0), f1 = F(x1);
    for (int it = 0; it < 60; ++it) {
        if (f1.value == f0.value)
            break;
        const cplx step = f1.value * (x1 - x0) / (f1.value - f0.value);
        x0 = x1;
        f0 = f1;
        x1 -= step;
        f1 = F(x1);
        if (!std::isfinite(std::abs(x1)))
            return {x1, INFINITY, false};
        if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(x1)) || f1.value == 0.0)
            break;
    }
    const double resid = std::abs(f1.value) / f1.scale;
    const cplx z = in_lambda ? std::sqrt(x1) : x1;
    return {z, resid, resid < tol};
}

} // namespace

std::vector<SpectralResult> regular_eigenvalues(const Primitive& p, const BoundaryForms& f,
                                                int n_lo, int n_hi, SpectrumOptions opt)
{
    if (n_lo < 1 || n_hi < n_lo)
        throw DomainError("invalid index range");
    const RegularityReport rep = classify(f);
    if (rep.cls == Regularity::Degenerate)
        throw UnsupportedError("regular_eigenvalues needs Birkhoff-regular forms");
    const double len = p.right() - p.left();
    const auto ladder0 = unperturbed_spectrum(f, n_hi + 1, len);
    const auto D = [&](cplx lam) { return characteristic(p, f, lam, opt.prop_tol); };

    const int count = n_hi - n_lo + 1;
    std::vector<SpectralResult> out(count);
    std::vector<cplx> zs(count);
    parallel_for(count, opt.jobs, [&](int i) {
        const int n = n_lo + i;
        SpectralResult& r = out[i];
        r.index = n;
        r.lambda0 = ladder0[n - 1];
        cplx seed = std::sqrt(r.lambda0);
        // members of a double unperturbed root start on opposite sides of it
        double d = 0.05;
        const bool dbl_prev = n >= 2 && std::abs(ladder0[n - 2] - r.lambda0) < 1e-8 * std::max(1.0, std::abs(r.lambda0));
        const bool dbl_next = std::abs(ladder0[n] - r.lambda0) < 1e-8 * std::max(1.0, std::abs(r.lambda0));
        if (dbl_prev || dbl_next) {
            const double off = 0.1 / std::max(1.0, std::abs(seed));
            seed += dbl_next ? -off : off;
            d = dbl_next ? -0.02 : 0.02;
        }
        try {
            const SecantOutcome so = secant_root(D, seed, d, opt.tol);
            zs[i] = so.z;
            r.lambda = so.z * so.z;
            r.achieved_tol = so.resid;
            if (!so.ok) {
                r.ok = false;
                r.error = "secant did not converge (residual " + std::to_string(so.resid) + ")";
            }
        } catch (const Error& e) {
            r.ok = false;
            r.error = e.what();
        }
    });

    // merge indices that landed on the same root
    for (int i = 0; i + 1 < count; ++i) {
        SpectralResult &r0 = out[i], &r1 = out[i + 1];
        if (!r0.ok || !r1.ok)
            continue;
        const double sep = std::abs(r0.lambda - r1.lambda);
        if (sep < 1e-6 * std::max(1.0, std::abs(r0.lambda))) {
            const cplx mid = 0.5 * (r0.lambda + r1.lambda);
            const double rad = std::max(1e-4, 100.0 * sep);
            const int w = winding_number([&](cplx l) { return D(l).value; }, mid, rad, 64);
            if (w >= 2) {
                r0.lambda = r1.lambda = mid;
                r0.multiplicity = r1.multiplicity = 2;
            }
        }
    }

    parallel_for(count, opt.jobs, [&](int i) {
        SpectralResult& r = out[i];
        if (!r.ok)
            return;
        r.s = std::sqrt(r.lambda) - std::sqrt(r.lambda0);
        if (!opt.eigenfunctions)
            return;
        try {
            const auto ef = eigenfunction(p, f, r.lambda,
                                          adapted_grid(opt, std::abs(std::sqrt(r.lambda)) + 1.0),
                                          opt.prop_tol);
            r.grid = ef.grid;
            r.y = ef.y;
            r.y1 = ef.y1;
            r.norm = l2_norm(r.grid, r.y);
            fill_residuals(r, f);
            const DeterminantValue dv = D(r.lambda);
            r.det_residual = std::abs(dv.value) / dv.scale;
            if (p.is_real() && rep.cls == Regularity::Regular3 &&
                std::abs(r.lambda.imag()) < 1e-7)
                r.sign_changes = count_sign_changes(r.y);
        } catch (const Error& e) {
            r.ok = false;
            r.error = e.what();
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// comparison with the unperturbed problem

Comparison comparison_sequences(const std::vector<SpectralResult>& results,
                                const BoundaryForms& f)
{
    Comparison c;
    for (const auto& r : results) {
        if (!r.ok)
            continue;
        c.index.push_back(r.index);
        c.s.push_back(std::sqrt(r.lambda) - std::sqrt(r.lambda0));
        if (r.y.size() == 0) {
            c.deviation.push_back(NAN);
            continue;
        }
        const double a = r.grid.front(), b = r.grid.back();
        const cplx z = std::sqrt(r.lambda0);
        const auto free_pair = [&](double t, cplx& phi, cplx& phi1, cplx& psi, cplx& psi1) {
            const cplx w = z * t;
            phi = std::cos(w);
            phi1 = -z * std::sin(w);
            psi = std::abs(w) < 1e-8 ? cplx(t) : std::sin(w) / z;
            psi1 = std::cos(w);
        };
        cplx fb, f1b, sb, s1b;
        free_pair(b - a, fb, f1b, sb, s1b);
        Mat2<cplx> B;
        B.col(0) = f.apply(1.0, 0.0, fb, f1b);
        B.col(1) = f.apply(0.0, 1.0, sb, s1b);
        Eigen::JacobiSVD<Mat2<cplx>> svd(B, Eigen::ComputeFullV);
        std::vector<Vec2<cplx>> basis{svd.matrixV().col(1)};
        if (svd.singularValues()[0] < 1e-8 * std::max(1.0, f.M.cwiseAbs().maxCoeff()))
            basis.push_back(svd.matrixV().col(0));

        // orthonormal unperturbed eigenfunctions sampled on the result grid
        std::vector<VecX<cplx>> e;
        for (const auto& v : basis) {
            VecX<cplx> y0(r.grid.size());
            for (size_t i = 0; i < r.grid.size(); ++i) {
                cplx ph, ph1, ps, ps1;
                free_pair(r.grid[i] - a, ph, ph1, ps, ps1);
                y0[i] = v[0] * ph + v[1] * ps;
            }
            for (const auto& q : e)
                y0 -= inner(r.grid, y0, q) * q;
            y0 /= l2_norm(r.grid, y0);
            e.push_back(y0);
        }
        if (e.size() == 1) {
            const cplx ip = inner(r.grid, r.y, e[0]);
            const cplx ph = std::abs(ip) > 0 ? ip / std::abs(ip) : cplx(1.0);
            c.deviation.push_back(l2_norm(r.grid, r.y - ph * e[0]));
        } else {
            VecX<cplx> res = r.y;
            for (const auto& q : e)
                res -= inner(r.grid, r.y, q) * q;
            c.deviation.push_back(l2_norm(r.grid, res));
        }
    }
    return c;
}

} // namespace qsl
