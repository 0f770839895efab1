#include "qsl/singular.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <boost/math/tools/roots.hpp>

#include "qsl/magnus.hpp"
#include "qsl/potential.hpp"
#include "qsl/quasi_system.hpp"

namespace qsl {

std::string to_string(SingularVariant v)
{
    switch (v) {
    case SingularVariant::Attract: return "attract";
    case SingularVariant::Repel: return "repel";
    case SingularVariant::Odd: return "odd";
    }
    return "?";
}

SingularVariant parse_variant(const std::string& s)
{
    if (s == "attract")
        return SingularVariant::Attract;
    if (s == "repel")
        return SingularVariant::Repel;
    if (s == "odd")
        return SingularVariant::Odd;
    throw DomainError("unknown singular variant '" + s + "'");
}

std::string to_string(SingularMethod m)
{
    switch (m) {
    case SingularMethod::Series: return "series";
    case SingularMethod::Riccati: return "riccati";
    case SingularMethod::Quasi: return "quasi";
    }
    return "?";
}

double SingularFamily::kappa(int side) const
{
    switch (variant) {
    case SingularVariant::Attract: return -c;
    case SingularVariant::Repel: return c;
    case SingularVariant::Odd: return side > 0 ? c : -c;
    }
    return 0.0;
}

int SingularFamily::exceptional_index(double tol) const
{
    if (alpha >= -1.0 + tol)
        return 0;
    const int n = static_cast<int>(std::lround(1.0 / (alpha + 2.0)));
    return (n >= 1 && std::abs(alpha - exceptional_alpha(n)) <= tol) ? n : 0;
}

void SingularFamily::validate() const
{
    if (!(alpha > -2.0) || !std::isfinite(alpha))
        throw DomainError("alpha must exceed -2");
    if (!(c > 0.0))
        throw DomainError("c must be positive");
    if (!(r0 > 0.0 && r0 <= 1.0))
        throw DomainError("matching radius must lie in (0, 1]");
    if (terms < 8)
        throw DomainError("series needs at least 8 levels");
    if (!limit_mode && exceptional_index() != 0)
        throw UnsupportedError("alpha is an exceptional point -2 + 1/n");
}

// ---------------------------------------------------------------------------
// Series fundamental system

// Coefficients c_{jk} of x^{jm + 2k + sigma}: p(p-1) c_{jk} = kappa c_{j-1,k} - lambda c_{j,k-1}.
void SeriesFsr::Series::build(double m, double kappa, cplx lambda, int sigma, double tmax, int cap)
{
    std::vector<std::vector<cplx>> c(cap + 1);
    terms.clear();
    int quiet = 0;
    double vmax = 1.0;
    for (int s = 0; s <= cap; ++s) {
        c[s].assign(s + 1, cplx(0.0));
        double level = 0.0;
        for (int j = 0; j <= s; ++j) {
            const int k = s - j;
            const double p = j * m + 2.0 * k + sigma;
            cplx coef;
            if (s == 0) {
                coef = 1.0;
            } else {
                cplx num = 0.0;
                if (j > 0)
                    num += kappa * c[s - 1][j - 1];
                if (k > 0)
                    num -= lambda * c[s - 1][j];
                const double den = p * (p - 1.0);
                if (num == cplx(0.0)) {
                    coef = 0.0;
                } else if (std::abs(den) < 1e-13) {
                    throw UnsupportedError("series fundamental system degenerates at an exceptional point");
                } else {
                    coef = num / den;
                }
            }
            c[s][j] = coef;
            if (coef == cplx(0.0))
                continue;
            terms.emplace_back(p, coef);
            const double mag = std::abs(coef) * std::pow(tmax, p) * std::max(1.0, p / tmax);
            level = std::max(level, mag);
        }
        vmax = std::max(vmax, level);
        levels = s + 1;
        last = level;
        if (s >= 2 && level <= 1e-17 * vmax) {
            if (++quiet >= 2)
                return;
        } else {
            quiet = 0;
        }
    }
    throw AccuracyError("series did not converge at the matching radius; reduce r0", last / vmax);
}

void SeriesFsr::Series::eval(double t, cplx& v, cplx& d) const
{
    v = 0.0;
    d = 0.0;
    if (t == 0.0) {
        for (const auto& [p, c] : terms) {
            if (p == 0.0)
                v += c;
            else if (p == 1.0)
                d += c;
        }
        return;
    }
    const double lt = std::log(t);
    for (const auto& [p, c] : terms) {
        if (p == 0.0) {
            v += c;
            continue;
        }
        const double tp = std::exp(p * lt);
        v += c * tp;
        d += c * (p * tp / t);
    }
}

SeriesFsr::SeriesFsr(const SingularFamily& fam, cplx lambda, double xmax, bool need_u1)
    : u1_(need_u1), symmetric_(fam.symmetric())
{
    fam.validate();
    if (need_u1 && fam.exceptional_index() != 0)
        throw UnsupportedError("U_1 does not exist at an exceptional point");
    const double m = fam.m();
    for (int side = 0; side < 2; ++side) {
        if (side == 0 && symmetric_)
            continue;
        const double kap = fam.kappa(side == 0 ? -1 : 1);
        if (need_u1)
            s1_[side].build(m, kap, lambda, 0, xmax, fam.terms);
        s2_[side].build(m, kap, lambda, 1, xmax, fam.terms);
    }
    if (symmetric_) {
        s1_[0] = s1_[1];
        s2_[0] = s2_[1];
    }
}

FsrValues SeriesFsr::at(double x) const
{
    const int side = x < 0.0 ? 0 : 1;
    const double t = std::abs(x);
    FsrValues v;
    cplx a, da, b, db;
    if (u1_)
        s1_[side].eval(t, a, da);
    s2_[side].eval(t, b, db);
    if (side == 1) {
        v.u1 = a;
        v.du1 = da;
        v.u2 = b;
        v.du2 = db;
    } else {
        v.u1 = a;
        v.du1 = -da;
        v.u2 = -b;
        v.du2 = db;
    }
    v.levels = std::max(s1_[side].levels, s2_[side].levels);
    v.last_term = std::max(s1_[side].last, s2_[side].last);
    return v;
}

FsrValues fsr_series(const SingularFamily& fam, double x, cplx lambda)
{
    if (std::abs(x) > 1.0)
        throw DomainError("series evaluation needs |x| <= 1");
    const SeriesFsr s(fam, lambda, std::max(std::abs(x), 1e-3), fam.exceptional_index() == 0);
    return s.at(x);
}

double fsr_weak_residual(const SingularFamily& fam, cplx lambda, int side)
{
    const double a = 0.5 * fam.r0 * side, b = fam.r0 * side;
    const double lo = std::min(a, b), hi = std::max(a, b), L = hi - lo;
    const SeriesFsr s(fam, lambda, fam.r0);
    const double kap = fam.kappa(side);
    double worst = 0.0;
    for (int which = 0; which < 2; ++which)
        for (int k = 1; k <= 4; ++k) {
            const double w = k * pi / L;
            const auto integrand = [&](double x) {
                const FsrValues v = s.at(x);
                const cplx y = which == 0 ? v.u1 : v.u2;
                const cplx dy = which == 0 ? v.du1 : v.du2;
                const double ph = std::sin(w * (x - lo)), dph = w * std::cos(w * (x - lo));
                return dy * dph + (kap * std::pow(std::abs(x), fam.alpha) - lambda) * y * ph;
            };
            cplx acc = 0.0;
            const int cells = 16;
            for (int i = 0; i < cells; ++i)
                acc += quad::gauss<20>(integrand, lo + L * i / cells, lo + L * (i + 1) / cells);
            worst = std::max(worst, std::abs(acc));
        }
    return worst;
}

// ---------------------------------------------------------------------------
// Riccati series

namespace {

std::vector<double> riccati_raw(double alpha, int N, double kappa, int sign)
{
    std::vector<double> a(N + 1, 0.0);
    for (int n = 1; n <= N; ++n) {
        const double e = RiccatiSeries::exponent(alpha, n);
        if (std::abs(e) < 1e-12)
            throw UnsupportedError("exceptional alpha: the Riccati series is undefined");
        if (n == 1) {
            a[1] = kappa / e;
            continue;
        }
        double s = 0.0;
        for (int k = 1; k < n; ++k)
            s += a[k] * a[n - k];
        a[n] = sign * s / e;
    }
    return a;
}

// Coefficients rho_n of x^{e_n - 1}, n = 1..2N, in -w' + w^2 + kappa x^alpha.
std::vector<double> residual_coeffs(double alpha, double kappa, const std::vector<double>& a)
{
    const int N = static_cast<int>(a.size()) - 1;
    std::vector<double> rho(2 * N + 1, 0.0);
    rho[1] += kappa;
    for (int n = 1; n <= N; ++n)
        rho[n] -= a[n] * RiccatiSeries::exponent(alpha, n);
    for (int j = 1; j <= N; ++j)
        for (int k = 1; k <= N; ++k)
            rho[j + k] += a[j] * a[k];
    // orders that cancel analytically leave rounding noise only
    for (int n = 1; n <= 2 * N; ++n) {
        double scale = n == 1 ? std::abs(kappa) : 0.0;
        if (n <= N)
            scale = std::max(scale, std::abs(a[n] * RiccatiSeries::exponent(alpha, n)));
        for (int j = 1; j < n && j <= N; ++j)
            if (n - j <= N)
                scale = std::max(scale, std::abs(a[j] * a[n - j]));
        if (std::abs(rho[n]) <= 1e-12 * scale)
            rho[n] = 0.0;
    }
    return rho;
}

double power_sum(double alpha, const std::vector<double>& rho, double x)
{
    double s = 0.0;
    for (size_t n = 1; n < rho.size(); ++n)
        if (rho[n] != 0.0)
            s += rho[n] * std::pow(x, RiccatiSeries::exponent(alpha, static_cast<int>(n)) - 1.0);
    return s;
}

// Least-squares slope of log|r(x)| against log x for x in [1e-6, 1e-4].
double measured_exponent(double alpha, const std::vector<double>& rho)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int i = 0; i <= 8; ++i) {
        const double x = std::pow(10.0, -6.0 + 0.25 * i);
        const double r = std::abs(power_sum(alpha, rho, x));
        if (!(r > 0.0))
            continue;
        const double lx = std::log(x), ly = std::log(r);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++cnt;
    }
    if (cnt < 3)
        return INFINITY; // residual vanishes identically
    return (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
}

} // namespace

int riccati_min_terms(double alpha)
{
    if (!(alpha > -2.0))
        throw DomainError("alpha must exceed -2");
    int N = 1;
    while (RiccatiSeries::exponent(alpha, N) <= 0.0)
        ++N;
    return N;
}

double RiccatiSeries::w(double x) const
{
    const double t = std::abs(x), sg = x < 0 ? -1.0 : 1.0;
    double s = 0.0;
    for (int k = 1; k <= N; ++k)
        s += a[k] * std::pow(t, exponent(alpha, k));
    return sg * s;
}

double RiccatiSeries::dw(double x) const
{
    const double t = std::abs(x);
    double s = 0.0;
    for (int k = 1; k <= N; ++k) {
        const double e = exponent(alpha, k);
        s += a[k] * e * std::pow(t, e - 1.0);
    }
    return s;
}

double RiccatiSeries::residual(double x) const
{
    return power_sum(alpha, residual_coeffs(alpha, kappa, a), std::abs(x));
}

RiccatiSeries riccati_coeffs(double alpha, int N, double kappa)
{
    if (!(alpha > -2.0))
        throw DomainError("alpha must exceed -2");
    const int Nmin = riccati_min_terms(alpha);
    if (N == 0)
        N = Nmin;
    if (N < 1)
        throw DomainError("Riccati truncation needs N >= 1");
    RiccatiSeries r;
    r.alpha = alpha;
    r.kappa = kappa;
    r.N = N;

    // The sign is only visible from a_2 on, so the test always uses at least three terms.
    const int Nt = std::max(N, 3);
    double ex[2];
    for (int i = 0; i < 2; ++i) {
        const int sign = i == 0 ? +1 : -1;
        ex[i] = measured_exponent(alpha, residual_coeffs(alpha, kappa, riccati_raw(alpha, Nt, kappa, sign)));
    }
    r.sign = ex[0] >= ex[1] ? +1 : -1;
    r.accepted_exponent = r.sign > 0 ? ex[0] : ex[1];
    r.rejected_exponent = r.sign > 0 ? ex[1] : ex[0];
    r.a = riccati_raw(alpha, N, kappa, r.sign);
    r.residual_exponent = measured_exponent(alpha, residual_coeffs(alpha, kappa, r.a));
    r.convention = std::string("a_n = ") + (r.sign > 0 ? "+" : "-") +
                   "(1/(n alpha + 2n - 1)) sum_{k<n} a_k a_{n-k}";
    return r;
}

// ---------------------------------------------------------------------------
// Propagation sources

namespace {

// A = [[a, 1], [c - lambda, -a]] with a, c finite power sums on each side of 0.
struct PowerSource {
    GenPoly a[2], c[2]; // [left, right]
    std::vector<double> mesh{0.0};
    std::vector<double> sing;

    template <typename Scalar>
    CellCoeffs<Scalar> cell(double x0, double x1) const
    {
        const double mid = 0.5 * (x0 + x1);
        const int s = mid < 0.0 ? 0 : 1;
        CellCoeffs<Scalar> cc;
        cc.a0 = a[s].integral(x0, x1, 0);
        cc.a1 = a[s].integral(x0, x1, 1, mid);
        cc.c0 = c[s].integral(x0, x1, 0);
        cc.c1 = c[s].integral(x0, x1, 1, mid);
        return cc;
    }
    const std::vector<double>& mesh_points() const { return mesh; }
    const std::vector<double>& singular_points() const { return sing; }
};

template <typename Scalar>
struct TypedSource {
    const PowerSource& p;
    CellCoeffs<Scalar> cell(double x0, double x1) const { return p.template cell<Scalar>(x0, x1); }
    const std::vector<double>& mesh_points() const { return p.mesh_points(); }
    const std::vector<double>& singular_points() const { return p.singular_points(); }
};

PowerSource classical_source(const SingularFamily& fam)
{
    PowerSource s;
    for (int side = 0; side < 2; ++side)
        s.c[side] = GenPoly::power(0.0, fam.kappa(side == 0 ? -1 : 1), fam.alpha);
    if (fam.alpha < 0.0)
        s.sing = {0.0};
    return s;
}

// Gauge W with W' + W^2 = q up to the integrable remainder R = q - W' - W^2.
PowerSource riccati_source(const SingularFamily& fam)
{
    PowerSource s;
    s.sing = {0.0};
    for (int side = 0; side < 2; ++side) {
        const double kq = fam.kappa(side == 0 ? -1 : 1);
        // -w' + w^2 - kq|x|^alpha = 0 for w = -W on the right and w = W(-t) on the left
        const RiccatiSeries r = riccati_coeffs(fam.alpha, 0, -kq);
        const double flip = side == 1 ? -1.0 : 1.0;
        GenPoly a, c;
        for (int k = 1; k <= r.N; ++k)
            a.terms.push_back({flip * r.a[k], RiccatiSeries::exponent(fam.alpha, k), false});
        const auto rho = residual_coeffs(fam.alpha, -kq, r.a);
        for (size_t n = 1; n < rho.size(); ++n)
            if (rho[n] != 0.0)
                c.terms.push_back({-rho[n], RiccatiSeries::exponent(fam.alpha, static_cast<int>(n)) - 1.0, false});
        s.a[side] = a;
        s.c[side] = c;
    }
    return s;
}

Primitive quasi_primitive(const SingularFamily& fam)
{
    if (!(fam.alpha > -1.5))
        throw DomainError("the quasi-derivative construction needs alpha > -3/2");
    if (std::abs(fam.alpha + 1.0) < 1e-12)
        throw UnsupportedError("alpha = -1 has a logarithmic primitive");
    const double e = fam.alpha + 1.0;
    const GenPoly left = GenPoly::power(0.0, -fam.kappa(-1) / e, e);
    const GenPoly right = GenPoly::power(0.0, fam.kappa(1) / e, e);
    return Primitive::piecewise(-1.0, 1.0, {0.0}, {left, right}, SmoothnessClass::l2());
}

// Sign-change counter that ignores exact zeros.
struct ZeroCounter {
    int zeros = 0;
    int last = 0;
    void push(double y)
    {
        const int s = (y > 0) - (y < 0);
        if (s == 0)
            return;
        if (last != 0 && s != last)
            ++zeros;
        last = s;
    }
};

double sample_step(double lambda, double qmax)
{
    return std::min(0.02, 0.5 / std::sqrt(std::abs(lambda) + qmax + 1.0));
}

// Uniform points on [lo, hi] (both included) with spacing at most h.
std::vector<double> uniform(double lo, double hi, double h)
{
    const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / h)));
    std::vector<double> g(n + 1);
    for (int i = 0; i <= n; ++i)
        g[i] = i == n ? hi : lo + (hi - lo) * i / n;
    return g;
}

// Points in (0, r] graded geometrically towards 0.
std::vector<double> graded_towards_zero(double r, double h)
{
    std::vector<double> g = uniform(0.0, r, h);
    g.erase(g.begin());
    for (double t = r * 0.9; t > 1e-10; t *= 0.9)
        g.push_back(t);
    std::sort(g.begin(), g.end());
    return g;
}

template <typename Source>
Vec2<double> propagate_count(const MagnusPropagator<double, Source>& prop, const std::vector<double>& pts,
                             Vec2<double> state, ZeroCounter& zc)
{
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        state = prop.transfer(pts[i], pts[i + 1]) * state;
        zc.push(state[0]); // the end point counts, so a zero entering at x = 1 is seen at once
    }
    return state;
}

// Matching radius for a shot: for strongly negative lambda the Wronskian matching cancels
// like exp(2 sqrt(-lambda) r0), so the radius shrinks with the decay length.
double shot_radius(double r0, double lambda)
{
    return lambda < 0.0 ? std::min(r0, 2.0 / std::sqrt(-lambda)) : r0;
}

Shot series_shot(const SingularFamily& fam, double lambda, double tol)
{
    const double r0 = shot_radius(fam.r0, lambda);
    const SeriesFsr fsr(fam, lambda, r0);
    const PowerSource src = classical_source(fam);
    const TypedSource<double> ts{src};
    const MagnusPropagator<double, TypedSource<double>> prop(ts, lambda, tol);
    const double h = sample_step(lambda, fam.c * std::pow(r0, fam.alpha));

    ZeroCounter zc;
    // [-1, -r0]
    Vec2<double> st(0.0, 1.0);
    st = propagate_count(prop, uniform(-1.0, -r0, h), st, zc);
    zc.push(st[0]);
    // inside: y = A U_1 + B U_2 matched at -r0 (Wronskian 1)
    const FsrValues vl = fsr.at(-r0);
    const double A = st[0] * vl.du2.real() - st[1] * vl.u2.real();
    const double B = vl.u1.real() * st[1] - vl.du1.real() * st[0];
    const std::vector<double> inner = graded_towards_zero(r0, std::min(h, r0 / 32));
    for (auto it = inner.rbegin(); it != inner.rend(); ++it) {
        if (*it >= r0)
            continue;
        const FsrValues v = fsr.at(-*it);
        zc.push(A * v.u1.real() + B * v.u2.real());
    }
    for (double t : inner) {
        if (t >= r0)
            continue;
        const FsrValues v = fsr.at(t);
        zc.push(A * v.u1.real() + B * v.u2.real());
    }
    const FsrValues vr = fsr.at(r0);
    st = Vec2<double>(A * vr.u1.real() + B * vr.u2.real(), A * vr.du1.real() + B * vr.du2.real());
    zc.push(st[0]);
    st = propagate_count(prop, uniform(r0, 1.0, h), st, zc);
    if (!std::isfinite(st[0]))
        throw InstabilityError("shot overflowed", 1.0);
    return {st[0], zc.zeros};
}

template <typename Source>
Shot through_zero_shot(const Source& src, double lambda, double qscale, double tol)
{
    const MagnusPropagator<double, Source> prop(src, lambda, tol);
    const double h = sample_step(lambda, qscale);
    std::vector<double> right = graded_towards_zero(1.0, h);
    std::vector<double> pts;
    for (auto it = right.rbegin(); it != right.rend(); ++it)
        pts.push_back(-*it);
    pts.push_back(0.0);
    pts.insert(pts.end(), right.begin(), right.end());
    ZeroCounter zc;
    const Vec2<double> st = propagate_count(prop, pts, Vec2<double>(0.0, 1.0), zc);
    return {st[0], zc.zeros};
}

// Eigenvalues as the k-th sign change of the shot, isolated by zero counting.
std::vector<double> ladder(const std::function<Shot(double)>& shot, int k_max,
                           std::vector<double>* widths)
{
    if (k_max < 1)
        throw DomainError("k_max must be positive");
    double lo = -1.0;
    while (shot(lo).zeros > 0) {
        lo = 2.0 * lo - 1.0;
        if (lo < -1e9)
            throw SearchError("no lower bound for the spectrum");
    }
    double hi = std::pow((k_max + 1) * pi / 2.0, 2) + 10.0;
    while (shot(hi).zeros < k_max) {
        hi = 2.0 * hi + 10.0;
        if (hi > 1e9)
            throw SearchError("no upper bound for the requested eigenvalues");
    }
    std::vector<double> out;
    double from = lo;
    for (int k = 1; k <= k_max; ++k) {
        // isolate (l, r] with zeros(l) = k-1 and zeros(r) = k
        double l = from, r = hi;
        int it = 0;
        Shot sl = shot(l), sr = shot(r);
        while (!(sl.zeros == k - 1 && sr.zeros == k)) {
            const double mid = 0.5 * (l + r);
            const Shot sm = shot(mid);
            if (sm.zeros >= k) {
                r = mid;
                sr = sm;
            } else {
                l = mid;
                sl = sm;
            }
            if (++it > 200)
                throw SearchError("eigenvalue " + std::to_string(k) + " could not be isolated");
        }
        double width = 0.0;
        if (sl.end == 0.0) {
            out.push_back(l);
        } else if (sr.end == 0.0) {
            out.push_back(r);
        } else if ((sl.end > 0) == (sr.end > 0)) {
            throw SearchError("no sign change of phi(1) around eigenvalue " + std::to_string(k));
        } else {
            std::uintmax_t iters = 200;
            const auto f = [&](double x) { return shot(x).end; };
            const auto res = boost::math::tools::toms748_solve(
                f, l, r, sl.end, sr.end,
                [](double a, double b) { return std::abs(b - a) <= 4e-15 * std::max(1.0, std::abs(a)); },
                iters);
            out.push_back(0.5 * (res.first + res.second));
            width = res.second - res.first;
        }
        if (widths)
            widths->push_back(width);
        from = out.back();
    }
    return out;
}

} // namespace

Shot dirichlet_shot(const SingularFamily& fam, double lambda, SingularMethod method, double prop_tol)
{
    fam.validate();
    switch (method) {
    case SingularMethod::Series:
        return series_shot(fam, lambda, prop_tol);
    case SingularMethod::Riccati: {
        const PowerSource src = riccati_source(fam);
        const TypedSource<double> ts{src};
        return through_zero_shot(ts, lambda, fam.c, prop_tol);
    }
    case SingularMethod::Quasi: {
        const QuasiSource<double> src(quasi_primitive(fam));
        return through_zero_shot(src, lambda, fam.c, prop_tol);
    }
    }
    throw DomainError("unknown method");
}

std::vector<double> dirichlet_eigs_alpha(const SingularFamily& fam, int k_max, SingularMethod method,
                                         double prop_tol, std::vector<double>* widths)
{
    fam.validate();
    SingularFamily f = fam;
    for (int attempt = 0;; ++attempt) {
        try {
            if (widths)
                widths->clear();
            // the shot objects are rebuilt per call; the series tables are cheap
            return ladder([&](double l) { return dirichlet_shot(f, l, method, prop_tol); }, k_max,
                          widths);
        } catch (const AccuracyError&) {
            if (method != SingularMethod::Series || attempt >= 4)
                throw;
            f.r0 *= 0.5; // smaller matching radius
        }
    }
}

std::vector<double> half_dirichlet_eigs(const SingularFamily& fam, int side, int k_max, double prop_tol)
{
    SingularFamily f = fam;
    f.limit_mode = true;
    f.validate();
    if (side != 1 && side != -1)
        throw DomainError("side must be +1 or -1");
    const PowerSource src = classical_source(f);
    const TypedSource<double> ts{src};
    const auto shot = [&](double lambda) {
        const double r0 = shot_radius(f.r0, lambda);
        const SeriesFsr fsr(f, lambda, r0, false);
        const MagnusPropagator<double, TypedSource<double>> prop(ts, lambda, prop_tol);
        const double h = sample_step(lambda, f.c * std::pow(r0, f.alpha));
        ZeroCounter zc;
        for (double t : graded_towards_zero(r0, std::min(h, r0 / 32)))
            if (t < r0)
                zc.push(fsr.at(side * t).u2.real() * side);
        const FsrValues v = fsr.at(side * r0);
        // orient so that y > 0 just inside the interval
        Vec2<double> st(side * v.u2.real(), side * v.du2.real());
        zc.push(st[0]);
        std::vector<double> pts = uniform(r0, 1.0, h);
        if (side < 0)
            for (double& x : pts)
                x = -x;
        st = propagate_count(prop, pts, st, zc);
        return Shot{st[0], zc.zeros};
    };
    return ladder(shot, k_max, nullptr);
}

// ---------------------------------------------------------------------------
// Resolvents

std::vector<double> singular_grid(double r0, int n)
{
    if (n < 64)
        throw DomainError("grid needs at least 64 intervals");
    std::vector<double> g;
    for (int i = 0; i <= n; ++i)
        g.push_back(-1.0 + 2.0 * i / n);
    for (double t = r0; t > 1e-9; t *= 0.8) {
        g.push_back(t);
        g.push_back(-t);
    }
    g.push_back(0.0);
    std::sort(g.begin(), g.end());
    std::vector<double> out;
    for (double x : g)
        if (out.empty() || x - out.back() > 1e-14)
            out.push_back(x);
        else if (x == 0.0)
            out.back() = 0.0;
    out.front() = -1.0;
    out.back() = 1.0;
    return out;
}

namespace {

struct FsrSamples {
    std::vector<double> grid;
    VecX<cplx> u1, u2;
    size_t zero = 0; // index of x = 0
};

FsrSamples sample_fsr(const SingularFamily& fam, cplx lambda, const std::vector<double>& grid,
                      bool need_u1, double tol = 1e-12)
{
    const double r0 = fam.r0;
    const SeriesFsr fsr(fam, lambda, r0, need_u1);
    const PowerSource src = classical_source(fam);
    const TypedSource<cplx> ts{src};
    const MagnusPropagator<cplx, TypedSource<cplx>> prop(ts, lambda, tol);
    FsrSamples s;
    s.grid = grid;
    const size_t n = grid.size();
    s.u1 = VecX<cplx>::Zero(n);
    s.u2 = VecX<cplx>::Zero(n);
    size_t in_lo = n, in_hi = 0;
    for (size_t i = 0; i < n; ++i) {
        if (grid[i] == 0.0)
            s.zero = i;
        if (std::abs(grid[i]) <= r0 * (1 + 1e-14)) {
            const FsrValues v = fsr.at(grid[i]);
            s.u1[i] = v.u1;
            s.u2[i] = v.u2;
            in_lo = std::min(in_lo, i);
            in_hi = std::max(in_hi, i);
        }
    }
    if (grid[s.zero] != 0.0 || in_lo > in_hi)
        throw DomainError("grid must contain 0 and points inside the matching radius");
    // outward propagation of (U, U') from the last inner points
    for (int dir = -1; dir <= 1; dir += 2) {
        const size_t start = dir < 0 ? in_lo : in_hi;
        const FsrValues v = fsr.at(grid[start]);
        Vec2<cplx> a(v.u1, v.du1), b(v.u2, v.du2);
        for (size_t i = start; dir < 0 ? i > 0 : i + 1 < n;) {
            const size_t j = dir < 0 ? i - 1 : i + 1;
            const Mat2<cplx> T = prop.transfer(grid[i], grid[j]);
            a = T * a;
            b = T * b;
            s.u1[j] = a[0];
            s.u2[j] = b[0];
            i = j;
        }
    }
    return s;
}

// cumulative trapezoid of g from the zero index outwards (signed)
VecX<cplx> cumulative_from_zero(const std::vector<double>& x, const VecX<cplx>& g, size_t z)
{
    VecX<cplx> out = VecX<cplx>::Zero(g.size());
    for (size_t i = z + 1; i < x.size(); ++i)
        out[i] = out[i - 1] + 0.5 * (x[i] - x[i - 1]) * (g[i] + g[i - 1]);
    for (size_t i = z; i-- > 0;)
        out[i] = out[i + 1] - 0.5 * (x[i + 1] - x[i]) * (g[i] + g[i + 1]);
    return out;
}

double l2(const std::vector<double>& x, const VecX<cplx>& y)
{
    double acc = 0.0;
    for (size_t i = 1; i < x.size(); ++i)
        acc += 0.5 * (x[i] - x[i - 1]) * (std::norm(y[i]) + std::norm(y[i - 1]));
    return std::sqrt(acc);
}

// Dirichlet solution of -y'' + (q - lambda) y = g given the fundamental system at lambda.
SingularResolvent dirichlet_solve(const FsrSamples& s, const VecX<cplx>& g)
{
    const auto& x = s.grid;
    const VecX<cplx> P1 = cumulative_from_zero(x, s.u1.cwiseProduct(g), s.zero);
    const VecX<cplx> P2 = cumulative_from_zero(x, s.u2.cwiseProduct(g), s.zero);
    const VecX<cplx> z = s.u1.cwiseProduct(P2) - s.u2.cwiseProduct(P1);
    const size_t e = x.size() - 1;
    Mat2<cplx> M;
    M << s.u1[0], s.u2[0], s.u1[e], s.u2[e];
    const cplx det = M.determinant();
    const double scale = M.cwiseAbs2().maxCoeff();
    if (std::abs(det) <= 1e-12 * scale)
        throw NearSpectrumError("lambda is an eigenvalue of the singular problem");
    const Vec2<cplx> ab = M.inverse() * Vec2<cplx>(-z[0], -z[e]);
    SingularResolvent r;
    r.grid = x;
    r.A = ab[0];
    r.B = ab[1];
    r.y = ab[0] * s.u1 + ab[1] * s.u2 + z;
    return r;
}

} // namespace

double picard_constant(const SingularFamily& fam, int grid_n)
{
    fam.validate();
    const auto grid = singular_grid(fam.r0, grid_n);
    const FsrSamples s = sample_fsr(fam, 0.0, grid, true);
    const size_t e = grid.size() - 1;
    // phi_- vanishes at -1, phi_+ at 1; both combinations of U_1, U_2
    const VecX<cplx> phim = s.u2[0] * s.u1 - s.u1[0] * s.u2;
    const VecX<cplx> phip = s.u2[e] * s.u1 - s.u1[e] * s.u2;
    const double W = std::abs(s.u1[e] * s.u2[0] - s.u2[e] * s.u1[0]);
    if (!(W > 0.0))
        throw NearSpectrumError("0 is an eigenvalue; the Picard scheme needs L invertible");
    // ||G||^2 = 2 int |phi_+(x)|^2 int_{-1}^x |phi_-(t)|^2 dt dx / W^2
    double inner = 0.0, acc = 0.0;
    for (size_t i = 1; i < grid.size(); ++i) {
        const double h = grid[i] - grid[i - 1];
        const double prev = inner;
        inner += 0.5 * h * (std::norm(phim[i]) + std::norm(phim[i - 1]));
        acc += 0.5 * h * (std::norm(phip[i]) * inner + std::norm(phip[i - 1]) * prev);
    }
    return std::sqrt(2.0 * acc) / W;
}

SingularResolvent resolvent_singular(const SingularFamily& fam, cplx lambda,
                                     const std::function<cplx(double)>& f, ResolventMethod method,
                                     int grid_n)
{
    fam.validate();
    const auto grid = singular_grid(fam.r0, grid_n);
    const VecX<cplx> fs = sample<cplx>(f, grid);
    const double C1 = (method == ResolventMethod::Direct && lambda != cplx(0.0))
                          ? 0.0
                          : picard_constant(fam, grid_n);
    const double contraction = C1 * std::abs(lambda);
    if (method == ResolventMethod::Picard && contraction >= 0.5)
        throw UnsupportedError("Picard iteration does not contract (C1 |lambda| = " +
                               std::to_string(contraction) + "); use the direct path");
    const bool picard = method == ResolventMethod::Picard ||
                        (method == ResolventMethod::Auto && contraction < 0.5);
    if (!picard) {
        const FsrSamples s = sample_fsr(fam, lambda, grid, true);
        SingularResolvent r = dirichlet_solve(s, fs);
        r.method = "direct";
        r.contraction = contraction;
        return r;
    }
    const FsrSamples s0 = sample_fsr(fam, 0.0, grid, true);
    SingularResolvent r = dirichlet_solve(s0, fs);
    r.method = "picard";
    r.contraction = contraction;
    if (lambda == cplx(0.0))
        return r;
    for (int k = 1; k <= 500; ++k) {
        SingularResolvent next = dirichlet_solve(s0, VecX<cplx>(lambda * r.y + fs));
        const double inc = l2(grid, VecX<cplx>(next.y - r.y));
        next.method = "picard";
        next.contraction = contraction;
        next.iterations = k;
        next.increment = inc;
        r = std::move(next);
        if (inc < 1e-10)
            return r;
    }
    throw AccuracyError("Picard iteration did not reach an L2 increment of 1e-10", r.increment);
}

SingularResolvent direct_sum_resolvent(const SingularFamily& fam, cplx lambda,
                                       const std::function<cplx(double)>& f, int grid_n)
{
    SingularFamily fl = fam;
    fl.limit_mode = true;
    fl.validate();
    const auto grid = singular_grid(fl.r0, grid_n);
    const VecX<cplx> fs = sample<cplx>(f, grid);
    const FsrSamples s = sample_fsr(fl, lambda, grid, false);
    const size_t z = s.zero, e = grid.size() - 1;
    // y = U_2 v with (U_2^2 v')' = -U_2 f, v bounded at 0 and v(+-1) = 0
    const VecX<cplx> P2 = cumulative_from_zero(grid, s.u2.cwiseProduct(fs), z);
    VecX<cplx> h(grid.size());
    for (size_t i = 0; i < grid.size(); ++i)
        h[i] = i == z ? 0.5 * fs[z] : P2[i] / (s.u2[i] * s.u2[i]);
    VecX<cplx> v = VecX<cplx>::Zero(grid.size());
    for (size_t i = e; i-- > z;) // v(x) = int_x^1 h
        v[i] = v[i + 1] + 0.5 * (grid[i + 1] - grid[i]) * (h[i] + h[i + 1]);
    VecX<cplx> vl = VecX<cplx>::Zero(grid.size());
    for (size_t i = 1; i <= z; ++i) // v(x) = -int_{-1}^x h
        vl[i] = vl[i - 1] - 0.5 * (grid[i] - grid[i - 1]) * (h[i] + h[i - 1]);
    SingularResolvent r;
    r.grid = grid;
    r.method = "direct-sum";
    r.y = VecX<cplx>::Zero(grid.size());
    for (size_t i = 0; i < grid.size(); ++i)
        r.y[i] = s.u2[i] * (i < z ? vl[i] : v[i]);
    return r;
}

// ---------------------------------------------------------------------------
// Scans

AlphaScan alpha_scan(const SingularFamily& base, std::vector<double> alphas, int k_max, int jobs)
{
    if (alphas.empty())
        throw DomainError("empty alpha grid");
    std::sort(alphas.begin(), alphas.end());
    for (double a : alphas) {
        SingularFamily f = base;
        f.alpha = a;
        f.validate();
        if (!base.limit_mode)
            for (int n = 1; n <= 1000; ++n)
                if (std::abs(a - exceptional_alpha(n)) < 1e-3)
                    throw DomainError("alpha grid passes within 1e-3 of an exceptional point");
    }
    const auto eval = [&](const std::vector<double>& as, std::vector<double>& achieved) {
        std::vector<std::vector<double>> out(as.size());
        achieved.assign(as.size(), 0.0);
        std::atomic<size_t> next{0};
        std::exception_ptr err;
        std::mutex mu;
        const auto work = [&] {
            for (size_t i; (i = next++) < as.size();) {
                try {
                    SingularFamily f = base;
                    f.alpha = as[i];
                    std::vector<double> w;
                    out[i] = dirichlet_eigs_alpha(f, k_max, SingularMethod::Series, 1e-12, &w);
                    achieved[i] = *std::max_element(w.begin(), w.end());
                } catch (...) {
                    std::lock_guard<std::mutex> lk(mu);
                    if (!err)
                        err = std::current_exception();
                }
            }
        };
        const int nt = std::max(1, std::min<int>(jobs, static_cast<int>(as.size())));
        std::vector<std::thread> pool;
        for (int t = 1; t < nt; ++t)
            pool.emplace_back(work);
        work();
        for (auto& t : pool)
            t.join();
        if (err)
            std::rethrow_exception(err);
        return out;
    };

    AlphaScan scan;
    scan.alpha = alphas;
    scan.lambda = eval(alphas, scan.bracket);
    const auto rel_jump = [&](size_t i) {
        double worst = 0.0;
        for (int k = 0; k < k_max; ++k) {
            const double a = scan.lambda[i][k], b = scan.lambda[i + 1][k];
            worst = std::max(worst, std::abs(b - a) / std::max(1.0, std::abs(a)));
        }
        return worst;
    };
    for (int round = 0; round < 8; ++round) {
        std::vector<double> mids;
        for (size_t i = 0; i + 1 < scan.alpha.size(); ++i)
            if (rel_jump(i) > 0.05 && scan.alpha[i + 1] - scan.alpha[i] > 1e-4) {
                const double mid = 0.5 * (scan.alpha[i] + scan.alpha[i + 1]);
                bool near = false;
                if (!base.limit_mode)
                    for (int n = 1; n <= 1000; ++n)
                        near = near || std::abs(mid - exceptional_alpha(n)) < 1e-3;
                if (!near)
                    mids.push_back(mid);
            }
        if (mids.empty())
            break;
        std::vector<double> widths;
        const auto vals = eval(mids, widths);
        for (size_t j = 0; j < mids.size(); ++j) {
            const auto it = std::upper_bound(scan.alpha.begin(), scan.alpha.end(), mids[j]);
            const size_t pos = static_cast<size_t>(it - scan.alpha.begin());
            scan.alpha.insert(it, mids[j]);
            scan.lambda.insert(scan.lambda.begin() + static_cast<long>(pos), vals[j]);
            scan.bracket.insert(scan.bracket.begin() + static_cast<long>(pos), widths[j]);
        }
        scan.refinements += static_cast<int>(mids.size());
    }
    for (size_t i = 0; i + 1 < scan.alpha.size(); ++i)
        scan.max_rel_jump = std::max(scan.max_rel_jump, rel_jump(i));
    return scan;
}

ExceptionalLadder exceptional_limit(const SingularFamily& base, int n, const std::vector<double>& deltas,
                                    int k_max, cplx lambda, const std::function<cplx(double)>& f)
{
    if (n < 1)
        throw DomainError("exceptional index starts at 1");
    if (deltas.empty())
        throw DomainError("empty delta ladder");
    const std::function<cplx(double)> rhs = f ? f : [](double x) { return cplx(1.0 + x); };
    ExceptionalLadder lad;
    lad.n = n;
    lad.alpha_n = exceptional_alpha(n);

    SingularFamily lim = base;
    lim.alpha = lad.alpha_n;
    lim.limit_mode = true;
    std::vector<double> ds = half_dirichlet_eigs(lim, 1, k_max);
    const auto left = half_dirichlet_eigs(lim, -1, k_max);
    ds.insert(ds.end(), left.begin(), left.end());
    std::sort(ds.begin(), ds.end());
    ds.resize(k_max);
    lad.direct_sum = ds;
    const SingularResolvent rsum = direct_sum_resolvent(lim, lambda, rhs);

    for (double d : deltas) {
        if (!(d > 0.0))
            throw DomainError("ladder offsets must be positive");
        SingularFamily fam = base;
        fam.alpha = lad.alpha_n + d;
        fam.limit_mode = false;
        ExceptionalRow row;
        row.delta = d;
        row.alpha = fam.alpha;
        std::vector<double> w;
        row.lambda = dirichlet_eigs_alpha(fam, k_max + 2, SingularMethod::Series, 1e-12, &w);
        row.bracket = *std::max_element(w.begin(), w.end());
        for (int k = 0; k < k_max; ++k)
            row.eig_distance = std::max(row.eig_distance, std::abs(row.lambda[k] - ds[k]));
        row.aligned_distance = INFINITY;
        for (int e = 0; e <= 2; ++e) {
            double d = 0.0;
            for (int k = 0; k < k_max; ++k)
                d = std::max(d, std::abs(row.lambda[k + e] - ds[k]));
            if (d < row.aligned_distance) {
                row.aligned_distance = d;
                row.escaped = e;
            }
        }
        const SingularResolvent r = resolvent_singular(fam, lambda, rhs, ResolventMethod::Direct);
        row.resolvent_distance = l2(r.grid, VecX<cplx>(r.y - rsum.y));
        lad.rows.push_back(row);
    }
    lad.decreasing = lad.aligned_decreasing = lad.resolvent_decreasing = true;
    for (size_t i = 1; i < lad.rows.size(); ++i) {
        const auto &a = lad.rows[i - 1], &b = lad.rows[i];
        lad.decreasing = lad.decreasing && b.eig_distance < a.eig_distance;
        lad.aligned_decreasing = lad.aligned_decreasing && b.aligned_distance < a.aligned_distance;
        lad.resolvent_decreasing = lad.resolvent_decreasing && b.resolvent_distance < a.resolvent_distance;
    }
    lad.floor = INFINITY;
    for (const auto& r : lad.rows)
        lad.floor = std::min(lad.floor, r.aligned_distance);
    lad.stalled = lad.rows.back().aligned_distance > 0.5 * lad.rows.front().aligned_distance;
    return lad;
}

} // namespace qsl
