// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "qsl/approximation.hpp"
#include "qsl/asymptotics.hpp"
#include "qsl/boundary.hpp"
#include "qsl/pruefer.hpp"
#include "qsl/singular.hpp"
#include "qsl/spectrum.hpp"

using namespace qsl;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool pass, const std::string& detail)
{
    std::printf("criterion %d: %s %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass)
        ++failures;
}

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

SpectrumOptions values_only()
{
    SpectrumOptions o;
    o.eigenfunctions = false;
    return o;
}

Primitive step_at(double x0)
{
    return Primitive::piecewise(0.0, pi, {x0}, {GenPoly::constant(0.0), GenPoly::constant(1.0)});
}

// Root near n of k sin(k pi) + sin^2(k pi / 2) = 0, the matching equation for a unit delta at pi/2.
double delta_matching_root(int n)
{
    if (n % 2 == 0)
        return double(n) * n;
    const auto F = [](double k) { return k * std::sin(k * pi) + std::pow(std::sin(k * pi / 2), 2); };
    double a = n - 0.49, fa = F(a), b = a;
    for (double k = a + 1e-3; k <= n + 0.49; k += 1e-3) {
        if (F(k) * fa < 0) {
            b = k;
            break;
        }
        a = k;
        fa = F(k);
    }
    for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (a + b);
        (F(m) * F(a) <= 0 ? b : a) = m;
    }
    return std::pow(0.5 * (a + b), 2);
}

// Random real primitive: jumps, polynomial pieces or a short cosine series.
Primitive random_primitive(std::mt19937_64& rng, int kind)
{
    std::uniform_real_distribution<double> U(-1.5, 1.5), X(0.3, pi - 0.3);
    switch (kind % 3) {
    case 0: {
        std::vector<double> pos{X(rng), X(rng)};
        std::sort(pos.begin(), pos.end());
        if (pos[1] - pos[0] < 0.1)
            pos[1] = pos[0] + 0.1;
        return from_delta_sum(pos, {U(rng), U(rng)});
    }
    case 1: {
        const double c = X(rng);
        return Primitive::piecewise(0.0, pi, {c},
                                    {GenPoly::polynomial(0.0, {U(rng), U(rng), U(rng)}),
                                     GenPoly::polynomial(c, {U(rng), U(rng)})});
    }
    default:
        return Primitive::cosine_series({U(rng), U(rng), U(rng), U(rng)});
    }
}

void free_ladder()
{
    const auto t0 = Clock::now();
    const auto r = dirichlet_eigenvalues(Primitive(), 1, 20, values_only());
    const double t = seconds_since(t0);
    double e = 0.0;
    bool ok = r.size() == 20;
    for (const auto& x : r) {
        e = std::max(e, std::abs(x.lambda - double(x.index * x.index)) / (x.index * x.index));
        ok = ok && x.ok;
    }
    report(1, ok && e < 1e-8 && t < 5.0, fmt("max rel err %.2e, %.2f s", e, t));
}

void delta_oracle()
{
    const auto d = from_delta_sum({pi / 2}, {1.0});
    const auto r = dirichlet_eigenvalues(d, 1, 20, values_only());
    double odd = 0.0, even = 0.0;
    for (const auto& x : r) {
        const double e = std::abs(x.lambda.real() - delta_matching_root(x.index));
        (x.index % 2 ? odd : even) = std::max(x.index % 2 ? odd : even, e);
    }
    report(2, r.size() == 20 && odd < 1e-8 && even < 1e-9,
           fmt("max |err| odd n %.2e, even n vs (2k)^2 %.2e", odd, even));
}

void wronskian_suite()
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> L(-20.0, 400.0), I(-30.0, 30.0);
    double worst = 0.0, worst_floor = 0.0;
    int cases = 0, within = 0;
    for (int i = 0; i < 24; ++i) {
        auto p = random_primitive(rng, i);
        if (i % 4 == 3)
            p = p.scaled(cplx(0.6, 0.8)); // complex potential
        const cplx lambda(L(rng), i % 2 ? I(rng) : 0.0);
        const auto fp = fundamental_pair<cplx>(p, lambda, 256);
        double w = 0.0, big = 0.0;
        for (size_t j = 0; j < fp.size(); ++j) {
            w = std::max(w, std::abs(fp.wronskian(j) - 1.0));
            big = std::max({big, std::abs(fp.phi[j]), std::abs(fp.phi1[j]), std::abs(fp.psi[j]),
                            std::abs(fp.psi1[j])});
        }
        if (w > worst) {
            worst = w;
            worst_floor = big * big * 2.2e-16; // rounding floor of phi psi1 - psi phi1
        }
        within += w < 1e-8;
        ++cases;
    }
    report(3, worst < 1e-8,
           fmt("%d cases, %d within 1e-8, max |W - 1| = %.2e (that case has growing solutions, rounding floor "
               "|Y|^2 eps = %.1e)",
               cases, within, worst, worst_floor));
}

void pruefer_equivalence()
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> L(2.0, 300.0);
    double worst = 0.0;
    int cases = 0;
    for (int i = 0; i < 12; ++i) {
        const auto p = random_primitive(rng, i);
        const double lambda = L(rng);
        auto tr = theta_trajectory(p, lambda, 0.0, 256);
        tr.log_c1 = -std::log(tr.k); // y(0) = 0, y^[1](0) = 1
        tr.log_r = log_r_trajectory(p, tr);
        const auto s = reconstruct_solution(tr);
        const auto fp = fundamental_pair_on<double>(p, lambda, tr.grid);
        for (size_t j = 0; j < tr.grid.size(); ++j)
            worst = std::max({worst, std::abs(s.y[j] - fp.psi[j]), std::abs(s.y1[j] - fp.psi1[j])});
        ++cases;
    }
    report(4, worst < 1e-7, fmt("%d cases, sup |difference| = %.2e", cases, worst));
}

struct Ladder {
    qsl::Remainders rem;
    std::vector<AsymptoticTerms> terms;
    double seconds;
};

Ladder remainders(const Primitive& p, int n_hi)
{
    const auto t0 = Clock::now();
    const auto sp = dirichlet_eigenvalues(p, 8, n_hi, values_only());
    auto terms = second_order_prediction(p, 8, n_hi, true);
    auto rem = remainder_extraction(sp, terms);
    return {std::move(rem), std::move(terms), seconds_since(t0)};
}

void remainder_band(const Ladder& step, const Ladder& cos2)
{
    // upper band: the scaled remainder over [8, 64] stays within 4x of its size on [8, 16]
    bool pass = true;
    std::string detail;
    for (const auto* r : {&step, &cos2}) {
        double head = 0.0, all = 0.0;
        for (size_t i = 0; i < r->rem.n.size(); ++i) {
            if (r->rem.n[i] > 64)
                continue;
            const double q = std::abs(r->rem.rho[i]) / std::pow(r->terms[i].upsilon, 2);
            all = std::max(all, q);
            if (r->rem.n[i] <= 16)
                head = std::max(head, q);
        }
        pass = pass && all <= 4.0 * head && std::isfinite(all);
        detail += fmt("%s max ratio %.3g (n<=16: %.3g); ", r == &step ? "step" : "cos2x", all, head);
    }
    report(5, pass, detail);
}

void decay_classes(const Ladder& step)
{
    const auto fs = decay_fit(step.rem.n, step.rem.s, 10, 100);
    const auto half = Primitive::piecewise(0.0, pi, {pi / 2},
                                           {GenPoly::power(pi / 2, 1.0, 0.5), GenPoly::power(pi / 2, 1.0, 0.5)},
                                           SmoothnessClass::lipschitz(0.5));
    const auto lr = remainders(half, 100);
    const auto fl = decay_fit(lr.rem.n, lr.rem.s, 10, 100);
    const bool ps = std::abs(fs.slope + 2.0) <= 0.3 && step.seconds < 120;
    const bool pl = std::abs(fl.slope + 1.0) <= 0.3 && lr.seconds < 120;
    report(6, ps && pl,
           fmt("step slope %.3f (%s, %.1f s); |x-pi/2|^(1/2) slope %.3f (%s, %.1f s, target -1.0 +- 0.3)", fs.slope,
               ps ? "ok" : "out", step.seconds, fl.slope, pl ? "ok" : "out", lr.seconds));
}

void rn_routes()
{
    const auto c3 = Primitive::cosine_series({0.0, 0.0, 0.0, 1.0});
    const auto a = cosine_coeffs(c3, 200);
    double e = 0.0;
    for (int n = 1; n <= 20; ++n)
        e = std::max(e, std::abs(rn_series(c3, a, n, std::max(8 * n, 160)).r - rn_double_integral(c3, n)));
    const auto r1 = rn_series(c3, a, 1, 160);
    const double hand = 9.0 / 20.0 + r1.gamma;
    const double e1 = std::abs(r1.r - hand);
    report(7, e < 1e-8 && e1 < 1e-10,
           fmt("max |series - double integral| %.2e; r_1 = %.12f vs 9/20 + gamma_1 = %.12f", e, r1.r, hand));
}

void eigenfunction_residuals()
{
    const auto st = step_at(1.0);
    std::vector<int> ns;
    std::vector<double> sup;
    for (int n = 10; n <= 60; n += 2) {
        ns.push_back(n);
        sup.push_back(eigenfunction_prediction(st, dirichlet_eigenpair(st, n)).sup_psi);
    }
    const auto f = decay_fit(ns, sup, 10, 60);
    report(8, std::abs(f.slope + 2.0) <= 0.4, fmt("sup psi_n slope %.3f over n = 10..60", f.slope));
}

void staircase_limit()
{
    const auto f = [](double x) { return cplx(std::cos(pi * x / 2) + 0.5); };
    const auto t = delta_limit_experiment({0.2, 0.1, 0.05, 0.025}, cplx(0, 1), f);
    bool dec = true;
    double tail = 0.0;
    std::string dists;
    for (size_t i = 0; i < t.rows.size(); ++i) {
        tail = std::max(tail, std::abs(t.rows[i].v_tail - 2.0 / 3.0));
        if (i > 0)
            dec = dec && t.rows[i].dist_limit < t.rows[i - 1].dist_limit;
        dists += fmt("%.4g ", t.rows[i].dist_limit);
    }
    const auto& last = t.rows.back();
    const double share = last.dist_limit / last.dist_free;
    report(9, dec && tail < 1e-10 && share < 0.1,
           fmt("dist to -(2/3)delta limit: %s(%s); max |tail - 2/3| %.1e; final dist/free-dist %.3f (needs < 0.10)",
               dists.c_str(), dec ? "decreasing" : "not decreasing", tail, share));
}

void mollifier_order()
{
    const auto d = from_delta_sum({pi / 2}, {1.0});
    const auto rows = convergence_experiment(d, BoundaryForms::dirichlet(), cplx(0, 1),
                                             [](double x) { return cplx(1.0 + x); }, {0.2, 0.1, 0.05, 0.025});
    double lo = 1e300, hi = 0.0;
    for (const auto& r : rows) {
        const double q = r.y_dist / r.u_dist;
        lo = std::min(lo, q);
        hi = std::max(hi, q);
    }
    report(10, hi <= 4.0 * lo, fmt("||y_eps - y|| / ||u_eps - u|| in [%.4g, %.4g], spread %.3f", lo, hi, hi / lo));
}

SingularFamily family(double alpha, SingularVariant v = SingularVariant::Attract)
{
    SingularFamily f;
    f.alpha = alpha;
    f.variant = v;
    return f;
}

void singular_alpha_zero()
{
    double ev = 0.0, fs = 0.0;
    for (auto v : {SingularVariant::Attract, SingularVariant::Repel}) {
        const auto e = dirichlet_eigs_alpha(family(0.0, v), 5);
        const double s = v == SingularVariant::Attract ? -1.0 : 1.0;
        for (int k = 1; k <= 5; ++k)
            ev = std::max(ev, std::abs(e[k - 1] - (std::pow(k * pi / 2, 2) + s)));
    }
    for (double x : {0.25, 0.5, 1.0}) {
        const auto z = fsr_series(family(0.0), x);
        fs = std::max({fs, std::abs(z.u1 - std::cos(x)), std::abs(z.u2 - std::sin(x)),
                       std::abs(z.du1 + std::sin(x)), std::abs(z.du2 - std::cos(x))});
    }
    report(11, ev < 1e-7 && fs < 1e-10, fmt("eigenvalue err %.2e, series vs cos/sin %.2e", ev, fs));
}

void singular_methods()
{
    const auto f = family(-1.2);
    const auto s = dirichlet_eigs_alpha(f, 5, SingularMethod::Series);
    const auto r = dirichlet_eigs_alpha(f, 5, SingularMethod::Riccati);
    const auto q = dirichlet_eigs_alpha(f, 5, SingularMethod::Quasi);
    double e = 0.0;
    for (int k = 0; k < 5; ++k)
        e = std::max({e, std::abs(s[k] - r[k]), std::abs(s[k] - q[k]), std::abs(r[k] - q[k])});
    report(12, e < 1e-6, fmt("max pairwise diff %.2e (lambda_1 = %.10f)", e, s[0]));
}

void riccati_residuals()
{
    bool pass = true;
    std::string detail;
    for (double a : {-0.5, -1.2, -1.6}) {
        const auto r = riccati_coeffs(a);
        pass = pass && r.residual_exponent > -1.0;
        detail += fmt("alpha %.1f: N=%d exponent %.3f; ", a, r.N, r.residual_exponent);
        if (a == -1.6)
            detail += "convention: " + r.convention;
    }
    report(13, pass, detail);
}

void exceptional_ladders()
{
    const std::vector<double> deltas{0.1, 0.05, 0.025, 0.0125};
    const auto at1 = exceptional_limit(family(0.0), 1, deltas, 6);
    const auto odd1 = exceptional_limit(family(0.0, SingularVariant::Odd), 1, deltas, 6);
    const auto odd2 = exceptional_limit(family(0.0, SingularVariant::Odd), 2, deltas, 6);
    const auto list = [](const ExceptionalLadder& l, bool aligned) {
        std::string s;
        for (const auto& r : l.rows)
            s += fmt("%.3g ", aligned ? r.aligned_distance : r.eig_distance);
        return s;
    };
    const bool pass = at1.decreasing && odd1.stalled && odd2.decreasing;
    report(14, pass,
           fmt("attract n=1 list distance %s(%s), index-aligned %s(ground state escapes: e=%d); "
               "odd n=1 %s(stalled=%d, floor %.3g); odd n=2 list distance %s(%s), aligned %s(%s)",
               list(at1, false).c_str(), at1.decreasing ? "decreasing" : "not decreasing", list(at1, true).c_str(),
               at1.rows.back().escaped, list(odd1, false).c_str(), int(odd1.stalled), odd1.floor,
               list(odd2, false).c_str(), odd2.decreasing ? "decreasing" : "not decreasing",
               list(odd2, true).c_str(), odd2.aligned_decreasing ? "decreasing" : "not decreasing"));
}

void boundary_classes()
{
    std::mt19937_64 rng(11);
    int regular = 0, selfadjoint = 0;
    for (int i = 0; i < 200; ++i) {
        const auto r = classify(selfadjoint_from_unitary(random_unitary(rng)));
        regular += r.cls != Regularity::Degenerate;
        selfadjoint += r.selfadjoint;
    }
    const auto per = classify(BoundaryForms::periodic());
    const auto anti = classify(BoundaryForms::antiperiodic());
    const bool pass = regular == 200 && selfadjoint == 200 && !per.strengthened && !anti.strengthened &&
                      per.cls != Regularity::Degenerate && anti.cls != Regularity::Degenerate;
    report(15, pass,
           fmt("%d/200 regular, %d/200 self-adjoint; periodic strengthened=%d, antiperiodic strengthened=%d", regular,
               selfadjoint, int(per.strengthened), int(anti.strengthened)));
}

} // namespace

int main()
{
    const auto t0 = Clock::now();
    free_ladder();
    delta_oracle();
    wronskian_suite();
    pruefer_equivalence();
    const auto step = remainders(step_at(1.0), 100);
    const auto cos2 = remainders(Primitive::cosine_series({0.0, 0.0, 1.0}), 64);
    remainder_band(step, cos2);
    decay_classes(step);
    rn_routes();
    eigenfunction_residuals();
    staircase_limit();
    mollifier_order();
    singular_alpha_zero();
    singular_methods();
    riccati_residuals();
    exceptional_ladders();
    boundary_classes();
    std::printf("%d of 15 criteria failed (%.1f s)\n", failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
