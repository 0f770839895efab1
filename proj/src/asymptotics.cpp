#include "qsl/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "qsl/pruefer.hpp"
#include "qsl/quadrature.hpp"

namespace qsl {

namespace {

void check_standard(const Primitive& p)
{
    if (!p.is_real())
        throw DomainError("asymptotic formulas need a real primitive");
    if (std::abs(p.left()) > 1e-14 || std::abs(p.right() - pi) > 1e-12)
        throw DomainError("asymptotic formulas are stated on [0, pi]");
}

// int_0^pi g(t) u(t) dt on a mesh adapted to frequency freq
double integrate_against(const Primitive& p, const std::function<double(double)>& g, double freq)
{
    const double sr = p.scale().real();
    const auto mesh = quadrature_mesh(p, p.left(), p.right(), std::min(0.05 * pi, 0.4 / freq));
    double acc = 0.0;
    for (size_t i = 0; i + 1 < mesh.size(); ++i)
        acc += quad::gauss<16>([&](double t) { return g(t) * sr * p.shape(t); }, mesh[i], mesh[i + 1]);
    return acc;
}

} // namespace

AsymptoticTerms mu_n(const Primitive& p, int n, bool with_gauge)
{
    check_standard(p);
    if (n < 1)
        throw DomainError("index starts at 1");
    const double lam = double(n) * n;
    const std::vector<double> ends{p.left(), p.right()};
    const KernelProfile kp = with_gauge ? kernel_profile(p, 0.0, lam, std::max(512, 16 * n))
                                        : kernel_profile(p, 0.0, lam, ends);
    AsymptoticTerms t;
    t.n = n;
    const double f = 2.0 / pi;
    t.b2n = f * kp.b.back().real();
    t.a2n = f * kp.a.back().real();
    t.A2n = f * kp.A.back().real();
    t.w2n = f * kp.w.back().real();
    t.U_pi = kp.U.back();
    t.r = t.w2n + t.U_pi / (2.0 * pi * n);
    t.mu = -0.5 * t.b2n + t.A2n / (4.0 * n) - t.r;
    t.simple = n - 0.5 * t.b2n;
    t.full = n + t.mu;
    if (with_gauge)
        t.upsilon = kp.Upsilon;
    return t;
}

std::vector<AsymptoticTerms> second_order_prediction(const Primitive& p, int n_lo, int n_hi,
                                                     bool with_gauge, int jobs)
{
    if (n_lo < 1 || n_hi < n_lo)
        throw DomainError("invalid index range");
    const int count = n_hi - n_lo + 1;
    std::vector<AsymptoticTerms> out(count);
    jobs = std::max(1, std::min(jobs, count));
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j)
        pool.emplace_back([&, j] {
            for (int i = j; i < count; i += jobs)
                out[i] = mu_n(p, n_lo + i, with_gauge);
        });
    for (auto& t : pool)
        t.join();
    return out;
}

double rn_double_integral(const Primitive& p, int n)
{
    return mu_n(p, n).r;
}

RnSeries rn_series(const Primitive& p, const std::vector<double>& a, int n, int K)
{
    check_standard(p);
    if (n < 1)
        throw DomainError("index starts at 1");
    if (K < 2 * n || static_cast<int>(a.size()) <= K)
        throw DomainError("rn_series needs coefficients up to K >= 2n");
    RnSeries out;
    out.K = K;
    out.truncation_warning = K < 8 * n;
    const double m = 2.0 * n;
    double sum = 0.0, energy = 0.0;
    for (int k = 1; k <= K; ++k) {
        energy += a[k] * a[k];
        if (k != 2 * n)
            sum += double(k) * k * a[k] * a[k] / ((m - k) * (m + k));
    }
    out.series = -sum / (4.0 * n);

    // Parseval tail of the coefficients times the largest omitted weight k^2 / (k^2 - 4n^2)
    const double sr = p.scale().real();
    const double norm2 = sr * sr * integrate_u2(p, p.left(), p.right());
    const double tail = std::max(0.0, (2.0 / pi) * norm2 - 0.5 * a[0] * a[0] - energy);
    const double k1 = K + 1.0;
    out.tail_bound = k1 > m ? tail / (4.0 * n) * k1 * k1 / (k1 * k1 - m * m) : INFINITY;

    const double a2n = a[2 * n];
    const double I = integrate_against(
        p, [&](double s) { return (pi - s) * std::sin(m * s); }, m);
    out.gamma = 3.0 / (16.0 * n) * a2n * a2n + a2n / pi * I;
    out.r = out.series + out.gamma;
    return out;
}

Remainders remainder_extraction(const std::vector<SpectralResult>& spectral,
                                const std::vector<AsymptoticTerms>& terms)
{
    Remainders out;
    for (const auto& r : spectral) {
        if (!r.ok)
            continue;
        const auto it = std::find_if(terms.begin(), terms.end(),
                                     [&](const AsymptoticTerms& t) { return t.n == r.index; });
        if (it == terms.end())
            continue;
        const double root = std::sqrt(r.lambda).real();
        out.n.push_back(r.index);
        out.rho.push_back(root - r.index - it->mu);
        out.s.push_back(root - r.index + 0.5 * it->b2n);
    }
    return out;
}

DecayFit decay_fit(const std::vector<int>& n, const std::vector<double>& seq, int n_lo, int n_hi)
{
    if (n.size() != seq.size())
        throw DomainError("index and sequence lengths differ");
    DecayFit f;
    std::vector<double> xs, ys;
    for (size_t i = 0; i < n.size(); ++i) {
        if (n[i] < n_lo || n[i] > n_hi)
            continue;
        const double v = std::abs(seq[i]);
        if (!(v > 0) || !std::isfinite(v)) {
            ++f.dropped;
            continue;
        }
        xs.push_back(std::log(double(n[i])));
        ys.push_back(std::log(v));
    }
    f.used = static_cast<int>(xs.size());
    if (f.used < 5)
        throw FitError("decay fit needs at least 5 usable points");
    const Eigen::Map<const Eigen::VectorXd> x(xs.data(), f.used), y(ys.data(), f.used);
    const double mx = x.mean(), my = y.mean();
    const double sxx = (x.array() - mx).square().sum();
    f.slope = ((x.array() - mx) * (y.array() - my)).sum() / sxx;
    f.intercept = my - f.slope * mx;
    const double ssr = (y.array() - f.intercept - f.slope * x.array()).square().sum();
    f.width = f.used > 2 ? 2.0 * std::sqrt(ssr / (f.used - 2) / sxx) : INFINITY;
    return f;
}

EigenfunctionPrediction eigenfunction_prediction(const Primitive& p, const SpectralResult& r)
{
    check_standard(p);
    if (r.y.size() == 0)
        throw DomainError("spectral result carries no eigenfunction");
    const int n = r.index;
    const double m = 2.0 * n;
    EigenfunctionPrediction e;
    e.n = n;
    e.grid = r.grid;
    const size_t N = r.grid.size();

    e.computed = r.y.real();
    double nrm = 0.0, proj = 0.0;
    for (size_t i = 1; i < N; ++i) {
        const double h = 0.5 * (r.grid[i] - r.grid[i - 1]);
        nrm += h * (e.computed[i - 1] * e.computed[i - 1] + e.computed[i] * e.computed[i]);
        proj += h * (e.computed[i - 1] * std::sin(n * r.grid[i - 1]) +
                     e.computed[i] * std::sin(n * r.grid[i]));
    }
    e.computed *= (proj < 0 ? -1.0 : 1.0) * std::sqrt(0.5 * pi / nrm);

    const KernelProfile kp = kernel_profile(p, 0.0, double(n) * n, r.grid);
    const double bpi = kp.b.back().real();
    const double tcos = integrate_against(p, [&](double t) { return t * std::cos(m * t); }, m);
    const double K = kp.a.back().real() - tcos / pi;
    e.predicted.resize(N);
    for (size_t i = 0; i < N; ++i) {
        const double x = r.grid[i];
        e.predicted[i] = std::sin(n * x) * (1.0 - kp.a[i].real() + K) +
                         std::cos(n * x) * (kp.b[i].real() - x / pi * bpi);
    }
    e.psi = e.computed - e.predicted;
    e.sup_psi = e.psi.cwiseAbs().maxCoeff();
    return e;
}

KspSum ksp_sum(const std::vector<double>& a, int K)
{
    if (K < 2)
        throw DomainError("ksp_sum needs K >= 2");
    if (static_cast<int>(a.size()) <= K)
        throw DomainError("coefficients shorter than K");
    KspSum out;
    for (int k = 2; k <= K; ++k)
        out.value += a[k] * a[k] * std::log(double(k));
    for (long lo = 2; 2 * lo <= K; lo *= 2) {
        double inc = 0.0;
        for (long k = lo + 1; k <= 2 * lo; ++k)
            inc += a[k] * a[k] * std::log(double(k));
        out.block_increments.push_back(inc);
    }
    const auto& b = out.block_increments;
    if (b.size() >= 2) {
        const double last = b.back(), prev = b[b.size() - 2];
        out.convergent_trend = prev > 0 ? last / prev < 0.75 : last == 0.0;
    }
    return out;
}

Primitive lacunary_potential(int P)
{
    if (P < 0)
        throw DomainError("P must be non-negative");
    if (P >= 3)
        throw ResourceError("P >= 3 needs an index beyond 2^82");
    std::vector<std::pair<long, double>> terms;
    for (int q = 1; q <= P; ++q) {
        const long idx = 2L << (q * q * q * q);
        terms.emplace_back(idx, 1.0 / (double(q) * q));
    }
    return Primitive::cosine_series_sparse(std::move(terms), SmoothnessClass::l2());
}

} // namespace qsl
