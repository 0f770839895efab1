#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "config.hpp"
#include "qsl/asymptotics.hpp"
#include "qsl/spectrum.hpp"

using namespace qsl;
using namespace qsl::cli;

namespace {

// Bumped whenever a command's column order changes.
constexpr int kColumnsVersion = 1;

struct Table {
    std::string command;
    std::vector<std::string> columns;
    std::vector<std::vector<json>> rows;
    json meta = json::object();
    bool partial = false;
};

json num(double x)
{
    return std::isfinite(x) ? json(x) : json(nullptr);
}

std::string csv_cell(const json& v)
{
    if (v.is_null())
        return "nan";
    if (v.is_boolean())
        return v.get<bool>() ? "1" : "0";
    if (v.is_number_integer())
        return std::to_string(v.get<long long>());
    if (v.is_number()) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        return buf;
    }
    std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string q = "\"";
    for (char ch : s)
        q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

void write_table(const Table& t, Format fmt, std::ostream& os)
{
    if (fmt == Format::Json) {
        json doc;
        doc["command"] = t.command;
        doc["columns_version"] = kColumnsVersion;
        doc["columns"] = t.columns;
        doc["rows"] = t.rows;
        doc["meta"] = t.meta;
        doc["partial"] = t.partial;
        os << doc.dump(2) << "\n";
        return;
    }
    os << "# qsl " << t.command << " columns v" << kColumnsVersion << ": ";
    for (size_t i = 0; i < t.columns.size(); ++i)
        os << (i ? "," : "") << t.columns[i];
    os << "\n";
    for (const auto& [k, v] : t.meta.items())
        os << "# " << k << " = " << v.dump() << "\n";
    os << "# partial = " << (t.partial ? "true" : "false") << "\n";
    for (size_t i = 0; i < t.columns.size(); ++i)
        os << (i ? "," : "") << t.columns[i];
    os << "\n";
    for (const auto& r : t.rows) {
        for (size_t i = 0; i < r.size(); ++i)
            os << (i ? "," : "") << csv_cell(r[i]);
        os << "\n";
    }
}

json fit_json(const std::vector<int>& n, const std::vector<double>& seq, int lo, int hi)
{
    try {
        const DecayFit f = decay_fit(n, seq, lo, hi);
        return {{"slope", f.slope}, {"width", f.width}, {"used", f.used}, {"dropped", f.dropped}};
    } catch (const FitError& e) {
        return {{"error", e.what()}};
    }
}

json complex_json(cplx z)
{
    return json::array({num(z.real()), num(z.imag())});
}

bool is_dirichlet(const RunConfig& c)
{
    return c.boundary_name == "dirichlet";
}

Table cmd_solve(const RunConfig& c)
{
    Table t;
    t.command = "solve";
    t.columns = {"n",           "lambda_re",    "lambda_im",   "multiplicity", "ok",
                 "achieved_tol", "det_residual", "bc_residual", "sign_changes", "error"};
    const Primitive p = c.potential.build();
    SpectrumOptions opt;
    opt.tol = c.tol.value_or(1e-10);
    opt.eigenfunctions = c.solve.eigenfunctions;
    opt.grid_hint = c.solve.grid_hint;
    opt.jobs = c.jobs;
    const bool dir = is_dirichlet(c) && p.is_real();
    const auto res = dir ? dirichlet_eigenvalues(p, c.solve.n_lo, c.solve.n_hi, opt)
                         : regular_eigenvalues(p, c.forms(), c.solve.n_lo, c.solve.n_hi, opt);
    for (const auto& r : res) {
        t.rows.push_back({r.index, num(r.lambda.real()), num(r.lambda.imag()), r.multiplicity, r.ok,
                          num(r.achieved_tol), num(r.det_residual),
                          num(std::max(r.bc_residual[0], r.bc_residual[1])), r.sign_changes, r.error});
        t.partial = t.partial || !r.ok;
    }
    t.meta["method"] = dir ? "pruefer" : "characteristic";
    t.meta["boundary"] = c.boundary_name;
    t.meta["requested_tol"] = opt.tol;
    return t;
}

Table cmd_asymptotics(const RunConfig& c)
{
    Table t;
    t.command = "asymptotics";
    t.columns = {"n", "sqrt_lambda", "n_minus_half_b2n", "mu", "n_plus_mu", "rho", "s", "b2n",
                 "upsilon", "ok", "achieved_tol"};
    if (!is_dirichlet(c))
        throw ConfigError("boundary", "asymptotics are implemented for Dirichlet conditions");
    const Primitive p = c.potential.build();
    if (!p.is_real() || std::abs(p.left()) > 1e-15 || std::abs(p.right() - pi) > 1e-12)
        throw ConfigError("potential", "asymptotics need a real potential on [0, pi]");
    const auto& a = c.asymptotics;
    SpectrumOptions opt;
    opt.tol = c.tol.value_or(1e-10);
    opt.eigenfunctions = false;
    opt.jobs = c.jobs;
    const auto sp = dirichlet_eigenvalues(p, a.n_lo, a.n_hi, opt);
    const auto terms = second_order_prediction(p, a.n_lo, a.n_hi, a.gauge, c.jobs);
    const auto rem = remainder_extraction(sp, terms);
    size_t j = 0;
    for (size_t i = 0; i < sp.size(); ++i) {
        const auto& r = sp[i];
        const auto& m = terms[i];
        double rho = NAN, s = NAN;
        if (j < rem.n.size() && rem.n[j] == r.index) {
            rho = rem.rho[j];
            s = rem.s[j];
            ++j;
        }
        const double root = r.ok ? std::sqrt(r.lambda).real() : NAN;
        t.rows.push_back({r.index, num(root), num(m.simple), num(m.mu), num(m.full), num(rho),
                          num(s), num(m.b2n), a.gauge ? num(m.upsilon) : json(nullptr), r.ok,
                          num(r.achieved_tol)});
        t.partial = t.partial || !r.ok;
    }
    t.meta["fit_rho"] = fit_json(rem.n, rem.rho, a.fit_lo, a.fit_hi);
    t.meta["fit_s"] = fit_json(rem.n, rem.s, a.fit_lo, a.fit_hi);
    t.meta["fit_range"] = {a.fit_lo, a.fit_hi};
    t.meta["class"] = p.smoothness().name();
    t.meta["requested_tol"] = opt.tol;
    return t;
}

std::function<cplx(double)> polynomial_rhs(const std::vector<double>& coeffs)
{
    return [coeffs](double x) {
        double v = 0.0;
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
            v = v * x + *it;
        return cplx(v);
    };
}

Table cmd_converge(const RunConfig& c)
{
    Table t;
    t.command = "converge";
    const auto& g = c.converge;
    const double gate = c.tol.value_or(1e-6);
    const auto f = polynomial_rhs(g.f);
    if (g.mode == "mollify") {
        t.columns = {"eps", "u_dist", "y_dist", "ratio", "ok", "achieved_tol"};
        const auto rows = convergence_experiment(c.potential.build(), c.forms(), g.lambda, f, g.eps,
                                                 g.grid);
        for (const auto& r : rows) {
            const bool ok = r.weak <= gate;
            t.rows.push_back({num(r.eps), num(r.u_dist), num(r.y_dist), num(r.y_dist / r.u_dist), ok,
                              num(r.weak)});
            t.partial = t.partial || !ok;
        }
    } else {
        t.columns = {"eps", "dist_limit", "dist_free", "v_tail", "v_total", "v_check",
                     "l1",  "l1_5",       "l1_9",      "ok",     "achieved_tol"};
        const auto tab = delta_limit_experiment(g.eps, g.lambda, f, g.exponent, g.grid);
        for (const auto& r : tab.rows) {
            const bool ok = r.weak <= gate;
            t.rows.push_back({num(r.eps), num(r.dist_limit), num(r.dist_free), num(r.v_tail),
                              num(r.v_total), num(std::abs(r.v_total - 2.0 / 3.0)), num(r.l1),
                              num(r.l15), num(r.l19), ok, num(r.weak)});
            t.partial = t.partial || !ok;
        }
        t.meta["limit_to_free"] = num(tab.limit_to_free);
        t.meta["exponent"] = g.exponent;
    }
    t.meta["mode"] = g.mode;
    t.meta["lambda"] = complex_json(g.lambda);
    t.meta["f"] = g.f;
    t.meta["grid"] = g.grid;
    t.meta["weak_residual_gate"] = gate;
    return t;
}

Table cmd_singular(const RunConfig& c)
{
    Table t;
    t.command = "singular";
    const auto& g = c.singular;
    const double gate = c.tol.value_or(1e-8);
    t.meta["variant"] = to_string(g.family.variant);
    t.meta["c"] = g.family.c;
    t.meta["bracket_gate"] = gate;
    if (g.mode == "scan") {
        t.columns = {"alpha", "k", "lambda", "ok", "achieved_tol"};
        const AlphaScan s = alpha_scan(g.family, g.alpha, g.k_max, c.jobs);
        for (size_t i = 0; i < s.alpha.size(); ++i)
            for (int k = 0; k < g.k_max; ++k) {
                const double lam = s.lambda[i][k];
                const bool ok = s.bracket[i] <= gate * std::max(1.0, std::abs(lam));
                t.rows.push_back({num(s.alpha[i]), k + 1, num(lam), ok, num(s.bracket[i])});
                t.partial = t.partial || !ok;
            }
        t.meta["refinements"] = s.refinements;
        t.meta["max_rel_jump"] = s.max_rel_jump;
        return t;
    }
    t.columns = {"delta", "alpha", "eig_distance", "aligned_distance", "escaped",
                 "resolvent_distance", "ok", "achieved_tol"};
    for (int k = 1; k <= g.k_max + 2; ++k)
        t.columns.push_back("lambda_" + std::to_string(k));
    const auto lad = exceptional_limit(g.family, g.n, g.deltas, g.k_max);
    for (const auto& r : lad.rows) {
        const bool ok = r.bracket <= gate * std::max(1.0, std::abs(r.lambda.front()));
        std::vector<json> row{num(r.delta), num(r.alpha), num(r.eig_distance),
                              num(r.aligned_distance), r.escaped, num(r.resolvent_distance), ok,
                              num(r.bracket)};
        for (double l : r.lambda)
            row.push_back(num(l));
        t.rows.push_back(row);
        t.partial = t.partial || !ok;
    }
    t.meta["n"] = g.n;
    t.meta["alpha_n"] = lad.alpha_n;
    t.meta["direct_sum"] = lad.direct_sum;
    t.meta["eig_distance_decreasing"] = lad.decreasing;
    t.meta["aligned_decreasing"] = lad.aligned_decreasing;
    t.meta["resolvent_decreasing"] = lad.resolvent_decreasing;
    t.meta["gap_floor"] = num(lad.floor);
    t.meta["gap_nonvanishing"] = lad.stalled;
    return t;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spectral experiments for Sturm-Liouville operators with distributional potentials"};
    app.require_subcommand(1);
    std::string config_path, out, format;
    int jobs = 0;
    double tol = 0.0;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"solve", "eigenvalue ladder"},
        {"asymptotics", "second-order asymptotics and remainder fits"},
        {"converge", "resolvent convergence along an epsilon ladder"},
        {"singular", "power-singular family: alpha scan or exceptional-point ladder"}};
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out, "output file (stdout when omitted)");
        sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--tol", tol, "tolerance (command specific)")->check(CLI::PositiveNumber);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    RunConfig cfg;
    try {
        cfg = load_config(config_path, command);
        if (!out.empty())
            cfg.out = out;
        if (!format.empty())
            cfg.format = parse_format(format);
        if (jobs > 0)
            cfg.jobs = jobs;
        if (tol > 0.0)
            cfg.tol = tol;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }

    Table table;
    int code = 0;
    try {
        if (command == "solve")
            table = cmd_solve(cfg);
        else if (command == "asymptotics")
            table = cmd_asymptotics(cfg);
        else if (command == "converge")
            table = cmd_converge(cfg);
        else
            table = cmd_singular(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const qsl::Error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        table.command = command;
        table.partial = true;
        table.meta["error"] = e.what();
    }
    if (table.partial)
        code = 2;

    std::ostringstream text;
    write_table(table, cfg.format, text);
    if (cfg.out.empty()) {
        std::cout << text.str();
    } else {
        std::ofstream os(cfg.out, std::ios::binary);
        if (!os) {
            std::cerr << "cannot write '" << cfg.out << "'\n";
            return 1;
        }
        os << text.str();
    }
    for (const auto& r : table.rows)
        if (table.command == "solve" && !r[4].get<bool>())
            std::cerr << "index " << r[0] << " failed: " << r[9].get<std::string>() << "\n";
    return code;
}
