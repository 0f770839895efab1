#include "config.hpp"

#include <fstream>
#include <regex>
#include <set>

namespace qsl::cli {

namespace {

std::string join(const std::string& path, const std::string& key)
{
    return path.empty() ? key : path + "." + key;
}

// Reads fields of one JSON object and rejects keys that were never asked for.
class Fields {
public:
    Fields(const json& obj, std::string path, std::set<std::string> allowed)
        : obj_(obj), path_(std::move(path))
    {
        if (!obj_.is_object())
            throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
        for (const auto& [k, v] : obj_.items())
            if (!allowed.count(k))
                throw ConfigError(join(path_, k), "unknown key");
    }

    bool has(const std::string& k) const { return obj_.contains(k); }
    const json& at(const std::string& k) const { return obj_.at(k); }
    std::string path(const std::string& k) const { return join(path_, k); }

    double real(const std::string& k, double def) const
    {
        return has(k) ? parse_real(at(k), path(k)) : def;
    }
    int integer(const std::string& k, int def) const
    {
        if (!has(k))
            return def;
        if (!at(k).is_number_integer())
            throw ConfigError(path(k), "expected an integer");
        return at(k).get<int>();
    }
    bool boolean(const std::string& k, bool def) const
    {
        if (!has(k))
            return def;
        if (!at(k).is_boolean())
            throw ConfigError(path(k), "expected true or false");
        return at(k).get<bool>();
    }
    std::string string(const std::string& k, const std::string& def) const
    {
        if (!has(k))
            return def;
        if (!at(k).is_string())
            throw ConfigError(path(k), "expected a string");
        return at(k).get<std::string>();
    }
    std::vector<double> reals(const std::string& k, std::vector<double> def) const
    {
        if (!has(k))
            return def;
        if (!at(k).is_array())
            throw ConfigError(path(k), "expected an array");
        std::vector<double> out;
        for (size_t i = 0; i < at(k).size(); ++i)
            out.push_back(parse_real(at(k)[i], path(k) + "[" + std::to_string(i) + "]"));
        return out;
    }
    cplx complex(const std::string& k, cplx def) const
    {
        return has(k) ? parse_complex(at(k), path(k)) : def;
    }

    static cplx parse_complex(const json& v, const std::string& p)
    {
        if (v.is_array()) {
            if (v.size() != 2)
                throw ConfigError(p, "complex values are [re, im]");
            return {parse_real(v[0], p + "[0]"), parse_real(v[1], p + "[1]")};
        }
        return parse_real(v, p);
    }

private:
    const json& obj_;
    std::string path_;
};

void require(bool ok, const std::string& path, const std::string& what)
{
    if (!ok)
        throw ConfigError(path, what);
}

SmoothnessClass parse_class(const json& v, const std::string& path)
{
    const Fields f(v, path, {"kind", "alpha", "p", "theta"});
    const std::string kind = f.string("kind", "l2");
    try {
        if (kind == "bv")
            return SmoothnessClass::bounded_variation();
        if (kind == "l2")
            return SmoothnessClass::l2();
        if (kind == "ksp")
            return SmoothnessClass::ksp();
        if (kind == "lipschitz")
            return SmoothnessClass::lipschitz(f.real("alpha", 1.0));
        if (kind == "lipschitz_integral")
            return SmoothnessClass::lipschitz_integral(f.real("alpha", 1.0), f.real("p", 2.0));
        if (kind == "sobolev")
            return SmoothnessClass::sobolev(f.real("theta", 0.0));
    } catch (const Error& e) {
        throw ConfigError(path, e.what());
    }
    throw ConfigError(f.path("kind"), "unknown class '" + kind + "'");
}

PotentialSpec parse_potential(const json& v, const std::string& path)
{
    const Fields f(v, path,
                   {"variant", "interval", "value", "positions", "strengths", "x0", "height",
                    "exponent", "coef", "coeffs", "P", "scale", "class"});
    PotentialSpec p;
    p.variant = f.string("variant", "zero");
    static const std::set<std::string> variants{"zero",   "constant", "delta",   "step",
                                                "cosine", "power",    "lacunary"};
    require(variants.count(p.variant) > 0, f.path("variant"), "unknown variant '" + p.variant + "'");
    if (f.has("interval")) {
        const auto iv = f.reals("interval", {});
        require(iv.size() == 2 && iv[0] < iv[1], f.path("interval"), "expected [a, b] with a < b");
        p.a = iv[0];
        p.b = iv[1];
    }
    if (p.variant == "cosine" || p.variant == "lacunary")
        require(std::abs(p.a) < 1e-15 && std::abs(p.b - pi) < 1e-12, f.path("interval"),
                "cosine-series potentials live on [0, pi]");
    p.value = f.real("value", 0.0);
    p.positions = f.reals("positions", {});
    p.strengths = f.reals("strengths", {});
    p.x0 = f.real("x0", 0.5 * (p.a + p.b));
    p.height = f.real("height", 1.0);
    p.exponent = f.real("exponent", 0.5);
    p.coef = f.real("coef", 1.0);
    p.coeffs = f.reals("coeffs", {});
    p.P = f.integer("P", 1);
    p.scale = f.complex("scale", 1.0);
    if (f.has("class"))
        p.cls = parse_class(f.at("class"), f.path("class"));

    if (p.variant == "delta") {
        require(p.positions.size() == p.strengths.size(), f.path("strengths"),
                "positions and strengths differ in length");
        for (size_t i = 0; i < p.positions.size(); ++i)
            require(p.positions[i] > p.a && p.positions[i] < p.b &&
                        (i == 0 || p.positions[i] > p.positions[i - 1]),
                    f.path("positions"), "positions must be interior and increasing");
    }
    if (p.variant == "step")
        require(p.x0 > p.a && p.x0 < p.b, f.path("x0"), "jump must be interior");
    if (p.variant == "power")
        require(p.exponent > -0.5, f.path("exponent"), "u must be square integrable (exponent > -1/2)");
    if (p.variant == "cosine")
        require(!p.coeffs.empty(), f.path("coeffs"), "at least one coefficient");
    if (p.variant == "lacunary")
        require(p.P >= 0 && p.P <= 2, f.path("P"), "P must be 0, 1 or 2");
    return p;
}

BoundaryForms parse_boundary(const json& v, const std::string& path, std::string& name)
{
    if (v.is_string()) {
        name = v.get<std::string>();
        try {
            return BoundaryForms::preset(name);
        } catch (const Error& e) {
            throw ConfigError(path, e.what());
        }
    }
    const Fields f(v, path, {"matrix"});
    require(f.has("matrix"), path, "expected a preset name or {\"matrix\": [[4], [4]]}");
    const json& m = f.at("matrix");
    require(m.is_array() && m.size() == 2, f.path("matrix"), "expected two rows");
    Eigen::Matrix<cplx, 2, 4> M;
    for (int i = 0; i < 2; ++i) {
        const std::string rp = f.path("matrix") + "[" + std::to_string(i) + "]";
        require(m[i].is_array() && m[i].size() == 4, rp, "expected four entries");
        for (int j = 0; j < 4; ++j)
            M(i, j) = Fields::parse_complex(m[i][j], rp + "[" + std::to_string(j) + "]");
    }
    name = "matrix";
    try {
        return BoundaryForms(M);
    } catch (const Error& e) {
        throw ConfigError(f.path("matrix"), e.what());
    }
}

void check_ladder(const std::vector<double>& v, const std::string& path)
{
    require(!v.empty(), path, "empty ladder");
    for (double x : v)
        require(x > 0.0, path, "ladder entries must be positive");
}

} // namespace

double parse_real(const json& v, const std::string& path)
{
    if (v.is_number())
        return v.get<double>();
    if (!v.is_string())
        throw ConfigError(path, "expected a number");
    // [-][k][*]pi[/d]
    static const std::regex re(R"(^\s*(-)?\s*([0-9]*\.?[0-9]*)\s*\*?\s*pi\s*(?:/\s*([0-9]*\.?[0-9]+))?\s*$)");
    std::smatch m;
    const std::string s = v.get<std::string>();
    if (!std::regex_match(s, m, re))
        throw ConfigError(path, "cannot read '" + s + "' as a number");
    double x = pi;
    if (m[2].length() > 0)
        x *= std::stod(m[2]);
    if (m[3].length() > 0)
        x /= std::stod(m[3]);
    return m[1].length() > 0 ? -x : x;
}

Format parse_format(const std::string& s)
{
    if (s == "csv")
        return Format::Csv;
    if (s == "json")
        return Format::Json;
    throw ConfigError("output.format", "expected csv or json");
}

Primitive PotentialSpec::build() const
{
    Primitive p;
    const auto bv = SmoothnessClass::bounded_variation();
    if (variant == "zero") {
        p = Primitive::constant(a, b, 0.0);
    } else if (variant == "constant") {
        p = Primitive::constant(a, b, value);
    } else if (variant == "delta") {
        p = from_delta_sum(positions, strengths, a, b);
    } else if (variant == "step") {
        p = Primitive::piecewise(a, b, {x0}, {GenPoly::constant(0.0), GenPoly::constant(height)}, bv);
    } else if (variant == "cosine") {
        p = Primitive::cosine_series(coeffs);
    } else if (variant == "power") {
        const auto piece = GenPoly::power(x0, coef, exponent);
        const auto cls = SmoothnessClass::lipschitz(std::min(1.0, std::max(exponent, 1e-3)));
        if (x0 > a && x0 < b)
            p = Primitive::piecewise(a, b, {x0}, {piece, piece}, cls);
        else
            p = Primitive::piecewise(a, b, {}, {piece}, cls);
    } else if (variant == "lacunary") {
        p = lacunary_potential(P);
    }
    if (cls)
        p = p.with_class(*cls);
    if (scale != cplx(1.0, 0.0))
        p = p.scaled(scale);
    return p;
}

RunConfig parse_config(const json& doc, const std::string& command)
{
    static const std::set<std::string> commands{"solve", "asymptotics", "converge", "singular"};
    if (!commands.count(command))
        throw ConfigError("command", "unknown command '" + command + "'");
    const Fields root(doc, "",
                      {"command", "potential", "boundary", "solve", "asymptotics", "converge",
                       "singular", "output", "jobs", "tol"});
    RunConfig c;
    c.command = root.string("command", command);
    require(c.command == command, "command", "config is for '" + c.command + "'");
    if (root.has("potential"))
        c.potential = parse_potential(root.at("potential"), "potential");
    if (root.has("boundary"))
        c.boundary = parse_boundary(root.at("boundary"), "boundary", c.boundary_name);
    c.jobs = root.integer("jobs", 1);
    require(c.jobs >= 1, "jobs", "must be at least 1");
    if (root.has("tol")) {
        c.tol = root.real("tol", 0.0);
        require(*c.tol > 0.0, "tol", "must be positive");
    }
    if (root.has("output")) {
        const Fields o(root.at("output"), "output", {"path", "format"});
        c.out = o.string("path", "");
        c.format = parse_format(o.string("format", "csv"));
    }
    if (root.has("solve")) {
        const Fields s(root.at("solve"), "solve", {"n_lo", "n_hi", "eigenfunctions", "grid_hint"});
        c.solve.n_lo = s.integer("n_lo", 1);
        c.solve.n_hi = s.integer("n_hi", 20);
        c.solve.eigenfunctions = s.boolean("eigenfunctions", false);
        c.solve.grid_hint = s.integer("grid_hint", 0);
        require(c.solve.n_lo >= 1 && c.solve.n_hi >= c.solve.n_lo, "solve.n_hi",
                "need 1 <= n_lo <= n_hi");
    }
    if (root.has("asymptotics")) {
        const Fields s(root.at("asymptotics"), "asymptotics", {"n_lo", "n_hi", "fit", "gauge"});
        c.asymptotics.n_lo = s.integer("n_lo", 8);
        c.asymptotics.n_hi = s.integer("n_hi", 64);
        c.asymptotics.gauge = s.boolean("gauge", false);
        const auto fit = s.reals("fit", {double(c.asymptotics.n_lo), double(c.asymptotics.n_hi)});
        require(fit.size() == 2 && fit[0] < fit[1], s.path("fit"), "expected [n_lo, n_hi]");
        c.asymptotics.fit_lo = static_cast<int>(fit[0]);
        c.asymptotics.fit_hi = static_cast<int>(fit[1]);
        require(c.asymptotics.n_lo >= 1 && c.asymptotics.n_hi >= c.asymptotics.n_lo,
                "asymptotics.n_hi", "need 1 <= n_lo <= n_hi");
    }
    if (root.has("converge")) {
        const Fields s(root.at("converge"), "converge",
                       {"mode", "eps", "lambda", "f", "grid", "exponent"});
        c.converge.mode = s.string("mode", "mollify");
        require(c.converge.mode == "mollify" || c.converge.mode == "staircase", s.path("mode"),
                "expected mollify or staircase");
        c.converge.eps = s.reals("eps", {});
        check_ladder(c.converge.eps, s.path("eps"));
        c.converge.lambda = s.complex("lambda", cplx(0.0, 1.0));
        c.converge.f = s.reals("f", {1.0});
        require(!c.converge.f.empty(), s.path("f"), "at least one coefficient");
        c.converge.grid = s.integer("grid", 8192);
        require(c.converge.grid >= 16, s.path("grid"), "at least 16 intervals");
        c.converge.exponent = s.real("exponent", 1.5);
        if (c.converge.mode == "staircase")
            for (double e : c.converge.eps)
                require(e < 1.0, s.path("eps"), "staircase needs eps < 1");
    } else if (command == "converge") {
        throw ConfigError("converge", "missing section");
    }
    if (root.has("singular")) {
        const Fields s(root.at("singular"), "singular",
                       {"mode", "variant", "c", "k_max", "alpha", "n", "deltas", "terms", "r0"});
        auto& g = c.singular;
        g.mode = s.string("mode", "scan");
        require(g.mode == "scan" || g.mode == "exceptional", s.path("mode"),
                "expected scan or exceptional");
        try {
            g.family.variant = parse_variant(s.string("variant", "attract"));
        } catch (const Error& e) {
            throw ConfigError(s.path("variant"), e.what());
        }
        g.family.c = s.real("c", 1.0);
        g.family.terms = s.integer("terms", 96);
        g.family.r0 = s.real("r0", 0.25);
        require(g.family.r0 > 0.0 && g.family.r0 < 1.0, s.path("r0"), "need 0 < r0 < 1");
        g.k_max = s.integer("k_max", 5);
        require(g.k_max >= 1, s.path("k_max"), "must be at least 1");
        if (g.mode == "scan") {
            g.alpha = s.reals("alpha", {});
            require(!g.alpha.empty(), s.path("alpha"), "empty alpha grid");
            for (size_t i = 0; i < g.alpha.size(); ++i)
                require(g.alpha[i] > -2.0 && (i == 0 || g.alpha[i] > g.alpha[i - 1]), s.path("alpha"),
                        "alpha grid must be increasing inside (-2, inf)");
        } else {
            g.n = s.integer("n", 1);
            require(g.n >= 1, s.path("n"), "must be at least 1");
            g.deltas = s.reals("deltas", {});
            check_ladder(g.deltas, s.path("deltas"));
        }
    } else if (command == "singular") {
        throw ConfigError("singular", "missing section");
    }
    return c;
}

RunConfig load_config(const std::string& file, const std::string& command)
{
    std::ifstream in(file);
    if (!in)
        throw ConfigError("--config", "cannot open '" + file + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(doc, command);
}

} // namespace qsl::cli
