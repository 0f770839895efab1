#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsl/approximation.hpp"
#include "qsl/asymptotics.hpp"
#include "qsl/boundary.hpp"
#include "qsl/potential.hpp"
#include "qsl/singular.hpp"

namespace qsl::cli {

using json = nlohmann::json;

// Schema or value problem in the config; `path` points at the offending field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

enum class Format { Csv, Json };

struct PotentialSpec {
    std::string variant = "zero"; // zero | constant | delta | step | cosine | power | lacunary
    double a = 0.0, b = pi;
    double value = 0.0;
    std::vector<double> positions, strengths;
    double x0 = pi / 2, height = 1.0, exponent = 0.5, coef = 1.0;
    std::vector<double> coeffs;
    int P = 1;
    cplx scale{1.0, 0.0};
    std::optional<SmoothnessClass> cls;

    Primitive build() const;
};

struct SolveSpec {
    int n_lo = 1, n_hi = 20;
    bool eigenfunctions = false;
    int grid_hint = 0;
};

struct AsymptoticsSpec {
    int n_lo = 8, n_hi = 64;
    int fit_lo = 10, fit_hi = 100;
    bool gauge = false;
};

struct ConvergeSpec {
    std::string mode = "mollify"; // mollify | staircase
    std::vector<double> eps;
    cplx lambda{0.0, 1.0};
    std::vector<double> f{1.0}; // polynomial coefficients in x
    int grid = 8192;
    double exponent = 1.5;
};

struct SingularSpec {
    std::string mode = "scan"; // scan | exceptional
    SingularFamily family;
    int k_max = 5;
    std::vector<double> alpha;
    int n = 1;
    std::vector<double> deltas;
};

struct RunConfig {
    std::string command;
    PotentialSpec potential;
    std::optional<BoundaryForms> boundary; // Dirichlet when absent
    std::string boundary_name = "dirichlet";
    SolveSpec solve;
    AsymptoticsSpec asymptotics;
    ConvergeSpec converge;
    SingularSpec singular;
    std::string out;
    Format format = Format::Csv;
    int jobs = 1;
    std::optional<double> tol;

    BoundaryForms forms() const { return boundary ? *boundary : BoundaryForms::dirichlet(); }
};

// Accepts a number or a string such as "pi", "pi/2", "3pi/4", "-2*pi".
double parse_real(const json& v, const std::string& path);

// Validates the document against the schema for `command` and fills a RunConfig.
// Throws ConfigError on unknown keys, wrong types or out-of-range values.
RunConfig parse_config(const json& doc, const std::string& command);
RunConfig load_config(const std::string& file, const std::string& command);

Format parse_format(const std::string& s);

} // namespace qsl::cli
