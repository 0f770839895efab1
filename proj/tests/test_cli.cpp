#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "config.hpp"

using namespace qsl;
using namespace qsl::cli;
namespace fs = std::filesystem;

namespace {

fs::path workdir()
{
    static const fs::path d = [] {
        auto p = fs::temp_directory_path() / ("qsl_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return d;
}

fs::path write_config(const std::string& name, const json& doc)
{
    const auto p = workdir() / name;
    std::ofstream(p) << doc.dump(2);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Runs the CLI binary; returns its exit code.
int run(const std::string& args)
{
    const char* bin = std::getenv("QSL_CLI");
    REQUIRE_MESSAGE(bin != nullptr, "QSL_CLI must point at the built CLI");
    const std::string cmd = std::string(bin) + " " + args + " 2>" + (workdir() / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ','))
            cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

} // namespace

TEST_CASE("numbers may be written in multiples of pi")
{
    CHECK(parse_real(json(1.5), "x") == 1.5);
    CHECK(parse_real(json("pi"), "x") == doctest::Approx(pi));
    CHECK(parse_real(json("pi/2"), "x") == doctest::Approx(pi / 2));
    CHECK(parse_real(json("3pi/4"), "x") == doctest::Approx(3 * pi / 4));
    CHECK(parse_real(json("-2*pi"), "x") == doctest::Approx(-2 * pi));
    CHECK_THROWS_AS(parse_real(json("tau"), "x"), ConfigError);
    CHECK_THROWS_AS(parse_real(json(true), "x"), ConfigError);
}

TEST_CASE("schema validation reports the field path")
{
    const json ok = {{"potential", {{"variant", "delta"}, {"positions", {"pi/2"}}, {"strengths", {1.0}}}},
                     {"solve", {{"n_lo", 1}, {"n_hi", 4}}}};
    const auto c = parse_config(ok, "solve");
    CHECK(c.potential.variant == "delta");
    CHECK(c.potential.positions[0] == doctest::Approx(pi / 2));

    auto bad = ok;
    bad["potential"]["strenghts"] = {1.0};
    try {
        parse_config(bad, "solve");
        FAIL("unknown key accepted");
    } catch (const ConfigError& e) {
        CHECK(e.path() == "potential.strenghts");
    }
    bad = ok;
    bad["solve"]["n_hi"] = "ten";
    CHECK_THROWS_WITH_AS(parse_config(bad, "solve"), doctest::Contains("solve.n_hi"), ConfigError);
    bad = ok;
    bad["extra"] = 1;
    CHECK_THROWS_AS(parse_config(bad, "solve"), ConfigError);
    bad = ok;
    bad["boundary"] = {{"matrix", {{1, 0, 0}, {0, 0, 1, 0}}}};
    CHECK_THROWS_WITH_AS(parse_config(bad, "solve"), doctest::Contains("boundary.matrix[0]"), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"converge", {{"eps", json::array()}}}}, "converge"), ConfigError);
    CHECK_THROWS_AS(parse_config(ok, "singular"), ConfigError); // missing section
    CHECK_THROWS_AS(parse_config(json{{"command", "solve"}}, "converge"), ConfigError);
}

TEST_CASE("boundary presets and matrices")
{
    const auto c = parse_config(json{{"boundary", "periodic"}}, "solve");
    CHECK(c.boundary_name == "periodic");
    const auto m = parse_config(json{{"boundary", {{"matrix", {{1, 0, 0, 0}, {0, 0, 1, {0, 0}}}}}}}, "solve");
    CHECK(m.forms().M(1, 2) == cplx(1.0));
}

TEST_CASE("solve: free Dirichlet problem")
{
    const auto cfg = write_config("free.json", {{"potential", {{"variant", "zero"}}}, {"solve", {{"n_hi", 5}}}});
    const auto out = workdir() / "free.csv";
    REQUIRE(run("solve --config " + cfg.string() + " --out " + out.string()) == 0);
    const std::string text = slurp(out);
    CHECK(text.rfind("# qsl solve columns v1: n,lambda_re", 0) == 0);
    const auto rows = csv_rows(text);
    REQUIRE(rows.size() == 5);
    for (size_t i = 0; i < rows.size(); ++i) {
        const int n = std::stoi(rows[i][0]);
        CHECK(n == int(i) + 1);
        CHECK(std::stod(rows[i][1]) == doctest::Approx(double(n * n)).epsilon(1e-10));
        CHECK(rows[i][4] == "1");
        CHECK(std::stod(rows[i][5]) < 1e-9); // achieved tolerance column
    }
}

TEST_CASE("solve: delta reruns are byte-identical, also with threads")
{
    const auto cfg = write_config(
        "delta.json", {{"potential", {{"variant", "delta"}, {"positions", {"pi/2"}}, {"strengths", {1}}}},
                       {"solve", {{"n_hi", 8}}}});
    const auto a = workdir() / "d1.csv", b = workdir() / "d2.csv", j = workdir() / "d3.json";
    REQUIRE(run("solve --config " + cfg.string() + " --out " + a.string()) == 0);
    REQUIRE(run("solve --config " + cfg.string() + " --out " + b.string() + " --jobs 3") == 0);
    CHECK(slurp(a) == slurp(b));
    REQUIRE(run("solve --config " + cfg.string() + " --out " + j.string() + " --format json") == 0);
    const auto doc = json::parse(slurp(j));
    CHECK(doc["columns_version"] == 1);
    CHECK(doc["rows"].size() == 8);
    CHECK(doc["rows"][1][1].get<double>() == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("config errors exit with 1")
{
    const auto bad = write_config("bad.json", {{"potential", {{"variant", "zero"}, {"colour", "red"}}}});
    CHECK(run("solve --config " + bad.string()) == 1);
    CHECK(slurp(workdir() / "stderr.txt").find("potential.colour") != std::string::npos);
    const auto empty = write_config("empty.json", {{"converge", {{"mode", "staircase"}, {"eps", json::array()}}}});
    CHECK(run("converge --config " + empty.string()) == 1);
    CHECK(run("solve --config " + (workdir() / "missing.json").string()) == 1);
    CHECK(run("solve") == 1);
    CHECK(run("frobnicate --config x") == 1);
}

TEST_CASE("partial numeric failure exits with 2")
{
    // an absurd shooting tolerance cannot be met, every row reports its achieved value
    const auto cfg = write_config("tight.json", {{"potential", {{"variant", "step"}, {"x0", 1.0}}},
                                                 {"solve", {{"n_hi", 2}}},
                                                 {"tol", 1e-300}});
    const auto out = workdir() / "tight.csv";
    CHECK(run("solve --config " + cfg.string() + " --out " + out.string()) == 2);
    const auto rows = csv_rows(slurp(out));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][4] == "0");
    CHECK(std::stod(rows[0][5]) > 0.0);
}

TEST_CASE("converge: staircase check column")
{
    const auto cfg = write_config(
        "stair.json", {{"converge", {{"mode", "staircase"}, {"eps", {0.2, 0.1}}, {"f", {0.5, 0.0, -1.0}}}}});
    const auto out = workdir() / "stair.csv";
    REQUIRE(run("converge --config " + cfg.string() + " --out " + out.string()) == 0);
    const auto rows = csv_rows(slurp(out));
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows)
        CHECK(std::stod(r[5]) < 1e-10); // |v_eps(1) - 2/3|
    CHECK(std::stod(rows[1][1]) < std::stod(rows[0][1]));
}

TEST_CASE("singular: alpha = 0 row and the exceptional ladder flags")
{
    const auto cfg = write_config(
        "scan.json", {{"singular", {{"variant", "repel"}, {"alpha", {0.0}}, {"k_max", 3}}}});
    const auto out = workdir() / "scan.csv";
    REQUIRE(run("singular --config " + cfg.string() + " --out " + out.string()) == 0);
    const auto rows = csv_rows(slurp(out));
    REQUIRE(rows.size() == 3);
    for (int k = 1; k <= 3; ++k)
        CHECK(std::stod(rows[k - 1][2]) == doctest::Approx(std::pow(k * pi / 2, 2) + 1).epsilon(1e-9));

    const auto lad = write_config(
        "odd.json", {{"singular", {{"mode", "exceptional"}, {"variant", "odd"}, {"n", 1},
                                   {"deltas", {0.1, 0.05}}, {"k_max", 4}}}});
    const auto j = workdir() / "odd.json.out";
    REQUIRE(run("singular --config " + lad.string() + " --format json --out " + j.string()) == 0);
    const auto doc = json::parse(slurp(j));
    CHECK(doc["meta"]["gap_nonvanishing"] == true);
    CHECK(doc["rows"].size() == 2);
}
