#include <catch2/catch_amalgamated.hpp>

#include "pdmforge/cli/commands.hpp"
#include "pdmforge/cli/config.hpp"
#include "pdmforge/cli/emit.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <unistd.h>

using namespace pdm::cli;
namespace fs = std::filesystem;
using Catch::Approx;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("pdmforge_test_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
}

int run(const std::string& cmd, const fs::path& cfg, const fs::path& out, bool override_guard = false) {
    std::ostringstream err;
    return run_command(cmd, cfg.string(), out.string(), CommandOptions{override_guard}, err);
}

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    [[nodiscard]] std::size_t col(const std::string& name) const {
        return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
    }
};

Csv read_csv(const fs::path& p) {
    Csv out;
    std::istringstream in(slurp(p));
    std::string line;
    std::getline(in, line);
    std::stringstream hs(line);
    for (std::string cell; std::getline(hs, cell, ',');) out.header.push_back(cell);
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) {
            // from_chars, unlike stod, accepts subnormal values.
            double v = 0.0;
            std::from_chars(cell.data(), cell.data() + cell.size(), v);
            row.push_back(v);
        }
        out.rows.push_back(row);
    }
    return out;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

} // namespace

TEST_CASE("format_double round-trips in shortest form", "[cli]") {
    CHECK(format_double(1.5) == "1.5");
    CHECK(format_double(-0.0) == "0");
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(NAN) == "nan");
    for (double v : {1.0 / 3.0, 2.0 / 7.0 * 1e-200, -123456.789e150, 5e-324}) {
        const std::string s = format_double(v);
        double back = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        CHECK(back == v);
        CHECK(s.size() <= 24);
    }
}

TEST_CASE("config defaults and validation", "[cli][config]") {
    const RunConfig d = parse_config("{}");
    CHECK(d.system.beta == 1.0);
    CHECK(d.system.nu == 2.0);
    CHECK(d.solver.k == 4);
    CHECK_FALSE(d.grid.has_value());

    const auto line_of = [](const std::string& text) {
        try {
            (void)parse_config(text);
        } catch (const ConfigError& e) {
            return e.line();
        }
        return -1;
    };
    CHECK(line_of("{\n  \"system\": {\n    \"beta\": -1\n  }\n}") == 3);
    CHECK(line_of("{\n  \"system\": {\"nu\": 2},\n  \"extra\": 1\n}") == 3);
    CHECK(line_of("{\n  \"grid\": {\"x_lo\": 1, \"x_hi\": 0, \"n_points\": 100}\n}") == 2);
    CHECK(line_of("{\n  \"solver\": {\n    \"k\": 0\n  }\n}") == 3);
    CHECK(line_of("{\n  \"system\": {\"n_max\": 1.5}\n}") == 2);
    CHECK(line_of("{\n  \"system\": {\"beta\": 1,,}\n}") == 2);
    CHECK(line_of("{\"perturbation\": {\"kind\": \"custom\", \"generator\": \"cubic\"}}") == 1);
    CHECK(line_of("{\"solver\": {\"k\": 5}}") == 1);  // more than n_max + 1 levels
    CHECK(line_of("{\"solve\": {\"ordering\": {\"a\": 0, \"b\": 0, \"c\": 0}}}") == 1);
    CHECK(line_of("{\"solve\": {\"mass\": {\"kind\": \"constant\", \"rate\": 1}}}") == 1);
    CHECK(line_of("{\"solve\": {\"mass\": {\"kind\": \"constant\", \"value\": 1}}}") == -1);
    CHECK_THROWS_AS(load_config("/nonexistent/pdmforge.json"), ConfigError);
}

TEST_CASE("construct writes system.csv and levels.json", "[cli]") {
    TempDir tmp("construct");
    const auto cfg = write_config(tmp.path, "c.json", R"({"system": {"beta": 1, "nu": 2, "n_max": 2}})");
    REQUIRE(run("construct", cfg, tmp.path / "out") == kExitOk);
    const auto levels = read_json(tmp.path / "out" / "levels.json");
    CHECK(levels["E"] == nlohmann::json::array({1.5, 2.5, 3.5}));
    CHECK(levels["system"]["beta"] == 1.0);
    CHECK(levels["grid"]["n_points"] == 8000);

    const Csv csv = read_csv(tmp.path / "out" / "system.csv");
    CHECK(csv.header == std::vector<std::string>{"x", "V", "psi_0", "psi_1", "psi_2"});
    CHECK(csv.rows.size() == 8000);

    // Nodeless ground state.
    int changes = 0;
    double prev = 0.0;
    for (const auto& row : csv.rows) {
        const double v = row[csv.col("psi_0")];
        if (v != 0.0 && prev != 0.0 && (v < 0.0) != (prev < 0.0)) ++changes;
        if (v != 0.0) prev = v;
    }
    CHECK(changes == 0);

    const auto bad = write_config(tmp.path, "b.json", R"({"system": {"beta": -1}})");
    CHECK(run("construct", bad, tmp.path / "bad") == kExitConfig);
    CHECK_FALSE(fs::exists(tmp.path / "bad" / "levels.json"));
}

TEST_CASE("perturb writes perturbation.csv and delta.json", "[cli]") {
    TempDir tmp("perturb");
    const auto closed = write_config(tmp.path, "p.json", R"({"perturbation": {"kind": "two_over_g"}})");
    REQUIRE(run("perturb", closed, tmp.path / "a") == kExitOk);
    const auto delta = read_json(tmp.path / "a" / "delta.json");
    CHECK(delta["deltaE"] == 1.0);
    CHECK(delta["energy_gauge"] == false);
    CHECK(delta["E_extended"] == 2.5);
    const Csv csv = read_csv(tmp.path / "a" / "perturbation.csv");
    CHECK(csv.header == std::vector<std::string>{"x", "h", "deltaV", "psi_ext"});

    const auto excited = write_config(tmp.path, "n.json", R"({"perturbation": {"kind": "two_over_g", "level": 1}})");
    CHECK(run("perturb", excited, tmp.path / "b") == kExitNode);
    CHECK(run("perturb", excited, tmp.path / "b", true) == kExitOk);

    const auto zero = write_config(tmp.path, "z.json", R"({"perturbation": {"kind": "custom", "generator": "zero"}})");
    REQUIRE(run("perturb", zero, tmp.path / "c") == kExitOk);
    const Csv zc = read_csv(tmp.path / "c" / "perturbation.csv");
    for (const auto& row : zc.rows) CHECK(row[zc.col("deltaV")] == 0.0);
    CHECK(read_json(tmp.path / "c" / "delta.json")["deltaE"] == 0.0);

    const auto ho = write_config(tmp.path, "h.json",
                                 R"({"system": {"kind": "harmonic_limit"}, "perturbation": {"kind": "two_over_g"}})");
    CHECK(run("perturb", ho, tmp.path / "d") == kExitConfig);
}

TEST_CASE("verify writes verify.json and maps failures", "[cli]") {
    TempDir tmp("verify");
    const auto def = write_config(tmp.path, "d.json", "{}");
    REQUIRE(run("verify", def, tmp.path / "a") == kExitOk);
    const auto v = read_json(tmp.path / "a" / "verify.json");
    CHECK(v["all_pass"] == true);
    CHECK(v["levels"].size() == 4);
    CHECK(v["max_relative_gap"].get<double>() <= 1e-3);

    const auto narrow = write_config(tmp.path, "n.json", R"({"grid": {"x_lo": -2, "x_hi": 2, "n_points": 400}})");
    CHECK(run("verify", narrow, tmp.path / "b") == kExitBoundary);

    const auto k0 = write_config(tmp.path, "k.json", R"({"solver": {"k": 0}})");
    CHECK(run("verify", k0, tmp.path / "c") == kExitConfig);

    const auto strict = write_config(tmp.path, "s.json", R"({"solver": {"energy_tol": 1e-9}})");
    CHECK(run("verify", strict, tmp.path / "e") == kExitVerifyFailed);
    CHECK(read_json(tmp.path / "e" / "verify.json")["all_pass"] == false);
}

TEST_CASE("solve writes spectrum.json and spectrum.csv", "[cli]") {
    TempDir tmp("solve");
    const auto ho = write_config(tmp.path, "h.json", R"({
        "solve": {"mass": {"kind": "constant", "value": 1}, "potential": {"kind": "harmonic"},
                  "ordering": {"a": 0, "b": -1, "c": 0}},
        "solver": {"k": 3}})");
    REQUIRE(run("solve", ho, tmp.path / "a") == kExitOk);
    const auto s = read_json(tmp.path / "a" / "spectrum.json");
    for (int n = 0; n < 3; ++n) CHECK(std::abs(s["values"][n].get<double>() - (2 * n + 1)) <= 1e-3);

    // Constant mass: any valid ordering gives the same spectrum.
    const auto other = write_config(tmp.path, "o.json", R"({
        "solve": {"mass": {"kind": "constant", "value": 1}, "potential": {"kind": "harmonic"},
                  "ordering": {"a": -0.5, "b": 0, "c": -0.5}},
        "solver": {"k": 3}})");
    REQUIRE(run("solve", other, tmp.path / "b") == kExitOk);
    CHECK(read_json(tmp.path / "b" / "spectrum.json")["values"] == s["values"]);

    const auto veff = write_config(tmp.path, "v.json", R"({
        "solve": {"mass": {"kind": "exponential", "rate": -1}, "potential": {"kind": "zero"},
                  "ordering": {"a": -1, "b": 0, "c": 0}},
        "grid": {"x_lo": -5, "x_hi": 5, "n_points": 1001},
        "solver": {"k": 1}})");
    REQUIRE(run("solve", veff, tmp.path / "c") == kExitOk);
    const Csv csv = read_csv(tmp.path / "c" / "spectrum.csv");
    CHECK(csv.rows[500][csv.col("x")] == 0.0);
    CHECK(csv.rows[500][csv.col("V_eff")] == Approx(-0.5).epsilon(1e-14));

    const auto bad = write_config(tmp.path, "b.json", R"({"solve": {"ordering": {"a": 0, "b": 0, "c": 0}}})");
    CHECK(run("solve", bad, tmp.path / "d") == kExitConfig);

    const auto rational = write_config(tmp.path, "r.json", R"({
        "solve": {"mass": {"kind": "rational", "value": 2, "width": 3}, "potential": {"kind": "harmonic"}},
        "solver": {"k": 2}})");
    CHECK(run("solve", rational, tmp.path / "e") == kExitOk);
}

TEST_CASE("unknown commands and unwritable outputs", "[cli]") {
    TempDir tmp("io");
    const auto def = write_config(tmp.path, "d.json", "{}");
    CHECK(run("explode", def, tmp.path / "a") == kExitConfig);
    std::ofstream(tmp.path / "file") << "x";
    CHECK(run("construct", def, tmp.path / "file" / "sub") == kExitIo);
}

TEST_CASE("construct then verify round-trips on the parameter sweep", "[cli][property]") {
    TempDir tmp("sweep");
    for (double beta : {0.5, 1.0, 2.0}) {
        for (double nu : {1.0, 2.0, 3.0}) {
            std::ostringstream text;
            text << R"({"system": {"beta": )" << beta << R"(, "nu": )" << nu << "}}";
            const auto cfg = write_config(tmp.path, "c.json", text.str());
            const fs::path out = tmp.path / "out";
            CHECK(run("construct", cfg, out) == kExitOk);
            CHECK(run("verify", cfg, out) == kExitOk);
        }
    }
}

TEST_CASE("identical configs give byte-identical outputs", "[cli][property]") {
    TempDir tmp("determinism");
    const auto cfg = write_config(tmp.path, "c.json", R"({
        "system": {"beta": 1.3, "nu": 1.7, "n_max": 2},
        "grid": {"x_lo": -8, "x_hi": 20, "n_points": 3001},
        "perturbation": {"kind": "custom", "generator": "linear", "value": 0.05},
        "solver": {"k": 3},
        "solve": {"mass": {"kind": "rational"}, "potential": {"kind": "exponential", "rate": 0.2}}})");
    for (const char* cmd : {"construct", "perturb", "verify", "solve"}) {
        REQUIRE(run(cmd, cfg, tmp.path / "a") == kExitOk);
        REQUIRE(run(cmd, cfg, tmp.path / "b") == kExitOk);
    }
    for (const char* file : {"system.csv", "levels.json", "perturbation.csv", "delta.json", "verify.json",
                             "spectrum.json", "spectrum.csv"}) {
        INFO(file);
        CHECK(slurp(tmp.path / "a" / file) == slurp(tmp.path / "b" / file));
        CHECK_FALSE(slurp(tmp.path / "a" / file).empty());
    }
}
