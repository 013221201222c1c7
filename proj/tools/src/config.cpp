#include "pdmforge/cli/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace pdm::cli {

namespace {

using nlohmann::json;

// Locates a key path in the raw text to report a line number. Each segment
// is searched after the previous one, which is exact for configs without
// duplicated key names across blocks and a close hint otherwise.
class LineLocator {
public:
    explicit LineLocator(const std::string& text) : text_(text) {}

    [[nodiscard]] int line_of(const std::vector<std::string>& path) const {
        std::size_t pos = 0;
        std::size_t found = std::string::npos;
        for (const std::string& seg : path) {
            const std::size_t p = text_.find('"' + seg + '"', pos);
            if (p == std::string::npos) break;
            found = p;
            pos = p + seg.size() + 2;
        }
        if (found == std::string::npos) return 1;
        return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<long>(found), '\n'));
    }

private:
    const std::string& text_;
};

std::string join(const std::vector<std::string>& path) {
    std::string out;
    for (const std::string& s : path) out += (out.empty() ? "" : ".") + s;
    return out;
}

class Reader {
public:
    explicit Reader(const std::string& text) : loc_(text) {}

    [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& msg) const {
        const int line = loc_.line_of(path);
        std::ostringstream os;
        os << "config line " << line << ": " << join(path) << ": " << msg;
        throw ConfigError(os.str(), line);
    }

    void only_keys(const json& obj, const std::vector<std::string>& path, const std::set<std::string>& allowed) const {
        if (!obj.is_object()) fail(path, "expected an object");
        for (const auto& [key, _] : obj.items()) {
            if (!allowed.contains(key)) {
                auto p = path;
                p.push_back(key);
                fail(p, "unknown key");
            }
        }
    }

    [[nodiscard]] double number(const json& obj, const std::vector<std::string>& path, const std::string& key,
                                double fallback) const {
        if (!obj.contains(key)) return fallback;
        auto p = path;
        p.push_back(key);
        const json& v = obj.at(key);
        if (!v.is_number()) fail(p, "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(p, "must be finite");
        return d;
    }

    [[nodiscard]] long long integer(const json& obj, const std::vector<std::string>& path, const std::string& key,
                                    long long fallback) const {
        if (!obj.contains(key)) return fallback;
        auto p = path;
        p.push_back(key);
        const json& v = obj.at(key);
        if (!v.is_number_integer()) fail(p, "expected an integer");
        return v.get<long long>();
    }

    [[nodiscard]] std::string string(const json& obj, const std::vector<std::string>& path, const std::string& key,
                                     const std::string& fallback, const std::set<std::string>& choices) const {
        if (!obj.contains(key)) return fallback;
        auto p = path;
        p.push_back(key);
        const json& v = obj.at(key);
        if (!v.is_string()) fail(p, "expected a string");
        std::string s = v.get<std::string>();
        if (!choices.contains(s)) {
            std::string list;
            for (const auto& c : choices) list += (list.empty() ? "" : ", ") + c;
            fail(p, "'" + s + "' is not one of: " + list);
        }
        return s;
    }

    [[nodiscard]] bool boolean(const json& obj, const std::vector<std::string>& path, const std::string& key,
                               bool fallback) const {
        if (!obj.contains(key)) return fallback;
        auto p = path;
        p.push_back(key);
        if (!obj.at(key).is_boolean()) fail(p, "expected true or false");
        return obj.at(key).get<bool>();
    }

private:
    LineLocator loc_;
};

// Registry parameter names and defaults per kind.
using ParamTable = std::map<std::string, std::vector<std::pair<std::string, double>>>;

const ParamTable& mass_registry() {
    static const ParamTable t = {
        {"constant", {{"value", 1.0}}},
        {"exponential", {{"rate", -1.0}, {"scale", 1.0}}},
        {"rational", {{"value", 1.0}, {"width", 1.0}}},
    };
    return t;
}

const ParamTable& potential_registry() {
    static const ParamTable t = {
        {"zero", {}},
        {"harmonic", {{"k", 1.0}}},
        {"polynomial", {}},
        {"exponential", {{"amplitude", 1.0}, {"rate", 1.0}}},
        {"laguerre_exponential", {{"beta", 1.0}, {"nu", 2.0}}},
    };
    return t;
}

RegistryEntry read_entry(const Reader& r, const json& obj, const std::vector<std::string>& path,
                         const ParamTable& table, const std::string& fallback_kind) {
    std::set<std::string> kinds;
    for (const auto& [k, _] : table) kinds.insert(k);
    if (!obj.is_object()) r.fail(path, "expected an object");
    RegistryEntry e;
    e.kind = r.string(obj, path, "kind", fallback_kind, kinds);
    std::set<std::string> allowed{"kind"};
    for (const auto& [name, def] : table.at(e.kind)) allowed.insert(name);
    if (e.kind == "polynomial") allowed.insert("coefficients");
    r.only_keys(obj, path, allowed);
    for (const auto& [name, def] : table.at(e.kind)) e.params.emplace_back(name, r.number(obj, path, name, def));
    if (e.kind == "polynomial") {
        auto p = path;
        p.push_back("coefficients");
        if (!obj.contains("coefficients") || !obj.at("coefficients").is_array() || obj.at("coefficients").empty()) {
            r.fail(p, "polynomial potential needs a non-empty coefficient array");
        }
        for (const json& c : obj.at("coefficients")) {
            if (!c.is_number() || !std::isfinite(c.get<double>())) r.fail(p, "coefficients must be finite numbers");
            e.coefficients.push_back(c.get<double>());
        }
    }
    return e;
}

} // namespace

double RegistryEntry::param(const std::string& name) const {
    for (const auto& [k, v] : params) {
        if (k == name) return v;
    }
    throw std::out_of_range("registry parameter '" + name + "' not set for kind " + kind);
}

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // byte offset -> line
        const std::size_t at = std::min<std::size_t>(e.byte, text.size());
        const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(at), '\n'));
        throw ConfigError("config line " + std::to_string(line) + ": malformed JSON: " + e.what(), line);
    }

    const Reader r(text);
    r.only_keys(doc, {}, {"system", "grid", "perturbation", "solver", "solve", "output"});
    RunConfig cfg;

    if (doc.contains("system")) {
        const json& s = doc.at("system");
        const std::vector<std::string> p{"system"};
        r.only_keys(s, p, {"kind", "beta", "nu", "n_max", "split_tol"});
        cfg.system.kind = r.string(s, p, "kind", cfg.system.kind, {"laguerre_exponential", "harmonic_limit"});
        cfg.system.beta = r.number(s, p, "beta", cfg.system.beta);
        cfg.system.nu = r.number(s, p, "nu", cfg.system.nu);
        const long long n_max = r.integer(s, p, "n_max", cfg.system.n_max);
        cfg.system.split_tol = r.number(s, p, "split_tol", cfg.system.split_tol);
        if (!(cfg.system.beta > 0.0)) r.fail({"system", "beta"}, "beta must be positive");
        if (!(cfg.system.nu > -1.0)) r.fail({"system", "nu"}, "nu must exceed -1");
        if (n_max < 0 || n_max > 64) r.fail({"system", "n_max"}, "n_max must be in [0, 64]");
        cfg.system.n_max = static_cast<int>(n_max);
        if (!(cfg.system.split_tol > 0.0)) r.fail({"system", "split_tol"}, "split_tol must be positive");
    }

    if (doc.contains("grid")) {
        const json& g = doc.at("grid");
        const std::vector<std::string> p{"grid"};
        r.only_keys(g, p, {"x_lo", "x_hi", "n_points"});
        for (const char* key : {"x_lo", "x_hi", "n_points"}) {
            if (!g.contains(key)) r.fail(p, std::string("missing '") + key + "'");
        }
        GridBlock gb;
        gb.x_lo = r.number(g, p, "x_lo", 0.0);
        gb.x_hi = r.number(g, p, "x_hi", 0.0);
        const long long n = r.integer(g, p, "n_points", 0);
        if (!(gb.x_hi > gb.x_lo)) r.fail({"grid", "x_hi"}, "x_hi must exceed x_lo");
        if (n < 16 || n > 20'000'000) r.fail({"grid", "n_points"}, "n_points must be in [16, 2e7]");
        gb.n_points = static_cast<std::size_t>(n);
        cfg.grid = gb;
    }

    if (doc.contains("perturbation")) {
        const json& q = doc.at("perturbation");
        const std::vector<std::string> p{"perturbation"};
        r.only_keys(q, p, {"kind", "generator", "value", "level", "check_tol"});
        cfg.perturbation.kind = r.string(q, p, "kind", cfg.perturbation.kind, {"two_over_g", "custom"});
        cfg.perturbation.generator =
            r.string(q, p, "generator", cfg.perturbation.generator, {"zero", "constant", "two_over_g", "linear"});
        if (cfg.perturbation.kind == "two_over_g" && q.contains("generator")) {
            r.fail({"perturbation", "generator"}, "generator applies to kind 'custom' only");
        }
        cfg.perturbation.value = r.number(q, p, "value", cfg.perturbation.value);
        const long long level = r.integer(q, p, "level", 0);
        if (level < 0 || level > cfg.system.n_max) {
            r.fail({"perturbation", "level"}, "level must be in [0, system.n_max]");
        }
        cfg.perturbation.level = static_cast<int>(level);
        cfg.perturbation.check_tol = r.number(q, p, "check_tol", cfg.perturbation.check_tol);
        if (!(cfg.perturbation.check_tol > 0.0)) r.fail({"perturbation", "check_tol"}, "check_tol must be positive");
    }

    if (doc.contains("solver")) {
        const json& s = doc.at("solver");
        const std::vector<std::string> p{"solver"};
        r.only_keys(s, p, {"k", "solver_tol", "max_sweeps", "boundary_tol", "energy_tol", "overlap_tol"});
        const long long k = r.integer(s, p, "k", static_cast<long long>(cfg.solver.k));
        if (k < 1) r.fail({"solver", "k"}, "k must be at least 1");
        cfg.solver.k = static_cast<std::size_t>(k);
        cfg.solver.solver_tol = r.number(s, p, "solver_tol", cfg.solver.solver_tol);
        const long long sweeps = r.integer(s, p, "max_sweeps", cfg.solver.max_sweeps);
        if (sweeps < 1 || sweeps > 10000) r.fail({"solver", "max_sweeps"}, "max_sweeps must be in [1, 10000]");
        cfg.solver.max_sweeps = static_cast<int>(sweeps);
        cfg.solver.boundary_tol = r.number(s, p, "boundary_tol", cfg.solver.boundary_tol);
        cfg.solver.energy_tol = r.number(s, p, "energy_tol", cfg.solver.energy_tol);
        cfg.solver.overlap_tol = r.number(s, p, "overlap_tol", cfg.solver.overlap_tol);
        for (const char* key : {"solver_tol", "boundary_tol", "energy_tol"}) {
            if (s.contains(key) && !(s.at(key).get<double>() > 0.0)) r.fail({"solver", key}, "must be positive");
        }
        if (!(cfg.solver.overlap_tol > 0.0 && cfg.solver.overlap_tol <= 1.0)) {
            r.fail({"solver", "overlap_tol"}, "overlap_tol must be in (0, 1]");
        }
    }

    if (doc.contains("solve")) {
        const json& s = doc.at("solve");
        const std::vector<std::string> p{"solve"};
        r.only_keys(s, p, {"mass", "potential", "ordering"});
        cfg.has_solve = true;
        if (s.contains("mass")) cfg.solve.mass = read_entry(r, s.at("mass"), {"solve", "mass"}, mass_registry(), "constant");
        if (s.contains("potential")) {
            cfg.solve.potential =
                read_entry(r, s.at("potential"), {"solve", "potential"}, potential_registry(), "harmonic");
        }
        if (s.contains("ordering")) {
            const json& o = s.at("ordering");
            const std::vector<std::string> op{"solve", "ordering"};
            r.only_keys(o, op, {"a", "b", "c"});
            for (const char* key : {"a", "b", "c"}) {
                if (!o.contains(key)) r.fail(op, std::string("missing '") + key + "'");
            }
            cfg.solve.a = r.number(o, op, "a", 0.0);
            cfg.solve.b = r.number(o, op, "b", 0.0);
            cfg.solve.c = r.number(o, op, "c", 0.0);
        }
        const double sum = cfg.solve.a + cfg.solve.b + cfg.solve.c;
        const double scale = std::max(1.0, std::abs(cfg.solve.a) + std::abs(cfg.solve.b) + std::abs(cfg.solve.c));
        if (std::abs(sum + 1.0) > 4.0 * std::numeric_limits<double>::epsilon() * scale) {
            r.fail({"solve", "ordering"}, "a + b + c must equal -1");
        }
        const RegistryEntry& m = cfg.solve.mass;
        if (m.kind == "constant" && !(m.param("value") > 0.0)) r.fail({"solve", "mass", "value"}, "mass must be positive");
        if (m.kind == "exponential" && !(m.param("scale") > 0.0)) r.fail({"solve", "mass", "scale"}, "scale must be positive");
        if (m.kind == "rational") {
            if (!(m.param("value") > 0.0)) r.fail({"solve", "mass", "value"}, "mass must be positive");
            if (!(m.param("width") > 0.0)) r.fail({"solve", "mass", "width"}, "width must be positive");
        }
        const RegistryEntry& v = cfg.solve.potential;
        if (v.kind == "laguerre_exponential") {
            if (!(v.param("beta") > 0.0)) r.fail({"solve", "potential", "beta"}, "beta must be positive");
            if (!(v.param("nu") > -1.0)) r.fail({"solve", "potential", "nu"}, "nu must exceed -1");
        }
    }

    if (doc.contains("output")) {
        const json& o = doc.at("output");
        const std::vector<std::string> p{"output"};
        r.only_keys(o, p, {"eigenvectors"});
        cfg.output.eigenvectors = r.boolean(o, p, "eigenvectors", cfg.output.eigenvectors);
    }

    // Cross-block checks.
    const std::size_t n_points = cfg.grid ? cfg.grid->n_points : (cfg.system.kind == "harmonic_limit" ? 2000 : 8000);
    if (doc.contains("solver") && cfg.solver.k > n_points / 4) {
        r.fail({"solver", "k"}, "k exceeds n_points/4; refine the grid");
    }
    if (doc.contains("solver") && !cfg.has_solve && cfg.solver.k > static_cast<std::size_t>(cfg.system.n_max) + 1) {
        r.fail({"solver", "k"}, "k exceeds the constructed levels (system.n_max + 1)");
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'", 0);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

} // namespace pdm::cli
