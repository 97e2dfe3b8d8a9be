#include "soh/config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

namespace soh {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::optional<Scenario> scenario_from(const std::string& s) {
    if (s == "riemann") return Scenario::riemann;
    if (s == "collision") return Scenario::collision;
    if (s == "crowd") return Scenario::crowd;
    if (s == "sweep") return Scenario::sweep;
    return std::nullopt;
}

[[noreturn]] void mismatch(const std::string& key, const char* type, const std::string& value, int line) {
    std::ostringstream msg;
    msg << "line " << line << ": key '" << key << "' expects " << type << ", got '" << value << "'";
    throw TypeMismatchError(msg.str());
}

double to_double(const std::string& key, const std::string& v, int line) {
    if (v.empty()) mismatch(key, "a number", v, line);
    char* end = nullptr;
    errno = 0;
    const double d = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size() || errno == ERANGE) mismatch(key, "a number", v, line);
    return d;
}

long long to_int(const std::string& key, const std::string& v, int line) {
    long long x = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) mismatch(key, "an integer", v, line);
    return x;
}

bool to_bool(const std::string& key, const std::string& v, int line) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    mismatch(key, "a boolean", v, line);
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&, int)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        auto num = [&t](const char* k, double ModelParams::*f) {
            t[k] = [f](RunConfig& c, const std::string& key, const std::string& v, int line) {
                c.params.*f = to_double(key, v, line);
            };
        };
        num("c", &ModelParams::c);
        num("lambda", &ModelParams::lambda);
        num("epsilon", &ModelParams::epsilon);
        num("beta", &ModelParams::beta);
        num("gamma", &ModelParams::gamma);
        num("rho_star", &ModelParams::rho_star);
        num("kappa", &ModelParams::kappa);
        num("dt", &ModelParams::dt);
        num("dx", &ModelParams::dx);
        num("dy", &ModelParams::dy);
        num("t_end", &ModelParams::t_end);
        t["use_background"] = [](RunConfig& c, const std::string& k, const std::string& v, int line) {
            c.params.use_background = to_bool(k, v, line);
        };
        t["half_pressure_weight_1d"] = [](RunConfig& c, const std::string& k, const std::string& v, int line) {
            c.params.half_pressure_weight_1d = to_bool(k, v, line);
        };
        t["seed"] = [](RunConfig& c, const std::string& k, const std::string& v, int line) {
            const long long s = to_int(k, v, line);
            if (s < 0) mismatch(k, "a non-negative integer", v, line);
            c.params.seed = static_cast<std::uint64_t>(s);
        };
        auto count = [&t](const char* k, int RunConfig::*f) {
            t[k] = [f](RunConfig& c, const std::string& key, const std::string& v, int line) {
                const long long x = to_int(key, v, line);
                if (x < 0 || x > 1000000) mismatch(key, "a count in [0, 1e6]", v, line);
                c.*f = static_cast<int>(x);
            };
        };
        count("nx", &RunConfig::nx);
        count("ny", &RunConfig::ny);
        count("snapshot_every", &RunConfig::snapshot_every);
        t["output_dir"] = [](RunConfig& c, const std::string&, const std::string& v, int) { c.output_dir = v; };
        t["x0"] = [](RunConfig& c, const std::string& k, const std::string& v, int line) { c.x0 = to_double(k, v, line); };
        t["congested_tol"] = [](RunConfig& c, const std::string& k, const std::string& v, int line) {
            c.congested_tol = to_double(k, v, line);
        };
        t["explicit_reference"] = [](RunConfig& c, const std::string& k, const std::string& v, int line) {
            c.explicit_reference = to_bool(k, v, line);
        };
        t["epsilons"] = [](RunConfig& c, const std::string& k, const std::string& v, int line) {
            c.epsilons.clear();
            std::stringstream ss(v);
            std::string item;
            while (std::getline(ss, item, ',')) c.epsilons.push_back(to_double(k, trim(item), line));
            if (c.epsilons.empty()) mismatch(k, "a comma-separated list of numbers", v, line);
        };
        return t;
    }();
    return table;
}

struct Entry {
    std::string key;
    std::string value;
    int line;
};

}  // namespace

const char* scenario_name(Scenario s) {
    switch (s) {
        case Scenario::riemann: return "riemann";
        case Scenario::collision: return "collision";
        case Scenario::crowd: return "crowd";
        case Scenario::sweep: return "sweep";
    }
    return "?";
}

RunConfig default_config(Scenario s) {
    RunConfig c;
    c.scenario = s;
    switch (s) {
        case Scenario::riemann:
            c.nx = 200;
            c.ny = 1;
            c.params.dy = 1.0;
            c.params.t_end = 0.14;
            break;
        case Scenario::collision:
            break;
        case Scenario::crowd:
            c.params.beta = 0.5;
            c.params.t_end = 0.075;
            break;
        case Scenario::sweep:
            c.epsilons = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
            break;
    }
    return c;
}

void RunConfig::validate() const {
    try {
        params.validate();
    } catch (const ConfigError& e) {
        throw ConstraintError(e.what());
    }
    auto fail = [](const std::string& m) { throw ConstraintError(m); };
    if (nx < 4) fail("nx must be >= 4");
    if (ny < 1 || (ny > 1 && ny < 4)) fail("ny must be 1 or >= 4");
    if (snapshot_every < 0) fail("snapshot_every must be >= 0");
    if (!(congested_tol > 0.0)) fail("congested_tol must be > 0");
    switch (scenario) {
        case Scenario::riemann:
            if (!(x0 > 0.0 && x0 < 1.0)) fail("riemann: x0 must lie in (0, 1)");
            break;
        case Scenario::collision:
        case Scenario::sweep:
            if (ny == 1) fail(std::string(scenario_name(scenario)) + ": needs a 2D grid (ny > 1)");
            break;
        case Scenario::crowd:
            if (params.c != 1.0) fail("crowd: the crowd model requires c = 1");
            if (ny == 1) fail("crowd: needs a 2D grid (ny > 1)");
            if (nx % 5 != 0 || ny % 5 != 0) fail("crowd: nx and ny must be multiples of 5");
            break;
    }
    if (scenario == Scenario::sweep) {
        if (epsilons.empty()) fail("sweep: epsilons must not be empty");
        for (double e : epsilons)
            if (!(e > 0.0)) fail("sweep: every epsilon must be > 0");
    }
}

RunConfig parse_config(std::string_view text) {
    std::vector<Entry> global;
    std::map<std::string, std::vector<Entry>> sections;
    std::string section;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string s = trim(std::string_view(raw).substr(0, hash));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError("line " + std::to_string(line) + ": malformed section header");
            section = trim(std::string_view(s).substr(1, s.size() - 2));
            if (!scenario_from(section)) throw UnknownKeyError("line " + std::to_string(line) + ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line) + ": expected key = value");
        Entry e{trim(std::string_view(s).substr(0, eq)), trim(std::string_view(s).substr(eq + 1)), line};
        if (e.key != "scenario" && !setters().count(e.key))
            throw UnknownKeyError("line " + std::to_string(line) + ": unknown key '" + e.key + "'");
        if (section.empty()) global.push_back(std::move(e));
        else {
            if (e.key == "scenario") throw ConfigError("line " + std::to_string(line) + ": scenario must be set outside sections");
            sections[section].push_back(std::move(e));
        }
    }

    std::optional<Scenario> scen;
    for (const Entry& e : global) {
        if (e.key != "scenario") continue;
        if (e.value.empty()) throw ConstraintError("line " + std::to_string(e.line) + ": scenario must not be empty");
        scen = scenario_from(e.value);
        if (!scen) throw ConstraintError("line " + std::to_string(e.line) + ": unknown scenario '" + e.value + "'");
    }
    if (!scen) throw ConstraintError("missing required key 'scenario'");

    RunConfig cfg = default_config(*scen);
    for (const Entry& e : global)
        if (e.key != "scenario") setters().at(e.key)(cfg, e.key, e.value, e.line);
    for (const Entry& e : sections[scenario_name(*scen)]) setters().at(e.key)(cfg, e.key, e.value, e.line);
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys{"scenario"};
    for (const auto& [k, _] : setters()) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    return keys;
}

}  // namespace soh
