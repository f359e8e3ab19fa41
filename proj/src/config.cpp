#include "nsbiot/config.hpp"

#include "nsbiot/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace nsbiot {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& k) {
    if (k.empty() || k.front() == '.' || k.back() == '.') return false;
    return std::all_of(k.begin(), k.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; });
}

double to_double(const std::string& key, const std::string& v) {
    const char* s = v.c_str();
    char* end = nullptr;
    errno = 0;
    const double d = std::strtod(s, &end);
    if (end == s || *end != '\0' || errno == ERANGE) throw ConfigError(key, "expected a number, got '" + v + "'");
    return d;
}

} // namespace

ConfigFile ConfigFile::parse(const std::string& text) {
    ConfigFile f;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("", "line " + std::to_string(line) + ": expected 'key = value'");
        const std::string key = trim(body.substr(0, eq));
        std::string value = trim(body.substr(eq + 1));
        if (!valid_key(key)) throw ConfigError("", "line " + std::to_string(line) + ": invalid key '" + key + "'");
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        if (f.entries_.count(key))
            throw ConfigError(key, "line " + std::to_string(line) + ": repeated key (first on line " +
                                       std::to_string(f.entries_[key].line) + ")");
        f.entries_[key] = {value, line};
    }
    return f;
}

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

const ConfigFile::Entry* ConfigFile::find(const std::string& key) const {
    used_.insert(key);
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

std::string ConfigFile::get_string(const std::string& key, const std::string& fallback) const {
    const Entry* e = find(key);
    return e ? e->value : fallback;
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
    const Entry* e = find(key);
    return e ? to_double(key, e->value) : fallback;
}

std::optional<double> ConfigFile::get_optional_double(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) return std::nullopt;
    return to_double(key, e->value);
}

int ConfigFile::get_int(const std::string& key, int fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    const char* s = e->value.c_str();
    char* end = nullptr;
    errno = 0;
    const long v = std::strtol(s, &end, 10);
    if (end == s || *end != '\0' || errno == ERANGE || v < -1000000000L || v > 1000000000L)
        throw ConfigError(key, "expected an integer, got '" + e->value + "'");
    return static_cast<int>(v);
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
    if (e->value == "false" || e->value == "0" || e->value == "no") return false;
    throw ConfigError(key, "expected true or false, got '" + e->value + "'");
}

std::vector<double> ConfigFile::get_doubles(const std::string& key) const {
    const Entry* e = find(key);
    std::vector<double> out;
    if (!e) return out;
    std::istringstream in(e->value);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(to_double(key, trim(item)));
    return out;
}

std::vector<std::string> ConfigFile::unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, e] : entries_)
        if (!used_.count(k)) out.push_back(k);
    return out;
}

const char* scenario_name(ScenarioKind k) {
    switch (k) {
    case ScenarioKind::example1_mms: return "example1_mms";
    case ScenarioKind::example3_filter: return "example3_filter";
    case ScenarioKind::custom: return "custom";
    }
    return "?";
}

ScenarioConfig parse_config(const ConfigFile& f) {
    ScenarioConfig c;
    const std::string name = f.get_string("scenario", "");
    if (name == "example1_mms")
        c.scenario = ScenarioKind::example1_mms;
    else if (name == "example3_filter")
        c.scenario = ScenarioKind::example3_filter;
    else if (name == "custom")
        c.scenario = ScenarioKind::custom;
    else if (name.empty())
        throw ConfigError("scenario", "missing; expected example1_mms, example3_filter or custom");
    else
        throw ConfigError("scenario", "unknown scenario '" + name + "'");

    // Scenario defaults first, then overrides.
    c.material = f.get_string("filter.material", "hard");
    if (c.material != "hard" && c.material != "soft")
        throw ConfigError("filter.material", "expected hard or soft, got '" + c.material + "'");
    switch (c.scenario) {
    case ScenarioKind::example1_mms:
        c.levels = example1_levels();
        c.levels.resize(3);
        c.initial = InitialMode::analytic;
        break;
    case ScenarioKind::example3_filter:
        c.params = filter_params(c.material);
        c.dt = 1.0;
        c.T = 80.0;
        c.initial = InitialMode::constants;
        c.newton.step_tol = 1e-10;
        c.pressure_offset = c.p_ref;
        break;
    case ScenarioKind::custom:
        c.dt = 1.0;
        c.T = 1.0;
        c.initial = InitialMode::zero;
        break;
    }

    PhysicalParams& p = c.params;
    p.mu = f.get_double("params.mu", p.mu);
    p.rho = f.get_double("params.rho", p.rho);
    p.lambda_p = f.get_double("params.lambda_p", p.lambda_p);
    p.mu_p = f.get_double("params.mu_p", p.mu_p);
    p.s0 = f.get_double("params.s0", p.s0);
    p.alpha_p = f.get_double("params.alpha_p", p.alpha_p);
    p.alpha_bjs = f.get_double("params.alpha_bjs", p.alpha_bjs);
    if (auto v = f.get_optional_double("params.kappa1")) p.kappa1 = *v;
    if (auto v = f.get_optional_double("params.kappa2")) p.kappa2 = *v;
    if (auto v = f.get_optional_double("params.skew_c")) p.skew_c = *v;
    const auto K = f.get_doubles("params.K");
    if (K.size() == 1)
        p.K = K[0] * Mat2::Identity();
    else if (K.size() == 4)
        p.K << K[0], K[1], K[2], K[3];
    else if (!K.empty())
        throw ConfigError("params.K", "expected 1 or 4 comma-separated numbers");
    p.dyn.fluid_inertia = f.get_bool("params.dyn.fluid_inertia", p.dyn.fluid_inertia);
    p.dyn.rho_p = f.get_double("params.dyn.rho_p", p.dyn.rho_p);
    p.dyn.beta = f.get_double("params.dyn.beta", p.dyn.beta);

    c.dt = f.get_double("time.dt", c.dt);
    c.T = f.get_double("time.T", c.T);
    c.newton.abs_tol = f.get_double("newton.abs_tol", c.newton.abs_tol);
    c.newton.rel_tol = f.get_double("newton.rel_tol", c.newton.rel_tol);
    c.newton.max_iters = f.get_int("newton.max_iters", c.newton.max_iters);
    c.newton.step_tol = f.get_double("newton.step_tol", c.newton.step_tol);
    c.threads = f.get_int("threads", c.threads);
    if (f.has("convergence.levels")) c.levels = parse_levels(f.get_string("convergence.levels", ""));

    c.refine = f.get_int("mesh.refine", c.refine);
    c.mesh_file = f.get_string("mesh.file", c.mesh_file);
    c.p_ref = f.get_double("filter.p_ref", c.p_ref);
    c.delta_p = f.get_double("filter.delta_p", c.delta_p);
    c.p_in = f.get_double("bc.p_in", c.p_in);
    c.p_out = f.get_double("bc.p_out", c.p_out);
    c.p_darcy = f.get_double("bc.p_darcy", c.p_darcy);

    const std::string init = f.get_string("initial.mode", "");
    if (init == "analytic")
        c.initial = InitialMode::analytic;
    else if (init == "constants")
        c.initial = InitialMode::constants;
    else if (init == "zero")
        c.initial = InitialMode::zero;
    else if (!init.empty())
        throw ConfigError("initial.mode", "expected analytic, constants or zero, got '" + init + "'");
    c.initial_p0 = f.get_double("initial.p0", c.scenario == ScenarioKind::example3_filter ? c.p_ref : c.initial_p0);

    c.out_dir = f.get_string("output.dir", c.out_dir);
    c.vtk = f.get_bool("output.vtk", c.vtk);
    c.vtk_every = f.get_int("output.vtk_every", c.vtk_every);
    c.interface_csv = f.get_bool("output.interface_csv", c.interface_csv);
    c.pressure_offset = f.get_double("output.pressure_offset",
                                     c.scenario == ScenarioKind::example3_filter ? c.p_ref : c.pressure_offset);

    const auto unused = f.unused_keys();
    if (!unused.empty()) throw ConfigError(unused.front(), "unknown key");
    return c;
}

ScenarioConfig load_config(const std::string& path) { return parse_config(ConfigFile::load(path)); }

std::vector<std::string> validate_config(const ScenarioConfig& c) {
    std::vector<std::string> out = c.params.violations();
    try {
        step_count(c.T, c.dt);
    } catch (const ConfigError& e) {
        out.push_back(e.what());
    }
    try {
        c.newton.validate();
    } catch (const ConfigError& e) {
        out.push_back(e.what());
    }
    if (c.threads < 1) out.push_back("threads: must be >= 1");
    if (c.vtk_every < 1) out.push_back("output.vtk_every: must be >= 1");
    if (c.refine < 1) out.push_back("mesh.refine: must be >= 1");
    if (c.scenario == ScenarioKind::example1_mms && c.levels.empty()) out.push_back("convergence.levels: no levels");
    if (c.scenario == ScenarioKind::custom && c.mesh_file.empty()) out.push_back("mesh.file: required for custom");
    if (!out.empty()) return out;
    try {
        const Scenario s = build_scenario(c);
        (void)s;
    } catch (const MeshError& e) {
        out.push_back(std::string("mesh: ") + e.what());
    } catch (const ConfigError& e) {
        out.push_back(e.what());
    } catch (const Error& e) {
        out.push_back(std::string("mesh: ") + e.what());
    }
    return out;
}

} // namespace nsbiot
