#include "nsbiot/runner.hpp"

#include "nsbiot/postprocess.hpp"
#include "nsbiot/scenario.hpp"

#include "json.hpp"
#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace nsbiot {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string git_blob_sha1(const std::string& content) {
    const std::string blob = "blob " + std::to_string(content.size()) + std::string(1, '\0') + content;
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(blob.data(), blob.size(), md, &len, EVP_sha1(), nullptr) != 1) throw Error("SHA-1 digest failed");
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return hex.str();
}

ScenarioConfig prepare_config(const std::string& text, const RunOverrides& o) {
    ConfigFile file = ConfigFile::parse(text);
    if (o.levels) file.set("convergence.levels", *o.levels);
    ScenarioConfig c = parse_config(file);
    if (o.out_dir) c.out_dir = *o.out_dir;
    if (o.threads) c.threads = *o.threads;
    const auto v = validate_config(c);
    if (!v.empty()) {
        const auto colon = v.front().find(':');
        throw ConfigError(colon == std::string::npos ? "" : v.front().substr(0, colon),
                          colon == std::string::npos ? v.front() : v.front().substr(colon + 2));
    }
    return c;
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json params_json(const PhysicalParams& p) {
    return {{"mu", p.mu},           {"rho", p.rho},     {"lambda_p", p.lambda_p},
            {"mu_p", p.mu_p},       {"s0", p.s0},       {"K", {p.K(0, 0), p.K(0, 1), p.K(1, 0), p.K(1, 1)}},
            {"alpha_p", p.alpha_p}, {"alpha_bjs", p.alpha_bjs}, {"kappa1", p.k1()},
            {"kappa2", p.k2()}};
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    out << j.dump(2) << '\n';
    if (!out) throw Error("cannot write '" + path.string() + "'");
}

int run_convergence(const ScenarioConfig& c, const std::string& text, const std::string& config_path,
                    std::ostream& log) {
    StudyOptions o;
    o.dt = c.dt;
    o.T = c.T;
    o.newton = c.newton;
    o.assembly.threads = c.threads;
    o.log = [&log](const std::string& s) { log << s << '\n'; };
    ConvergenceTable table;
    try {
        table = convergence_study(c.levels, example1_solution(), c.params, o);
    } catch (const StepFailure& e) {
        log << "solver failure at step " << e.step() << ": " << e.what() << '\n';
        return kExitSolver;
    } catch (const SingularMatrix& e) {
        log << "solver failure: " << e.what() << '\n';
        return kExitSolver;
    }
    fs::create_directories(c.out_dir);
    const fs::path csv = fs::path(c.out_dir) / "convergence.csv";
    {
        std::ofstream out(csv);
        table.write_csv(out);
    }
    json levels = json::array();
    for (const auto& l : table.levels) {
        json errors;
        for (int f = 0; f < kNumErrorFields; ++f) errors[error_field_name(ErrorField(f))] = l.errors[f];
        levels.push_back({{"fluid_grid", {l.spec.fluid_nx, l.spec.fluid_ny}},
                          {"poro_grid", {l.spec.poro_nx, l.spec.poro_ny}},
                          {"h_f", l.h_f},
                          {"h_p", l.h_p},
                          {"h_tp", l.h_tp},
                          {"dofs", l.dofs},
                          {"steps", l.steps},
                          {"avg_newton", l.avg_newton},
                          {"darcy_mass_residual", l.conservation.darcy_mass},
                          {"solid_momentum_residual", l.conservation.solid_momentum},
                          {"interface_mass_residual", l.interface_residual},
                          {"errors", errors}});
    }
    json m = {{"scenario", scenario_name(c.scenario)},
              {"config", config_path},
              {"config_sha1", git_blob_sha1(text)},
              {"dt", c.dt},
              {"T", c.T},
              {"threads", c.threads},
              {"params", params_json(c.params)},
              {"levels", levels},
              {"outputs", {"convergence.csv"}}};
    write_json(fs::path(c.out_dir) / "manifest.json", m);
    log << "wrote " << csv.string() << '\n';
    return kExitOk;
}

int run_transient(const ScenarioConfig& c, const std::string& text, const std::string& config_path,
                  std::ostream& log) {
    const Scenario sc = build_scenario(c);
    AssemblyOptions ao;
    ao.threads = c.threads;
    const TimeStepper st(sc.disc, sc.params, sc.data, c.dt, c.newton, ao);
    const int n = step_count(c.T, c.dt);

    const fs::path dir(c.out_dir);
    fs::create_directories(dir);
    ExportOptions eo;
    eo.pressure_offset = c.pressure_offset;
    std::vector<std::string> outputs;
    std::ofstream iface;
    if (c.interface_csv && !sc.disc.traces->empty()) {
        iface.open(dir / "interface.csv");
        write_interface_csv_header(iface);
        outputs.push_back("interface.csv");
    }

    SystemState s = sc.initial;
    std::vector<int> iterations;
    for (int m = 1; m <= n; ++m) {
        TimeStepper::Result r;
        try {
            r = st.step(s);
        } catch (const StepFailure& e) {
            log << "solver failure at step " << e.step() << ": " << e.what() << '\n';
            return kExitSolver;
        } catch (const SingularMatrix& e) {
            log << "solver failure at step " << m << ": " << e.what() << '\n';
            return kExitSolver;
        }
        s = std::move(r.state);
        iterations.push_back(r.iterations);
        if (c.vtk && (m % c.vtk_every == 0 || m == n))
            for (const auto& p : export_vtk(sc.disc, s, sc.params, dir, sc.name, eo)) outputs.push_back(p.filename().string());
        if (iface.is_open()) write_interface_csv(iface, s.t, interface_samples(sc.disc, s, sc.params));
        log << "step " << m << "/" << n << " t=" << s.t << " newton=" << r.iterations << '\n';
    }

    double avg = 0;
    for (int k : iterations) avg += k;
    avg /= std::max<std::size_t>(1, iterations.size());
    json mesh = {{"poro_triangles", sc.disc.poro->num_triangles()}, {"h_p", mesh_size(*sc.disc.poro)}};
    if (sc.disc.has_fluid()) {
        mesh["fluid_triangles"] = sc.disc.fluid->num_triangles();
        mesh["h_f"] = mesh_size(*sc.disc.fluid);
    }
    mesh["dofs"] = sc.disc.layout.size();
    json m = {{"scenario", sc.name},
              {"config", config_path},
              {"config_sha1", git_blob_sha1(text)},
              {"dt", c.dt},
              {"T", c.T},
              {"steps", n},
              {"threads", c.threads},
              {"params", params_json(c.params)},
              {"mesh", mesh},
              {"newton_iterations", iterations},
              {"avg_newton", avg},
              {"outputs", outputs}};
    write_json(dir / "manifest.json", m);
    log << "wrote " << outputs.size() << " files to " << dir.string() << '\n';
    return kExitOk;
}

template <class Body>
int guarded(std::ostream& log, Body&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const MeshError& e) {
        log << "config error: mesh: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ParseError& e) {
        log << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const StepFailure& e) {
        log << "solver failure at step " << e.step() << ": " << e.what() << '\n';
        return kExitSolver;
    } catch (const SingularMatrix& e) {
        log << "solver failure: " << e.what() << '\n';
        return kExitSolver;
    }
}

} // namespace

int cmd_validate(const std::string& config_path, const RunOverrides& o, std::ostream& log) {
    return guarded(log, [&] {
        ConfigFile file = ConfigFile::load(config_path);
        if (o.levels) file.set("convergence.levels", *o.levels);
        ScenarioConfig c = parse_config(file);
        if (o.threads) c.threads = *o.threads;
        const auto v = validate_config(c);
        for (const auto& msg : v) log << "invalid: " << msg << '\n';
        if (!v.empty()) return int(kExitConfig);
        log << "ok: " << scenario_name(c.scenario) << ", " << step_count(c.T, c.dt) << " steps\n";
        return int(kExitOk);
    });
}

int cmd_run(const std::string& config_path, const RunOverrides& o, std::ostream& log) {
    return guarded(log, [&] {
        const std::string text = read_file(config_path);
        const ScenarioConfig c = prepare_config(text, o);
        if (c.scenario == ScenarioKind::example1_mms) return run_convergence(c, text, config_path, log);
        return run_transient(c, text, config_path, log);
    });
}

int cmd_convergence(const std::string& config_path, const RunOverrides& o, std::ostream& log) {
    return guarded(log, [&] {
        const std::string text = read_file(config_path);
        const ScenarioConfig c = prepare_config(text, o);
        if (c.scenario != ScenarioKind::example1_mms)
            throw ConfigError("scenario", "convergence needs the manufactured solution (example1_mms)");
        return run_convergence(c, text, config_path, log);
    });
}

} // namespace nsbiot
