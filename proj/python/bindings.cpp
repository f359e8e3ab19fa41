#include "nsbiot/runner.hpp"
#include "nsbiot/scenario.hpp"
#include "nsbiot/verify.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace nsbiot;

namespace {

py::dict level_dict(const LevelResult& l) {
    py::dict errors;
    for (int f = 0; f < kNumErrorFields; ++f) errors[error_field_name(ErrorField(f))] = l.errors[f];
    py::dict d;
    d["grid"] = py::make_tuple(l.spec.fluid_nx, l.spec.fluid_ny, l.spec.poro_nx, l.spec.poro_ny);
    d["h_f"] = l.h_f;
    d["h_p"] = l.h_p;
    d["h_tp"] = l.h_tp;
    d["dofs"] = l.dofs;
    d["steps"] = l.steps;
    d["avg_newton"] = l.avg_newton;
    d["darcy_mass_residual"] = l.conservation.darcy_mass;
    d["solid_momentum_residual"] = l.conservation.solid_momentum;
    d["interface_mass_residual"] = l.interface_residual;
    d["errors"] = errors;
    return d;
}

StudyOptions study_options(double dt, double T, int threads) {
    StudyOptions o;
    o.dt = dt;
    o.T = T;
    o.assembly.threads = threads;
    return o;
}

// Runner commands write their log to a string returned alongside the code.
// The GIL is released only while the command runs.
template <class F>
py::tuple with_log(F&& f) {
    std::ostringstream log;
    int code;
    {
        py::gil_scoped_release release;
        code = f(log);
    }
    return py::make_tuple(code, log.str());
}

RunOverrides overrides(std::optional<std::string> out, std::optional<int> threads, std::optional<std::string> levels) {
    return RunOverrides{std::move(out), threads, std::move(levels)};
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Coupled Navier-Stokes / Biot mixed finite element solver";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<StepFailure>(m, "StepFailure", PyExc_RuntimeError);

    py::class_<PhysicalParams>(m, "PhysicalParams")
        .def(py::init<>())
        .def_readwrite("mu", &PhysicalParams::mu)
        .def_readwrite("rho", &PhysicalParams::rho)
        .def_readwrite("lambda_p", &PhysicalParams::lambda_p)
        .def_readwrite("mu_p", &PhysicalParams::mu_p)
        .def_readwrite("s0", &PhysicalParams::s0)
        .def_readwrite("alpha_p", &PhysicalParams::alpha_p)
        .def_readwrite("alpha_bjs", &PhysicalParams::alpha_bjs)
        .def_readwrite("kappa1", &PhysicalParams::kappa1)
        .def_readwrite("kappa2", &PhysicalParams::kappa2)
        .def_property(
            "K", [](const PhysicalParams& p) { return Eigen::Matrix2d(p.K); },
            [](PhysicalParams& p, const Eigen::Matrix2d& k) { p.K = k; })
        .def("violations", &PhysicalParams::violations, "Range violations, one message each");

    py::class_<LevelSpec>(m, "LevelSpec")
        .def(py::init([](int fnx, int fny, int pnx, int pny) { return LevelSpec{fnx, fny, pnx, pny}; }),
             py::arg("fluid_nx"), py::arg("fluid_ny"), py::arg("poro_nx"), py::arg("poro_ny"))
        .def_readwrite("fluid_nx", &LevelSpec::fluid_nx)
        .def_readwrite("fluid_ny", &LevelSpec::fluid_ny)
        .def_readwrite("poro_nx", &LevelSpec::poro_nx)
        .def_readwrite("poro_ny", &LevelSpec::poro_ny)
        .def("__repr__", [](const LevelSpec& l) {
            return "LevelSpec(" + std::to_string(l.fluid_nx) + "x" + std::to_string(l.fluid_ny) + ":" +
                   std::to_string(l.poro_nx) + "x" + std::to_string(l.poro_ny) + ")";
        });

    m.def("example1_levels", &example1_levels, "The four frozen grids of the manufactured test");
    m.def("parse_levels", &parse_levels, py::arg("text"));
    m.def("error_fields", [] {
        std::vector<std::string> out;
        for (int f = 0; f < kNumErrorFields; ++f) out.emplace_back(error_field_name(ErrorField(f)));
        return out;
    });

    m.def(
        "run_level",
        [](const LevelSpec& level, const PhysicalParams& p, double dt, double T, int threads) {
            LevelResult r;
            {
                py::gil_scoped_release release;
                r = run_mms_level(level, example1_solution(), p, study_options(dt, T, threads));
            }
            return level_dict(r);
        },
        py::arg("level"), py::arg("params") = PhysicalParams{}, py::arg("dt") = 1e-3, py::arg("T") = 0.01,
        py::arg("threads") = 1, "Manufactured-solution run on one level; errors, Newton and residual summaries");

    m.def(
        "convergence_study",
        [](const std::vector<LevelSpec>& levels, const PhysicalParams& p, double dt, double T, int threads) {
            ConvergenceTable t;
            {
                py::gil_scoped_release release;
                t = convergence_study(levels, example1_solution(), p, study_options(dt, T, threads));
            }
            py::list lv, rates;
            for (const auto& l : t.levels) lv.append(level_dict(l));
            for (const auto& r : t.rates()) {
                py::dict d;
                for (int f = 0; f < kNumErrorFields; ++f) d[error_field_name(ErrorField(f))] = r[f];
                rates.append(d);
            }
            std::ostringstream csv;
            t.write_csv(csv);
            py::dict out;
            out["levels"] = lv;
            out["rates"] = rates;
            out["csv"] = csv.str();
            return out;
        },
        py::arg("levels"), py::arg("params") = PhysicalParams{}, py::arg("dt") = 1e-3, py::arg("T") = 0.01,
        py::arg("threads") = 1);

    m.def(
        "oscillation_column",
        [](const PhysicalParams& p, int n, double dt, int steps) {
            const Scenario sc = biot_column(p, {n, n, 1.0});
            const TimeStepper st(sc.disc, sc.params, sc.data, dt);
            SystemState s = sc.initial;
            double worst = 0;
            for (int k = 0; k < steps; ++k) {
                s = st.step(s).state;
                worst = std::max(worst, oscillation_indicator(*sc.disc.poro, sc.disc.block(s.x, Field::p_p)));
            }
            return py::make_tuple(worst, Vector(sc.disc.block(s.x, Field::p_p)));
        },
        py::arg("params"), py::arg("n") = 20, py::arg("dt") = 1e-4, py::arg("steps") = 3,
        "Sheared Biot block: worst oscillation indicator over the steps and the final pressure");

    m.def("git_blob_sha1", &git_blob_sha1, py::arg("content"));

    m.def(
        "validate",
        [](const std::string& config) { return with_log([&](std::ostream& log) { return cmd_validate(config, {}, log); }); },
        py::arg("config"), "Returns (exit_code, log)");
    m.def(
        "run",
        [](const std::string& config, std::optional<std::string> out, std::optional<int> threads) {
            return with_log([&](std::ostream& log) { return cmd_run(config, overrides(out, threads, {}), log); });
        },
        py::arg("config"), py::arg("out") = py::none(), py::arg("threads") = py::none(), "Returns (exit_code, log)");
    m.def(
        "convergence",
        [](const std::string& config, std::optional<std::string> out, std::optional<int> threads,
           std::optional<std::string> levels) {
            return with_log(
                [&](std::ostream& log) { return cmd_convergence(config, overrides(out, threads, levels), log); });
        },
        py::arg("config"), py::arg("out") = py::none(), py::arg("threads") = py::none(),
        py::arg("levels") = py::none(), "Returns (exit_code, log)");
}
