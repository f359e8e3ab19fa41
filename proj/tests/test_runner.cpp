#include "nsbiot/runner.hpp"

#include "json.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace nsbiot;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("nsbiot_runner_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    const fs::path p = dir / "run.cfg";
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kTinyMms = "scenario = example1_mms\nconvergence.levels = 2x2:2x2, 4x4:3x3\ntime.T = 0.002\n";
const char* kShortFilter = "scenario = example3_filter\ntime.T = 2\n";

} // namespace

TEST(GitBlobSha1, MatchesKnownDigests) {
    EXPECT_EQ(git_blob_sha1(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    EXPECT_EQ(git_blob_sha1("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(Runner, MalformedConfigWritesNothing) {
    const fs::path dir = temp_dir("malformed");
    const fs::path out = dir / "out";
    std::ostringstream log;
    EXPECT_EQ(cmd_run(write_config(dir, "scenario = example1_mms\nnot a pair\n").string(), {out.string()}, log),
              kExitConfig);
    EXPECT_FALSE(fs::exists(out));
    EXPECT_NE(log.str().find("line 2"), std::string::npos);

    EXPECT_EQ(cmd_run(write_config(dir, "scenario = example1_mms\nparams.s0 = 0\n").string(), {out.string()}, log),
              kExitConfig);
    EXPECT_FALSE(fs::exists(out));
    EXPECT_EQ(cmd_run((dir / "missing.cfg").string(), {out.string()}, log), kExitConfig);
    EXPECT_FALSE(fs::exists(out));
}

TEST(Runner, ValidateReportsEveryProblem) {
    const fs::path dir = temp_dir("validate");
    std::ostringstream log;
    const auto cfg = write_config(dir, "scenario = example1_mms\nparams.kappa2 = 5\nparams.s0 = -1\n");
    EXPECT_EQ(cmd_validate(cfg.string(), {}, log), kExitConfig);
    EXPECT_NE(log.str().find("params.kappa2"), std::string::npos);
    EXPECT_NE(log.str().find("params.s0"), std::string::npos);
    std::ostringstream ok;
    EXPECT_EQ(cmd_validate(write_config(dir, kTinyMms).string(), {}, ok), kExitOk);
}

TEST(Runner, NewtonFailureExitsWithSolverCode) {
    const fs::path dir = temp_dir("failure");
    std::ostringstream log;
    const auto cfg = write_config(dir, std::string(kTinyMms) +
                                           "newton.max_iters = 1\nnewton.abs_tol = 1e-300\nnewton.rel_tol = 1e-300\n");
    EXPECT_EQ(cmd_run(cfg.string(), {(dir / "out").string()}, log), kExitSolver);
    EXPECT_NE(log.str().find("step 1"), std::string::npos) << log.str();
}

TEST(Runner, ConvergenceWritesCsvAndManifest) {
    const fs::path dir = temp_dir("convergence");
    const auto cfg = write_config(dir, kTinyMms);
    std::ostringstream log;
    ASSERT_EQ(cmd_convergence(cfg.string(), {(dir / "out").string()}, log), kExitOk) << log.str();
    const std::string csv = slurp(dir / "out" / "convergence.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3); // header and two levels

    const auto m = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
    EXPECT_EQ(m["scenario"], "example1_mms");
    EXPECT_EQ(m["config_sha1"], git_blob_sha1(slurp(cfg)));
    ASSERT_EQ(m["levels"].size(), 2u);
    EXPECT_EQ(m["levels"][0]["steps"], 2);
    EXPECT_GT(m["levels"][1]["dofs"].get<int>(), m["levels"][0]["dofs"].get<int>());

    // --levels overrides the file.
    RunOverrides o{(dir / "one").string(), std::nullopt, std::string("2x2:2x2")};
    ASSERT_EQ(cmd_convergence(cfg.string(), o, log), kExitOk);
    EXPECT_EQ(nlohmann::json::parse(slurp(dir / "one" / "manifest.json"))["levels"].size(), 1u);
}

TEST(Runner, ConvergenceRejectsOtherScenarios) {
    const fs::path dir = temp_dir("conv_reject");
    std::ostringstream log;
    EXPECT_EQ(cmd_convergence(write_config(dir, kShortFilter).string(), {(dir / "out").string()}, log), kExitConfig);
    EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Runner, FilterRunWritesSeriesAndIsDeterministic) {
    const fs::path dir = temp_dir("filter");
    const auto cfg = write_config(dir, kShortFilter);
    std::ostringstream log;
    ASSERT_EQ(cmd_run(cfg.string(), {(dir / "a").string(), 1, std::nullopt}, log), kExitOk) << log.str();
    ASSERT_EQ(cmd_run(cfg.string(), {(dir / "b").string(), 1, std::nullopt}, log), kExitOk);
    for (const char* f : {"example3_filter_fluid_0001.vtk", "example3_filter_fluid_0002.vtk",
                          "example3_filter_poro_0002.vtk", "interface.csv", "manifest.json"}) {
        ASSERT_TRUE(fs::exists(dir / "a" / f)) << f;
        EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
    }
    const auto m = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
    EXPECT_EQ(m["steps"], 2);
    EXPECT_EQ(m["newton_iterations"].size(), 2u);
    EXPECT_EQ(m["mesh"]["fluid_triangles"], 440);
    EXPECT_EQ(m["outputs"].size(), 5u);
}

TEST(Runner, VtkEverySkipsIntermediateSteps) {
    const fs::path dir = temp_dir("vtk_every");
    const auto cfg = write_config(dir, "scenario = example3_filter\ntime.T = 3\noutput.vtk_every = 2\n"
                                       "output.interface_csv = false\n");
    std::ostringstream log;
    ASSERT_EQ(cmd_run(cfg.string(), {(dir / "out").string()}, log), kExitOk);
    EXPECT_TRUE(fs::exists(dir / "out" / "example3_filter_poro_0002.vtk"));
    EXPECT_TRUE(fs::exists(dir / "out" / "example3_filter_poro_0003.vtk")); // last step always
    EXPECT_FALSE(fs::exists(dir / "out" / "example3_filter_poro_0001.vtk"));
    EXPECT_FALSE(fs::exists(dir / "out" / "interface.csv"));
}
