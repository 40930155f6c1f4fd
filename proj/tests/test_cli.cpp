#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "qtransfer/app/run.hpp"

using namespace qtransfer;
using namespace qtransfer::app;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("qtransfer_test_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

  fs::path write(const std::string& name, const std::string& text) const {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ConfigMap ini(const std::string& text) {
  std::istringstream in(text);
  return parse_ini(in);
}

int run_file(const fs::path& cfg, const fs::path& out, std::ostream& log, std::optional<unsigned> threads = 1) {
  RunOptions opt;
  opt.config_path = cfg.string();
  opt.out_dir = out.string();
  opt.threads = threads;
  opt.log = &log;
  return run(opt);
}

std::string configs_dir() {
  const char* d = std::getenv("QTRANSFER_CONFIGS");
  return d ? d : QTRANSFER_CONFIG_DIR;
}

std::string cli_path() {
  const char* c = std::getenv("QTRANSFER_CLI");
  return c ? c : QTRANSFER_CLI_PATH;
}

double column(const Record& r, const std::string& name) {
  const auto* v = r.find(name);
  if (!v) throw std::runtime_error("missing column " + name);
  return std::get<double>(*v);
}

const char* kHarvestSweep = R"(
[run]
scenario = harvest
[sweep]
parameter = detector_B.x
start = 2
stop = 6
steps = 5
)";

}  // namespace

TEST(Config, IniParsingAndDiagnostics) {
  const auto cfg = ini("[run]\nscenario = harvest\n[field]\nmass = 0.5 \n");
  EXPECT_EQ(cfg.at("field").at("mass"), "0.5");
  EXPECT_THROW(ini("[run]\nscenario = harvest\n[nonsense]\nx = 1\n"), ConfigError);
  EXPECT_THROW(ini("[field]\nmasss = 1\n"), ConfigError);
  try {
    ini("[run]\nscenario harvest\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
  const ConfigView v(ini("[field]\nmass = abc\n"));
  EXPECT_THROW(v.num("field", "mass", 0.0), ConfigError);
}

TEST(Config, JsonMatchesIni) {
  std::istringstream j(R"({"run": {"scenario": "nogo"}, "nogo": {"lambdas": [0.01, 0.02], "count": 2, "couple_A": false}})");
  const auto cfg = parse_json(j);
  const ConfigView v(cfg);
  EXPECT_EQ(v.list("nogo", "lambdas"), (std::vector<double>{0.01, 0.02}));
  EXPECT_EQ(v.integer("nogo", "count", 0), 2);
  EXPECT_FALSE(v.flag("nogo", "couple_A", true));
  std::istringstream bad(R"({"run": [1, 2]})");
  EXPECT_THROW(parse_json(bad), ConfigError);
}

TEST(Config, SweepExpansionOrder) {
  const auto cfg = ini(
      "[run]\nscenario = harvest\n[sweep]\nparameter = detector_B.x, field.mass\nstart = 1, 0\nstop = 2, 1\nsteps = 2, 3\n");
  const auto pts = expand_sweep(cfg);
  ASSERT_EQ(pts.size(), 6u);
  EXPECT_EQ(pts[0].values, (std::vector<double>{1, 0}));
  EXPECT_EQ(pts[1].values, (std::vector<double>{1, 0.5}));
  EXPECT_EQ(pts[3].values, (std::vector<double>{2, 0}));
  EXPECT_EQ(pts[5].config.at("field").at("mass"), "1");
  EXPECT_THROW(expand_sweep(ini("[sweep]\nparameter = output.dir\nstart = 0\nstop = 1\nsteps = 2\n")), ConfigError);
  EXPECT_THROW(expand_sweep(ini("[sweep]\nparameter = field.mass\nstart = 0\nstop = 1\nsteps = 1.5\n")), ConfigError);
}

TEST(Records, CsvQuotingAndJson) {
  Record r;
  r.set("name", std::string("a,\"b\"")).set("x", 1.5).set("n", std::int64_t{3}).set("ok", true);
  r.set("nan", std::numeric_limits<double>::quiet_NaN());
  std::ostringstream csv, jsonl;
  write_csv(csv, {r});
  EXPECT_EQ(csv.str(), "name,x,n,ok,nan\r\n\"a,\"\"b\"\"\",1.5,3,true,nan\r\n");
  write_jsonl(jsonl, {r});
  EXPECT_EQ(jsonl.str(), "{\"name\":\"a,\\\"b\\\"\",\"x\":1.5,\"n\":3,\"ok\":true,\"nan\":null}\n");
}

TEST(Scenario, HarvestSweepRowsAndErrors) {
  Settings s;
  s.threads = 2;
  const auto rows = run_scenario(ini(kHarvestSweep), s);
  ASSERT_EQ(rows.size(), 5u);
  double prev_x = 0;
  for (const auto& r : rows) {
    const double x = column(r, "detector_B.x");
    EXPECT_GT(x, prev_x);
    prev_x = x;
    EXPECT_LE(column(r, "err_M"), 1e-8 * std::hypot(column(r, "M_re"), column(r, "M_im")) + 1e-12);
    EXPECT_LE(column(r, "err_L_AA"), 1e-8 * column(r, "L_AA") + 1e-12);
    EXPECT_NEAR(column(r, "L_AA"), column(r, "L_BB"), 1e-12 * column(r, "L_AA"));
    EXPECT_GE(column(r, "negativity_harvested"), 0.0);
  }
}

TEST(Scenario, TeleportIdenticalDetectorsAtHalfEqualsHarvested) {
  const auto rows = run_scenario(ini("[run]\nscenario = teleport\n[input]\np = 0.5\n"), Settings{});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(column(rows[0], "negativity_teleported"), column(rows[0], "negativity_harvested"), 1e-15);
  EXPECT_EQ(std::get<std::string>(*rows[0].find("strategy")), "phase_corrected");
  EXPECT_NEAR(column(rows[0], "negativity_exact_channel"), column(rows[0], "negativity_teleported"), 1e-6);
}

TEST(Scenario, TeleportFromAmplitudes) {
  const auto rows = run_scenario(
      ini("[run]\nscenario = teleport\n[coefficients]\nL_AA = 0.01\nL_BB = 0.01\nM_im = 0.02\n"
          "[input]\namplitudes = 0.6, 0, 0, 0.8\n"),
      Settings{});
  EXPECT_NEAR(column(rows[0], "p"), 0.64, 1e-12);
  EXPECT_THROW(run_scenario(ini("[run]\nscenario = teleport\n[input]\np = 0.5\namplitudes = 1, 0, 0, 0\n"), Settings{}),
               ConfigError);
}

TEST(Scenario, NogoWithoutCouplingsHasZeroNegativity) {
  const auto rows = run_scenario(
      ini("[run]\nscenario = nogo\n[nogo]\nmodel = default\nfield_dim = 4\ncouple_A = false\ncouple_B = false\n"),
      Settings{});
  ASSERT_EQ(rows.size(), 5u);
  for (const auto& r : rows) EXPECT_EQ(column(r, "negativity"), 0.0);
}

TEST(Scenario, CompareVerdict) {
  const auto rows = run_scenario(
      ini("[run]\nscenario = compare\n[detector_A]\ngap = 2\n[detector_B]\ngap = 2\n[nogo]\nfield_dim = 4\n"), Settings{});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(std::get<std::string>(*rows[0].find("direct_transmission")), "second-order zero");
  EXPECT_GT(column(rows[0], "negativity_teleported"), 0.0);
}

TEST(Run, DeterministicAcrossThreadCounts) {
  TempDir dir;
  const auto cfg = dir.write("nogo.ini",
                             "[run]\nscenario = nogo\nseed = 3\n[nogo]\nmodel = random\ncount = 2\nmax_field_dim = 3\n"
                             "[sweep]\nparameter = nogo.lambda_B\nstart = 0.5\nstop = 1.5\nsteps = 4\n");
  std::ostringstream log;
  ASSERT_EQ(run_file(cfg, dir.path() / "a", log, 1), kExitOk) << log.str();
  ASSERT_EQ(run_file(cfg, dir.path() / "b", log, 3), kExitOk) << log.str();
  EXPECT_EQ(slurp(dir.path() / "a" / "nogo.csv"), slurp(dir.path() / "b" / "nogo.csv"));
  EXPECT_EQ(slurp(dir.path() / "a" / "nogo.jsonl"), slurp(dir.path() / "b" / "nogo.jsonl"));
  EXPECT_FALSE(slurp(dir.path() / "a" / "nogo.csv").empty());
}

TEST(Run, ExitCodes) {
  TempDir dir;
  std::ostringstream log;
  EXPECT_EQ(run_file(dir.path() / "missing.ini", dir.path(), log), kExitConfig);
  EXPECT_EQ(run_file(dir.write("a.ini", "[run]\nscenario = bogus\n"), dir.path(), log), kExitConfig);
  EXPECT_EQ(run_file(dir.write("b.ini", "[run]\nscenario = harvest\n[quadrature]\nmax_intervals = 2\nrel_tol = 1e-14\n"),
                     dir.path(), log),
            kExitConvergence);
  EXPECT_EQ(run_file(dir.write("c.ini", "[run]\nscenario = harvest\n[coefficients]\nL_AA = 0.01\nL_BB = 0.01\nL_AB_re = 0.5\n"),
                     dir.path(), log),
            kExitInvariant);
  EXPECT_EQ(run_file(dir.write("d.ini", "[run]\nscenario = harvest\n[field]\ndimension = 1\nmass = 1\n[detector_A]\ny = 1\n"),
                     dir.path(), log),
            kExitConfig);
  EXPECT_EQ(run_file(dir.write("e.ini", "[run]\nscenario = harvest\n[field]\ndimension = 2\n"), dir.path(), log), kExitOk);
  EXPECT_NE(log.str().find("qtransfer: error:"), std::string::npos);
}

TEST(Run, DimensionErrorExitCode) {
  EXPECT_EQ(exit_code_for(DimensionError("x")), kExitDimension);
  EXPECT_EQ(exit_code_for(InvariantError("x")), kExitInvariant);
  EXPECT_EQ(exit_code_for(ConvergenceError("x", 1.0)), kExitConvergence);
}

TEST(Run, EnvironmentOverridesConfigButNotFlags) {
  TempDir dir;
  const auto cfg = dir.write("h.ini", std::string(kHarvestSweep) + "[output]\ndir = " + (dir.path() / "from_cfg").string() + "\n");
  std::ostringstream log;
  ::setenv("QTRANSFER_OUT", (dir.path() / "from_env").string().c_str(), 1);
  RunOptions opt;
  opt.config_path = cfg.string();
  opt.threads = 2;
  opt.log = &log;
  EXPECT_EQ(run(opt), kExitOk) << log.str();
  EXPECT_TRUE(fs::exists(dir.path() / "from_env" / "harvest.csv"));
  EXPECT_FALSE(fs::exists(dir.path() / "from_cfg"));
  opt.out_dir = (dir.path() / "from_flag").string();
  EXPECT_EQ(run(opt), kExitOk);
  EXPECT_TRUE(fs::exists(dir.path() / "from_flag" / "harvest.csv"));
  ::unsetenv("QTRANSFER_OUT");

  ::setenv("QTRANSFER_THREADS", "zero", 1);
  opt.threads.reset();
  EXPECT_EQ(run(opt), kExitConfig);
  ::unsetenv("QTRANSFER_THREADS");
}

TEST(Run, SampleConfigsRun) {
  TempDir dir;
  std::ostringstream log;
  for (const char* name : {"harvest_sweep.ini", "teleport.ini", "teleport_coefficients.json", "compare.ini"}) {
    const fs::path cfg = fs::path(configs_dir()) / name;
    ASSERT_TRUE(fs::exists(cfg)) << cfg;
    EXPECT_EQ(run_file(cfg, dir.path(), log, 2), kExitOk) << name << ": " << log.str();
  }
  const auto csv = slurp(dir.path() / "harvest.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
}

TEST(Binary, HelpAndMissingConfig) {
  const std::string cli = cli_path();
  TempDir dir;
  const std::string quiet = " >" + (dir.path() / "log").string() + " 2>&1";
  EXPECT_EQ(WEXITSTATUS(std::system((cli + " --help" + quiet).c_str())), 0);
  EXPECT_EQ(WEXITSTATUS(std::system((cli + quiet).c_str())), kExitConfig);
  EXPECT_EQ(WEXITSTATUS(std::system((cli + " --config x.ini --threads 0" + quiet).c_str())), kExitConfig);
  const auto cfg = dir.write("t.ini", "[run]\nscenario = teleport\n[coefficients]\nL_AA = 0.01\nL_BB = 0.01\nM_re = 0.02\n");
  const std::string cmd = cli + " --config " + cfg.string() + " --out " + dir.path().string() + quiet;
  EXPECT_EQ(WEXITSTATUS(std::system(cmd.c_str())), kExitOk);
  EXPECT_NE(slurp(dir.path() / "teleport.csv").find("negativity_teleported"), std::string::npos);
}
