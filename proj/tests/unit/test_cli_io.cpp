#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fwlab/cli_io.hpp"

using namespace fwlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> config_errors(std::string_view text, const std::vector<std::string>& sets = {},
                                       std::string_view name = {}) {
  try {
    parse_config(text, sets, name);
  } catch (const ConfigError& e) {
    return e.errors();
  }
  return {};
}

bool any_contains(const std::vector<std::string>& v, std::string_view needle) {
  for (const auto& s : v)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_command(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fwlab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

ExperimentReport sample_report() {
  ExperimentReport r;
  r.experiment = "sample";
  r.param("grid.N", "64");
  r.measure("D_n", 0.1, 5, "B1_inf1", 0.1 + 0.2);
  r.measure("C_N, quoted", 0.0, std::nullopt, "value", std::numeric_limits<double>::infinity());
  r.measure("nan row", std::numeric_limits<double>::quiet_NaN(), std::nullopt, "value", -1e-300);
  r.constants.push_back({"M1_hat", 0.014249040882335282, "measured"});
  r.verdicts.push_back(Verdict::at_least("min ratio", 0.02, 0.007, "half of M1_hat"));
  r.notes.push_back("a note");
  return r;
}

}  // namespace

TEST(Config, DefaultsResolvePerExperiment) {
  const RunConfig c = parse_config("", {}, "taylor");
  EXPECT_EQ(c.grid.N, 65536u);
  EXPECT_EQ(c.grid.L, 64.0);
  EXPECT_EQ(c.experiment.t_list.size(), 8u);
  EXPECT_EQ(c.field.kind, "fn+gn");
  EXPECT_EQ(c.field.n, 5);
  const RunConfig cons = parse_config("", {}, "conservation");
  EXPECT_EQ(cons.field.kind, "gn");
  const RunConfig cont = parse_config("", {}, "continuity");
  EXPECT_EQ(cont.field.n, 6);
  EXPECT_EQ(cont.experiment.N_list, (std::vector<int>{0, 2, 4, 6, 7, 8}));
  EXPECT_EQ(cont.experiment.n_range, (std::vector<int>{5, 6, 7, 8, 9}));
}

TEST(Config, SectionsDottedKeysAndRanges) {
  const RunConfig c = parse_config(
      "grid.N = 4096\n[experiment]\nn_range = 2..4, 6 ; trailing comment\n[norm]\np = 2\nr = inf\n[solver]\ndt = 0.001\n",
      {"grid.L=32"});
  EXPECT_EQ(c.grid.N, 4096u);
  EXPECT_EQ(c.grid.L, 32.0);
  EXPECT_EQ(c.experiment.n_range, (std::vector<int>{2, 3, 4, 6}));
  EXPECT_EQ(c.norm.p, 2.0);
  EXPECT_TRUE(std::isinf(c.norm.r));
  EXPECT_EQ(c.solver_config().dt, 0.001);
}

TEST(Config, OverridesWinOverFile) {
  const RunConfig c = parse_config("[grid]\nN = 1024\n", {"grid.N=32768"});
  EXPECT_EQ(c.grid.N, 32768u);
  // Keys the command does not read are not held against the grid.
  EXPECT_NO_THROW(parse_config("", {"grid.N=1024", "experiment.n_range=1..3"}, "lemma41"));
}

TEST(Config, NonPowerOfTwoNamesTheKey) {
  const auto e = config_errors("[grid]\nN = 12345\n");
  ASSERT_EQ(e.size(), 1u);
  EXPECT_NE(e[0].find("grid.N"), std::string::npos);
  EXPECT_NE(e[0].find("power of two"), std::string::npos);
}

TEST(Config, CollectsEveryErrorWithLineNumbers) {
  const auto e = config_errors("[grid]\nN = abc\nfoo = 1\n[nowhere]\nnot a pair\n[norm\nbare = 1\n", {"solver.T=x", "nodot=1"});
  EXPECT_TRUE(any_contains(e, "line 2: grid.N: expected an integer"));
  EXPECT_TRUE(any_contains(e, "line 3: unknown key 'grid.foo'"));
  EXPECT_TRUE(any_contains(e, "line 4: unknown section [nowhere]"));
  EXPECT_TRUE(any_contains(e, "line 5: expected key = value"));
  EXPECT_TRUE(any_contains(e, "line 6: malformed section header"));
  EXPECT_TRUE(any_contains(e, "line 7: key 'bare' needs a [section]"));
  EXPECT_TRUE(any_contains(e, "--set: solver.T: expected a number"));
  EXPECT_TRUE(any_contains(e, "--set: override keys must be dotted"));
  EXPECT_GE(e.size(), 8u);
}

TEST(Config, SemanticChecks) {
  EXPECT_TRUE(any_contains(config_errors("", {"experiment.n_range=5..12"}, "nonuniform"), "max admissible n is 9"));
  EXPECT_TRUE(any_contains(config_errors("", {"norm.p=3"}), "p must be 2 or inf"));
  EXPECT_TRUE(any_contains(config_errors("", {"norm.r=2"}), "r must be 1 or inf"));
  EXPECT_TRUE(any_contains(config_errors("", {"experiment.t_list=0.1,0.05"}), "strictly increasing"));
  EXPECT_TRUE(any_contains(config_errors("", {"experiment.t_list=0.1,0.2"}, "taylor"), "at least 4"));
  EXPECT_TRUE(any_contains(config_errors("", {"solver.T=40"}, "peakon"), "within L/2"));
  EXPECT_TRUE(any_contains(config_errors("", {"experiment.N_list=0,13"}, "continuity"), "outside [0, 12]"));
  EXPECT_TRUE(any_contains(config_errors("", {"field.kind=sawtooth"}), "unknown field kind"));
  EXPECT_TRUE(any_contains(config_errors("", {"solver.model=kdv"}), "unknown model"));
  EXPECT_TRUE(config_errors("", {}, "lemma41").empty());
}

TEST(Config, ExampleFileParsesAndRoundTrips) {
  const RunConfig c = parse_config(slurp(fs::path(FWLAB_SOURCE_DIR) / "tools" / "fwlab.example.conf"));
  EXPECT_EQ(c.grid.N, 4096u);
  EXPECT_EQ(c.field.kind, "fn+gn");
  EXPECT_EQ(c.experiment.n_range, (std::vector<int>{3, 4, 5}));
  EXPECT_EQ(c.output_dir, "fwlab-out");
  const RunConfig again = parse_config(c.to_text());
  EXPECT_EQ(c.echo(), again.echo());
}

TEST(Config, EchoIsLossless) {
  const RunConfig c = parse_config("", {"experiment.t_list=0.01,0.02,0.1,0.30000000000000004", "solver.dt=1e-5"}, "taylor");
  const RunConfig again = parse_config(c.to_text());
  EXPECT_EQ(again.experiment.t_list, c.experiment.t_list);
  EXPECT_EQ(again.solver.dt, 1e-5);
}

TEST(BuildField, KindsAndDescriptions) {
  const RunConfig c = parse_config("", {"grid.N=1024", "grid.L=16", "field.kind=constant", "field.value=2.5"});
  const Field f = build_field(c);
  for (double v : f.samples()) EXPECT_EQ(v, 2.5);
  const RunConfig p = parse_config("", {"grid.N=1024", "grid.L=16", "field.kind=peakon"});
  EXPECT_NEAR(lp_norm(build_field(p), std::numeric_limits<double>::infinity()), 8.0 / 9.0, 1e-12);
  EXPECT_FALSE(describe_field(p).empty());
  const RunConfig z = parse_config("", {"grid.N=1024", "grid.L=16", "field.kind=zero"});
  EXPECT_EQ(lp_norm(build_field(z), 2.0), 0.0);
}

TEST(Report, CsvLayout) {
  const std::string csv = csv_text({kReportSchema, {{"grid.N", "64"}}, sample_report()});
  EXPECT_EQ(csv.rfind("# ", 0), 0u);
  EXPECT_NE(csv.find("# experiment,label,t,n,measured_quantity,value\n"), std::string::npos);
  EXPECT_NE(csv.find("sample,D_n,0.10000000000000001,5,B1_inf1,0.30000000000000004\n"), std::string::npos);
  EXPECT_NE(csv.find("\"C_N, quoted\""), std::string::npos);
  std::size_t data = 0;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#') ++data;
  EXPECT_EQ(data, 3u);
}

TEST(Report, CsvWithoutMeasurementsIsHeaderOnly) {
  ExperimentReport r;
  r.experiment = "empty";
  const std::string csv = csv_text({kReportSchema, {}, r});
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);) EXPECT_EQ(line[0], '#') << line;
}

TEST(Report, JsonRoundTrip) {
  const ReportRecord rec{kReportSchema, {{"grid.N", "64"}}, sample_report()};
  const ReportRecord back = parse_json(json_text(rec));
  EXPECT_EQ(back.schema, kReportSchema);
  EXPECT_EQ(back.config, rec.config);
  EXPECT_EQ(back.report.experiment, "sample");
  ASSERT_EQ(back.report.measurements.size(), 3u);
  EXPECT_EQ(back.report.measurements[0].value, 0.1 + 0.2);
  EXPECT_EQ(back.report.measurements[0].n, 5);
  EXPECT_TRUE(std::isinf(back.report.measurements[1].value));
  EXPECT_TRUE(std::isnan(back.report.measurements[2].t));
  EXPECT_EQ(back.report.measurements[2].value, -1e-300);
  EXPECT_FALSE(back.report.measurements[2].n.has_value());
  EXPECT_EQ(*back.report.constant("M1_hat"), 0.014249040882335282);
  ASSERT_EQ(back.report.verdicts.size(), 1u);
  EXPECT_TRUE(back.report.verdicts[0].passed);
  EXPECT_EQ(back.report.verdicts[0].lower, 0.007);
  EXPECT_TRUE(std::isnan(back.report.verdicts[0].upper));
  EXPECT_EQ(back.report.notes, rec.report.notes);
  EXPECT_THROW(parse_json("{\"schema\": 99}"), std::runtime_error);
  EXPECT_THROW(parse_json("not json"), std::runtime_error);
}

TEST_F(TempDir, FileRoundTripAndUnwritablePath) {
  const ReportRecord rec{kReportSchema, {}, sample_report()};
  write_json(rec, dir_ / "r.json");
  EXPECT_EQ(read_json(dir_ / "r.json").report.measurements.size(), 3u);
  const fs::path bad = dir_ / "missing" / "sub" / "r.csv";
  try {
    write_csv(rec, bad);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find(bad.string()), std::string::npos);
  }
}

TEST(Command, UnknownSubcommandIsUsageError) {
  const CliResult r = cli({"bogus"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"experiment", "nosuch"}).code, kExitUsage);
  EXPECT_EQ(cli({"--help"}).code, kExitPass);
}

TEST(Command, UnresolvableNIsUsageError) {
  const CliResult r = cli({"experiment", "nonuniform", "--set", "experiment.n_range=20"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("max admissible n is 9"), std::string::npos);
}

TEST_F(TempDir, TaylorViaConfigWritesReports) {
  const fs::path conf = dir_ / "taylor.conf";
  std::ofstream(conf) << "[grid]\nN = 4096\n[field]\nn = 4\n";
  const CliResult r = cli({"experiment", "taylor", "--config", conf.string(), "--out", dir_.string(), "--threads", "2"});
  EXPECT_EQ(r.code, kExitPass) << r.out << r.err;
  ASSERT_TRUE(fs::exists(dir_ / "taylor.csv"));
  ASSERT_TRUE(fs::exists(dir_ / "taylor.json"));
  const ReportRecord rec = read_json(dir_ / "taylor.json");
  EXPECT_EQ(rec.report.experiment, "taylor");
  EXPECT_TRUE(rec.report.passed());
  EXPECT_NE(slurp(dir_ / "taylor.csv").find("# config grid.N=4096"), std::string::npos);
}

TEST_F(TempDir, VerdictFailureExitsOne) {
  // The stated orientation of the peaked wave does not travel as written.
  const CliResult r = cli({"experiment", "peakon", "--out", dir_.string(), "--set", "grid.N=4096", "--set", "grid.L=32",
                     "--set", "solver.T=0.5"});
  EXPECT_EQ(r.code, kExitVerdictFail) << r.err;
  const ReportRecord rec = read_json(dir_ / "peakon.json");
  EXPECT_FALSE(rec.report.verdict("stated: max relative L2 shape error")->passed);
  EXPECT_TRUE(rec.report.verdict("reflected: max relative L2 shape error")->passed);
}

TEST_F(TempDir, BlowUpExitsThreeWithPartialReport) {
  const CliResult r = cli({"solve", "--out", dir_.string(), "--set", "grid.N=1024", "--set", "grid.L=16", "--set",
                     "field.kind=peakon", "--set", "solver.T=0.5", "--set", "solver.blowup_threshold=1e-3"});
  EXPECT_EQ(r.code, kExitBlowUp) << r.err;
  EXPECT_NE(r.err.find("blow"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "solve.json"));
}

TEST_F(TempDir, BesovNormAndDecompose) {
  const CliResult b = cli({"besov-norm", "--out", dir_.string(), "--set", "grid.N=4096", "--set", "field.kind=gn",
                     "--set", "field.n=3"});
  EXPECT_EQ(b.code, kExitPass) << b.err;
  const ReportRecord rec = read_json(dir_ / "besov-norm.json");
  ASSERT_FALSE(rec.report.measurements.empty());
  const CliResult d = cli({"decompose", "--out", dir_.string(), "--set", "grid.N=4096", "--set", "field.kind=fn+gn"});
  EXPECT_EQ(d.code, kExitPass) << d.err;
}

TEST_F(TempDir, UnwritableOutputIsReported) {
  const fs::path blocker = dir_ / "file";
  std::ofstream(blocker) << "x";
  const CliResult r = cli({"besov-norm", "--out", (blocker / "sub").string(), "--set", "grid.N=1024", "--set", "field.kind=peakon"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find((blocker / "sub").string()), std::string::npos);
}

TEST_F(TempDir, BinaryExitCodes) {
  const std::string bin = FWLAB_CLI_PATH;
  const std::string quiet = " >" + (dir_ / "log").string() + " 2>&1";
  auto status = [&](const std::string& args) {
    const int s = std::system((bin + " " + args + quiet).c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status("bogus"), 2);
  EXPECT_EQ(status("besov-norm --set grid.N=1024 --set field.kind=peakon --out " + dir_.string()), 0);
}
