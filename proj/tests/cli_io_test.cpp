// SPDX-License-Identifier: Apache-2.0
#include "maisac/run.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sys/wait.h>

namespace maisac {
namespace {

namespace fs = std::filesystem;

json desk() {
  json d = desk_config();
  d["seeds"] = {1, 2};
  d["gamma"] = 3;
  return effective_config(d);
}

RunConfig make_run(Command c, json doc, std::size_t threads = 1) {
  RunConfig rc;
  rc.command = c;
  rc.document = std::move(doc);
  rc.threads = threads;
  return rc;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("maisac_cli_io_" + name);
  fs::remove_all(p);
  return p;
}

TEST(Config, DefaultsReproduceReferenceParameters) {
  const Settings s = settings_from_json(default_config());
  EXPECT_EQ(s.scene.num_tx, 8u);
  EXPECT_EQ(s.scene.num_targets, 2u);
  EXPECT_NEAR(s.scene.wavelength, 0.01, 0);
  EXPECT_NEAR(s.scene.p_dl_max, 10.0, 1e-12);
  EXPECT_NEAR(s.scene.p_ul_max, 0.01, 1e-15);
  EXPECT_NEAR(s.scene.noise_bs, 1e-10, 1e-24);
  EXPECT_NEAR(s.scene.si_coeff, 1e-5, 1e-20);
  EXPECT_NEAR(s.scene.round_trip_coeff, std::pow(10.0, -2.5), 1e-18);
  EXPECT_NEAR(s.scene.region_side, 1.0, 1e-15);
  EXPECT_EQ(s.gamma, 100u);
  EXPECT_EQ(s.rp.ao.max_iterations, 100u);
  EXPECT_EQ(s.rp.ao.sca.max_rounds, 100u);
  EXPECT_NEAR(s.rp.ao.tolerance, 1e-3, 0);
}

TEST(Config, InvalidWeightsRejected) {
  json d = desk();
  d["weights"] = {{"sensing", {0.5}}, {"ul", {0.5}}, {"dl", {0.5}}};
  try {
    run(make_run(Command::kSolve, d));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
  d["weights"] = {{"sensing", {0.2}}, {"ul", {0.3}}, {"dl", {0.5}}};
  EXPECT_NO_THROW(settings_from_json(d));
}

TEST(Config, UnknownKeysAndTypesRejected) {
  json d = desk();
  d["num_antenas"] = 4;
  EXPECT_THROW(effective_config(d), Error);
  json e = desk();
  EXPECT_THROW(apply_override(e, "num_tx=\"four\""), Error);
  EXPECT_THROW(apply_override(e, "solver.nope=1"), Error);
  EXPECT_THROW(apply_override(e, "novalue"), Error);
  apply_override(e, "num_tx=6");
  apply_override(e, "solver.ao_tolerance=0.01");
  EXPECT_EQ(e["num_tx"], 6);
  EXPECT_EQ(settings_from_json(e).rp.ao.tolerance, 0.01);
}

TEST(Config, DomainChecks) {
  for (const char* bad : {"num_tx=0", "wavelength_m=-1", "gamma=0", "ring_min_m=40"}) {
    json d = desk();
    apply_override(d, bad);
    EXPECT_THROW(settings_from_json(d), Error) << bad;
  }
}

TEST(Run, SolveEmitsWsrRowAndMatchingPlan) {
  const ResultsBundle b = run(make_run(Command::kSolve, desk()));
  EXPECT_EQ(b.tables.at("results.csv").rows.size(), 2u);
  EXPECT_EQ(b.tables.at("plan.csv").rows.size(), 2u * 8u);
  EXPECT_FALSE(b.tables.at("matching.csv").rows.empty());
  EXPECT_EQ(b.tables.at("results.csv").columns[3], "wsr");
}

TEST(Run, SweepHasOneAggregateRowPerCell) {
  const ResultsBundle b = run(make_run(Command::kSweep, desk()));
  EXPECT_EQ(b.tables.at("summary.csv").rows.size(), 9u);
  EXPECT_EQ(b.tables.at("results.csv").rows.size(), 18u);
}

TEST(Run, EmptySweepGivesHeaderOnlyTables) {
  json d = desk();
  d["seeds"] = json::array();
  const ResultsBundle b = run(make_run(Command::kSweep, d));
  EXPECT_EQ(b.tables.at("summary.csv").csv(), "scheme,A_over_lambda,count,mean_wsr,std_wsr\n");
  EXPECT_TRUE(b.tables.at("results.csv").rows.empty());
  json e = desk();
  e["sweep"]["region_side_wavelengths"] = json::array();
  EXPECT_TRUE(run(make_run(Command::kSweep, e)).tables.at("results.csv").rows.empty());
}

TEST(Run, IdenticalRunsWriteIdenticalBytes) {
  const fs::path a = scratch("a"), b = scratch("b");
  write_results(run(make_run(Command::kSolve, desk(), 1)), a.string());
  write_results(run(make_run(Command::kSolve, desk(), 3)), b.string());
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    ++files;
    EXPECT_EQ(slurp(entry.path()), slurp(b / entry.path().filename())) << entry.path().filename();
  }
  EXPECT_GE(files, 8u);
  // Rewriting over existing output is byte-stable too.
  write_results(run(make_run(Command::kSolve, desk(), 2)), a.string());
  EXPECT_EQ(slurp(a / "results.csv"), slurp(b / "results.csv"));
}

TEST(Run, ManifestHashTracksConfig) {
  json d = desk();
  d["seeds"] = json::array();
  const ResultsBundle x = run(make_run(Command::kApm, d));
  const ResultsBundle y = run(make_run(Command::kApm, d, 4));
  json d2 = d;
  d2["num_tx"] = 5;
  const ResultsBundle z = run(make_run(Command::kApm, d2));
  EXPECT_EQ(x.manifest["config_hash_fnv1a64"], y.manifest["config_hash_fnv1a64"]);
  EXPECT_NE(x.manifest["config_hash_fnv1a64"], z.manifest["config_hash_fnv1a64"]);
  EXPECT_EQ(x.manifest["config_hash_fnv1a64"].get<std::string>(), fnv1a_hex(x.config_text));
  EXPECT_FALSE(x.manifest.contains("threads"));
}

TEST(Run, FnvReferenceValues) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(Run, ApmAndBeampatternCommands) {
  const ResultsBundle a = run(make_run(Command::kApm, desk()));
  EXPECT_EQ(a.tables.at("matching.csv").rows.size(), 2u * 4u);
  json d = desk();
  d["beampattern"]["grid"]["na"] = 8;
  d["beampattern"]["grid"]["nb"] = 6;
  d["beampattern"]["binary"] = true;
  const ResultsBundle g = run(make_run(Command::kBeampattern, d));
  ASSERT_EQ(g.grids.size(), 2u);
  EXPECT_EQ(g.grids[0].grid.values.size(), 48u);
  const fs::path out = scratch("bp");
  const auto files = write_results(g, out.string());
  EXPECT_TRUE(fs::exists(out / "grid_seed1.bin"));
  EXPECT_EQ(fs::file_size(out / "grid_seed1.bin"), 48u * 24u);
}

TEST(Run, UnwritableDirectoryIsAnIoError) {
  const fs::path blocker = scratch("blocker");
  std::ofstream(blocker.string()) << "x";
  json d = desk();
  d["seeds"] = json::array();
  try {
    write_results(run(make_run(Command::kApm, d)), (blocker / "sub").string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}

int cli(const std::string& args) {
  const std::string cmd = std::string(MAISAC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodesAreDistinct) {
  const fs::path out = scratch("cli");
  EXPECT_EQ(cli("--preset desk --seeds 1 --gamma 2 --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
  EXPECT_EQ(cli("--no-such-flag"), 2);
  EXPECT_EQ(cli("--config /nonexistent/maisac.json"), 3);
  EXPECT_EQ(cli("--preset desk --set region_side_wavelengths=1 --set num_tx=200 --seeds 1 --out " + out.string()), 4);
  EXPECT_EQ(cli("--preset desk --cmd apm --set num_tx=10 --set 'apm.methods=[\"exhaustive\"]' --seeds 1 --out " +
                out.string()),
            7);
  EXPECT_EQ(cli("--preset desk --cmd beampattern --set beampattern.grid.na=4000 --set beampattern.grid.nb=4000 "
                "--seeds 1 --out " + out.string()),
            8);
}

TEST(Cli, ThreadEnvironmentVariable) {
  const fs::path a = scratch("env_a"), b = scratch("env_b");
  EXPECT_EQ(cli("--preset desk --cmd baselines --seeds 1,2 --gamma 3 --out " + a.string()), 0);
  EXPECT_EQ(std::system(("MAISAC_THREADS=3 " + std::string(MAISAC_CLI_PATH) +
                         " --preset desk --cmd baselines --seeds 1,2 --gamma 3 --out " + b.string() + " 2>/dev/null")
                            .c_str()),
            0);
  EXPECT_EQ(slurp(a / "results.csv"), slurp(b / "results.csv"));
  EXPECT_EQ(slurp(a / "manifest.json"), slurp(b / "manifest.json"));
}

}  // namespace
}  // namespace maisac
