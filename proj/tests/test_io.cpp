#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pagame/commands.hpp"
#include "test_util.hpp"

using namespace pagame;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("pagame_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

fs::path write_config(const fs::path& dir, const json& j) {
  const auto p = dir / "config.json";
  std::ofstream(p) << j.dump();
  return p;
}

}  // namespace

TEST(ConfigJson, ParsesEveryKey) {
  const auto j = json::parse(R"({"n": 10, "T": 2000, "r_min": -10, "r_max": 40, "gamma": 5,
    "theta_max": 90, "m_pr": 4, "w": 0.25, "m_ag": 8, "k": 2, "varsigma": 0.01,
    "sigma2_ag": 1, "sigma2_pr": 2, "seed": 9, "replicates": 3, "buffer_override": 12.5})");
  const auto c = config_from_json(j);
  EXPECT_EQ(c.n, 10u);
  EXPECT_EQ(c.horizon, 2000u);
  EXPECT_EQ(c.r_min, -10.0);
  EXPECT_EQ(c.w, 0.25);
  EXPECT_EQ(c.k, 2.0);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.replicates, 3u);
  EXPECT_EQ(c.buffer_mode, BufferMode::fixed);
  EXPECT_EQ(c.buffer_value, 12.5);
}

TEST(ConfigJson, BufferOverrideVariants) {
  EXPECT_EQ(config_from_json(json::parse(R"({"buffer_override": null})")).buffer_mode,
            BufferMode::theoretical);
  EXPECT_EQ(config_from_json(json::parse(R"({"buffer_override": "auto"})")).buffer_mode,
            BufferMode::automatic);
  EXPECT_THROW(config_from_json(json::parse(R"({"buffer_override": "big"})")), ConfigParseError);
}

TEST(ConfigJson, RejectsUnknownKeysAndBadTypes) {
  EXPECT_THROW(config_from_json(json::parse(R"({"horizon": 10})")), ConfigParseError);
  EXPECT_THROW(config_from_json(json::parse(R"({"n": -3})")), ConfigParseError);
  EXPECT_THROW(config_from_json(json::parse(R"({"gamma": "ten"})")), ConfigParseError);
  EXPECT_THROW(config_from_json(json::parse("[1, 2]")), ConfigParseError);
}

TEST(ConfigJson, RoundTrips) {
  GameConfig c;
  c.n = 10;
  c.horizon = 123;
  c.gamma = 7.5;
  c.buffer_mode = BufferMode::fixed;
  c.buffer_value = 3.25;
  const auto back = config_from_json(json::parse(config_to_json(c).dump()));
  EXPECT_EQ(config_to_json(back), config_to_json(c));
}

TEST(ModelJson, RequiresBothVectors) {
  const auto m = model_from_json(json::parse(R"({"r0": [0, 1], "theta0": [2, 3]})"));
  EXPECT_EQ(m.r0, (Vector{0, 1}));
  EXPECT_THROW(model_from_json(json::parse(R"({"r0": [0, 1]})")), ConfigParseError);
  EXPECT_THROW(model_from_json(json::parse(R"({"r0": [0], "theta0": ["x"]})")), ConfigParseError);
}

TEST(Manifest, RoundTripsThroughDisk) {
  const auto dir = scratch_dir("manifest");
  RunManifest m;
  m.config.horizon = 4321;
  m.model_source = "table1_n5";
  m.model = fixtures::table1_n5();
  m.command = "sweep";
  m.horizons = {100, 200};
  m.solver = "exact";
  m.refresh_every = 7;
  m.out_dir = "x";
  m.tool_version = kToolVersion;
  m.timestamp = "2024-01-01T00:00:00Z";
  save_manifest(m, dir / "manifest.json");
  EXPECT_EQ(load_manifest(dir / "manifest.json"), m);
}

TEST(Csv, FormatDouble) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-3.0), "-3");
  EXPECT_EQ(format_double(std::nan("")), "");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Csv, TraceSchema) {
  GameConfig cfg;
  cfg.horizon = 40;
  const auto trace = run_episode(cfg, fixtures::table1_n5(), 1);
  std::ostringstream os;
  write_trace_csv(os, trace);
  const auto ls = lines(os.str());
  ASSERT_EQ(ls.size(), 41u);
  EXPECT_EQ(ls[0], "t,mode,chosen_arm,incentive_sum,regret_cum,linf_err,agent_correct");
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto f = split(ls[i]);
    ASSERT_EQ(f.size(), 7u) << ls[i];
    EXPECT_EQ(std::stoul(f[0]), i);
    const auto arm = std::stoul(f[2]);
    EXPECT_GE(arm, 1u);
    EXPECT_LE(arm, 5u);
    EXPECT_TRUE(f[6] == "0" || f[6] == "1");
    EXPECT_EQ(f[5].empty(), f[1] != "exploit");
  }
  EXPECT_EQ(split(ls[1])[1], "init");
}

TEST(Csv, SummarySchema) {
  GameConfig cfg;
  cfg.horizon = 60;
  cfg.replicates = 3;
  const auto table = run_experiment(cfg, fixtures::table1_n5());
  std::ostringstream os;
  write_summary_csv(os, std::span(&table, 1));
  const auto ls = lines(os.str());
  ASSERT_EQ(ls.size(), 1u + 3u + 3u);
  EXPECT_EQ(ls[0], "n,T,replicate,seed,linf_final,l1_final,regret_final,wallclock_s,l1_exploit_final");
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto f = split(ls[i]);
    ASSERT_EQ(f.size(), 9u) << ls[i];
    EXPECT_EQ(f[0], "5");
    EXPECT_EQ(f[1], "60");
    EXPECT_TRUE(f[7].empty());  // wallclock off by default
  }
  EXPECT_EQ(split(ls[4])[2], "mean");
  EXPECT_EQ(split(ls[5])[2], "std");
  EXPECT_EQ(split(ls[6])[2], "stderr");
}

TEST(Csv, FailedReplicatesKeepTheirRow) {
  GameConfig cfg;
  cfg.horizon = 10;
  cfg.replicates = 2;
  const auto table = run_experiment(cfg, RewardModel{{0}, {0}});
  std::ostringstream os, fs_;
  write_summary_csv(os, std::span(&table, 1));
  const auto ls = lines(os.str());
  EXPECT_EQ(ls[1], "5,10,0," + std::to_string(table.rows[0].seed) + ",,,,,");
  write_failures_csv(fs_, std::span(&table, 1));
  EXPECT_EQ(lines(fs_.str()).size(), 3u);
}

TEST(Csv, BoundsSchemaAndRange) {
  BoundParams p;
  std::ostringstream os;
  write_bounds_csv(os, p, 30, 1.0);
  const auto ls = lines(os.str());
  EXPECT_EQ(ls[0],
            "t,pt_bound,concentration_raw,concentration,regret_term1,regret_term2,regret_term3,"
            "regret_term4,regret_term5,regret_term6,regret_bound");
  ASSERT_EQ(ls.size(), 1u + 29u);
  EXPECT_EQ(split(ls[1])[0], "2");
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto f = split(ls[i]);
    ASSERT_EQ(f.size(), 11u);
    const double c = std::stod(f[3]);
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, 1.0);
  }
  // Incremental exploration count matches the direct sum.
  const auto last = split(ls.back());
  const double lam = lambda_t(p, expected_eta(p, 30), 30);
  EXPECT_DOUBLE_EQ(std::stod(last[2]), concentration_bound(p, lam, p.beta, 30).raw);

  BoundParams p2 = p;
  p2.k = 2.0;
  p2.k_tilde = compute_k_tilde(2.0);
  std::ostringstream os2;
  write_bounds_csv(os2, p2, 20, 1.0);
  EXPECT_EQ(split(lines(os2.str())[1])[0], "14");
  EXPECT_THROW(write_bounds_csv(os2, p2, 13, 1.0), DomainError);
}

TEST(Commands, RunIsByteIdenticalAcrossInvocations) {
  const auto dir = scratch_dir("run_determinism");
  const auto cfg = write_config(dir, json{{"T", 120}, {"replicates", 2}, {"seed", 5}});
  std::ostringstream log, err;
  CommandOptions opt;
  opt.config_path = cfg.string();
  opt.jobs = 1;
  opt.out_dir = (dir / "a").string();
  ASSERT_EQ(cmd_run(opt, log, err), exit_ok) << err.str();
  opt.out_dir = (dir / "b").string();
  ASSERT_EQ(cmd_run(opt, log, err), exit_ok) << err.str();
  const auto a = slurp(dir / "a" / "summary.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir / "b" / "summary.csv"));
  EXPECT_TRUE(fs::exists(dir / "a" / "manifest.json"));
  EXPECT_TRUE(fs::exists(dir / "a" / "table1_n5" / "120" / "summary.csv"));
  const auto trace = replicate_dir(dir / "a", "table1_n5", 120, 1) / trace_file_name("table1_n5", 120, 1);
  EXPECT_EQ(slurp(trace), slurp(replicate_dir(dir / "b", "table1_n5", 120, 1) /
                                trace_file_name("table1_n5", 120, 1)));
}

TEST(Commands, ManifestReplayReproducesTheRun) {
  const auto dir = scratch_dir("replay");
  const auto cfg = write_config(dir, json{{"T", 80}, {"replicates", 2}});
  std::ostringstream log, err;
  CommandOptions opt;
  opt.config_path = cfg.string();
  opt.out_dir = (dir / "first").string();
  opt.write_traces = false;
  ASSERT_EQ(cmd_run(opt, log, err), exit_ok);
  CommandOptions replay;
  replay.manifest_path = (dir / "first" / "manifest.json").string();
  replay.out_dir = (dir / "second").string();
  replay.write_traces = false;
  ASSERT_EQ(cmd_run(replay, log, err), exit_ok) << err.str();
  EXPECT_EQ(slurp(dir / "first" / "summary.csv"), slurp(dir / "second" / "summary.csv"));
}

TEST(Commands, InvalidConfigExitsWithUsageCode) {
  const auto dir = scratch_dir("invalid");
  std::ostringstream log, err;
  CommandOptions opt;
  opt.out_dir = (dir / "out").string();
  opt.config_path = write_config(dir, json{{"gamma", 100}}).string();
  EXPECT_EQ(cmd_run(opt, log, err), exit_usage);
  EXPECT_NE(err.str().find("gamma"), std::string::npos);
  opt.config_path = write_config(dir, json{{"bogus", 1}}).string();
  EXPECT_EQ(cmd_run(opt, log, err), exit_usage);
  opt.config_path = (dir / "missing.json").string();
  EXPECT_EQ(cmd_run(opt, log, err), exit_usage);
  opt.config_path.clear();
  opt.preset = "nope";
  EXPECT_EQ(cmd_run(opt, log, err), exit_usage);
  opt.preset.clear();
  opt.solver = "magic";
  EXPECT_EQ(cmd_run(opt, log, err), exit_usage);
  EXPECT_FALSE(fs::exists(dir / "out" / "summary.csv"));
}

TEST(Commands, SweepWritesOneBlockPerHorizon) {
  const auto dir = scratch_dir("sweep");
  std::ostringstream log, err;
  CommandOptions opt;
  opt.config_path = write_config(dir, json{{"replicates", 2}}).string();
  opt.out_dir = (dir / "out").string();
  opt.write_traces = false;
  opt.horizons = {50};
  ASSERT_EQ(cmd_sweep(opt, log, err), exit_ok) << err.str();
  const auto ls = lines(slurp(dir / "out" / "sweep.csv"));
  EXPECT_EQ(ls.size(), 1u + 2u + 3u);
  opt.horizons.clear();
  EXPECT_EQ(cmd_sweep(opt, log, err), exit_usage);
}

TEST(Commands, BoundsRangeStartsAtKTilde) {
  const auto dir = scratch_dir("bounds");
  std::ostringstream log, err;
  CommandOptions opt;
  opt.out_dir = dir.string();
  opt.config_path = write_config(dir, json{{"T", 40}}).string();
  ASSERT_EQ(cmd_bounds(opt, log, err), exit_ok) << err.str();
  auto ls = lines(slurp(dir / "bounds.csv"));
  EXPECT_EQ(split(ls[1])[0], "2");
  EXPECT_EQ(ls.size(), 1u + 39u);

  opt.config_path = write_config(dir, json{{"T", 40}, {"k", 2}}).string();
  ASSERT_EQ(cmd_bounds(opt, log, err), exit_ok) << err.str();
  ls = lines(slurp(dir / "bounds.csv"));
  EXPECT_EQ(split(ls[1])[0], "14");

  opt.config_path = write_config(dir, json{{"T", 10}, {"k", 2}}).string();
  EXPECT_EQ(cmd_bounds(opt, log, err), exit_usage);
  EXPECT_NE(err.str().find("k~"), std::string::npos);
}
