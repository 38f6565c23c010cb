#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "waterline/cli.hpp"

using namespace waterline;

namespace {

const std::string kSamples = WATERLINE_SAMPLES_DIR;

struct Run {
  int code = -1;
  std::string out, err;
};

Run cli_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "waterline_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(CliSolve, SymmetricP1) {
  const auto r = cli_run({"solve", kSamples + "/p1_symmetric.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = Json::parse(r.out);
  EXPECT_EQ(doc["powers"], Json::array({1.0, 1.0}));
  EXPECT_EQ(doc["status"], "optimal");
  EXPECT_TRUE(doc["conditions_pass"].get<bool>());
  EXPECT_TRUE(doc.contains("wall_time_s"));
  EXPECT_EQ(doc["config"]["box_strategy"], "ordered");
}

TEST(CliSolve, BoxExampleWithEveryStrategy) {
  for (std::string s : {"bisection", "ordered", "set_a", "set_b"}) {
    const auto r = cli_run({"solve", kSamples + "/box_k3.json", "--strategy", s});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto p = result_powers(Json::parse(r.out));
    EXPECT_NEAR(p[0], 1.0, 1e-9);
    EXPECT_NEAR(p[1], 2.5, 1e-9);
    EXPECT_NEAR(p[2], 2.5, 1e-9);
    EXPECT_EQ(Json::parse(r.out)["strategy"], s);
  }
}

TEST(CliSolve, MalformedFamilyExitsOne) {
  const auto r = cli_run({"solve", kSamples + "/bad_family.json"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("objectives[1].family"), std::string::npos);
}

TEST(CliSolve, MissingFileAndBadFlags) {
  EXPECT_EQ(cli_run({"solve", "/nonexistent/instance.json"}).code, 1);
  EXPECT_EQ(cli_run({"solve", kSamples + "/box_k3.json", "--strategy", "fastest"}).code, 1);
  EXPECT_EQ(cli_run({}).code, 1);
  EXPECT_EQ(cli_run({"--help"}).code, 0);
}

TEST(CliSolve, OutputIsDeterministicApartFromWallTime) {
  auto strip = [](std::string s) {
    auto doc = Json::parse(s);
    doc.erase("wall_time_s");
    return doc.dump();
  };
  for (const auto* name : {"box_k10.json", "ascending.json", "cluster_maxmin.json"}) {
    const auto a = cli_run({"solve", kSamples + "/" + name});
    const auto b = cli_run({"solve", kSamples + "/" + name});
    EXPECT_EQ(strip(a.out), strip(b.out)) << name;
  }
}

TEST(CliVerify, SolveThenVerifyEverySample) {
  for (const auto* name : {"p1_symmetric", "p1_lower", "box_k3", "box_k10", "ascending", "maxmin_log3", "cluster",
                           "cluster_maxmin"}) {
    const auto inst = kSamples + "/" + name + ".json";
    const auto res = scratch(std::string(name) + ".result.json").string();
    ASSERT_EQ(cli_run({"solve", inst, "--out", res}).code, 0) << name;
    const auto v = cli_run({"verify", inst, res});
    EXPECT_EQ(v.code, 0) << name << "\n" << v.out;
    EXPECT_NE(v.out.find("PASS"), std::string::npos);
  }
}

TEST(CliVerify, FailingAllocationExitsTwo) {
  const auto res = scratch("uniform.result.json").string();
  write_json_file(res, {{"powers", {1.5, 1.5}}});
  const auto doc = Json{{"problem_class", "maxmin"}, {"group_powers", {{1.5}, {1.5}}}};
  write_json_file(res, doc);
  const auto v = cli_run({"verify", kSamples + "/maxmin_log3.json", res});
  EXPECT_EQ(v.code, 2);
  EXPECT_NE(v.out.find("FAIL"), std::string::npos);
}

TEST(CliVerify, MismatchExitsOne) {
  const auto res = scratch("short.result.json").string();
  write_json_file(res, {{"powers", {1.0, 2.5}}});
  EXPECT_EQ(cli_run({"verify", kSamples + "/box_k3.json", res}).code, 1);
  write_json_file(res, {{"problem_class", "p1"}, {"powers", {1.0, 2.5, 2.5}}});
  EXPECT_EQ(cli_run({"verify", kSamples + "/box_k3.json", res}).code, 1);
}

TEST(CliCompare, ThreeChannelTable) {
  const auto r = cli_run({"compare", kSamples + "/box_k3.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].substr(0, 9), "strategy,");
  EXPECT_EQ(rows[1].substr(0, 10), "bisection,");
  EXPECT_EQ(rows[2].substr(0, 8), "ordered,");
  EXPECT_EQ(rows[3].substr(0, 6), "set_a,");
  EXPECT_EQ(rows[4].substr(0, 6), "set_b,");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::vector<std::string> cells;
    std::stringstream ss(rows[i]);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    ASSERT_EQ(cells.size(), 9u);
    EXPECT_LE(std::stod(cells[6]), 1e-6);  // max pairwise Linf
    EXPECT_LE(std::stod(cells[7]), 1e-6);  // Linf to enumeration
  }
}

TEST(CliCompare, LargeInstanceMarksOracleOutOfRange) {
  const auto r = cli_run({"compare", kSamples + "/box_k10.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_NE(rows[i].find("out-of-range"), std::string::npos);
}

TEST(CliCompare, NonBoxInstanceRejected) {
  EXPECT_EQ(cli_run({"compare", kSamples + "/p1_symmetric.json"}).code, 1);
}

TEST(CliGenerate, WritesLoadableDeterministicInstances) {
  const auto dir_a = scratch("gen_a").string();
  const auto dir_b = scratch("gen_b").string();
  const std::vector<std::string> common = {"--subcarriers", "4", "--realizations", "2", "--seed", "9",
                                           "--gamma", "0.5", "--tau", "2"};
  auto args = std::vector<std::string>{"generate", "--out-dir", dir_a};
  args.insert(args.end(), common.begin(), common.end());
  ASSERT_EQ(cli_run(args).code, 0);
  args[2] = dir_b;
  ASSERT_EQ(cli_run(args).code, 0);
  for (const auto* f : {"instance_0000.json", "instance_0001.json"}) {
    const auto a = read_json_file(dir_a + "/" + f);
    EXPECT_EQ(a, read_json_file(dir_b + "/" + f));
    const auto inst = instance_from_json(a);
    EXPECT_EQ(inst.channel_count(), 16u);
    EXPECT_EQ(a["metadata"]["seed"], 9);
    const auto res = cli_run({"solve", dir_a + "/" + f});
    EXPECT_EQ(res.code, 0);
  }
}

TEST(CliGenerate, SeedFromEnvironmentWins) {
  const auto dir = scratch("gen_env").string();
  setenv("WATERLINE_SEED", "123", 1);
  const auto r = cli_run({"generate", "--out-dir", dir, "--subcarriers", "2", "--seed", "5"});
  unsetenv("WATERLINE_SEED");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(read_json_file(dir + "/instance_0000.json")["metadata"]["seed"], 123);
}

TEST(CliGenerate, SpecFileWithFlagOverride) {
  const auto spec = scratch("spec.json").string();
  write_json_file(spec, {{"subcarriers", 3}, {"antennas", 2}, {"snr_db", 5}, {"seed", 4}});
  const auto dir = scratch("gen_spec").string();
  ASSERT_EQ(cli_run({"generate", "--spec", spec, "--antennas", "3", "--out-dir", dir}).code, 0);
  const auto doc = read_json_file(dir + "/instance_0000.json");
  EXPECT_EQ(doc["metadata"]["antennas"], 3);
  EXPECT_EQ(doc["metadata"]["subcarriers"], 3);
  EXPECT_EQ(doc["objectives"].size(), 9u);
  write_json_file(spec, {{"subcarrier", 3}});
  EXPECT_EQ(cli_run({"generate", "--spec", spec, "--out-dir", dir}).code, 1);
}

TEST(CliSweep, TrendAndPinnedBox) {
  const auto r = cli_run({"sweep", "--subcarriers", "16", "--realizations", "20", "--gamma", "0.4", "--tau", "1.6"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0], "snr_db,gamma,tau,mean_mse,realizations,failures,bound_active_fraction");
  double prev = 1e9;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::vector<std::string> cells;
    std::stringstream ss(rows[i]);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    const double m = std::stod(cells[3]);
    EXPECT_LT(m, prev);
    prev = m;
  }
}

TEST(CliSweep, ThreadCountDoesNotChangeOutput) {
  const std::vector<std::string> base = {"sweep", "--subcarriers", "8", "--realizations", "9", "--snr-list", "0,20"};
  auto one = base;
  one.insert(one.end(), {"--jobs", "1"});
  auto four = base;
  four.insert(four.end(), {"--jobs", "4"});
  EXPECT_EQ(cli_run(one).out, cli_run(four).out);
}

TEST(CliSweep, DumpHasBothBoundsAtHighSnr) {
  const auto dump = scratch("dump.json").string();
  const auto r =
      cli_run({"sweep", "--realizations", "1", "--snr-list", "20", "--gamma", "0.4", "--tau", "1.6", "--dump", dump});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = read_json_file(dump);
  ASSERT_EQ(doc.size(), 1u);
  EXPECT_FALSE(doc[0]["at_lower"].empty());
  EXPECT_FALSE(doc[0]["at_upper"].empty());
  EXPECT_EQ(doc[0]["powers"].size(), 1024u);
}

TEST(CliSweep, PinnedBoxIsUniform) {
  const auto dump = scratch("dump_pinned.json").string();
  const auto r = cli_run({"sweep", "--subcarriers", "8", "--realizations", "2", "--snr-list", "10", "--gamma", "1",
                          "--tau", "1", "--dump", dump});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto& p : read_json_file(dump)[0]["powers"]) EXPECT_EQ(p.get<double>(), 0.25);
}

TEST(CliSweep, BadSnrList) {
  EXPECT_EQ(cli_run({"sweep", "--snr-list", "0,x"}).code, 1);
}
