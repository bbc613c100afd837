#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "gazegraph/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = GAZEGRAPH_CLI_PATH;

fs::path work_dir(const std::string& name) {
  const fs::path p = fs::path(::testing::TempDir()) / ("gg_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Runs the CLI with `args` through the shell and returns its exit status.
int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + kCli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("sparsify --ratio 0.5"), 2);
}

TEST(Cli, StageByStageChain) {
  const auto d = work_dir("chain");
  const auto p = [&](const char* f) { return (d / f).string(); };
  ASSERT_EQ(run("synth -n 600 --seed 4 -o " + p("s.json") + " --csv-dir " + d.string()), 0);
  EXPECT_TRUE(fs::exists(d / "gaze.csv"));
  ASSERT_EQ(run("ingest --gaze " + p("gaze.csv") + " --viewport " + p("viewport.csv") + " --screens " +
                p("screens.json") + " -o " + p("s2.json") + " --graph " + p("raw.json")),
            0);
  ASSERT_EQ(run("cluster --session " + p("s2.json") + " -o " + p("c.json")), 0);
  ASSERT_EQ(run("cluster --graph " + p("raw.json") + " -o " + p("c2.json")), 0);
  EXPECT_EQ(slurp(d / "c.json"), slurp(d / "c2.json"));
  ASSERT_EQ(run("sparsify -i " + p("c.json") + " -o " + p("sp.json") + " --ratio 0.5 --seed 3"), 0);
  ASSERT_EQ(run("metrics -i " + p("c.json") + " --ratios 1,0.5 --seeds 2 -o " + p("m.csv") + " --plot " +
                p("plot.json")),
            0);
  ASSERT_EQ(run("metrics -i " + p("c.json") + " --sparsified " + p("sp.json") + " -o " + p("one.csv")), 0);
  ASSERT_EQ(run("rois -i " + p("c.json") + " --screens " + p("s2.json") + " -o " + p("r.json") + " --top-k 3"), 0);
  const auto rois = gazegraph::read_json_file(p("r.json"));
  EXPECT_LE(rois.size(), 3u);
  const auto csv = slurp(d / "m.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

TEST(Cli, ExitCodesByErrorKind) {
  const auto d = work_dir("codes");
  const auto p = [&](const char* f) { return (d / f).string(); };
  // missing input file: config
  EXPECT_EQ(run("cluster --session " + p("nope.json") + " -o " + p("c.json")), 2);
  // malformed CSV: data
  { std::ofstream(d / "bad.csv") << "t_ms,screen_id,x_px,y_px,valid\n0,0,1,1,1\nabc,0,2,2,1\n"; }
  ASSERT_EQ(run("synth -n 10 -o " + p("s.json") + " --csv-dir " + d.string()), 0);
  EXPECT_EQ(run("ingest --gaze " + p("bad.csv") + " --screens " + p("screens.json") + " -o " + p("x.json")), 3);
  // raw weights overflow: numeric
  ASSERT_EQ(run("synth -n 2000 -o " + p("big.json")), 0);
  ASSERT_EQ(run("cluster --session " + p("big.json") + " -o " + p("bigc.json")), 0);
  EXPECT_EQ(run("sparsify -i " + p("bigc.json") + " -o " + p("sp.json") + " --weight-mode raw-log-capped"), 4);
  // bad argument values: config
  EXPECT_EQ(run("sparsify -i " + p("bigc.json") + " -o " + p("sp.json") + " --ratio 0"), 2);
  EXPECT_EQ(run("sparsify -i " + p("bigc.json") + " -o " + p("sp.json") + " --mode shuffle"), 2);
  EXPECT_EQ(run("run --synth --session " + p("big.json") + " --out " + p("o")), 2);
}

TEST(Cli, RunHonoursOutputDirectoryPrecedence) {
  const auto d = work_dir("env");
  const std::string common = "run --synth -n 300 --sweep-seeds 1";
  ASSERT_EQ(run(common, "cd " + d.string() + " && GAZEGRAPH_OUT_DIR=" + (d / "from_env").string()), 0);
  EXPECT_TRUE(fs::exists(d / "from_env" / "manifest.json"));
  ASSERT_EQ(run(common + " --out " + (d / "flag").string(),
                "cd " + d.string() + " && GAZEGRAPH_OUT_DIR=" + (d / "ignored").string()),
            0);
  EXPECT_TRUE(fs::exists(d / "flag" / "manifest.json"));
  EXPECT_FALSE(fs::exists(d / "ignored"));
  ASSERT_EQ(run(common, "cd " + d.string() + " && unset GAZEGRAPH_OUT_DIR &&"), 0);
  EXPECT_TRUE(fs::exists(d / "gazegraph_out" / "manifest.json"));
  EXPECT_EQ(slurp(d / "from_env" / "manifest.json"), slurp(d / "flag" / "manifest.json"));
}

TEST(Cli, CompareManifests) {
  const auto d = work_dir("compare");
  for (int s = 1; s <= 2; ++s)
    ASSERT_EQ(run("run --synth -n 300 --sweep-seeds 2 --seed " + std::to_string(s) + " --session-id s" +
                  std::to_string(s) + " --out " + (d / ("r" + std::to_string(s))).string()),
              0);
  const auto m1 = (d / "r1" / "manifest.json").string(), m2 = (d / "r2" / "manifest.json").string();
  ASSERT_EQ(run("compare " + m1 + " " + m2 + " -o " + (d / "t.csv").string() + " --json " + (d / "t.json").string()),
            0);
  const auto csv = slurp(d / "t.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_EQ(gazegraph::read_json_file((d / "t.json").string())["readers"][0]["sessions"], 2);
  EXPECT_EQ(run("compare " + m1), 2);
  EXPECT_EQ(run("compare " + m1 + " " + m2 + " --ratio 0.45"), 2);
}
