#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "oori/channel.hpp"
#include "oori/positioning.hpp"
#include "oori/scene.hpp"

using namespace oori;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spit(const fs::path& p, const std::string& body) { std::ofstream(p, std::ios::binary) << body; }

/// Fresh scratch directory per test.
class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::path(::testing::TempDir()) / (std::string("oori_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  fs::path at(const std::string& name) const { return dir_ / name; }

  /// Runs the CLI with `args`; stdout and stderr land in out.txt / err.txt.
  int run(const std::string& args) const {
    const std::string cmd = std::string(OORI_CLI_PATH) + " " + args + " >" +
                            at("out.txt").string() + " 2>" + at("err.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string out() const { return slurp(at("out.txt")); }
  std::string err() const { return slurp(at("err.txt")); }

  fs::path dir_;
};

std::size_t data_rows(const std::string& csv) {
  std::size_t n = 0;
  for (char c : csv) n += c == '\n';
  return n - 1;
}

}  // namespace

TEST_F(Cli, GenSceneCorridorHasFiveGnbsPerKilometer) {
  spit(at("c.cfg"), "# corridor\nscene_kind = corridor\nlength = 1000\n");
  ASSERT_EQ(run("gen-scene -c " + at("c.cfg").string() + " -o " + at("s.json").string() +
                " --trajectory-out " + at("t.csv").string()),
            0)
      << err();
  const Scene s = read_scene(at("s.json").string());
  EXPECT_EQ(s.gnbs().size(), 5u);
  EXPECT_DOUBLE_EQ(s.gnbs()[0].position.y, 4.0);
  EXPECT_EQ(read_trajectory(at("t.csv").string()).back().position.x, 1000.0);
}

TEST_F(Cli, InvalidSceneParametersFail) {
  spit(at("g.cfg"), "rows = 0\ncols = 0\n");
  EXPECT_NE(run("gen-scene --kind grid -c " + at("g.cfg").string() + " -o " + at("s.json").string()),
            0);
  EXPECT_NE(err().find("error"), std::string::npos);
  EXPECT_FALSE(fs::exists(at("s.json")));
}

TEST_F(Cli, UnknownConfigKeyNamesTheLine) {
  spit(at("bad.cfg"), "seed = 3\n\nsigma_rnage = 1\n");
  EXPECT_NE(run("gen-scene -c " + at("bad.cfg").string() + " -o " + at("s.json").string()), 0);
  EXPECT_NE(err().find("bad.cfg:3"), std::string::npos) << err();
}

TEST_F(Cli, SingleEpochEmptySceneGivesOneLosRow) {
  write_scene(Scene({}, {{1, {0, 4}, 10}}), at("s.json").string());
  spit(at("t.csv"), "t,x,y,z\n0,25,0,1.5\n");
  const std::string args = "gen-dataset --scene " + at("s.json").string() + " --trajectory " +
                           at("t.csv").string() + " --rows 0 -o ";
  ASSERT_EQ(run(args + at("d1.csv").string()), 0) << err();
  const auto file = read_dataset(at("d1.csv").string());
  ASSERT_EQ(file.records.size(), 1u);
  ASSERT_EQ(file.records[0].measurements.size(), 1u);
  EXPECT_EQ(file.records[0].measurements[0].label, 0);
  ASSERT_EQ(run(args + at("d2.csv").string()), 0) << err();
  EXPECT_EQ(slurp(at("d1.csv")), slurp(at("d2.csv")));
}

TEST_F(Cli, CorridorDatasetHasEveryOrder) {
  spit(at("c.cfg"), "scene_kind = corridor\nlength = 250\nstep = 5\n");
  const std::string cfg = " -c " + at("c.cfg").string();
  ASSERT_EQ(run("gen-scene" + cfg + " -o " + at("s.json").string() + " --trajectory-out " +
                at("t.csv").string()),
            0);
  ASSERT_EQ(run("gen-dataset" + cfg + " --rows 0 --scene " + at("s.json").string() +
                " --trajectory " + at("t.csv").string() + " -o " + at("d.csv").string()),
            0)
      << err();
  std::vector<int> hist(4, 0);
  for (const auto& m : flatten(read_dataset(at("d.csv").string()).records)) ++hist.at(*m.label);
  for (int k = 0; k < 4; ++k) EXPECT_GT(hist[k], 0) << "order " << k;
}

TEST_F(Cli, SeparableTrainingIsPerfectAndReproducible) {
  std::ostringstream csv;
  csv << "t,gnb_id,toa_s,aoa_deg,aod_deg,rss_dbm,label\n";
  for (int i = 0; i < 600; ++i) {
    const bool late = i % 2 == 1;
    csv << i << ",1," << (late ? 1.5e-6 : 0.5e-6) << ',' << (i * 7) % 360 << ','
        << (i * 13) % 360 << ',' << -60 - (i % 30) << ',' << (late ? 1 : 0) << '\n';
  }
  spit(at("d.csv"), csv.str());
  const std::string base = "train --seed 5 --dataset " + at("d.csv").string() + " --model-out ";
  ASSERT_EQ(run(base + at("m1.txt").string()), 0) << err();
  EXPECT_NE(out().find("test_accuracy 100.000 %"), std::string::npos) << out();
  EXPECT_NE(out().find("cv_mean"), std::string::npos);
  ASSERT_EQ(run(base + at("m2.txt").string() + " --threads 3"), 0) << err();
  EXPECT_EQ(slurp(at("m1.txt")), slurp(at("m2.txt")));
  ASSERT_EQ(run("train --seed 6 --dataset " + at("d.csv").string() + " --model-out " +
                at("m3.txt").string()),
            0);
  EXPECT_NE(slurp(at("m1.txt")), slurp(at("m3.txt")));
}

TEST_F(Cli, UnlabeledDatasetCannotTrain) {
  spit(at("d.csv"),
       "t,gnb_id,toa_s,aoa_deg,aod_deg,rss_dbm,label\n0,1,1e-7,1,2,-70,\n1,1,2e-7,1,2,-71,\n");
  EXPECT_NE(run("train --dataset " + at("d.csv").string() + " --model-out " + at("m.txt").string()),
            0);
  EXPECT_NE(err().find("label"), std::string::npos) << err();
}

TEST_F(Cli, NoiselessOraclePositioningIsExact) {
  spit(at("n.cfg"),
       "scene_kind = manhattan-block\nlength = 500\nstep = 0.5\n"
       "sigma_range = 0\nsigma_angle = 0\nsigma_rss = 0\n");
  const std::string cfg = " -c " + at("n.cfg").string();
  const std::string files = " --scene " + at("s.json").string() + " --trajectory " +
                            at("t.csv").string();
  ASSERT_EQ(run("gen-scene" + cfg + " -o " + at("s.json").string() + " --trajectory-out " +
                at("t.csv").string()),
            0);
  ASSERT_EQ(run("gen-dataset" + cfg + " --rows 0" + files + " -o " + at("d.csv").string()), 0)
      << err();
  ASSERT_EQ(run("position" + cfg + " --oracle" + files + " --dataset " + at("d.csv").string() +
                " --out-dir " + at("out").string()),
            0)
      << err();
  std::size_t sbr = 0;
  for (const char* f : {"fixes_gnb1_sbr.csv", "fixes_gnb2_sbr.csv"}) {
    for (const auto& r : read_fixes((dir_ / "out" / f).string())) {
      if (r.method != Method::SBR) continue;
      EXPECT_LT(r.err, 1e-6) << f << " t=" << r.t;
      ++sbr;
    }
  }
  EXPECT_GT(sbr, 50u);
  const std::string report = slurp(dir_ / "out" / "report.txt");
  for (const char* row : {"RMS", "Max", "sub 2 m", "sub 1 m", "sub 30 cm"}) {
    EXPECT_NE(report.find(row), std::string::npos) << row;
  }
  EXPECT_TRUE(fs::exists(dir_ / "out" / "cdf_gnb1_sbr.csv"));

  ASSERT_EQ(run("report " + (dir_ / "out" / "fixes_gnb1_sbr.csv").string() + " " +
                (dir_ / "out" / "fixes_gnb1_strongest2.csv").string() + " --compare"),
            0)
      << err();
  EXPECT_NE(out().find("delta"), std::string::npos);
}

TEST_F(Cli, PositionNeedsTruthAndModel) {
  spit(at("c.cfg"), "scene_kind = corridor\nlength = 250\nstep = 25\n");
  const std::string cfg = " -c " + at("c.cfg").string();
  const std::string files = " --scene " + at("s.json").string() + " --trajectory " +
                            at("t.csv").string();
  ASSERT_EQ(run("gen-scene" + cfg + " -o " + at("s.json").string() + " --trajectory-out " +
                at("t.csv").string()),
            0);
  ASSERT_EQ(run("gen-dataset" + cfg + " --rows 0 --no-truth" + files + " -o " +
                at("bare.csv").string()),
            0);
  EXPECT_NE(run("position --oracle" + files + " --dataset " + at("bare.csv").string() +
                " --out-dir " + at("o1").string()),
            0);
  EXPECT_NE(err().find("truth"), std::string::npos) << err();

  ASSERT_EQ(run("gen-dataset" + cfg + " --rows 0" + files + " -o " + at("d.csv").string()), 0);
  EXPECT_NE(run("position" + files + " --dataset " + at("d.csv").string() + " --model " +
                at("missing.txt").string() + " --out-dir " + at("o2").string()),
            0);
  EXPECT_NE(err().find("missing.txt"), std::string::npos) << err();
  EXPECT_EQ(data_rows(slurp(at("d.csv"))), data_rows(slurp(at("bare.csv"))));
}
