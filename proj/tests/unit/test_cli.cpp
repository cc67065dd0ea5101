#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "sonarfuse/scene.hpp"
#include "test_support.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using sonarfuse::testing::read_file;
using sonarfuse::testing::TempDir;

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

/// Runs the installed binary with the given arguments and returns its exit status.
int run_cli(const std::vector<std::string>& args, const fs::path& log) {
  std::string cmd = quote(SONARFUSE_CLI_PATH);
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " > " + quote(log.string()) + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json read_json(const fs::path& p) { return json::parse(read_file(p)); }

class Cli : public ::testing::Test {
 protected:
  TempDir dir{"cli"};
  fs::path log() const { return dir / "log.txt"; }
  int run(const std::vector<std::string>& args) { return run_cli(args, log()); }
  std::string output() const { return read_file(log()); }

  fs::path small_dataset(const std::string& name, std::size_t count = 1, const std::string& noise = "none") {
    const fs::path out = dir / name;
    EXPECT_EQ(run({"gen-data", "--out", out.string(), "--count", std::to_string(count), "--size", "64", "--ppm",
                   "4", "--seed", "3", "--noise", noise}),
              0)
        << output();
    return out;
  }
};

TEST_F(Cli, HelpAndVersionExitZero) {
  EXPECT_EQ(run({"--help"}), 0);
  EXPECT_NE(output().find("gen-data"), std::string::npos);
  EXPECT_EQ(run({"--version"}), 0);
  EXPECT_NE(output().find("sonarfuse"), std::string::npos);
}

TEST_F(Cli, UnknownFlagIsUsageError) {
  EXPECT_EQ(run({"gen-data", "--out", (dir / "x").string(), "--bogus"}), 1);
  EXPECT_EQ(run({"no-such-command"}), 1);
  EXPECT_EQ(run({"gen-data"}), 1);  // missing required --out
}

TEST_F(Cli, InvalidValueIsDomainError) {
  EXPECT_EQ(run({"gen-data", "--out", (dir / "x").string(), "--noise", "extreme"}), 1);
  EXPECT_NE(output().find("extreme"), std::string::npos);
}

TEST_F(Cli, MissingInputIsIoError) {
  EXPECT_EQ(run({"segment", "--in", (dir / "absent.png").string(), "--out", (dir / "m.png").string()}), 2);
  EXPECT_EQ(run({"train-fusion", "--manifest", (dir / "absent.json").string(), "--out", (dir / "f.ssnn").string()}),
            2);
}

TEST_F(Cli, ZeroCountGivesEmptyManifest) {
  const fs::path out = dir / "empty";
  ASSERT_EQ(run({"gen-data", "--out", out.string(), "--count", "0"}), 0) << output();
  EXPECT_TRUE(sonarfuse::scene::load_manifest(out / "manifest.json").entries.empty());
}

TEST_F(Cli, GenDataWritesProvenanceAndIsReproducible) {
  const fs::path a = small_dataset("a");
  const fs::path b = small_dataset("b");
  EXPECT_EQ(read_file(a / "manifest.json"), read_file(b / "manifest.json"));
  const auto m = sonarfuse::scene::load_manifest(a / "manifest.json");
  ASSERT_EQ(m.entries.size(), 5u);
  EXPECT_EQ(read_file(m.resolve(m.entries[0].image)), read_file(b / m.entries[0].image));
  const json prov = read_json(a / "gen-data.provenance.json");
  EXPECT_EQ(prov.at("tool"), "sonarfuse 1.0.0");
  EXPECT_EQ(prov.at("subcommand"), "gen-data");
  EXPECT_EQ(prov.at("seed"), 3);
  EXPECT_EQ(prov.at("config").at("count"), 1);
}

TEST_F(Cli, FlagsOverrideConfigOverrideDefaults) {
  const fs::path cfg = dir / "cfg.json";
  {
    std::ofstream f(cfg);
    f << R"({"gen-data": {"count": 2, "size": 48, "pixelsPerMeter": 3.0}})";
  }
  const fs::path out = dir / "cfgrun";
  ASSERT_EQ(run({"gen-data", "--config", cfg.string(), "--out", out.string(), "--count", "1"}), 0) << output();
  const json prov = read_json(out / "gen-data.provenance.json");
  EXPECT_EQ(prov.at("config").at("count"), 1);    // flag wins
  EXPECT_EQ(prov.at("config").at("size"), 48);    // config fills
  EXPECT_EQ(prov.at("config").at("altitude"), 10.0);  // default remains
  const auto m = sonarfuse::scene::load_manifest(out / "manifest.json");
  EXPECT_EQ(m.entries.size(), 5u);
  EXPECT_EQ(m.entries[0].spec.image_height, 48u);
}

TEST_F(Cli, BadConfigIsDomainError) {
  const fs::path cfg = dir / "bad.json";
  {
    std::ofstream f(cfg);
    f << R"({"count": "many"})";
  }
  EXPECT_EQ(run({"gen-data", "--config", cfg.string(), "--out", (dir / "o").string()}), 1);
}

TEST_F(Cli, AddNoiseLeavesInputsUntouched) {
  const fs::path ds = small_dataset("clean");
  const auto m = sonarfuse::scene::load_manifest(ds / "manifest.json");
  const fs::path img = m.resolve(m.entries[0].image);
  const std::string before = read_file(img);
  const std::string manifest_before = read_file(ds / "manifest.json");
  ASSERT_EQ(run({"add-noise", "--manifest", (ds / "manifest.json").string(), "--profile", "heavy", "--seed", "4"}), 0)
      << output();
  EXPECT_EQ(read_file(img), before);
  EXPECT_EQ(read_file(ds / "manifest.json"), manifest_before);
  const auto noisy = sonarfuse::scene::load_manifest(ds / "manifest.noisy.json");
  ASSERT_EQ(noisy.entries.size(), 5u);
  EXPECT_FALSE(noisy.entries[0].noisy_image.empty());
  EXPECT_NE(read_file(noisy.input_image(noisy.entries[0])), before);
  EXPECT_EQ(run({"add-noise", "--in", img.string(), "--out", img.string()}), 1);
  EXPECT_EQ(read_file(img), before);
}

TEST_F(Cli, SegmentIsDeterministic) {
  const fs::path ds = small_dataset("seg", 1, "light");
  const auto m = sonarfuse::scene::load_manifest(ds / "manifest.json");
  const fs::path img = m.input_image(m.entries[1]);
  ASSERT_EQ(run({"segment", "--in", img.string(), "--out", (dir / "m1.png").string(), "--seed", "2"}), 0) << output();
  ASSERT_EQ(run({"segment", "--in", img.string(), "--out", (dir / "m2.png").string(), "--seed", "2"}), 0);
  EXPECT_EQ(read_file(dir / "m1.png"), read_file(dir / "m2.png"));
  EXPECT_TRUE(fs::exists(dir / "m1.png.provenance.json"));

  ASSERT_EQ(run({"segment", "--manifest", (ds / "manifest.json").string()}), 0) << output();
  const auto seg = sonarfuse::scene::load_manifest(ds / "manifest.segmented.json");
  for (const auto& e : seg.entries) EXPECT_TRUE(fs::exists(seg.resolve(e.predicted_shadow_mask)));
}

TEST_F(Cli, MetricsReportsInfinitePsnrForIdenticalImages) {
  const fs::path ds = small_dataset("met");
  const auto m = sonarfuse::scene::load_manifest(ds / "manifest.json");
  const std::string img = m.resolve(m.entries[0].image).string();
  const std::string mask = m.resolve(m.entries[0].shadow_mask).string();
  ASSERT_EQ(run({"metrics", "--ref", img, "--test", img, "--ref-mask", mask, "--test-mask", mask, "--out",
                 (dir / "r.json").string(), "--csv", (dir / "r.csv").string()}),
            0)
      << output();
  const json r = read_json(dir / "r.json");
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].at("psnr"), "inf");
  EXPECT_DOUBLE_EQ(r[0].at("ssim").get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(r[0].at("iou").get<double>(), 1.0);
  EXPECT_EQ(read_file(dir / "r.csv").rfind("methodId,imageId,psnr,ssim,iou\n", 0), 0u);
}

TEST_F(Cli, TrainAndEvaluateFusionEndToEnd) {
  const fs::path ds = small_dataset("fus", 3, "light");
  const std::string manifest = (ds / "manifest.json").string();
  ASSERT_EQ(run({"train-fusion", "--manifest", manifest, "--out", (dir / "f.ssnn").string(), "--epochs", "3",
                 "--history", (dir / "h.json").string(), "--seed", "1"}),
            0)
      << output();
  const json hist = read_json(dir / "h.json");
  EXPECT_EQ(hist.at("epochs").size(), 3u);
  EXPECT_GE(hist.at("selectedEpoch").get<int>(), 1);
  ASSERT_EQ(run({"eval-fusion", "--manifest", manifest, "--model", (dir / "f.ssnn").string(), "--out",
                 (dir / "e.json").string(), "--csv", (dir / "e.csv").string()}),
            0)
      << output();
  const json rep = read_json(dir / "e.json");
  EXPECT_EQ(rep.at("count"), 15);
  EXPECT_EQ(rep.at("images").size(), 15u);
  EXPECT_EQ(read_file(dir / "e.csv").rfind("id,alpha,beta,predicted,true\n", 0), 0u);
}

TEST_F(Cli, FullPipelineOnTwoHundredFiftyImagesKeepsFusionOrdering) {
  const std::string train = (dir / "train").string(), test = (dir / "test").string();
  ASSERT_EQ(run({"gen-data", "--out", train, "--count", "40", "--size", "96", "--ppm", "6", "--seed", "21"}), 0);
  ASSERT_EQ(run({"gen-data", "--out", test, "--count", "10", "--size", "96", "--ppm", "6", "--seed", "22"}), 0);
  ASSERT_EQ(run({"add-noise", "--manifest", train + "/manifest.json", "--profile", "default", "--seed", "5"}), 0);
  ASSERT_EQ(run({"add-noise", "--manifest", test + "/manifest.json", "--profile", "default", "--seed", "6"}), 0);
  std::map<std::string, double> accuracy;
  for (const std::string mode : {"adaptive", "combined", "shadow"}) {
    const std::string model = (dir / (mode + ".ssnn")).string();
    const std::string report = (dir / (mode + ".json")).string();
    ASSERT_EQ(run({"train-fusion", "--manifest", train + "/manifest.noisy.json", "--out", model, "--mode", mode,
                   "--seed", "9"}),
              0)
        << output();
    ASSERT_EQ(run({"eval-fusion", "--manifest", test + "/manifest.noisy.json", "--model", model, "--out", report}), 0)
        << output();
    const json r = read_json(report);
    ASSERT_EQ(r.at("count"), 50);
    accuracy[mode] = r.at("accuracy").get<double>();
  }
  EXPECT_GE(accuracy["adaptive"], accuracy["combined"] - 0.01);
  EXPECT_GE(accuracy["adaptive"], accuracy["shadow"]);
}

TEST_F(Cli, DenoiseTrainAndApply) {
  const fs::path ds = small_dataset("den", 1, "default");
  const std::string manifest = (ds / "manifest.json").string();
  ASSERT_EQ(run({"train-denoise", "--manifest", manifest, "--out", (dir / "d.ssnn").string(), "--epochs", "2",
                 "--patches-per-image", "8"}),
            0)
      << output();
  const auto m = sonarfuse::scene::load_manifest(ds / "manifest.json");
  const std::string noisy = m.input_image(m.entries[0]).string();
  const std::string clean = m.resolve(m.entries[0].image).string();
  ASSERT_EQ(run({"denoise", "--in", noisy, "--out", (dir / "dn.png").string(), "--model", (dir / "d.ssnn").string(),
                 "--clean", clean}),
            0)
      << output();
  EXPECT_EQ(read_json(dir / "dn.png.metrics.json").size(), 2u);
  ASSERT_EQ(run({"denoise", "--in", noisy, "--out", (dir / "bl.png").string(), "--method", "baseline"}), 0)
      << output();
  EXPECT_EQ(run({"denoise", "--in", noisy, "--out", (dir / "x.png").string(), "--method", "median"}), 1);
  EXPECT_EQ(run({"denoise", "--in", noisy, "--out", noisy, "--method", "baseline"}), 1);
}

}  // namespace
