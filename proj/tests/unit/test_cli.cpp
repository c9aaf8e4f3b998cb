#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "surfcomp/cli.hpp"
#include "surfcomp/dataset/builder.hpp"
#include "surfcomp/geometry/mesh_io.hpp"
#include "surfcomp/render/camera.hpp"

using namespace surfcomp;
using namespace surfcomp::testing;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "surfcomp");
  args.push_back("-q");
  return cli::run(args);
}

std::string run_stdout(std::vector<std::string> args, int expected = cli::kOk) {
  ::testing::internal::CaptureStdout();
  const int code = run(std::move(args));
  std::string out = ::testing::internal::GetCapturedStdout();
  EXPECT_EQ(code, expected) << out;
  return out;
}

}  // namespace

TEST(Cli, EvaluateIdentity) {
  TempDir dir;
  save_point_cloud(random_cloud(300, 4), dir / "a.ply");
  const std::string out =
      run_stdout({"evaluate", "--pred", (dir / "a.ply").string(), "--gt", (dir / "a.ply").string()});
  EXPECT_NE(out.find("model_id,L1-CD(x1e-3),L2-CD(x1e-3),Precision,Recall,F-score,AUC"), std::string::npos);
  EXPECT_NE(out.find("0.000000,0.000000,1.000000,1.000000,1.000000,1.000000"), std::string::npos) << out;
}

TEST(Cli, EvaluatePairsWithFailure) {
  TempDir dir;
  save_point_cloud(random_cloud(100, 1), dir / "p.ply");
  save_point_cloud(random_cloud(100, 2), dir / "g.ply");
  write_text(dir / "pairs.csv", "pred_path,gt_path,model_id\np.ply,g.ply,ok\nmissing.ply,g.ply,bad\n");
  run_stdout({"evaluate", "--pairs", (dir / "pairs.csv").string(), "--csv", (dir / "out.csv").string()},
             cli::kPartialFailure);
  const std::string csv = read_text(dir / "out.csv");
  EXPECT_NE(csv.find("\nok,"), std::string::npos);
  EXPECT_NE(csv.find("\nmean,"), std::string::npos);
}

TEST(Cli, RenderTrajectory) {
  TempDir dir;
  save_mesh(make_box(Vec3(-0.5, -0.5, -0.5), Vec3(0.5, 0.5, 0.5)), dir / "box.obj");
  write_text(dir / "traj.csv", "x,y,z,pitch,yaw\n-3,0,0,0,0\n0,-3,0,0,90\n0,0,3,-90,0\n");
  EXPECT_EQ(run({"render", "--mesh", (dir / "box.obj").string(), "-o", (dir / "out").string(), "--mode",
                 "trajectory", "--traj", (dir / "traj.csv").string()}),
            cli::kOk);
  for (const char* f : {"rgb/00.png", "rgb/02.png", "depth/01.png", "cam/02.json"}) {
    EXPECT_TRUE(fs::exists(dir / ("out/" + std::string(f)))) << f;
  }
  EXPECT_FALSE(fs::exists(dir / "out/rgb/03.png"));

  EXPECT_EQ(run({"backproject", "--depth", (dir / "out/depth/00.png").string(), "--camera",
                 (dir / "out/cam/00.json").string(), "-o", (dir / "cloud.ply").string(), "--points", "500"}),
            cli::kOk);
  const PointCloud cloud = load_point_cloud(dir / "cloud.ply");
  ASSERT_EQ(cloud.size(), 500u);
  // The first camera looks along +X at the face x = -0.5.
  for (const auto& p : cloud.points()) EXPECT_NEAR(p.x(), -0.5, 1e-3);
}

TEST(Cli, BuildThenValidate) {
  TempDir dir;
  fs::create_directories(dir / "in");
  for (int i = 0; i < 3; ++i) {
    save_mesh(make_box(Vec3(0, 0, 0), Vec3(1, 1 + i, 2)), dir / ("in/m" + std::to_string(i) + ".obj"));
  }
  EXPECT_EQ(run({"build", (dir / "in").string(), "-o", (dir / "ds").string(), "--views", "3", "--points", "128",
                 "--seed", "5"}),
            cli::kOk);
  const DatasetManifest m = read_manifest(dir / "ds/manifest.json");
  EXPECT_EQ(m.models.size(), 3u);
  EXPECT_EQ(m.params.seed, 5u);
  EXPECT_EQ(run({"validate", (dir / "ds").string()}), cli::kOk);

  fs::remove(dir / ("ds/" + m.models[0].partial_paths[1]));
  const std::string out = run_stdout({"validate", (dir / "ds").string(), "--json"}, cli::kPartialFailure);
  EXPECT_NE(out.find("missing-path"), std::string::npos);
}

TEST(Cli, EnvironmentSeedYieldsToFlag) {
  TempDir dir;
  save_mesh(make_box(Vec3(0, 0, 0), Vec3(1, 1, 1)), dir / "m.obj");
  setenv("SURFCOMP_SEED", "9", 1);
  EXPECT_EQ(run({"build", (dir / "m.obj").string(), "-o", (dir / "a").string(), "--meshes-only"}), cli::kOk);
  EXPECT_EQ(run({"build", (dir / "m.obj").string(), "-o", (dir / "b").string(), "--meshes-only", "--seed", "4"}),
            cli::kOk);
  unsetenv("SURFCOMP_SEED");
  EXPECT_EQ(read_manifest(dir / "a/manifest.json").params.seed, 9u);
  EXPECT_EQ(read_manifest(dir / "b/manifest.json").params.seed, 4u);
}

TEST(Cli, ConfigFileSuppliesDefaults) {
  TempDir dir;
  save_mesh(make_box(Vec3(0, 0, 0), Vec3(1, 1, 1)), dir / "m.obj");
  write_text(dir / "cfg.json", R"({"seed": 21, "generation": {"views": 2, "points": 64}})");
  EXPECT_EQ(run({"build", (dir / "m.obj").string(), "-o", (dir / "ds").string(), "--config",
                 (dir / "cfg.json").string()}),
            cli::kOk);
  const DatasetManifest m = read_manifest(dir / "ds/manifest.json");
  EXPECT_EQ(m.params.seed, 21u);
  EXPECT_EQ(m.params.views, 2u);
  EXPECT_EQ(m.models[0].partial_paths.size(), 2u);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}), cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}), cli::kUsage);
  EXPECT_EQ(run({"evaluate", "--pred", "/nonexistent.ply"}), cli::kUsage);
  EXPECT_EQ(run({"render", "--mesh"}), cli::kUsage);
  TempDir dir;
  save_point_cloud(random_cloud(10, 1), dir / "a.ply");
  EXPECT_EQ(run({"evaluate", "--pred", (dir / "a.ply").string()}), cli::kUsage);
}

TEST(Cli, RuntimeErrorIsNonZero) {
  TempDir dir;
  write_text(dir / "bad.obj", "v 1 2\n");
  EXPECT_EQ(run({"caption", "--mesh", (dir / "bad.obj").string()}), cli::kPartialFailure);
}
