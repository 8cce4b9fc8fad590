#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hots/config.hpp"
#include "hots/pipeline.hpp"

using namespace hots;

namespace {

std::string base_config(const std::string& scales, const std::string& extra = "") {
  return R"([material.hard]
rho = 2.0
c = 3.0 0.001
k = 4.0 0.01
E = 400
nu = 0.3
beta = 2.5
vartheta_mode = theta_ref
vartheta_scale = 330

[material.soft]
rho = 1.5
c = 2.0
k = 1.0
E = 100
nu = 0.3
beta = 1.0

[scales]
)" + scales + R"(

[theta_grid]
lo = 300
hi = 400
n = 2

[cell.Z]
mesh = 4
matrix = soft
inclusion = hard

[cell.Y]
mesh = 4
matrix = soft
inclusion = @composite

[macro]
mesh = 4

[time]
dt = 0.01
t_end = 0.02

[bc]
theta = 330
u = 0 0

[source]
heat = 200
force = -5 -5

[solver]
theta_ref = 330

[reference]
mesh = 8
)" + extra;
}

RunConfig parse_str(const std::string& text) {
  std::istringstream is(text);
  return parse_config_stream(is);
}

}  // namespace

TEST(Config, MinimalConfigAppliesDefaults) {
  RunConfig cfg = parse_str(base_config("zeta1 = 1/2\nzeta2 = 1/4"));
  EXPECT_DOUBLE_EQ(cfg.zeta1, 0.5);
  EXPECT_DOUBLE_EQ(cfg.zeta2, 0.25);
  EXPECT_EQ(cfg.materials.size(), 2u);
  EXPECT_EQ(cfg.solver.max_iters, 50);          // default
  EXPECT_DOUBLE_EQ(cfg.solver.tol_theta, 1e-6); // default
  EXPECT_DOUBLE_EQ(cfg.theta_init, 330.0);      // defaults to the wall value
  EXPECT_EQ(cfg.out_dir, "out");                // default
  EXPECT_EQ(cfg.output_every, 1);               // default
  EXPECT_DOUBLE_EQ(cfg.solver.dt, cfg.dt);
}

TEST(Config, RejectsNonIntegerScaleRatio) {
  try {
    parse_str(base_config("zeta1 = 1/6\nzeta2 = 1/35"));
    FAIL() << "expected rejection";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("zeta1/zeta2"), std::string::npos);
  }
}

TEST(Config, UnknownMaterialIsNamed) {
  std::string text = base_config("zeta1 = 1/2\nzeta2 = 1/4");
  const size_t pos = text.find("inclusion = hard");
  text.replace(pos, 16, "inclusion = diam");
  try {
    parse_str(text);
    FAIL() << "expected rejection";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("diam"), std::string::npos);
  }
}

TEST(Config, MultipleViolationsReportedTogether) {
  std::string text = base_config("zeta1 = 0.3\nzeta2 = 1/35");
  const size_t pos = text.find("n = 2");
  text.replace(pos, 5, "n = 1");
  try {
    parse_str(text);
    FAIL() << "expected rejection";
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("1/zeta1"), std::string::npos);
    EXPECT_NE(msg.find("n must be >= 2"), std::string::npos);
  }
}

TEST(Config, OfflineHashTracksOfflineInputsOnly) {
  RunConfig a = parse_str(base_config("zeta1 = 1/2\nzeta2 = 1/4"));
  RunConfig b = parse_str(base_config("zeta1 = 1/2\nzeta2 = 1/4"));
  EXPECT_EQ(a.offline_hash(), b.offline_hash());

  // macro-side change: same cache key
  b.macro_mesh = 12;
  b.heat = 999.0;
  EXPECT_EQ(a.offline_hash(), b.offline_hash());

  // material change: different cache key
  b.materials["hard"].k = Poly{{5.0}};
  EXPECT_NE(a.offline_hash(), b.offline_hash());
}

TEST(Config, PipelineRunsAllStagesAndCachesTables) {
  namespace fs = std::filesystem;
  const std::string out = (fs::temp_directory_path() / "hots_cfg_test").string();
  fs::remove_all(out);

  RunConfig cfg = parse_str(base_config("zeta1 = 1/2\nzeta2 = 1/4"));
  cfg.out_dir = out;
  Pipeline pipe(cfg);

  EXPECT_FALSE(pipe.offline());  // cold build
  EXPECT_TRUE(pipe.offline());   // cache hit on rerun
  pipe.run_stage("all");

  for (const char* p :
       {"/manifest.json", "/online/snapshots.bin", "/reference/snapshots.bin",
        "/recon/three_scale_high/snapshots.bin", "/compare/errors.csv"})
    EXPECT_TRUE(fs::exists(out + p)) << p;

  ErrorReport rep = pipe.compare();
  // 4 variants x 2 snapshots x 4 rows
  EXPECT_EQ(rep.size(), 4u * 2u * 4u);
  for (const auto& r : rep) {
    EXPECT_TRUE(std::isfinite(r.value)) << r.variant << " " << r.field;
    EXPECT_GE(r.value, 0.0);
  }

  // determinism: online reruns byte-identically
  auto slurp = [](const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(f)),
                       std::istreambuf_iterator<char>());
  };
  const std::string first = slurp(out + "/online/snapshots.bin");
  pipe.online();
  EXPECT_EQ(first, slurp(out + "/online/snapshots.bin"));

  // a run compared against itself reports zero error everywhere
  std::vector<FieldSnapshot> ref = load_snapshots(out + "/reference");
  for (ReconVariant v : kAllVariants) {
    std::vector<FieldSnapshot> self = ref;
    for (auto& s : self) {
      s.theta_dot.resize(0);
      s.u_dot.resize(0);
      s.u_ddot.resize(0);
    }
    save_snapshots(out + "/recon/" + variant_name(v), self);
  }
  for (const auto& r : pipe.compare()) EXPECT_EQ(r.value, 0.0);

  fs::remove_all(out);
}

TEST(Config, MissingTablesNameTheArtifact) {
  namespace fs = std::filesystem;
  const std::string out = (fs::temp_directory_path() / "hots_cfg_missing").string();
  fs::remove_all(out);
  RunConfig cfg = parse_str(base_config("zeta1 = 1/2\nzeta2 = 1/4"));
  cfg.out_dir = out;
  Pipeline pipe(cfg);
  try {
    pipe.online();
    FAIL() << "expected missing-artifact error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("tables/Y"), std::string::npos);
  }
  fs::remove_all(out);
}
