#include <doctest.h>

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "monocheck/cli.hpp"
#include "monocheck/io.hpp"
#include "support.hpp"

using namespace monocheck;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct Capture {
  test::TempDir dir;
  fs::path manifest;
  Capture() {
    const auto r = run({"synth", "orbit", "--out-dir", (dir / "seq").string(), "--frames", "6",
                        "--test-times", "0.5", "--keypoint-frames", "2", "--no-meta"});
    REQUIRE(r.code == 0);
    manifest = dir / "seq" / "manifest.json";
  }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("emf angular on a 1 degree per frame orbit") {
  Capture cap;
  const auto r = run({"emf", "angular", "--manifest", cap.manifest.string()});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(std::abs(j["metrics"]["omega_deg_per_s"].get<double>() - 30.0) < 1e-9);
  CHECK(j.contains("meta"));
  CHECK(j["sequence"] == "synth_orbit");
  const auto o = run({"emf", "angular", "--manifest", cap.manifest.string(), "--lookat", "0,0,0", "--no-meta"});
  CHECK(nlohmann::json::parse(o.out)["params"]["lookat_source"] == "override");
  CHECK(run({"emf", "angular", "--manifest", cap.manifest.string(), "--lookat", "0,0"}).code == 2);
}

TEST_CASE("eval pck with predictions equal to ground truth") {
  Capture cap;
  const fs::path gt = cap.dir / "seq" / "keypoints" / "00002.json";
  REQUIRE(fs::exists(gt));
  const auto r = run({"eval", "pck", "--manifest", cap.manifest.string(), "--pred", gt.string(),
                      "--alpha", "0.05", "--no-meta"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["metrics"]["pck_t"] == 1.0);
  CHECK(j["params"]["pck_normalization"].get<std::string>().find("max") != std::string::npos);
}

TEST_CASE("covis on a manifest with a missing flow file") {
  Capture cap;
  auto j = io::read_json(cap.manifest);
  for (auto& p : j["flow_pairs"])
    if (p["src"] == 0 && p["dst"] == 1) p["fwd"] = "flow/missing.flo";
  io::write_text(cap.dir / "seq" / "broken.json", j.dump());
  const auto r = run({"covis", "--manifest", (cap.dir / "seq" / "broken.json").string()});
  CHECK(r.code == 2);
  CHECK(r.out.empty());
  CHECK(r.err.find("(0,1)") != std::string::npos);
}

TEST_CASE("reports are byte identical without meta, across thread counts") {
  Capture cap;
  const auto a = run({"emf", "full", "--manifest", cap.manifest.string(), "--no-meta", "--threads", "1"});
  const auto b = run({"emf", "full", "--manifest", cap.manifest.string(), "--no-meta", "--threads", "3"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto c = run({"covis", "--manifest", cap.manifest.string(), "--no-meta", "--threads", "2"});
  const auto d = run({"covis", "--manifest", cap.manifest.string(), "--no-meta"});
  CHECK(c.out == d.out);
}

TEST_CASE("eval nvs with ground-truth predictions and LPIPS maps") {
  Capture cap;
  const fs::path pred = cap.dir / "pred";
  fs::create_directories(pred);
  fs::copy(cap.dir / "seq" / "rgb" / "00006.png", pred / "00006.png");
  const fs::path lp = cap.dir / "lpips";
  fs::create_directories(lp);
  depth::DepthMap full(64, 48, 0.25), half(32, 24, 0.125);
  io::write_depth(lp / "00006_0.dpth", full);
  io::write_depth(lp / "00006_1.dpth", half);
  const auto r = run({"eval", "nvs", "--manifest", cap.manifest.string(), "--pred-dir", pred.string(),
                      "--lpips-dir", lp.string(), "--no-meta", "-o", (cap.dir / "report.json").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  const auto j = io::read_json(cap.dir / "report.json");
  CHECK(j["metrics"]["mpsnr"] == "inf");
  CHECK(j["metrics"]["mssim"].get<double>() >= 1.0 - 1e-9);
  CHECK(std::abs(j["metrics"]["mlpips"].get<double>() - 0.375) < 1e-7);
  CHECK(j["params"].contains("beta_formula"));
  CHECK(j["params"].contains("mpsnr_definition"));
}

TEST_CASE("csv output") {
  Capture cap;
  const auto r = run({"emf", "angular", "--manifest", cap.manifest.string(), "--format", "csv", "--no-meta"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("key,value\n", 0) == 0);
  CHECK(r.out.find("metrics.omega_deg_per_s,") != std::string::npos);
}

TEST_CASE("calib pnp: success, numerical failure and missing seed") {
  test::TempDir tmp;
  std::mt19937_64 g(8);
  auto inst = test::make_pnp_instance(g, 40, 0.2);
  io::write_correspondences(tmp / "c.json", inst.corrs);
  io::write_camera(tmp / "cam.json", inst.intrinsics);
  const auto ok = run({"calib", "pnp", "--corrs", (tmp / "c.json").string(), "--camera",
                       (tmp / "cam.json").string(), "--seed", "4", "--no-meta", "--out-camera",
                       (tmp / "posed.json").string()});
  REQUIRE(ok.code == 0);
  const auto j = nlohmann::json::parse(ok.out);
  CHECK(j["metrics"]["inlier_count"] == 32);
  const auto posed = io::read_camera(tmp / "posed.json");
  CHECK(test::rotation_angle(posed.orientation, inst.rotation) < 1e-6);

  for (auto& c : inst.corrs) c.pixel = {test::uniform(0, 640), test::uniform(0, 480)};
  io::write_correspondences(tmp / "noise.json", inst.corrs);
  const auto bad = run({"calib", "pnp", "--corrs", (tmp / "noise.json").string(), "--camera",
                        (tmp / "cam.json").string(), "--seed", "4", "--inlier-px", "0.5", "--max-iters", "100"});
  CHECK(bad.code == 3);
  CHECK(bad.err.find("consensus") != std::string::npos);

  CHECK(run({"calib", "pnp", "--corrs", (tmp / "c.json").string(), "--camera", (tmp / "cam.json").string()}).code == 2);
}

TEST_CASE("depth filter writes the filtered map") {
  test::TempDir tmp;
  depth::DepthMap d(10, 6);
  for (int v = 0; v < 6; ++v)
    for (int u = 0; u < 10; ++u) d.at(u, v) = u < 5 ? 1.0 : 2.0;
  io::write_depth(tmp / "in.dpth", d);
  const auto r = run({"depth", "filter", "--input", (tmp / "in.dpth").string(), "--output",
                      (tmp / "out.dpth").string(), "--grad-threshold", "0.5", "--no-meta"});
  REQUIRE(r.code == 0);
  const auto f = io::read_depth(tmp / "out.dpth");
  CHECK(f.valid_count() == 8u * 6u);
  CHECK(nlohmann::json::parse(r.out)["metrics"]["valid_after"] == 48);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"emf", "full"}).code == 2);
  CHECK(run({"emf", "full", "--manifest", "/nonexistent/m.json"}).code == 2);
  CHECK(run({"eval", "pck", "--manifest", "x.json", "--pred", "y.json", "--format", "xml"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

}
