#include "monocheck/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "monocheck/calib.hpp"
#include "monocheck/covis.hpp"
#include "monocheck/depth.hpp"
#include "monocheck/error.hpp"
#include "monocheck/io.hpp"
#include "monocheck/pipeline.hpp"
#include "monocheck/synth.hpp"

namespace monocheck::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct CommonOptions {
  std::string manifest;
  std::string output;
  std::string format = "json";
  bool no_meta = false;
  unsigned threads = 1;
};

unsigned default_threads() {
  if (const char* env = std::getenv("MONOCHECK_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

Json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

Json vec_json(const Eigen::Vector3d& v) { return Json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d parse_vec3(const std::string& text) {
  std::stringstream ss(text);
  std::string item;
  std::vector<double> v;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "expected x,y,z but got '" + text + "'");
    }
  }
  if (v.size() != 3) throw Error(ErrorCode::kInvalidArgument, "expected x,y,z but got '" + text + "'");
  return {v[0], v[1], v[2]};
}

Json make_report(const std::string& sequence, const CommonOptions& common) {
  Json r;
  r["sequence"] = sequence;
  r["params"] = Json::object();
  r["metrics"] = Json::object();
  r["per_frame"] = Json::array();
  if (!common.no_meta) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::ostringstream ts;
    ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
    r["meta"] = {{"tool", "monocheck"}, {"version", kVersion}, {"generated_at", ts.str()}};
  }
  return r;
}

std::string render_csv(const Json& report) {
  std::ostringstream out;
  out << "key,value\n";
  out << "sequence," << report.value("sequence", "") << "\n";
  for (const auto& [k, v] : report["params"].items())
    out << "params." << k << "," << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
  for (const auto& [k, v] : report["metrics"].items())
    out << "metrics." << k << "," << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
  return out.str();
}

void emit(const Json& report, const CommonOptions& common, std::ostream& out) {
  const std::string text = common.format == "csv" ? render_csv(report) : report.dump(2) + "\n";
  if (common.output.empty() || common.output == "-") {
    out << text;
  } else {
    io::write_text(common.output, text);
  }
}

void add_common(CLI::App* app, CommonOptions& common, bool needs_manifest, bool report_output = true) {
  if (needs_manifest) app->add_option("--manifest", common.manifest, "Sequence manifest JSON")->required();
  if (report_output) app->add_option("-o,--output", common.output, "Report path (default: standard output)");
  app->add_option("--format", common.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  app->add_flag("--no-meta", common.no_meta, "Omit the timestamped meta block");
  app->add_option("--threads", common.threads, "Worker threads (0 = all cores)");
}

Json beta_params_json(const covis::BetaParams& beta) {
  return {{"beta_min", beta.beta_min},
          {"beta_frac", beta.beta_frac},
          {"beta_formula", "max(beta_min, ceil(beta_frac * N))"}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Effective multi-view and masked evaluation toolkit for monocular dynamic captures",
               "monocheck"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CommonOptions common;
  common.threads = default_threads();

  // emf angular / emf full
  auto* emf_cmd = app.add_subcommand("emf", "Effective multi-view factors");
  emf_cmd->require_subcommand(1);
  auto* angular = emf_cmd->add_subcommand("angular", "Angular EMF (camera angular velocity, deg/s)");
  add_common(angular, common, true);
  std::string lookat_text;
  angular->add_option("--lookat", lookat_text, "Look-at point x,y,z (default: manifest or triangulated)");

  auto* full = emf_cmd->add_subcommand("full", "Full EMF (camera-to-scene motion ratio)");
  add_common(full, common, true);
  std::optional<double> eps_flow;
  std::optional<std::uint64_t> seed;
  full->add_option("--eps-flow", eps_flow, "Minimum scene-flow magnitude (world units)");
  full->add_option("--seed", seed, "RANSAC seed (required for relative depth)");

  // covis
  auto* covis_cmd = app.add_subcommand("covis", "Co-visibility heatmaps and masks for test frames");
  add_common(covis_cmd, common, true);
  covis::BetaParams beta;
  std::string covis_out_dir;
  covis_cmd->add_option("--beta-min", beta.beta_min, "Minimum co-visibility count");
  covis_cmd->add_option("--beta-frac", beta.beta_frac, "Fraction of training frames");
  covis_cmd->add_option("--out-dir", covis_out_dir, "Write <frame>_heatmap.dpth and <frame>_mask.png here");

  // eval nvs / eval pck
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate predictions");
  eval_cmd->require_subcommand(1);
  auto* nvs = eval_cmd->add_subcommand("nvs", "Masked image metrics (mPSNR, mSSIM, mLPIPS)");
  add_common(nvs, common, true);
  std::string pred_dir;
  std::string lpips_dir;
  nvs->add_option("--pred-dir", pred_dir, "Directory of predicted test-frame PNGs")->required();
  nvs->add_option("--lpips-dir", lpips_dir, "Directory of LPIPS distance maps (DPTH)");
  nvs->add_option("--beta-min", beta.beta_min, "Minimum co-visibility count");
  nvs->add_option("--beta-frac", beta.beta_frac, "Fraction of training frames");

  auto* pck = eval_cmd->add_subcommand("pck", "Keypoint transfer accuracy (PCK-T)");
  add_common(pck, common, true);
  std::string pred_kp;
  double alpha = 0.05;
  pck->add_option("--pred", pred_kp, "Predicted keypoints JSON")->required();
  pck->add_option("--alpha", alpha, "Threshold ratio of max(image width, height)");

  // calib pnp
  auto* calib_cmd = app.add_subcommand("calib", "Rig calibration");
  calib_cmd->require_subcommand(1);
  auto* pnp = calib_cmd->add_subcommand("pnp", "RANSAC PnP from 2D-3D correspondences");
  add_common(pnp, common, false);
  std::string corr_path, camera_path, out_camera;
  calib::PnpParams pnp_params;
  std::optional<std::uint64_t> pnp_seed;
  pnp->add_option("--corrs", corr_path, "Correspondence JSON")->required();
  pnp->add_option("--camera", camera_path, "Camera JSON providing intrinsics")->required();
  pnp->add_option("--seed", pnp_seed, "RANSAC seed")->required();
  pnp->add_option("--inlier-px", pnp_params.inlier_px, "Inlier reprojection threshold (px)");
  pnp->add_option("--max-iters", pnp_params.max_iters, "RANSAC iteration cap");
  pnp->add_option("--out-camera", out_camera, "Write the posed camera JSON here");

  // depth filter
  auto* depth_cmd = app.add_subcommand("depth", "Depth map utilities");
  depth_cmd->require_subcommand(1);
  auto* filter = depth_cmd->add_subcommand("filter", "Sobel edge filtering of a DPTH depth map");
  add_common(filter, common, false, false);
  std::string depth_in, depth_out;
  std::optional<double> grad_threshold;
  filter->add_option("--input", depth_in, "Input depth (DPTH)")->required();
  filter->add_option("-o,--output", depth_out, "Filtered depth (DPTH)")->required();
  filter->add_option("--grad-threshold", grad_threshold, "Sobel magnitude threshold (default 0.05 x median depth)");

  // synth orbit
  auto* synth_cmd = app.add_subcommand("synth", "Synthetic captures with analytic ground truth");
  synth_cmd->require_subcommand(1);
  auto* orbit = synth_cmd->add_subcommand("orbit", "Orbiting camera around a translating textured plane");
  add_common(orbit, common, false);
  synth::OrbitSpec spec;
  std::string synth_dir, velocity_text, lookat_spec;
  std::optional<double> tangential_speed;
  orbit->add_option("--out-dir", synth_dir, "Output directory")->required();
  orbit->add_option("--radius", spec.radius, "Orbit radius (world units)");
  orbit->add_option("--step-deg", spec.angular_step_deg, "Angular step per frame (degrees)");
  orbit->add_option("--tangential-speed", tangential_speed, "Camera speed (units/s); overrides --step-deg");
  orbit->add_option("--fps", spec.fps, "Frame rate");
  orbit->add_option("--frames", spec.n_frames, "Number of training frames");
  orbit->add_option("--velocity", velocity_text, "Plane velocity per frame x,y,z");
  orbit->add_option("--lookat", lookat_spec, "Look-at point x,y,z");
  orbit->add_option("--width", spec.width, "Image width");
  orbit->add_option("--height", spec.height, "Image height");
  orbit->add_option("--focal", spec.focal_length, "Focal length (px)");
  orbit->add_option("--test-times", spec.test_times, "Times of held-out test views");
  orbit->add_option("--test-offset-deg", spec.test_angle_offset_deg, "Angular offset of test views");
  orbit->add_option("--keypoint-frames", spec.keypoint_frames, "Training frames to annotate");

  std::vector<std::string> argv = args;
  std::reverse(argv.begin(), argv.end());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (angular->parsed()) {
      const auto seq = io::load_manifest(common.manifest);
      for (const auto& w : seq.warnings) err << "warning: " << w << "\n";
      std::optional<Eigen::Vector3d> lookat;
      if (!lookat_text.empty()) lookat = parse_vec3(lookat_text);
      const auto rep = pipeline::compute_angular_emf(seq, lookat);
      Json report = make_report(seq.name, common);
      report["params"] = {{"fps", *rep.fps},
                          {"lookat", vec_json(*rep.lookat)},
                          {"lookat_source", lookat ? "override" : (seq.lookat ? "manifest" : "triangulated")},
                          {"units", "deg/s"}};
      report["metrics"]["omega_deg_per_s"] = number(*rep.omega_deg_per_s);
      for (const auto& p : rep.angular_per_pair)
        report["per_frame"].push_back({{"t", p.t}, {"angle_deg", number(p.angle_deg)}});
      emit(report, common, out);
    } else if (full->parsed()) {
      const auto seq = io::load_manifest(common.manifest);
      for (const auto& w : seq.warnings) err << "warning: " << w << "\n";
      pipeline::FullEmfOptions opts;
      opts.eps_flow = eps_flow;
      opts.seed = seed;
      opts.threads = common.threads;
      const auto rep = pipeline::compute_full_emf(seq, opts);
      Json report = make_report(seq.name, common);
      report["params"] = {{"eps_flow", *rep.eps_flow},
                          {"depth_kind", seq.depth_kind == io::DepthKind::kMetric ? "metric" : "relative"},
                          {"expectation", "mean over pairs of per-pair mean ratio"}};
      if (seed) report["params"]["seed"] = *seed;
      report["metrics"]["Omega"] = number(*rep.Omega);
      for (const auto& p : rep.per_pair)
        report["per_frame"].push_back({{"t", p.t},
                                       {"t1", p.t1},
                                       {"camera_motion", number(p.camera_motion)},
                                       {"mean_ratio", number(p.mean_ratio)},
                                       {"valid_pixel_count", p.valid_pixel_count},
                                       {"excluded_small_flow", p.excluded_small_flow}});
      emit(report, common, out);
    } else if (covis_cmd->parsed()) {
      const auto seq = io::load_manifest(common.manifest);
      for (const auto& w : seq.warnings) err << "warning: " << w << "\n";
      const auto tests = seq.test_frames();
      if (tests.empty()) throw Error(ErrorCode::kInvalidArgument, "manifest has no test frames");
      Json report = make_report(seq.name, common);
      report["params"] = beta_params_json(beta);
      report["params"]["n_train"] = seq.train_frames().size();
      double covered = 0.0;
      for (int frame : tests) {
        const auto res = pipeline::covisibility_for_test_frame(seq, frame, beta, common.threads);
        const double frac = static_cast<double>(res.mask.mask.count()) /
                            static_cast<double>(res.mask.mask.data.size());
        covered += frac;
        Json row = {{"frame", frame},
                    {"beta", res.mask.beta},
                    {"mask_pixels", res.mask.mask.count()},
                    {"mask_fraction", frac}};
        if (!covis_out_dir.empty()) {
          const fs::path dir = covis_out_dir;
          const std::string stem = std::to_string(frame);
          io::write_heatmap(dir / (stem + "_heatmap.dpth"), res.heatmap);
          io::write_mask_png(dir / (stem + "_mask.png"), res.mask.mask);
          row["heatmap"] = (dir / (stem + "_heatmap.dpth")).string();
          row["mask"] = (dir / (stem + "_mask.png")).string();
        }
        report["per_frame"].push_back(row);
      }
      report["metrics"]["mean_mask_fraction"] = covered / static_cast<double>(tests.size());
      emit(report, common, out);
    } else if (nvs->parsed()) {
      const auto seq = io::load_manifest(common.manifest);
      for (const auto& w : seq.warnings) err << "warning: " << w << "\n";
      std::optional<fs::path> lp;
      if (!lpips_dir.empty()) lp = lpips_dir;
      const auto res = pipeline::evaluate_nvs(seq, pred_dir, lp, beta, common.threads);
      Json report = make_report(seq.name, common);
      report["params"] = beta_params_json(beta);
      report["params"]["mpsnr_definition"] = "-10 log10(mean squared error over masked pixels)";
      report["params"]["ssim_window"] = 11;
      report["params"]["ssim_sigma"] = 1.5;
      report["params"]["ssim_masking"] = "partial convolution, valid windows";
      report["params"]["lpips_aggregation"] = "sum over scales of masked mean distance";
      report["metrics"]["mpsnr"] = number(res.mpsnr);
      report["metrics"]["mssim"] = number(res.mssim);
      if (res.mlpips) report["metrics"]["mlpips"] = number(*res.mlpips);
      for (const auto& r : res.per_frame) {
        Json row = {{"frame", r.frame}, {"mpsnr", number(r.mpsnr)}, {"mssim", number(r.mssim)},
                    {"mask_pixels", r.mask_pixels}, {"beta", r.beta}};
        if (r.mlpips) row["mlpips"] = number(*r.mlpips);
        report["per_frame"].push_back(row);
      }
      emit(report, common, out);
    } else if (pck->parsed()) {
      const auto seq = io::load_manifest(common.manifest);
      for (const auto& w : seq.warnings) err << "warning: " << w << "\n";
      const auto res = pipeline::evaluate_pck(seq, pred_kp, alpha);
      Json report = make_report(seq.name, common);
      report["params"] = {{"alpha", alpha}, {"pck_normalization", "alpha * max(image width, image height)"}};
      report["metrics"]["pck_t"] = number(res.pck_t);
      for (const auto& r : res.per_frame)
        report["per_frame"].push_back({{"frame", r.frame}, {"correct", r.correct}, {"scored", r.scored}});
      emit(report, common, out);
    } else if (pnp->parsed()) {
      const auto corrs = io::read_correspondences(corr_path);
      std::vector<std::string> warnings;
      const auto cam = io::read_camera(camera_path, &warnings);
      for (const auto& w : warnings) err << "warning: " << w << "\n";
      pnp_params.seed = *pnp_seed;
      pnp_params.threads = common.threads;
      const auto pose = calib::solve_pnp_ransac(corrs, cam, pnp_params);
      Json report = make_report(fs::path(corr_path).stem().string(), common);
      report["params"] = {{"seed", *pnp_seed},
                          {"inlier_px", pnp_params.inlier_px},
                          {"max_iters", pnp_params.max_iters},
                          {"confidence", pnp_params.confidence},
                          {"solver", "6-point DLT + Gauss-Newton"}};
      Json rot = Json::array();
      for (int r = 0; r < 3; ++r)
        rot.push_back({pose.rotation(r, 0), pose.rotation(r, 1), pose.rotation(r, 2)});
      report["metrics"] = {{"rotation", rot},
                           {"translation", vec_json(pose.translation)},
                           {"position", vec_json(pose.camera_position())},
                           {"inlier_count", pose.inliers.size()},
                           {"inlier_ratio", static_cast<double>(pose.inliers.size()) / corrs.size()},
                           {"mean_reproj_error", pose.mean_reproj_error},
                           {"ransac_iterations", pose.iterations}};
      if (!out_camera.empty()) io::write_camera(out_camera, calib::apply_pose(cam, pose));
      emit(report, common, out);
    } else if (filter->parsed()) {
      const auto d = io::read_depth(depth_in);
      const double threshold = grad_threshold ? *grad_threshold : 0.05 * depth::median_valid_depth(d);
      if (!(threshold > 0.0))
        throw Error(ErrorCode::kInvalidArgument, "grad threshold must be positive");
      const auto filtered = depth::filter_depth_edges(d, threshold);
      io::write_depth(depth_out, filtered);
      Json report = make_report(fs::path(depth_in).stem().string(), common);
      report["params"] = {{"grad_threshold", threshold}, {"kernel", "3x3 Sobel, unnormalized, replicated border"}};
      report["metrics"] = {{"valid_before", d.valid_count()}, {"valid_after", filtered.valid_count()}};
      emit(report, common, out);
    } else if (orbit->parsed()) {
      if (!velocity_text.empty()) spec.scene.velocity = parse_vec3(velocity_text);
      if (!lookat_spec.empty()) spec.lookat = parse_vec3(lookat_spec);
      if (tangential_speed) spec.angular_step_deg = synth::step_for_tangential_speed(spec.radius, *tangential_speed, spec.fps);
      const auto seq = synth::generate_orbit_capture(spec, synth_dir);
      const auto analytic = synth::analytic_emf(spec);
      Json report = make_report(seq.name, common);
      report["params"] = {{"radius", spec.radius},
                          {"angular_step_deg", spec.angular_step_deg},
                          {"fps", spec.fps},
                          {"n_frames", spec.n_frames},
                          {"velocity", vec_json(spec.scene.velocity)},
                          {"lookat", vec_json(spec.lookat)},
                          {"image_size", {spec.width, spec.height}},
                          {"focal_length", spec.focal_length}};
      report["metrics"]["omega_deg_per_s"] = number(analytic.omega_deg_per_s);
      if (analytic.Omega) report["metrics"]["Omega"] = number(*analytic.Omega);
      report["metrics"]["manifest"] = (fs::path(synth_dir) / "manifest.json").string();
      emit(report, common, out);
    }
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return is_numerical(e.code()) ? kExitNumerical : kExitInput;
  } catch (const fs::filesystem_error& e) {
    err << "error [io]: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}

}  // namespace monocheck::cli
