#include "monocheck/pipeline.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "monocheck/error.hpp"
#include "monocheck/metrics.hpp"
#include "monocheck/parallel.hpp"

namespace monocheck::pipeline {

namespace fs = std::filesystem;

namespace {

std::string pair_label(int a, int b) {
  std::ostringstream s;
  s << "(" << a << "," << b << ")";
  return s.str();
}

}  // namespace

depth::DepthMap load_metric_depth(const io::SequenceManifest& seq, int frame,
                                  std::optional<std::uint64_t> seed, int ransac_iters) {
  const auto& f = seq.frame(frame);
  if (!f.depth)
    throw Error(ErrorCode::kInvalidArgument, "frame " + std::to_string(frame) + " has no depth map");
  depth::DepthMap d = io::read_depth(*f.depth);
  require_same_size(d.width, d.height, f.camera.width, f.camera.height, "depth vs camera image_size");
  if (seq.depth_kind == io::DepthKind::kMetric) return d;

  if (!seed)
    throw Error(ErrorCode::kInvalidArgument, "relative depth alignment needs an explicit seed");
  const auto all = io::read_anchors(*seq.anchors);
  depth::SparseAnchorSet anchors;
  anchors.source = all.source;
  for (const auto& a : all.points)
    if (a.frame == frame) anchors.points.push_back(a);
  depth::RansacParams params;
  params.seed = *seed ^ static_cast<std::uint64_t>(frame);
  params.iters = ransac_iters;
  const auto align = depth::fit_disparity_alignment(d, anchors, f.camera, params);
  return depth::apply_disparity_alignment(d, align);
}

emf::EmfReport compute_full_emf(const io::SequenceManifest& seq, const FullEmfOptions& options) {
  const auto frames = seq.train_frames();
  if (frames.size() < 2)
    throw Error(ErrorCode::kInvalidArgument, "full EMF needs at least 2 training frames");
  for (std::size_t i = 0; i + 1 < frames.size(); ++i) {
    const int t = frames[i];
    const int t1 = frames[i + 1];
    if (!seq.has_flow_pair(t, t1))
      throw Error(ErrorCode::kInvalidArgument, "missing flow pair " + pair_label(t, t1));
    for (int k : {t, t1}) {
      if (!seq.frame(k).depth)
        throw Error(ErrorCode::kInvalidArgument, "frame " + std::to_string(k) + " has no depth map");
      if (!seq.frame(k).fg_mask)
        throw Error(ErrorCode::kInvalidArgument, "frame " + std::to_string(k) + " has no foreground mask");
    }
  }

  double eps = 0.0;
  if (options.eps_flow) {
    eps = *options.eps_flow;
  } else {
    std::vector<geom::Camera> cams;
    for (int k : frames) cams.push_back(seq.frame(k).camera);
    const Eigen::Vector3d lookat = seq.lookat ? *seq.lookat : geom::triangulate_lookat(cams).point;
    eps = emf::default_eps_flow(cams, lookat);
  }

  const auto load = [&](std::size_t i) {
    emf::FramePair p;
    p.t = frames[i];
    p.t1 = frames[i + 1];
    p.cam_t = seq.frame(p.t).camera;
    p.cam_t1 = seq.frame(p.t1).camera;
    p.depth_t = load_metric_depth(seq, p.t, options.seed, options.ransac_iters);
    p.depth_t1 = load_metric_depth(seq, p.t1, options.seed, options.ransac_iters);
    const auto& pair = seq.flow_pair(p.t, p.t1);
    p.fwd = io::read_flow(pair.fwd);
    p.bwd = io::read_flow(pair.bwd);
    p.foreground = io::read_mask_png(*seq.frame(p.t).fg_mask);
    return p;
  };
  emf::FullEmfParams params;
  params.eps_flow = eps;
  params.threads = options.threads;
  return emf::compute_full_emf(frames.size() - 1, load, params);
}

emf::EmfReport compute_angular_emf(const io::SequenceManifest& seq,
                                   std::optional<Eigen::Vector3d> lookat_override) {
  std::vector<geom::Camera> cams;
  for (int k : seq.train_frames()) cams.push_back(seq.frame(k).camera);
  return emf::compute_angular_emf(cams, seq.fps, lookat_override ? lookat_override : seq.lookat);
}

CovisResult covisibility_for_test_frame(const io::SequenceManifest& seq, int test_frame,
                                        const covis::BetaParams& beta, unsigned threads) {
  const auto train = seq.train_frames();
  std::vector<covis::FlowPair> flows(train.size());
  for (int t : train)
    if (!seq.has_flow_pair(test_frame, t))
      throw Error(ErrorCode::kInvalidArgument, "missing flow pair " + pair_label(test_frame, t));
  parallel_for(train.size(), threads, [&](std::size_t i) {
    const auto& pair = seq.flow_pair(test_frame, train[i]);
    flows[i] = {io::read_flow(pair.fwd), io::read_flow(pair.bwd)};
  });
  CovisResult out;
  out.test_frame = test_frame;
  out.heatmap = covis::covisibility_heatmap(flows, threads);
  out.mask = covis::covisibility_mask(out.heatmap, beta);
  return out;
}

NvsResult evaluate_nvs(const io::SequenceManifest& seq, const fs::path& pred_dir,
                       std::optional<fs::path> lpips_dir, const covis::BetaParams& beta,
                       unsigned threads) {
  const auto tests = seq.test_frames();
  if (tests.empty()) throw Error(ErrorCode::kInvalidArgument, "manifest has no test frames");
  NvsResult result;
  result.per_frame.resize(tests.size());
  for (std::size_t i = 0; i < tests.size(); ++i) {
    const int frame = tests[i];
    const auto& entry = seq.frame(frame);
    if (entry.rgb.empty())
      throw Error(ErrorCode::kInvalidArgument, "test frame " + std::to_string(frame) + " has no rgb image");
    const fs::path pred_path = pred_dir / entry.rgb.filename();
    if (!fs::is_regular_file(pred_path))
      throw Error(ErrorCode::kIo, "missing prediction " + pred_path.string());
    const auto covis = covisibility_for_test_frame(seq, frame, beta, threads);
    const auto gt = io::read_png_rgb(entry.rgb);
    const auto pred = io::read_png_rgb(pred_path);
    auto& r = result.per_frame[i];
    r.frame = frame;
    r.beta = covis.mask.beta;
    r.mask_pixels = static_cast<long>(covis.mask.mask.count());
    r.mpsnr = metrics::masked_psnr(pred, gt, covis.mask.mask);
    r.mssim = metrics::masked_ssim(pred, gt, covis.mask.mask);
    if (lpips_dir) {
      std::vector<metrics::DistanceMap> maps;
      for (int k = 0;; ++k) {
        const fs::path p = *lpips_dir / (entry.rgb.stem().string() + "_" + std::to_string(k) + ".dpth");
        if (!fs::is_regular_file(p)) break;
        maps.push_back(io::read_distance_map(p));
      }
      if (maps.empty())
        throw Error(ErrorCode::kIo, "no LPIPS distance maps for frame " + std::to_string(frame));
      r.mlpips = metrics::masked_lpips_aggregate(maps, covis.mask.mask);
    }
  }
  double psnr = 0.0, ssim = 0.0, lpips = 0.0;
  for (const auto& r : result.per_frame) {
    psnr += r.mpsnr;
    ssim += r.mssim;
    if (r.mlpips) lpips += *r.mlpips;
  }
  const double n = static_cast<double>(result.per_frame.size());
  result.mpsnr = psnr / n;
  result.mssim = ssim / n;
  if (lpips_dir) result.mlpips = lpips / n;
  return result;
}

PckResult evaluate_pck(const io::SequenceManifest& seq, const fs::path& pred_path, double alpha) {
  if (seq.keypoints.empty())
    throw Error(ErrorCode::kInvalidArgument, "manifest has no keypoint annotations");
  const auto j = io::read_json(pred_path);
  std::map<int, std::vector<metrics::Keypoint>> preds;
  try {
    if (j.is_array()) {
      if (seq.keypoints.size() != 1)
        throw Error(ErrorCode::kSchema, "bare keypoint array needs exactly one annotated frame");
      preds[seq.keypoints.begin()->first] = io::keypoints_from_json(j);
    } else {
      for (const auto& [frame, list] : j.items()) preds[std::stoi(frame)] = io::keypoints_from_json(list);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, pred_path.string() + ": " + e.what());
  } catch (const std::invalid_argument&) {
    throw Error(ErrorCode::kSchema, pred_path.string() + ": frame keys must be integers");
  }

  PckResult result;
  long correct = 0, scored = 0;
  for (const auto& [frame, path] : seq.keypoints) {
    const auto& cam = seq.frame(frame).camera;
    const auto gt = io::read_keypoints(path, frame, cam.width, cam.height);
    metrics::KeypointSet pred;
    pred.frame = frame;
    pred.width = cam.width;
    pred.height = cam.height;
    if (const auto it = preds.find(frame); it != preds.end()) pred.keypoints = it->second;
    const auto c = metrics::pck_counts(pred, gt, alpha);
    result.per_frame.push_back({frame, c.correct, c.scored});
    correct += c.correct;
    scored += c.scored;
  }
  if (scored == 0) throw Error(ErrorCode::kEmptyStatistics, "no visible ground-truth keypoints");
  result.pck_t = static_cast<double>(correct) / static_cast<double>(scored);
  return result;
}

}  // namespace monocheck::pipeline
