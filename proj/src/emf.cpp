#include "monocheck/emf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Geometry>

#include "monocheck/error.hpp"
#include "monocheck/parallel.hpp"

namespace monocheck::emf {

const char* to_string(SampleStatus s) {
  switch (s) {
    case SampleStatus::kOk: return "ok";
    case SampleStatus::kOccluded: return "occluded";
    case SampleStatus::kOffImage: return "off_image";
    case SampleStatus::kInvalidDepth: return "invalid_depth";
    case SampleStatus::kBackground: return "background";
  }
  return "unknown";
}

std::vector<SceneFlowSample> compute_scene_flow(const geom::Camera& cam_t,
                                                const geom::Camera& cam_t1,
                                                const depth::DepthMap& depth_t,
                                                const depth::DepthMap& depth_t1,
                                                const flow::FlowField& fwd,
                                                const flow::FlowField& bwd,
                                                const Mask& fg_mask) {
  const int w = depth_t.width;
  const int h = depth_t.height;
  require_same_size(w, h, depth_t1.width, depth_t1.height, "compute_scene_flow(depth_t1)");
  require_same_size(w, h, fwd.width, fwd.height, "compute_scene_flow(fwd)");
  require_same_size(w, h, bwd.width, bwd.height, "compute_scene_flow(bwd)");
  require_same_size(w, h, fg_mask.width, fg_mask.height, "compute_scene_flow(fg_mask)");

  std::vector<SceneFlowSample> out(static_cast<std::size_t>(w) * h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      auto& s = out[static_cast<std::size_t>(v) * w + u];
      s.pixel = Eigen::Vector2d(u, v);
      if (!fg_mask(u, v)) {
        s.status = SampleStatus::kBackground;
        continue;
      }
      if (!depth_t.valid(u, v)) {
        s.status = SampleStatus::kInvalidDepth;
        continue;
      }
      const Eigen::Vector2d target = s.pixel + fwd.at(u, v);
      if (!fwd.contains(target)) {
        s.status = SampleStatus::kOffImage;
        continue;
      }
      if (!flow::is_consistent(fwd, bwd, u, v)) {
        s.status = SampleStatus::kOccluded;
        continue;
      }
      const auto z1 = depth::sample_depth(depth_t1, target);
      if (!z1) {
        s.status = SampleStatus::kInvalidDepth;
        continue;
      }
      s.x_t = geom::backproject(cam_t, s.pixel, depth_t.at(u, v));
      s.x_t1 = geom::backproject(cam_t1, target, *z1);
      s.flow3d = s.x_t1 - s.x_t;
      s.status = SampleStatus::kOk;
    }
  }
  return out;
}

PairStats pair_ratio_stats(const FramePair& pair, double eps_flow) {
  const auto samples = compute_scene_flow(pair.cam_t, pair.cam_t1, pair.depth_t, pair.depth_t1,
                                          pair.fwd, pair.bwd, pair.foreground);
  PairStats stats;
  stats.t = pair.t;
  stats.t1 = pair.t1;
  stats.camera_motion = (pair.cam_t1.position - pair.cam_t.position).norm();
  double sum = 0.0;
  for (const auto& s : samples) {
    if (!s.valid()) continue;
    const double magnitude = s.flow3d.norm();
    if (magnitude < eps_flow) {
      ++stats.excluded_small_flow;
      continue;
    }
    sum += stats.camera_motion / magnitude;
    ++stats.valid_pixel_count;
  }
  stats.mean_ratio = stats.valid_pixel_count > 0
                         ? sum / static_cast<double>(stats.valid_pixel_count)
                         : std::numeric_limits<double>::quiet_NaN();
  return stats;
}

EmfReport compute_full_emf(std::size_t n_pairs, const std::function<FramePair(std::size_t)>& load,
                           const FullEmfParams& params) {
  if (!(params.eps_flow > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "compute_full_emf: eps_flow must be positive");
  if (n_pairs == 0)
    throw Error(ErrorCode::kEmptyStatistics, "compute_full_emf: sequence has no frame pairs");

  EmfReport report;
  report.eps_flow = params.eps_flow;
  report.per_pair.resize(n_pairs);
  parallel_for(n_pairs, params.threads,
               [&](std::size_t i) { report.per_pair[i] = pair_ratio_stats(load(i), params.eps_flow); });

  double sum = 0.0;
  long used = 0;
  for (const auto& s : report.per_pair) {
    if (s.valid_pixel_count == 0) continue;
    sum += s.mean_ratio;
    ++used;
  }
  if (used == 0) {
    std::ostringstream msg;
    msg << "compute_full_emf: no valid scene-flow pixels in any pair (first pair (" <<
        report.per_pair.front().t << "," << report.per_pair.front().t1 << "))";
    throw Error(ErrorCode::kEmptyStatistics, msg.str());
  }
  report.Omega = sum / static_cast<double>(used);
  return report;
}

EmfReport compute_full_emf(std::span<const FramePair> pairs, const FullEmfParams& params) {
  return compute_full_emf(pairs.size(), [&](std::size_t i) { return pairs[i]; }, params);
}

EmfReport compute_angular_emf(std::span<const geom::Camera> cams, double fps,
                              std::optional<Eigen::Vector3d> lookat) {
  if (cams.size() < 2)
    throw Error(ErrorCode::kInvalidArgument, "compute_angular_emf: need at least 2 cameras");
  if (!(fps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "compute_angular_emf: fps must be positive");

  EmfReport report;
  report.fps = fps;
  if (!lookat) {
    lookat = geom::triangulate_lookat(cams).point;
    report.lookat_triangulated = true;
  }
  report.lookat = lookat;

  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < cams.size(); ++i) {
    const Eigen::Vector3d a0 = *lookat - cams[i].position;
    const Eigen::Vector3d a1 = *lookat - cams[i + 1].position;
    const double n0 = a0.norm();
    const double n1 = a1.norm();
    if (!(n0 > 1e-12) || !(n1 > 1e-12)) {
      std::ostringstream msg;
      msg << "compute_angular_emf: camera " << (n0 > 1e-12 ? i + 1 : i)
          << " coincides with the look-at point";
      throw Error(ErrorCode::kDegenerateGeometry, msg.str());
    }
    const double angle = std::atan2(a0.cross(a1).norm(), a0.dot(a1)) * 180.0 / std::numbers::pi;
    report.angular_per_pair.push_back({static_cast<int>(i), angle});
    sum += angle;
  }
  report.omega_deg_per_s = sum / static_cast<double>(cams.size() - 1) * fps;
  return report;
}

double default_eps_flow(std::span<const geom::Camera> cams, const Eigen::Vector3d& lookat) {
  std::vector<double> dist;
  for (const auto& c : cams) dist.push_back((c.position - lookat).norm());
  if (dist.empty()) return 1e-6;
  const auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
  std::nth_element(dist.begin(), mid, dist.end());
  return 1e-6 * std::max(*mid, 1e-12);
}

}  // namespace monocheck::emf
