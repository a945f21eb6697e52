#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "monocheck/depth.hpp"
#include "monocheck/flow.hpp"
#include "monocheck/geom.hpp"
#include "monocheck/raster.hpp"

namespace monocheck::emf {

enum class SampleStatus { kOk, kOccluded, kOffImage, kInvalidDepth, kBackground };

const char* to_string(SampleStatus s);

struct SceneFlowSample {
  Eigen::Vector2d pixel;
  Eigen::Vector3d x_t = Eigen::Vector3d::Zero();
  Eigen::Vector3d x_t1 = Eigen::Vector3d::Zero();
  Eigen::Vector3d flow3d = Eigen::Vector3d::Zero();  // x_t1 - x_t when valid
  SampleStatus status = SampleStatus::kOk;

  bool valid() const { return status == SampleStatus::kOk; }
};

/// Everything needed to measure scene flow between two consecutive frames.
struct FramePair {
  int t = 0;
  int t1 = 1;
  geom::Camera cam_t;
  geom::Camera cam_t1;
  depth::DepthMap depth_t;
  depth::DepthMap depth_t1;
  flow::FlowField fwd;  // t -> t1
  flow::FlowField bwd;  // t1 -> t
  Mask foreground;
};

struct PairStats {
  int t = 0;
  int t1 = 0;
  double camera_motion = 0.0;
  double mean_ratio = 0.0;  // NaN when the pair had no valid pixel
  long valid_pixel_count = 0;
  long excluded_small_flow = 0;
};

struct AngularPairStats {
  int t = 0;
  double angle_deg = 0.0;
};

struct EmfReport {
  std::optional<double> omega_deg_per_s;
  std::optional<double> Omega;
  std::vector<PairStats> per_pair;
  std::vector<AngularPairStats> angular_per_pair;
  // Parameter echo.
  std::optional<double> eps_flow;
  std::optional<double> fps;
  std::optional<Eigen::Vector3d> lookat;
  bool lookat_triangulated = false;
};

/// One sample per pixel, row-major. Pixels are rejected, in order, as
/// background, invalid depth at t, off-image (u + f(u) leaves the image),
/// occluded (forward-backward check), invalid depth at the flowed position.
std::vector<SceneFlowSample> compute_scene_flow(const geom::Camera& cam_t,
                                                const geom::Camera& cam_t1,
                                                const depth::DepthMap& depth_t,
                                                const depth::DepthMap& depth_t1,
                                                const flow::FlowField& fwd,
                                                const flow::FlowField& bwd,
                                                const Mask& fg_mask);

/// Pair statistics for one consecutive pair.
PairStats pair_ratio_stats(const FramePair& pair, double eps_flow);

struct FullEmfParams {
  double eps_flow = 1e-6;
  unsigned threads = 1;
};

/// Mean over pairs of the per-pair mean camera-to-scene motion ratio.
/// `load(i)` supplies pair i; pairs are independent and reduced in order.
EmfReport compute_full_emf(std::size_t n_pairs, const std::function<FramePair(std::size_t)>& load,
                           const FullEmfParams& params);

EmfReport compute_full_emf(std::span<const FramePair> pairs, const FullEmfParams& params);

/// Mean angle subtended at the look-at point by consecutive camera centres,
/// times fps, in degrees per second. The look-at point is triangulated from
/// the optical axes when not given.
EmfReport compute_angular_emf(std::span<const geom::Camera> cams, double fps,
                              std::optional<Eigen::Vector3d> lookat = std::nullopt);

/// 1e-6 x median camera-to-lookat distance.
double default_eps_flow(std::span<const geom::Camera> cams, const Eigen::Vector3d& lookat);

}  // namespace monocheck::emf
