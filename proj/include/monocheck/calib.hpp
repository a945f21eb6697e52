#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "monocheck/geom.hpp"

namespace monocheck::calib {

struct Correspondence2D3D {
  Eigen::Vector3d world;
  Eigen::Vector2d pixel;
  int frame = 0;
};

/// World-to-camera pose: x_cam = rotation * x_world + translation.
struct PoseEstimate {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  std::vector<int> inliers;
  double mean_reproj_error = 0.0;
  int iterations = 0;

  Eigen::Vector3d camera_position() const { return -rotation.transpose() * translation; }
};

struct PnpParams {
  std::uint64_t seed = 0;
  double inlier_px = 3.0;
  int max_iters = 1000;
  double confidence = 0.999;
  unsigned threads = 1;
};

/// Camera-from-world [R|t] by Hartley-normalized DLT on undistorted,
/// normalized image coordinates followed by projection onto SO(3).
/// Needs >= 6 non-coplanar points; returns false for a degenerate sample.
bool dlt_pose(std::span<const Eigen::Vector3d> world, std::span<const Eigen::Vector2d> normalized,
              Eigen::Matrix3d& rotation, Eigen::Vector3d& translation);

/// Gauss-Newton on the total squared reprojection error with axis-angle
/// rotation increments; returns the final cost.
double refine_pose(const geom::Camera& intrinsics, std::span<const Correspondence2D3D> corrs,
                   std::span<const int> indices, Eigen::Matrix3d& rotation,
                   Eigen::Vector3d& translation, int max_iter = 20);

/// RANSAC over 6-point DLT hypotheses, pooled over every frame's
/// correspondences, then Gauss-Newton refinement on the inliers. The pose of
/// `intrinsics` is ignored. Deterministic for a fixed seed, any thread count.
PoseEstimate solve_pnp_ransac(std::span<const Correspondence2D3D> corrs,
                              const geom::Camera& intrinsics, const PnpParams& params);

/// Copy of `intrinsics` placed at `pose`.
geom::Camera apply_pose(const geom::Camera& intrinsics, const PoseEstimate& pose);

}  // namespace monocheck::calib
