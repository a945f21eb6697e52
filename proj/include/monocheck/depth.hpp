#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "monocheck/geom.hpp"
#include "monocheck/raster.hpp"

namespace monocheck::depth {

/// Per-pixel z-depth (distance along the optical axis); values <= 0 are invalid.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  DepthMap() = default;
  DepthMap(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  double at(int u, int v) const { return data[static_cast<std::size_t>(v) * width + u]; }
  double& at(int u, int v) { return data[static_cast<std::size_t>(v) * width + u]; }
  bool valid(int u, int v) const { return at(u, v) > 0.0; }
  std::size_t valid_count() const;
};

struct Anchor {
  Eigen::Vector3d world_position;
  int frame = 0;
};

/// Sparse metric 3D points (typically SfM background points) used to pin
/// down the scale and shift of relative depth.
struct SparseAnchorSet {
  std::vector<Anchor> points;
  std::string source;
};

/// Maps predicted disparity d* = 1/z* to metric disparity a*d* + b.
struct DisparityAlignment {
  double scale = 1.0;
  double shift = 0.0;
  int inlier_count = 0;
  double inlier_ratio = 0.0;
};

/// Bilinear interpolation of inverse depth at a sub-pixel location; all four
/// neighbours must be valid. Exact for planar surfaces seen by an undistorted
/// pinhole camera, where 1/z is affine in pixel coordinates.
std::optional<double> sample_depth(const DepthMap& d, const Eigen::Vector2d& uv);

double median_valid_depth(const DepthMap& d);

/// Invalidates pixels whose (unnormalized 3x3) Sobel gradient magnitude
/// exceeds grad_threshold, plus the 8-neighbourhood of already-invalid pixels.
DepthMap filter_depth_edges(const DepthMap& d, double grad_threshold);

struct RansacParams {
  std::uint64_t seed = 0;
  int iters = 1000;
  /// Disparity residual tolerance; unset = 0.05 x median anchor disparity.
  std::optional<double> inlier_tol;
};

/// RANSAC line fit of anchor disparity against predicted disparity using
/// 2-point samples, followed by a least-squares refit on the inliers.
/// All anchors are used; callers pass the anchors of the frame `cam` observes.
DisparityAlignment fit_disparity_alignment(const DepthMap& pred, const SparseAnchorSet& anchors,
                                           const geom::Camera& cam, const RansacParams& params);

DepthMap apply_disparity_alignment(const DepthMap& pred, const DisparityAlignment& align);

}  // namespace monocheck::depth
