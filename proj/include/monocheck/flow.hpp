#pragma once

#include <Eigen/Core>
#include <vector>

#include "monocheck/raster.hpp"

namespace monocheck::flow {

/// Dense 2D displacement field from frame `src_frame` to `dst_frame`, pixels.
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<Eigen::Vector2d> data;  // row-major
  int src_frame = 0;
  int dst_frame = 0;

  FlowField() = default;
  FlowField(int w, int h, const Eigen::Vector2d& fill = Eigen::Vector2d::Zero())
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  const Eigen::Vector2d& at(int u, int v) const {
    return data[static_cast<std::size_t>(v) * width + u];
  }
  Eigen::Vector2d& at(int u, int v) { return data[static_cast<std::size_t>(v) * width + u]; }

  bool contains(const Eigen::Vector2d& uv) const {
    return uv.x() >= 0.0 && uv.y() >= 0.0 && uv.x() <= width - 1.0 && uv.y() <= height - 1.0;
  }
};

/// True = occluded (no consistent correspondence).
using OcclusionMask = Mask;

/// Bilinear sample; throws kOutOfRange outside [0,W-1]x[0,H-1].
Eigen::Vector2d sample_flow(const FlowField& field, const Eigen::Vector2d& uv);

/// Forward-backward consistency test for a single pixel. Returns false
/// (occluded) when the chained position leaves the image.
bool is_consistent(const FlowField& fwd, const FlowField& bwd, int u, int v);

OcclusionMask occlusion_mask(const FlowField& fwd, const FlowField& bwd);

}  // namespace monocheck::flow
