#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "monocheck/raster.hpp"

namespace monocheck::metrics {

/// RGB image with values in [0,1], row-major, channel-interleaved.
struct ImageFrame {
  int width = 0;
  int height = 0;
  static constexpr int kChannels = 3;
  std::vector<double> data;

  ImageFrame() = default;
  ImageFrame(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h * kChannels, fill) {}

  double at(int u, int v, int c) const {
    return data[(static_cast<std::size_t>(v) * width + u) * kChannels + c];
  }
  double& at(int u, int v, int c) {
    return data[(static_cast<std::size_t>(v) * width + u) * kChannels + c];
  }
};

struct Keypoint {
  int id = 0;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  bool visible = true;
};

struct KeypointSet {
  int frame = 0;
  int width = 0;
  int height = 0;
  std::vector<Keypoint> keypoints;
};

/// -10 log10 of the mean squared error over masked pixels and all channels;
/// +infinity when the error is zero.
double masked_psnr(const ImageFrame& pred, const ImageFrame& gt, const Mask& mask);

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// SSIM whose windowed statistics are partial convolutions over the mask:
/// kernel weights are renormalized by the in-mask weight of each window.
/// Only windows lying fully inside the image are evaluated; the score is the
/// mean of the SSIM map over masked pixels, averaged over channels.
double masked_ssim(const ImageFrame& pred, const ImageFrame& gt, const Mask& mask,
                   const SsimParams& params = {});

/// One LPIPS layer's spatial distance map at a reduced resolution.
struct DistanceMap {
  int width = 0;
  int height = 0;
  std::vector<double> data;
};

/// Area-pools the mask to (width, height) and keeps cells more than half valid.
Mask downsample_mask(const Mask& mask, int width, int height);

/// Sum over scales of the masked mean distance.
double masked_lpips_aggregate(std::span<const DistanceMap> maps, const Mask& mask);

/// Correct iff ||pred - gt|| <= alpha * max(width, height) of the gt set.
/// Only gt-visible keypoints are scored; missing or invisible predictions
/// count as incorrect.
double pck_transfer(const KeypointSet& pred, const KeypointSet& gt, double alpha);

struct PckCounts {
  long correct = 0;
  long scored = 0;
};

PckCounts pck_counts(const KeypointSet& pred, const KeypointSet& gt, double alpha);

}  // namespace monocheck::metrics
