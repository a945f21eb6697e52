#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "monocheck/covis.hpp"
#include "monocheck/emf.hpp"
#include "monocheck/io.hpp"

// Manifest-driven evaluation: loads the referenced files and runs the
// per-module operations over a whole sequence.
namespace monocheck::pipeline {

struct FullEmfOptions {
  /// Unset = 1e-6 x median camera-to-lookat distance.
  std::optional<double> eps_flow;
  /// Required when the manifest holds relative depth.
  std::optional<std::uint64_t> seed;
  int ransac_iters = 1000;
  unsigned threads = 1;
};

/// Consecutive training-frame pairs; relative depth is aligned to the
/// manifest's anchors per frame before scene flow is measured.
emf::EmfReport compute_full_emf(const io::SequenceManifest& seq, const FullEmfOptions& options);

emf::EmfReport compute_angular_emf(const io::SequenceManifest& seq,
                                   std::optional<Eigen::Vector3d> lookat_override = std::nullopt);

/// Loads the depth map of a frame, aligning relative depth when needed.
depth::DepthMap load_metric_depth(const io::SequenceManifest& seq, int frame,
                                  std::optional<std::uint64_t> seed, int ransac_iters = 1000);

struct CovisResult {
  int test_frame = 0;
  covis::CovisibilityHeatmap heatmap;
  covis::CovisibilityMask mask;
};

CovisResult covisibility_for_test_frame(const io::SequenceManifest& seq, int test_frame,
                                        const covis::BetaParams& beta, unsigned threads = 1);

struct NvsFrameResult {
  int frame = 0;
  double mpsnr = 0.0;
  double mssim = 0.0;
  std::optional<double> mlpips;
  long mask_pixels = 0;
  int beta = 0;
};

struct NvsResult {
  double mpsnr = 0.0;  // mean over test frames; +inf if any frame is exact
  double mssim = 0.0;
  std::optional<double> mlpips;
  std::vector<NvsFrameResult> per_frame;
};

/// Predictions are PNGs in pred_dir named like the ground-truth RGB files.
/// LPIPS distance maps, when lpips_dir is given, are DPTH files named
/// <rgb stem>_<k>.dpth for k = 0, 1, ... (one per layer/scale).
NvsResult evaluate_nvs(const io::SequenceManifest& seq, const std::filesystem::path& pred_dir,
                       std::optional<std::filesystem::path> lpips_dir,
                       const covis::BetaParams& beta, unsigned threads = 1);

struct PckFrameResult {
  int frame = 0;
  long correct = 0;
  long scored = 0;
};

struct PckResult {
  double pck_t = 0.0;
  std::vector<PckFrameResult> per_frame;
};

/// `pred_path` holds either {"<frame>": [keypoints...]} or a bare keypoint
/// array (only valid when the manifest annotates exactly one frame).
PckResult evaluate_pck(const io::SequenceManifest& seq, const std::filesystem::path& pred_path,
                       double alpha);

}  // namespace monocheck::pipeline
