#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "monocheck/calib.hpp"
#include "monocheck/covis.hpp"
#include "monocheck/depth.hpp"
#include "monocheck/flow.hpp"
#include "monocheck/geom.hpp"
#include "monocheck/metrics.hpp"
#include "monocheck/warp.hpp"

#include "json.hpp"

namespace monocheck::io {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Middlebury .flo: float32 202021.25, int32 width, int32 height, then
// width*height interleaved (u, v) float32, row-major, little-endian.

inline constexpr float kFloMagic = 202021.25f;

flow::FlowField read_flow(const fs::path& path);
void write_flow(const fs::path& path, const flow::FlowField& field);

// ---------------------------------------------------------------------------
// DPTH container: "DPTH", uint32 version (1), uint32 width, uint32 height,
// uint32 channels, then float32 payload, row-major, channel-interleaved,
// little-endian. 20-byte header.

inline constexpr std::uint32_t kDpthVersion = 1;
inline constexpr std::size_t kDpthHeaderBytes = 20;

struct Raster {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t channels = 1;
  std::vector<float> data;
};

Raster read_dpth(const fs::path& path);
void write_dpth(const fs::path& path, const Raster& raster);

depth::DepthMap read_depth(const fs::path& path);
void write_depth(const fs::path& path, const depth::DepthMap& map);

covis::CovisibilityHeatmap read_heatmap(const fs::path& path, int n_train);
void write_heatmap(const fs::path& path, const covis::CovisibilityHeatmap& heatmap);

metrics::DistanceMap read_distance_map(const fs::path& path);

/// Grid warp: JSON descriptor {origin, spacing, dims:[nx,ny,nz], data} where
/// `data` names a 3-channel DPTH of width nx and height ny*nz holding the
/// per-node displacement (z-slices stacked).
warp::GridFlow read_grid_flow(const fs::path& descriptor);
void write_grid_flow(const fs::path& descriptor, const warp::GridFlow& grid);

// ---------------------------------------------------------------------------
// PNG (8-bit). Masks: 0 = false, nonzero = true; written as 0 / 255.

metrics::ImageFrame read_png_rgb(const fs::path& path);
void write_png_rgb(const fs::path& path, const metrics::ImageFrame& image);
Mask read_mask_png(const fs::path& path);
void write_mask_png(const fs::path& path, const Mask& mask);

// ---------------------------------------------------------------------------
// JSON records.

/// Parses a camera record. An orientation within 1e-4 of orthonormal is
/// re-orthonormalized (a warning is appended); otherwise kSchema.
geom::Camera camera_from_json(const nlohmann::json& j, std::vector<std::string>* warnings = nullptr);
nlohmann::json camera_to_json(const geom::Camera& cam);
geom::Camera read_camera(const fs::path& path, std::vector<std::string>* warnings = nullptr);
void write_camera(const fs::path& path, const geom::Camera& cam);

/// Keypoints as [{id, x, y, visible}]; frame/image size come from the caller.
metrics::KeypointSet read_keypoints(const fs::path& path, int frame, int width, int height);
std::vector<metrics::Keypoint> keypoints_from_json(const nlohmann::json& j);
nlohmann::json keypoints_to_json(const std::vector<metrics::Keypoint>& kps);
void write_keypoints(const fs::path& path, const std::vector<metrics::Keypoint>& kps);

/// [{world:[x,y,z], pixel:[u,v], frame:n}]
std::vector<calib::Correspondence2D3D> read_correspondences(const fs::path& path);
void write_correspondences(const fs::path& path,
                           const std::vector<calib::Correspondence2D3D>& corrs);

/// [{world:[x,y,z], frame:n}]
depth::SparseAnchorSet read_anchors(const fs::path& path);
void write_anchors(const fs::path& path, const depth::SparseAnchorSet& anchors);

nlohmann::json read_json(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

// ---------------------------------------------------------------------------
// Sequence manifest.

enum class DepthKind { kMetric, kRelative };

struct FrameEntry {
  int index = 0;
  double time = 0.0;
  fs::path rgb;  // empty when the frame has no image
  fs::path camera_path;
  std::optional<fs::path> depth;
  std::optional<fs::path> fg_mask;
  geom::Camera camera;
};

struct FlowPairEntry {
  int src = 0;
  int dst = 0;
  fs::path fwd;  // src -> dst
  fs::path bwd;  // dst -> src
};

struct SequenceManifest {
  std::string name;
  double fps = 0.0;
  DepthKind depth_kind = DepthKind::kMetric;
  std::vector<FrameEntry> frames;  // sorted by index
  std::map<std::pair<int, int>, FlowPairEntry> flow_pairs;
  std::map<std::string, std::vector<int>> train;  // camera id -> frame indices
  std::map<std::string, std::vector<int>> test;
  std::map<int, fs::path> keypoints;
  std::optional<Eigen::Vector3d> lookat;
  std::optional<fs::path> anchors;
  std::vector<std::string> warnings;

  const FrameEntry& frame(int index) const;
  const FlowPairEntry& flow_pair(int src, int dst) const;
  bool has_flow_pair(int src, int dst) const;
  /// Training frames in index order (all frames when no split is given).
  std::vector<int> train_frames() const;
  std::vector<int> test_frames() const;
};

/// Loads and validates a manifest; relative paths resolve against its
/// directory. Every referenced file must exist; errors name the offending
/// entry (kIo for missing files, kSchema for malformed content).
SequenceManifest load_manifest(const fs::path& path);

/// Writes a manifest whose paths are relative to `path`'s directory.
void write_manifest(const fs::path& path, const SequenceManifest& manifest);

}  // namespace monocheck::io
