#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <vector>

#include "monocheck/depth.hpp"
#include "monocheck/emf.hpp"
#include "monocheck/flow.hpp"
#include "monocheck/geom.hpp"
#include "monocheck/io.hpp"
#include "monocheck/metrics.hpp"

namespace monocheck::synth {

/// Textured plane translating at a constant velocity.
struct PlaneScene {
  /// Unit normal; unset = facing the middle camera of the orbit.
  std::optional<Eigen::Vector3d> normal;
  /// Signed distance of the plane from the look-at point along the normal.
  double offset = 0.0;
  Eigen::Vector3d velocity = Eigen::Vector3d(0.01, 0.0, 0.0);  // world units / frame
  double checker_size = 0.05;
};

/// Camera orbiting the look-at point in the plane orthogonal to `up`
/// (world y points down by default, so the orbit lies in x-z).
struct OrbitSpec {
  double radius = 3.0;
  double angular_step_deg = 1.0;
  double start_angle_deg = 0.0;
  double fps = 30.0;
  int n_frames = 8;
  Eigen::Vector3d lookat = Eigen::Vector3d::Zero();
  Eigen::Vector3d up = Eigen::Vector3d(0.0, -1.0, 0.0);
  PlaneScene scene;
  int width = 64;
  int height = 48;
  double focal_length = 60.0;
  /// Held-out views: one per entry of test_times (frame time), placed at the
  /// orbit angle of that time plus test_angle_offset_deg.
  std::vector<double> test_times;
  double test_angle_offset_deg = 0.0;
  /// Frames that receive keypoint annotations (train frame indices).
  std::vector<int> keypoint_frames;

  void validate() const;
};

/// A rendered view: camera at a given scene time.
struct View {
  geom::Camera camera;
  double time = 0.0;
};

struct AnalyticEmf {
  std::optional<double> Omega;
  double omega_deg_per_s = 0.0;
};

/// Closed forms: omega = step * fps; Omega = 2 r sin(step / 2) / |v|.
AnalyticEmf analytic_emf(const OrbitSpec& spec);

/// Angular step (degrees) whose per-frame chord equals speed / fps.
double step_for_tangential_speed(double radius, double speed, double fps);

class OrbitScene {
 public:
  explicit OrbitScene(OrbitSpec spec);

  const OrbitSpec& spec() const { return spec_; }
  const Eigen::Vector3d& plane_normal() const { return normal_; }

  View train_view(int t) const;
  View test_view(std::size_t i) const;
  std::vector<geom::Camera> train_cameras() const;

  /// World point seen at `pixel`, or nullopt when the ray misses the plane.
  std::optional<Eigen::Vector3d> surface_point(const View& view, const Eigen::Vector2d& pixel) const;
  depth::DepthMap depth(const View& view) const;
  metrics::ImageFrame render(const View& view) const;
  /// Exact projection-based flow from view a to view b.
  flow::FlowField flow(const View& a, const View& b) const;
  /// Material points of the texture lattice projected into a view.
  std::vector<metrics::Keypoint> keypoints(const View& view) const;

  /// Consecutive train-frame pairs with analytic depth and flow, in memory.
  std::vector<emf::FramePair> frame_pairs() const;

 private:
  Eigen::Vector3d material_point(const Eigen::Vector3d& world, double time) const;
  Eigen::Vector3d checker_color(const Eigen::Vector3d& material) const;

  OrbitSpec spec_;
  Eigen::Vector3d normal_;
  Eigen::Vector3d tangent_u_;
  Eigen::Vector3d tangent_v_;
  std::uint64_t texture_key_;
};

/// Writes cameras, depth maps, flows (consecutive train pairs both ways and
/// test->train pairs), foreground masks, RGB frames, keypoints, and the
/// manifest (out_dir/manifest.json). Returns the loaded manifest.
io::SequenceManifest generate_orbit_capture(const OrbitSpec& spec, const std::filesystem::path& out_dir);

}  // namespace monocheck::synth
