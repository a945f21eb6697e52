#include "monocheck/synth.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <Eigen/Geometry>

#include "monocheck/error.hpp"
#include "monocheck/random.hpp"

namespace monocheck::synth {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::uint64_t hash_doubles(std::initializer_list<double> values) {
  std::uint64_t h = 0x6d6f6e6f636865ULL;
  for (double v : values) h = mix64(h ^ std::bit_cast<std::uint64_t>(v));
  return h;
}

}  // namespace

void OrbitSpec::validate() const {
  if (!(radius > 0.0)) throw Error(ErrorCode::kInvalidArgument, "OrbitSpec: radius must be positive");
  if (n_frames < 2) throw Error(ErrorCode::kInvalidArgument, "OrbitSpec: need at least 2 frames");
  if (!(fps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "OrbitSpec: fps must be positive");
  if (width < 2 || height < 2 || !(focal_length > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "OrbitSpec: invalid image geometry");
  if (up.norm() < 1e-12) throw Error(ErrorCode::kInvalidArgument, "OrbitSpec: up must be nonzero");
  for (int k : keypoint_frames)
    if (k < 0 || k >= n_frames)
      throw Error(ErrorCode::kInvalidArgument, "OrbitSpec: keypoint frame outside the sequence");
}

AnalyticEmf analytic_emf(const OrbitSpec& spec) {
  AnalyticEmf out;
  out.omega_deg_per_s = spec.angular_step_deg * spec.fps;
  const double speed = spec.scene.velocity.norm();
  if (speed > 0.0)
    out.Omega = 2.0 * spec.radius * std::sin(spec.angular_step_deg * kDegToRad / 2.0) / speed;
  return out;
}

double step_for_tangential_speed(double radius, double speed, double fps) {
  const double chord = speed / fps;
  return 2.0 * std::asin(chord / (2.0 * radius)) / kDegToRad;
}

OrbitScene::OrbitScene(OrbitSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.scene.normal) {
    normal_ = spec_.scene.normal->normalized();
  } else {
    const double mid = (spec_.n_frames - 1) / 2.0;
    const double angle = (spec_.start_angle_deg + mid * spec_.angular_step_deg) * kDegToRad;
    const Eigen::Vector3d up = spec_.up.normalized();
    const Eigen::Vector3d e1 = up.unitOrthogonal();
    const Eigen::Vector3d e2 = up.cross(e1);
    normal_ = (std::cos(angle) * e1 + std::sin(angle) * e2).normalized();
  }
  tangent_u_ = normal_.unitOrthogonal();
  tangent_v_ = normal_.cross(tangent_u_);
  texture_key_ = hash_doubles({spec_.radius, spec_.angular_step_deg, spec_.fps,
                               static_cast<double>(spec_.n_frames), spec_.scene.velocity.x(),
                               spec_.scene.velocity.y(), spec_.scene.velocity.z(),
                               spec_.scene.checker_size});
}

View OrbitScene::train_view(int t) const {
  const double angle = (spec_.start_angle_deg + t * spec_.angular_step_deg) * kDegToRad;
  const Eigen::Vector3d up = spec_.up.normalized();
  const Eigen::Vector3d e1 = up.unitOrthogonal();
  const Eigen::Vector3d e2 = up.cross(e1);
  const Eigen::Vector3d pos =
      spec_.lookat + spec_.radius * (std::cos(angle) * e1 + std::sin(angle) * e2);
  return {geom::look_at_camera(pos, spec_.lookat, spec_.up, spec_.focal_length, spec_.width,
                               spec_.height),
          static_cast<double>(t)};
}

View OrbitScene::test_view(std::size_t i) const {
  const double time = spec_.test_times.at(i);
  const double angle =
      (spec_.start_angle_deg + time * spec_.angular_step_deg + spec_.test_angle_offset_deg) *
      kDegToRad;
  const Eigen::Vector3d up = spec_.up.normalized();
  const Eigen::Vector3d e1 = up.unitOrthogonal();
  const Eigen::Vector3d e2 = up.cross(e1);
  const Eigen::Vector3d pos =
      spec_.lookat + spec_.radius * (std::cos(angle) * e1 + std::sin(angle) * e2);
  return {geom::look_at_camera(pos, spec_.lookat, spec_.up, spec_.focal_length, spec_.width,
                               spec_.height),
          time};
}

std::vector<geom::Camera> OrbitScene::train_cameras() const {
  std::vector<geom::Camera> cams;
  for (int t = 0; t < spec_.n_frames; ++t) cams.push_back(train_view(t).camera);
  return cams;
}

std::optional<Eigen::Vector3d> OrbitScene::surface_point(const View& view,
                                                         const Eigen::Vector2d& pixel) const {
  const auto& cam = view.camera;
  const Eigen::Vector2d n = geom::pixel_to_normalized(cam, pixel);
  const Eigen::Vector3d dir = cam.orientation.transpose() * Eigen::Vector3d(n.x(), n.y(), 1.0);
  const Eigen::Vector3d anchor =
      spec_.lookat + spec_.scene.offset * normal_ + view.time * spec_.scene.velocity;
  const double denom = normal_.dot(dir);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double z = normal_.dot(anchor - cam.position) / denom;
  if (!(z > 0.0)) return std::nullopt;
  return cam.position + z * dir;
}

depth::DepthMap OrbitScene::depth(const View& view) const {
  depth::DepthMap d(spec_.width, spec_.height, 0.0);
  for (int v = 0; v < spec_.height; ++v)
    for (int u = 0; u < spec_.width; ++u) {
      const auto x = surface_point(view, Eigen::Vector2d(u, v));
      if (x) d.at(u, v) = (view.camera.orientation * (*x - view.camera.position)).z();
    }
  return d;
}

Eigen::Vector3d OrbitScene::material_point(const Eigen::Vector3d& world, double time) const {
  return world - time * spec_.scene.velocity;
}

Eigen::Vector3d OrbitScene::checker_color(const Eigen::Vector3d& material) const {
  const Eigen::Vector3d rel = material - spec_.lookat;
  const auto cell = [&](const Eigen::Vector3d& axis) {
    return static_cast<long>(std::floor(rel.dot(axis) / spec_.scene.checker_size));
  };
  const long cu = cell(tangent_u_);
  const long cv = cell(tangent_v_);
  const std::uint64_t h = mix64(texture_key_ ^ mix64(static_cast<std::uint64_t>(cu) * 73856093ULL ^
                                                     static_cast<std::uint64_t>(cv) * 19349663ULL));
  const double base = ((cu + cv) & 1) ? 0.8 : 0.2;
  Eigen::Vector3d c;
  for (int k = 0; k < 3; ++k)
    c[k] = std::clamp(base + 0.15 * ((static_cast<double>((h >> (16 * k)) & 0xffff) / 65535.0) - 0.5),
                      0.0, 1.0);
  return c;
}

metrics::ImageFrame OrbitScene::render(const View& view) const {
  metrics::ImageFrame img(spec_.width, spec_.height, 0.0);
  for (int v = 0; v < spec_.height; ++v)
    for (int u = 0; u < spec_.width; ++u) {
      const auto x = surface_point(view, Eigen::Vector2d(u, v));
      if (!x) continue;
      const Eigen::Vector3d c = checker_color(material_point(*x, view.time));
      for (int k = 0; k < 3; ++k) img.at(u, v, k) = c[k];
    }
  return img;
}

flow::FlowField OrbitScene::flow(const View& a, const View& b) const {
  // Points that cannot be transferred get a displacement far outside the image.
  const Eigen::Vector2d lost(1e6, 1e6);
  flow::FlowField f(spec_.width, spec_.height, lost);
  const Eigen::Vector3d shift = (b.time - a.time) * spec_.scene.velocity;
  for (int v = 0; v < spec_.height; ++v)
    for (int u = 0; u < spec_.width; ++u) {
      const Eigen::Vector2d px(u, v);
      const auto x = surface_point(a, px);
      if (!x) continue;
      const Eigen::Vector3d xc = b.camera.orientation * (*x + shift - b.camera.position);
      if (!(xc.z() > 1e-9)) continue;
      f.at(u, v) = geom::project_camera_point(b.camera, xc) - px;
    }
  return f;
}

std::vector<metrics::Keypoint> OrbitScene::keypoints(const View& view) const {
  std::vector<metrics::Keypoint> out;
  const int n = 5;
  const double extent = 0.1 * spec_.radius;
  int id = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i, ++id) {
      const double su = extent * (2.0 * i / (n - 1) - 1.0);
      const double sv = extent * (2.0 * j / (n - 1) - 1.0);
      const Eigen::Vector3d material =
          spec_.lookat + spec_.scene.offset * normal_ + su * tangent_u_ + sv * tangent_v_;
      const Eigen::Vector3d world = material + view.time * spec_.scene.velocity;
      metrics::Keypoint kp;
      kp.id = id;
      const Eigen::Vector3d xc = view.camera.orientation * (world - view.camera.position);
      if (xc.z() > 1e-9) {
        kp.position = geom::project_camera_point(view.camera, xc);
        kp.visible = view.camera.in_image(kp.position);
      } else {
        kp.visible = false;
      }
      if (!kp.visible) kp.position = Eigen::Vector2d::Zero();
      out.push_back(kp);
    }
  return out;
}

std::vector<emf::FramePair> OrbitScene::frame_pairs() const {
  std::vector<emf::FramePair> pairs;
  for (int t = 0; t + 1 < spec_.n_frames; ++t) {
    const View a = train_view(t);
    const View b = train_view(t + 1);
    emf::FramePair p;
    p.t = t;
    p.t1 = t + 1;
    p.cam_t = a.camera;
    p.cam_t1 = b.camera;
    p.depth_t = depth(a);
    p.depth_t1 = depth(b);
    p.fwd = flow(a, b);
    p.bwd = flow(b, a);
    p.fwd.src_frame = p.bwd.dst_frame = t;
    p.fwd.dst_frame = p.bwd.src_frame = t + 1;
    p.foreground = Mask(spec_.width, spec_.height, true);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

io::SequenceManifest generate_orbit_capture(const OrbitSpec& spec,
                                            const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  const OrbitScene scene(spec);
  fs::create_directories(out_dir);

  const auto name = [](const char* dir, int idx, const char* ext) {
    std::ostringstream s;
    s << dir << "/" << std::setw(5) << std::setfill('0') << idx << ext;
    return s.str();
  };

  io::SequenceManifest m;
  m.name = "synth_orbit";
  m.fps = spec.fps;
  m.depth_kind = io::DepthKind::kMetric;
  m.lookat = spec.lookat;

  std::vector<View> views;
  for (int t = 0; t < spec.n_frames; ++t) views.push_back(scene.train_view(t));
  for (std::size_t i = 0; i < spec.test_times.size(); ++i) views.push_back(scene.test_view(i));

  const Mask full(spec.width, spec.height, true);
  for (std::size_t k = 0; k < views.size(); ++k) {
    const int idx = static_cast<int>(k);
    io::FrameEntry e;
    e.index = idx;
    e.time = views[k].time;
    e.camera = views[k].camera;
    e.rgb = out_dir / name("rgb", idx, ".png");
    e.camera_path = out_dir / name("camera", idx, ".json");
    e.depth = out_dir / name("depth", idx, ".dpth");
    e.fg_mask = out_dir / name("mask", idx, ".png");
    io::write_png_rgb(e.rgb, scene.render(views[k]));
    io::write_camera(e.camera_path, views[k].camera);
    io::write_depth(*e.depth, scene.depth(views[k]));
    io::write_mask_png(*e.fg_mask, full);
    m.frames.push_back(std::move(e));
  }

  const auto add_pair = [&](int src, int dst) {
    std::ostringstream f, b;
    f << "flow/" << std::setw(5) << std::setfill('0') << src << "_" << std::setw(5) << dst << ".flo";
    b << "flow/" << std::setw(5) << std::setfill('0') << dst << "_" << std::setw(5) << src << ".flo";
    io::FlowPairEntry p{src, dst, out_dir / f.str(), out_dir / b.str()};
    io::write_flow(p.fwd, scene.flow(views[src], views[dst]));
    io::write_flow(p.bwd, scene.flow(views[dst], views[src]));
    m.flow_pairs[{src, dst}] = std::move(p);
  };
  for (int t = 0; t + 1 < spec.n_frames; ++t) add_pair(t, t + 1);
  for (std::size_t i = 0; i < spec.test_times.size(); ++i)
    for (int t = 0; t < spec.n_frames; ++t) add_pair(spec.n_frames + static_cast<int>(i), t);

  for (int t = 0; t < spec.n_frames; ++t) m.train["0"].push_back(t);
  for (std::size_t i = 0; i < spec.test_times.size(); ++i)
    m.test["1"].push_back(spec.n_frames + static_cast<int>(i));

  for (int k : spec.keypoint_frames) {
    const fs::path p = out_dir / name("keypoints", k, ".json");
    io::write_keypoints(p, scene.keypoints(views[static_cast<std::size_t>(k)]));
    m.keypoints[k] = p;
  }

  const fs::path manifest_path = out_dir / "manifest.json";
  io::write_manifest(manifest_path, m);
  return io::load_manifest(manifest_path);
}

}  // namespace monocheck::synth
