#include "monocheck/io.hpp"

#include <png.h>

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "monocheck/error.hpp"

namespace monocheck::io {

using nlohmann::json;

namespace {

std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& path, const std::vector<unsigned char>& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xffu));
}

void put_f32(std::vector<unsigned char>& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

std::uint32_t get_u32(const std::vector<unsigned char>& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
  return v;
}

float get_f32(const std::vector<unsigned char>& in, std::size_t at) {
  return std::bit_cast<float>(get_u32(in, at));
}

[[noreturn]] void schema_error(const fs::path& path, const std::string& what) {
  throw Error(ErrorCode::kSchema, path.string() + ": " + what);
}

Eigen::Vector3d vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::kSchema, "expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Eigen::Vector2d vec2(const json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::kSchema, "expected a 2-vector");
  return {j[0].get<double>(), j[1].get<double>()};
}

template <typename Fn>
auto with_context(const fs::path& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const json::exception& e) {
    schema_error(path, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSchema || e.code() == ErrorCode::kInvalidArgument)
      schema_error(path, e.what());
    throw;
  }
}

}  // namespace

// --------------------------------------------------------------------- .flo

flow::FlowField read_flow(const fs::path& path) {
  const auto bytes = read_bytes(path);
  if (bytes.size() < 12 || get_f32(bytes, 0) != kFloMagic)
    throw Error(ErrorCode::kFormat, path.string() + ": bad .flo magic");
  const auto w = static_cast<std::int32_t>(get_u32(bytes, 4));
  const auto h = static_cast<std::int32_t>(get_u32(bytes, 8));
  if (w <= 0 || h <= 0) throw Error(ErrorCode::kFormat, path.string() + ": bad .flo dimensions");
  const std::size_t expected = 12 + static_cast<std::size_t>(w) * h * 8;
  if (bytes.size() != expected)
    throw Error(ErrorCode::kFormat, path.string() + ": truncated or oversized .flo payload");
  flow::FlowField field(w, h);
  for (std::size_t i = 0; i < field.data.size(); ++i)
    field.data[i] = Eigen::Vector2d(get_f32(bytes, 12 + 8 * i), get_f32(bytes, 16 + 8 * i));
  return field;
}

void write_flow(const fs::path& path, const flow::FlowField& field) {
  std::vector<unsigned char> out;
  out.reserve(12 + field.data.size() * 8);
  put_f32(out, kFloMagic);
  put_u32(out, static_cast<std::uint32_t>(field.width));
  put_u32(out, static_cast<std::uint32_t>(field.height));
  for (const auto& f : field.data) {
    put_f32(out, static_cast<float>(f.x()));
    put_f32(out, static_cast<float>(f.y()));
  }
  write_bytes(path, out);
}

// -------------------------------------------------------------------- DPTH

Raster read_dpth(const fs::path& path) {
  const auto bytes = read_bytes(path);
  if (bytes.size() < kDpthHeaderBytes || std::memcmp(bytes.data(), "DPTH", 4) != 0)
    throw Error(ErrorCode::kFormat, path.string() + ": bad DPTH magic");
  if (get_u32(bytes, 4) != kDpthVersion)
    throw Error(ErrorCode::kFormat, path.string() + ": unsupported DPTH version");
  Raster r;
  r.width = get_u32(bytes, 8);
  r.height = get_u32(bytes, 12);
  r.channels = get_u32(bytes, 16);
  const std::size_t count = static_cast<std::size_t>(r.width) * r.height * r.channels;
  if (r.channels == 0 || bytes.size() != kDpthHeaderBytes + 4 * count)
    throw Error(ErrorCode::kFormat, path.string() + ": DPTH size mismatch");
  r.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) r.data[i] = get_f32(bytes, kDpthHeaderBytes + 4 * i);
  return r;
}

void write_dpth(const fs::path& path, const Raster& r) {
  if (r.data.size() != static_cast<std::size_t>(r.width) * r.height * r.channels)
    throw Error(ErrorCode::kDimensionMismatch, "write_dpth: payload size does not match header");
  std::vector<unsigned char> out;
  out.reserve(kDpthHeaderBytes + 4 * r.data.size());
  out.insert(out.end(), {'D', 'P', 'T', 'H'});
  put_u32(out, kDpthVersion);
  put_u32(out, r.width);
  put_u32(out, r.height);
  put_u32(out, r.channels);
  for (float f : r.data) put_f32(out, f);
  write_bytes(path, out);
}

depth::DepthMap read_depth(const fs::path& path) {
  const Raster r = read_dpth(path);
  if (r.channels != 1) throw Error(ErrorCode::kFormat, path.string() + ": depth must have 1 channel");
  depth::DepthMap d(static_cast<int>(r.width), static_cast<int>(r.height));
  for (std::size_t i = 0; i < r.data.size(); ++i) d.data[i] = r.data[i];
  return d;
}

void write_depth(const fs::path& path, const depth::DepthMap& map) {
  Raster r{static_cast<std::uint32_t>(map.width), static_cast<std::uint32_t>(map.height), 1, {}};
  r.data.reserve(map.data.size());
  for (double z : map.data) r.data.push_back(static_cast<float>(z));
  write_dpth(path, r);
}

covis::CovisibilityHeatmap read_heatmap(const fs::path& path, int n_train) {
  const Raster r = read_dpth(path);
  if (r.channels != 1) throw Error(ErrorCode::kFormat, path.string() + ": heatmap must have 1 channel");
  covis::CovisibilityHeatmap h;
  h.width = static_cast<int>(r.width);
  h.height = static_cast<int>(r.height);
  h.n_train = n_train;
  for (float f : r.data) {
    const int c = static_cast<int>(std::lround(f));
    if (c < 0 || c > n_train) throw Error(ErrorCode::kFormat, path.string() + ": count out of range");
    h.counts.push_back(c);
  }
  return h;
}

void write_heatmap(const fs::path& path, const covis::CovisibilityHeatmap& heatmap) {
  Raster r{static_cast<std::uint32_t>(heatmap.width), static_cast<std::uint32_t>(heatmap.height), 1,
           {}};
  for (int c : heatmap.counts) r.data.push_back(static_cast<float>(c));
  write_dpth(path, r);
}

metrics::DistanceMap read_distance_map(const fs::path& path) {
  const Raster r = read_dpth(path);
  if (r.channels != 1)
    throw Error(ErrorCode::kFormat, path.string() + ": distance map must have 1 channel");
  metrics::DistanceMap m{static_cast<int>(r.width), static_cast<int>(r.height), {}};
  m.data.assign(r.data.begin(), r.data.end());
  return m;
}

warp::GridFlow read_grid_flow(const fs::path& descriptor) {
  const json j = read_json(descriptor);
  return with_context(descriptor, [&] {
    const Eigen::Vector3d origin = vec3(j.at("origin"));
    const Eigen::Vector3d spacing = vec3(j.at("spacing"));
    const Eigen::Vector3d dims_d = vec3(j.at("dims"));
    const Eigen::Vector3i dims = dims_d.cast<int>();
    const Raster r = read_dpth(descriptor.parent_path() / j.at("data").get<std::string>());
    if (r.channels != 3 || static_cast<int>(r.width) != dims.x() ||
        static_cast<int>(r.height) != dims.y() * dims.z())
      schema_error(descriptor, "grid payload does not match dims");
    std::vector<Eigen::Vector3d> disp(static_cast<std::size_t>(dims.prod()));
    for (std::size_t i = 0; i < disp.size(); ++i)
      disp[i] = Eigen::Vector3d(r.data[3 * i], r.data[3 * i + 1], r.data[3 * i + 2]);
    return warp::GridFlow(origin, spacing, dims, std::move(disp));
  });
}

void write_grid_flow(const fs::path& descriptor, const warp::GridFlow& grid) {
  const fs::path data_name = descriptor.stem().string() + ".dpth";
  Raster r{static_cast<std::uint32_t>(grid.dims().x()),
           static_cast<std::uint32_t>(grid.dims().y() * grid.dims().z()), 3, {}};
  for (const auto& d : grid.displacement())
    for (int a = 0; a < 3; ++a) r.data.push_back(static_cast<float>(d[a]));
  write_dpth(descriptor.parent_path() / data_name, r);
  const json j = {{"origin", {grid.origin().x(), grid.origin().y(), grid.origin().z()}},
                  {"spacing", {grid.spacing().x(), grid.spacing().y(), grid.spacing().z()}},
                  {"dims", {grid.dims().x(), grid.dims().y(), grid.dims().z()}},
                  {"data", data_name.string()}};
  write_text(descriptor, j.dump(2) + "\n");
}

// --------------------------------------------------------------------- PNG

namespace {

std::vector<unsigned char> read_png(const fs::path& path, png_uint_32 format, int& w, int& h) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  const auto bytes = read_bytes(path);
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    throw Error(ErrorCode::kFormat, path.string() + ": " + image.message);
  image.format = format;
  std::vector<unsigned char> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(ErrorCode::kFormat, path.string() + ": " + image.message);
  }
  w = static_cast<int>(image.width);
  h = static_cast<int>(image.height);
  return pixels;
}

void write_png(const fs::path& path, png_uint_32 format, int w, int h,
               const std::vector<unsigned char>& pixels) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = format;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels.data(), 0, nullptr))
    throw Error(ErrorCode::kIo, path.string() + ": " + image.message);
  std::vector<unsigned char> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels.data(), 0, nullptr))
    throw Error(ErrorCode::kIo, path.string() + ": " + image.message);
  out.resize(size);
  write_bytes(path, out);
}

}  // namespace

metrics::ImageFrame read_png_rgb(const fs::path& path) {
  int w = 0, h = 0;
  const auto px = read_png(path, PNG_FORMAT_RGB, w, h);
  metrics::ImageFrame img(w, h);
  for (std::size_t i = 0; i < px.size(); ++i) img.data[i] = px[i] / 255.0;
  return img;
}

void write_png_rgb(const fs::path& path, const metrics::ImageFrame& image) {
  std::vector<unsigned char> px(image.data.size());
  for (std::size_t i = 0; i < px.size(); ++i)
    px[i] = static_cast<unsigned char>(std::lround(std::clamp(image.data[i], 0.0, 1.0) * 255.0));
  write_png(path, PNG_FORMAT_RGB, image.width, image.height, px);
}

Mask read_mask_png(const fs::path& path) {
  int w = 0, h = 0;
  const auto px = read_png(path, PNG_FORMAT_GRAY, w, h);
  Mask m(w, h);
  for (std::size_t i = 0; i < px.size(); ++i) m.data[i] = px[i] != 0;
  return m;
}

void write_mask_png(const fs::path& path, const Mask& mask) {
  std::vector<unsigned char> px(mask.data.size());
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = mask.data[i] ? 255 : 0;
  write_png(path, PNG_FORMAT_GRAY, mask.width, mask.height, px);
}

// -------------------------------------------------------------------- JSON

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    schema_error(path, e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  write_bytes(path, std::vector<unsigned char>(text.begin(), text.end()));
}

geom::Camera camera_from_json(const json& j, std::vector<std::string>* warnings) {
  geom::Camera cam;
  const json& o = j.at("orientation");
  if (!o.is_array() || o.size() != 3) throw Error(ErrorCode::kSchema, "orientation must be 3x3");
  for (int r = 0; r < 3; ++r) cam.orientation.row(r) = vec3(o[r]).transpose();
  cam.position = vec3(j.at("position"));
  cam.focal_length = j.at("focal_length").get<double>();
  cam.principal_point = vec2(j.at("principal_point"));
  cam.skew = j.value("skew", 0.0);
  cam.pixel_aspect_ratio = j.value("pixel_aspect_ratio", 1.0);
  if (j.contains("radial_distortion")) cam.radial_distortion = vec3(j["radial_distortion"]);
  if (j.contains("tangential_distortion")) cam.tangential_distortion = vec2(j["tangential_distortion"]);
  const Eigen::Vector2d size = vec2(j.at("image_size"));
  cam.width = static_cast<int>(size.x());
  cam.height = static_cast<int>(size.y());

  if (!(cam.orientation.determinant() > 0.0))
    throw Error(ErrorCode::kSchema, "orientation has non-positive determinant");
  const double err =
      (cam.orientation.transpose() * cam.orientation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (!(err <= 1e-4)) throw Error(ErrorCode::kSchema, "orientation is not orthonormal");
  if (err > 1e-12) {
    cam.orientation = geom::nearest_rotation(cam.orientation);
    if (warnings) warnings->push_back("orientation re-orthonormalized (error " + std::to_string(err) + ")");
  }
  cam.validate();
  return cam;
}

json camera_to_json(const geom::Camera& cam) {
  json o = json::array();
  for (int r = 0; r < 3; ++r)
    o.push_back({cam.orientation(r, 0), cam.orientation(r, 1), cam.orientation(r, 2)});
  return {{"orientation", o},
          {"position", {cam.position.x(), cam.position.y(), cam.position.z()}},
          {"focal_length", cam.focal_length},
          {"principal_point", {cam.principal_point.x(), cam.principal_point.y()}},
          {"skew", cam.skew},
          {"pixel_aspect_ratio", cam.pixel_aspect_ratio},
          {"radial_distortion",
           {cam.radial_distortion.x(), cam.radial_distortion.y(), cam.radial_distortion.z()}},
          {"tangential_distortion", {cam.tangential_distortion.x(), cam.tangential_distortion.y()}},
          {"image_size", {cam.width, cam.height}}};
}

geom::Camera read_camera(const fs::path& path, std::vector<std::string>* warnings) {
  const json j = read_json(path);
  std::vector<std::string> local;
  auto cam = with_context(path, [&] { return camera_from_json(j, &local); });
  if (warnings)
    for (auto& w : local) warnings->push_back(path.string() + ": " + w);
  return cam;
}

void write_camera(const fs::path& path, const geom::Camera& cam) {
  write_text(path, camera_to_json(cam).dump(2) + "\n");
}

std::vector<metrics::Keypoint> keypoints_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::kSchema, "keypoints must be an array");
  std::vector<metrics::Keypoint> out;
  std::set<int> ids;
  for (const auto& k : j) {
    metrics::Keypoint kp;
    kp.id = k.at("id").get<int>();
    kp.position = Eigen::Vector2d(k.at("x").get<double>(), k.at("y").get<double>());
    kp.visible = k.value("visible", true);
    if (!ids.insert(kp.id).second)
      throw Error(ErrorCode::kSchema, "duplicate keypoint id " + std::to_string(kp.id));
    out.push_back(kp);
  }
  return out;
}

json keypoints_to_json(const std::vector<metrics::Keypoint>& kps) {
  json out = json::array();
  for (const auto& k : kps)
    out.push_back({{"id", k.id}, {"x", k.position.x()}, {"y", k.position.y()}, {"visible", k.visible}});
  return out;
}

metrics::KeypointSet read_keypoints(const fs::path& path, int frame, int width, int height) {
  const json j = read_json(path);
  metrics::KeypointSet set;
  set.frame = frame;
  set.width = width;
  set.height = height;
  set.keypoints = with_context(path, [&] { return keypoints_from_json(j); });
  for (const auto& k : set.keypoints)
    if (k.visible && !(k.position.x() >= 0.0 && k.position.y() >= 0.0 &&
                       k.position.x() <= width - 1.0 && k.position.y() <= height - 1.0))
      schema_error(path, "visible keypoint " + std::to_string(k.id) + " lies outside the image");
  return set;
}

void write_keypoints(const fs::path& path, const std::vector<metrics::Keypoint>& kps) {
  write_text(path, keypoints_to_json(kps).dump(2) + "\n");
}

std::vector<calib::Correspondence2D3D> read_correspondences(const fs::path& path) {
  const json j = read_json(path);
  return with_context(path, [&] {
    if (!j.is_array()) throw Error(ErrorCode::kSchema, "correspondences must be an array");
    std::vector<calib::Correspondence2D3D> out;
    for (const auto& c : j) {
      calib::Correspondence2D3D corr{vec3(c.at("world")), vec2(c.at("pixel")), c.value("frame", 0)};
      if (!corr.world.allFinite() || !corr.pixel.allFinite())
        throw Error(ErrorCode::kSchema, "non-finite correspondence");
      out.push_back(corr);
    }
    return out;
  });
}

void write_correspondences(const fs::path& path,
                           const std::vector<calib::Correspondence2D3D>& corrs) {
  json out = json::array();
  for (const auto& c : corrs)
    out.push_back({{"world", {c.world.x(), c.world.y(), c.world.z()}},
                   {"pixel", {c.pixel.x(), c.pixel.y()}},
                   {"frame", c.frame}});
  write_text(path, out.dump(2) + "\n");
}

depth::SparseAnchorSet read_anchors(const fs::path& path) {
  const json j = read_json(path);
  return with_context(path, [&] {
    if (!j.is_array()) throw Error(ErrorCode::kSchema, "anchors must be an array");
    depth::SparseAnchorSet set;
    set.source = path.string();
    for (const auto& a : j) set.points.push_back({vec3(a.at("world")), a.value("frame", 0)});
    return set;
  });
}

void write_anchors(const fs::path& path, const depth::SparseAnchorSet& anchors) {
  json out = json::array();
  for (const auto& a : anchors.points)
    out.push_back({{"world", {a.world_position.x(), a.world_position.y(), a.world_position.z()}},
                   {"frame", a.frame}});
  write_text(path, out.dump(2) + "\n");
}

// ---------------------------------------------------------------- manifest

const FrameEntry& SequenceManifest::frame(int index) const {
  const auto it = std::lower_bound(frames.begin(), frames.end(), index,
                                   [](const FrameEntry& f, int i) { return f.index < i; });
  if (it == frames.end() || it->index != index)
    throw Error(ErrorCode::kInvalidArgument, "manifest has no frame " + std::to_string(index));
  return *it;
}

bool SequenceManifest::has_flow_pair(int src, int dst) const {
  return flow_pairs.count({src, dst}) > 0;
}

const FlowPairEntry& SequenceManifest::flow_pair(int src, int dst) const {
  const auto it = flow_pairs.find({src, dst});
  if (it == flow_pairs.end())
    throw Error(ErrorCode::kInvalidArgument, "manifest has no flow pair (" + std::to_string(src) +
                                                 "," + std::to_string(dst) + ")");
  return it->second;
}

namespace {

std::vector<int> merged(const std::map<std::string, std::vector<int>>& split) {
  std::set<int> all;
  for (const auto& [id, frames] : split) all.insert(frames.begin(), frames.end());
  return {all.begin(), all.end()};
}

}  // namespace

std::vector<int> SequenceManifest::train_frames() const {
  if (!train.empty()) return merged(train);
  std::vector<int> out;
  for (const auto& f : frames) out.push_back(f.index);
  return out;
}

std::vector<int> SequenceManifest::test_frames() const { return merged(test); }

SequenceManifest load_manifest(const fs::path& path) {
  const json j = read_json(path);
  const fs::path base = path.parent_path();
  const auto resolve = [&](const json& v) { return base / v.get<std::string>(); };
  const auto require_file = [&](const fs::path& p, const std::string& what) {
    if (!fs::is_regular_file(p))
      throw Error(ErrorCode::kIo, path.string() + ": " + what + " references missing file " + p.string());
  };

  SequenceManifest m;
  with_context(path, [&] {
    m.name = j.value("name", path.stem().string());
    m.fps = j.at("fps").get<double>();
    if (!(m.fps > 0.0)) schema_error(path, "fps must be positive");
    const std::string kind = j.value("depth_kind", "metric");
    if (kind == "metric") m.depth_kind = DepthKind::kMetric;
    else if (kind == "relative") m.depth_kind = DepthKind::kRelative;
    else schema_error(path, "depth_kind must be 'metric' or 'relative'");
    if (j.contains("lookat")) m.lookat = vec3(j["lookat"]);

    for (const auto& f : j.at("frames")) {
      FrameEntry e;
      e.index = f.at("index").get<int>();
      e.time = f.value("time", static_cast<double>(e.index));
      const std::string label = "frame " + std::to_string(e.index);
      if (f.contains("rgb")) {
        e.rgb = resolve(f["rgb"]);
        require_file(e.rgb, label + " rgb");
      }
      e.camera_path = resolve(f.at("camera"));
      require_file(e.camera_path, label + " camera");
      if (f.contains("depth")) {
        e.depth = resolve(f["depth"]);
        require_file(*e.depth, label + " depth");
      }
      if (f.contains("fg_mask")) {
        e.fg_mask = resolve(f["fg_mask"]);
        require_file(*e.fg_mask, label + " fg_mask");
      }
      e.camera = read_camera(e.camera_path, &m.warnings);
      if (!m.frames.empty() && e.index <= m.frames.back().index)
        schema_error(path, "frame indices must be unique and sorted (at " + label + ")");
      m.frames.push_back(std::move(e));
    }
    if (m.frames.empty()) schema_error(path, "manifest lists no frames");

    const auto known = [&](int idx) {
      return std::any_of(m.frames.begin(), m.frames.end(), [&](const auto& f) { return f.index == idx; });
    };
    for (const auto& p : j.value("flow_pairs", json::array())) {
      FlowPairEntry e;
      e.src = p.at("src").get<int>();
      e.dst = p.at("dst").get<int>();
      const std::string label = "flow pair (" + std::to_string(e.src) + "," + std::to_string(e.dst) + ")";
      if (!known(e.src) || !known(e.dst)) schema_error(path, label + " references an unknown frame");
      e.fwd = resolve(p.at("fwd"));
      e.bwd = resolve(p.at("bwd"));
      require_file(e.fwd, label + " fwd");
      require_file(e.bwd, label + " bwd");
      m.flow_pairs[{e.src, e.dst}] = std::move(e);
    }

    const auto read_split = [&](const char* key, std::map<std::string, std::vector<int>>& out) {
      if (!j.contains("splits") || !j["splits"].contains(key)) return;
      for (const auto& [cam_id, list] : j["splits"][key].items()) {
        auto frames = list.get<std::vector<int>>();
        for (int idx : frames)
          if (!known(idx))
            schema_error(path, std::string(key) + " split references unknown frame " + std::to_string(idx));
        out[cam_id] = std::move(frames);
      }
    };
    read_split("train", m.train);
    read_split("test", m.test);

    if (j.contains("keypoints")) {
      for (const auto& [frame, file] : j["keypoints"].items()) {
        const int idx = std::stoi(frame);
        if (!known(idx)) schema_error(path, "keypoints reference unknown frame " + frame);
        m.keypoints[idx] = resolve(file);
        require_file(m.keypoints[idx], "keypoints of frame " + frame);
      }
    }
    if (j.contains("anchors")) {
      m.anchors = resolve(j["anchors"]);
      require_file(*m.anchors, "anchors");
    }
    if (m.depth_kind == DepthKind::kRelative && !m.anchors)
      schema_error(path, "depth_kind 'relative' requires an anchors file");
    return 0;
  });
  return m;
}

void write_manifest(const fs::path& path, const SequenceManifest& m) {
  const fs::path base = path.parent_path();
  const auto rel = [&](const fs::path& p) { return fs::relative(p, base).generic_string(); };
  json j;
  j["name"] = m.name;
  j["fps"] = m.fps;
  j["depth_kind"] = m.depth_kind == DepthKind::kMetric ? "metric" : "relative";
  if (m.lookat) j["lookat"] = {m.lookat->x(), m.lookat->y(), m.lookat->z()};
  j["frames"] = json::array();
  for (const auto& f : m.frames) {
    json e = {{"index", f.index}, {"time", f.time}, {"camera", rel(f.camera_path)}};
    if (!f.rgb.empty()) e["rgb"] = rel(f.rgb);
    if (f.depth) e["depth"] = rel(*f.depth);
    if (f.fg_mask) e["fg_mask"] = rel(*f.fg_mask);
    j["frames"].push_back(e);
  }
  j["flow_pairs"] = json::array();
  for (const auto& [key, p] : m.flow_pairs)
    j["flow_pairs"].push_back({{"src", p.src}, {"dst", p.dst}, {"fwd", rel(p.fwd)}, {"bwd", rel(p.bwd)}});
  json splits = json::object();
  if (!m.train.empty()) splits["train"] = m.train;
  if (!m.test.empty()) splits["test"] = m.test;
  if (!splits.empty()) j["splits"] = splits;
  if (!m.keypoints.empty()) {
    json k = json::object();
    for (const auto& [frame, p] : m.keypoints) k[std::to_string(frame)] = rel(p);
    j["keypoints"] = k;
  }
  if (m.anchors) j["anchors"] = rel(*m.anchors);
  write_text(path, j.dump(2) + "\n");
}

}  // namespace monocheck::io
