#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "monocheck/calib.hpp"
#include "monocheck/geom.hpp"

namespace monocheck::test {

namespace fs = std::filesystem;

inline std::mt19937_64& rng() {
  static std::mt19937_64 g(0x5eed);
  return g;
}

inline double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline Eigen::Vector3d random_vec(double lo, double hi) {
  return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)};
}

inline Eigen::Matrix3d random_rotation() {
  Eigen::Quaterniond q(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1), uniform(-1, 1));
  q.normalize();
  return q.toRotationMatrix();
}

/// Rotation angle between two rotation matrices in radians.
inline double rotation_angle(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  // Quaternion route keeps precision for tiny angles, unlike acos of the trace.
  return Eigen::AngleAxisd(Eigen::Quaterniond(a.transpose() * b)).angle();
}

inline geom::Camera identity_camera() {
  geom::Camera cam;
  cam.focal_length = 100.0;
  cam.principal_point = {50.0, 50.0};
  cam.width = 101;
  cam.height = 101;
  return cam;
}

/// Random pose seen by a 640x480 camera, points spread in front of it.
struct PnpInstance {
  geom::Camera intrinsics;
  Eigen::Matrix3d rotation;
  Eigen::Vector3d translation;
  std::vector<calib::Correspondence2D3D> corrs;
  std::vector<bool> outlier;
};

inline PnpInstance make_pnp_instance(std::mt19937_64& g, int n, double outlier_frac) {
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(g); };
  PnpInstance inst;
  inst.intrinsics.focal_length = u(400, 800);
  inst.intrinsics.width = 640;
  inst.intrinsics.height = 480;
  inst.intrinsics.principal_point = {319.5 + u(-10, 10), 239.5 + u(-10, 10)};
  Eigen::Quaterniond q(u(-1, 1), u(-1, 1), u(-1, 1), u(-1, 1));
  q.normalize();
  inst.rotation = q.toRotationMatrix();
  inst.translation = {u(-1, 1), u(-1, 1), u(-1, 1)};
  const int n_out = static_cast<int>(outlier_frac * n + 0.5);
  const double fx = inst.intrinsics.focal_length;
  for (int i = 0; i < n; ++i) {
    const double z = u(2, 8);
    const Eigen::Vector2d px(u(0, 639), u(0, 479));
    const Eigen::Vector3d local((px.x() - inst.intrinsics.principal_point.x()) / fx * z,
                                (px.y() - inst.intrinsics.principal_point.y()) / fx * z, z);
    calib::Correspondence2D3D c;
    c.world = inst.rotation.transpose() * (local - inst.translation);
    c.pixel = px;
    const bool out = i < n_out;
    if (out) {
      const double a = u(0, 2 * 3.141592653589793);
      c.pixel += 50.0 * Eigen::Vector2d(std::cos(a), std::sin(a));
    }
    inst.corrs.push_back(c);
    inst.outlier.push_back(out);
  }
  // Shuffle so outliers are not clustered at the front.
  for (int i = n - 1; i > 0; --i) {
    const int j = std::uniform_int_distribution<int>(0, i)(g);
    std::swap(inst.corrs[i], inst.corrs[j]);
    const bool t = inst.outlier[i];
    inst.outlier[i] = inst.outlier[j];
    inst.outlier[j] = t;
  }
  return inst;
}

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("monocheck_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

}  // namespace monocheck::test
