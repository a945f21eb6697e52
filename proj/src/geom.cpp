#include "monocheck/geom.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "monocheck/error.hpp"

namespace monocheck::geom {

namespace {

constexpr double kMinCameraZ = 1e-12;
constexpr int kUndistortMaxIter = 20;
constexpr double kUndistortTol = 1e-10;
constexpr double kLookAtMaxCondition = 1e8;

}  // namespace

void Camera::validate() const {
  const double ortho_err =
      (orientation.transpose() * orientation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (!(ortho_err < 1e-6) || !(orientation.determinant() > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "camera orientation is not a proper rotation");
  if (!(focal_length > 0.0) || !std::isfinite(focal_length))
    throw Error(ErrorCode::kInvalidArgument, "camera focal_length must be positive");
  if (!(pixel_aspect_ratio > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "camera pixel_aspect_ratio must be positive");
  if (width <= 0 || height <= 0)
    throw Error(ErrorCode::kInvalidArgument, "camera image_size must be positive");
  if (!position.allFinite() || !principal_point.allFinite() || !radial_distortion.allFinite() ||
      !tangential_distortion.allFinite() || !std::isfinite(skew))
    throw Error(ErrorCode::kInvalidArgument, "camera has non-finite parameters");
}

Camera look_at_camera(const Eigen::Vector3d& position, const Eigen::Vector3d& target,
                      const Eigen::Vector3d& up, double focal_length, int width, int height) {
  const Eigen::Vector3d forward = (target - position).normalized();
  const Eigen::Vector3d right_raw = forward.cross(up);
  if (right_raw.norm() < 1e-12)
    throw Error(ErrorCode::kDegenerateGeometry, "look_at_camera: up is parallel to view axis");
  const Eigen::Vector3d right = right_raw.normalized();
  const Eigen::Vector3d down = forward.cross(right);
  Camera cam;
  cam.orientation.row(0) = right.transpose();
  cam.orientation.row(1) = down.transpose();
  cam.orientation.row(2) = forward.transpose();
  cam.position = position;
  cam.focal_length = focal_length;
  cam.width = width;
  cam.height = height;
  cam.principal_point = Eigen::Vector2d((width - 1) / 2.0, (height - 1) / 2.0);
  return cam;
}

Eigen::Vector2d distort(const Camera& cam, const Eigen::Vector2d& n) {
  const double x = n.x();
  const double y = n.y();
  const double r2 = x * x + y * y;
  const auto& k = cam.radial_distortion;
  const auto& p = cam.tangential_distortion;
  const double radial = 1.0 + r2 * (k[0] + r2 * (k[1] + r2 * k[2]));
  const double dx = 2.0 * p[0] * x * y + p[1] * (r2 + 2.0 * x * x);
  const double dy = p[0] * (r2 + 2.0 * y * y) + 2.0 * p[1] * x * y;
  return {x * radial + dx, y * radial + dy};
}

Eigen::Vector2d undistort(const Camera& cam, const Eigen::Vector2d& distorted) {
  if (!cam.has_distortion()) return distorted;
  const auto& k = cam.radial_distortion;
  const auto& p = cam.tangential_distortion;
  Eigen::Vector2d u = distorted;
  for (int it = 0; it < kUndistortMaxIter; ++it) {
    const double x = u.x();
    const double y = u.y();
    const double r2 = x * x + y * y;
    const double radial = 1.0 + r2 * (k[0] + r2 * (k[1] + r2 * k[2]));
    const double dx = 2.0 * p[0] * x * y + p[1] * (r2 + 2.0 * x * x);
    const double dy = p[0] * (r2 + 2.0 * y * y) + 2.0 * p[1] * x * y;
    u = Eigen::Vector2d((distorted.x() - dx) / radial, (distorted.y() - dy) / radial);
    if ((distort(cam, u) - distorted).norm() <= kUndistortTol) return u;
  }
  throw Error(ErrorCode::kNonConvergence, "undistort: fixed-point iteration did not converge");
}

Eigen::Vector2d project_camera_point(const Camera& cam, const Eigen::Vector3d& xc) {
  if (!(xc.z() > kMinCameraZ))
    throw Error(ErrorCode::kBehindCamera, "project: point is behind the camera");
  const Eigen::Vector2d d = distort(cam, Eigen::Vector2d(xc.x() / xc.z(), xc.y() / xc.z()));
  return {cam.focal_length * d.x() + cam.skew * d.y() + cam.principal_point.x(),
          cam.focal_length * cam.pixel_aspect_ratio * d.y() + cam.principal_point.y()};
}

Eigen::Vector2d project(const Camera& cam, const Eigen::Vector3d& x) {
  return project_camera_point(cam, cam.orientation * (x - cam.position));
}

Eigen::Vector2d pixel_to_normalized(const Camera& cam, const Eigen::Vector2d& pixel) {
  const double yd = (pixel.y() - cam.principal_point.y()) /
                    (cam.focal_length * cam.pixel_aspect_ratio);
  const double xd = (pixel.x() - cam.principal_point.x() - cam.skew * yd) / cam.focal_length;
  return undistort(cam, Eigen::Vector2d(xd, yd));
}

Eigen::Vector3d backproject(const Camera& cam, const Eigen::Vector2d& pixel, double z_depth) {
  if (!(z_depth > 0.0))
    throw Error(ErrorCode::kNonPositiveDepth, "backproject: depth must be positive");
  const Eigen::Vector2d n = pixel_to_normalized(cam, pixel);
  const Eigen::Vector3d xc(n.x() * z_depth, n.y() * z_depth, z_depth);
  return cam.orientation.transpose() * xc + cam.position;
}

Ray pixel_ray(const Camera& cam, const Eigen::Vector2d& pixel) {
  const Eigen::Vector2d n = pixel_to_normalized(cam, pixel);
  const Eigen::Vector3d d = cam.orientation.transpose() * Eigen::Vector3d(n.x(), n.y(), 1.0);
  return {cam.position, d.normalized()};
}

LookAtPoint triangulate_lookat(std::span<const Camera> cams) {
  if (cams.size() < 2)
    throw Error(ErrorCode::kInvalidArgument, "triangulate_lookat: need at least 2 cameras");
  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  for (const auto& cam : cams) {
    const Eigen::Vector3d d = cam.optical_axis().normalized();
    const Eigen::Matrix3d proj = Eigen::Matrix3d::Identity() - d * d.transpose();
    a += proj;
    b += proj * cam.position;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(a);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  if (!(lmin > 0.0) || lmax / lmin > kLookAtMaxCondition) {
    std::ostringstream msg;
    msg << "triangulate_lookat: optical axes are (nearly) parallel, condition "
        << (lmin > 0.0 ? lmax / lmin : INFINITY);
    throw Error(ErrorCode::kDegenerateGeometry, msg.str());
  }
  LookAtPoint out;
  out.point = a.ldlt().solve(b);
  double sum_sq = 0.0;
  for (const auto& cam : cams) {
    const Eigen::Vector3d d = cam.optical_axis().normalized();
    const Eigen::Vector3d r = out.point - cam.position;
    sum_sq += (r - d * d.dot(r)).squaredNorm();
  }
  out.residual_rms = std::sqrt(sum_sq / static_cast<double>(cams.size()));
  return out;
}

Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m) {
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

}  // namespace monocheck::geom
