#pragma once

#include <Eigen/Core>
#include <span>

namespace monocheck::geom {

/// Pinhole camera with Brown-Conrady distortion.
///
/// `orientation` maps world to camera coordinates (rows are the camera axes
/// expressed in world space), +z looks forward, +y points down the image.
/// A world point x maps to camera space as orientation * (x - position).
struct Camera {
  Eigen::Matrix3d orientation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double focal_length = 1.0;
  Eigen::Vector2d principal_point = Eigen::Vector2d::Zero();
  double skew = 0.0;
  double pixel_aspect_ratio = 1.0;
  Eigen::Vector3d radial_distortion = Eigen::Vector3d::Zero();
  Eigen::Vector2d tangential_distortion = Eigen::Vector2d::Zero();
  int width = 1;
  int height = 1;

  /// Throws kInvalidArgument when an invariant does not hold.
  void validate() const;

  bool has_distortion() const {
    return !radial_distortion.isZero(0.0) || !tangential_distortion.isZero(0.0);
  }

  Eigen::Vector3d optical_axis() const { return orientation.row(2).transpose(); }

  bool in_image(const Eigen::Vector2d& pixel) const {
    return pixel.x() >= 0.0 && pixel.y() >= 0.0 && pixel.x() <= width - 1.0 &&
           pixel.y() <= height - 1.0;
  }
};

struct Ray {
  Eigen::Vector3d origin;
  Eigen::Vector3d direction;  // unit length
};

struct LookAtPoint {
  Eigen::Vector3d point;
  double residual_rms = 0.0;
};

/// Camera at `position` looking at `target`. `up` is a world direction that
/// appears as "up" in the image; it must not be parallel to the view axis.
Camera look_at_camera(const Eigen::Vector3d& position, const Eigen::Vector3d& target,
                      const Eigen::Vector3d& up, double focal_length, int width, int height);

/// Applies the distortion polynomial to normalized image coordinates.
Eigen::Vector2d distort(const Camera& cam, const Eigen::Vector2d& normalized);

/// Inverse of `distort` by fixed-point iteration (<= 20 iterations, 1e-10).
Eigen::Vector2d undistort(const Camera& cam, const Eigen::Vector2d& distorted);

/// Pixel of a camera-space point. Throws kBehindCamera when z <= 1e-12.
Eigen::Vector2d project_camera_point(const Camera& cam, const Eigen::Vector3d& camera_point);

Eigen::Vector2d project(const Camera& cam, const Eigen::Vector3d& world_point);

/// Undistorted normalized coordinates (x/z, y/z) of the ray through a pixel.
Eigen::Vector2d pixel_to_normalized(const Camera& cam, const Eigen::Vector2d& pixel);

/// World point at z-depth `z_depth` along the optical axis behind `pixel`.
Eigen::Vector3d backproject(const Camera& cam, const Eigen::Vector2d& pixel, double z_depth);

Ray pixel_ray(const Camera& cam, const Eigen::Vector2d& pixel);

/// Least-squares point closest to all optical axes.
LookAtPoint triangulate_lookat(std::span<const Camera> cams);

/// Nearest rotation (Frobenius norm) to a 3x3 matrix; keeps det = +1.
Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m);

}  // namespace monocheck::geom
