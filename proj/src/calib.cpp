#include "monocheck/calib.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "monocheck/error.hpp"
#include "monocheck/parallel.hpp"
#include "monocheck/random.hpp"

namespace monocheck::calib {

namespace {

constexpr int kSampleSize = 6;
constexpr double kCoplanarRatio = 1e-6;
constexpr int kBatch = 32;

bool is_coplanar(std::span<const Eigen::Vector3d> pts) {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) scatter += (p - c) * (p - c).transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
  const auto ev = eig.eigenvalues();  // ascending, = squared singular values
  if (!(ev(2) > 0.0)) return true;
  return std::sqrt(std::max(ev(0), 0.0) / ev(2)) < kCoplanarRatio;
}

double reprojection_error(const geom::Camera& cam, const Eigen::Matrix3d& r,
                          const Eigen::Vector3d& t, const Correspondence2D3D& c) {
  const Eigen::Vector3d xc = r * c.world + t;
  if (!(xc.z() > 1e-12)) return std::numeric_limits<double>::infinity();
  return (geom::project_camera_point(cam, xc) - c.pixel).norm();
}

double total_cost(const geom::Camera& cam, std::span<const Correspondence2D3D> corrs,
                  std::span<const int> idx, const Eigen::Matrix3d& r, const Eigen::Vector3d& t) {
  double cost = 0.0;
  for (int i : idx) {
    const Eigen::Vector3d xc = r * corrs[i].world + t;
    if (!(xc.z() > 1e-12)) return std::numeric_limits<double>::infinity();
    cost += (geom::project_camera_point(cam, xc) - corrs[i].pixel).squaredNorm();
  }
  return cost;
}

Eigen::Matrix3d rotation_increment(const Eigen::Vector3d& w) {
  const double angle = w.norm();
  if (angle < 1e-300) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

std::vector<int> inlier_set(const geom::Camera& cam, std::span<const Correspondence2D3D> corrs,
                            const Eigen::Matrix3d& r, const Eigen::Vector3d& t, double tol) {
  std::vector<int> out;
  for (std::size_t i = 0; i < corrs.size(); ++i)
    if (reprojection_error(cam, r, t, corrs[i]) <= tol) out.push_back(static_cast<int>(i));
  return out;
}

int required_iterations(double inlier_ratio, double confidence, int max_iters) {
  const double p_good = std::pow(inlier_ratio, kSampleSize);
  if (p_good >= 1.0) return 1;
  if (p_good <= 0.0) return max_iters;
  const double n = std::log(1.0 - confidence) / std::log(1.0 - p_good);
  if (!std::isfinite(n) || n > max_iters) return max_iters;
  return std::max(1, static_cast<int>(std::ceil(n)));
}

struct Hypothesis {
  bool ok = false;
  int count = 0;
  Eigen::Matrix3d r;
  Eigen::Vector3d t;
};

}  // namespace

bool dlt_pose(std::span<const Eigen::Vector3d> world, std::span<const Eigen::Vector2d> normalized,
              Eigen::Matrix3d& rotation, Eigen::Vector3d& translation) {
  const std::size_t n = world.size();
  if (n < kSampleSize || normalized.size() != n) return false;
  if (is_coplanar(world)) return false;

  Eigen::Vector3d c3 = Eigen::Vector3d::Zero();
  Eigen::Vector2d c2 = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    c3 += world[i];
    c2 += normalized[i];
  }
  c3 /= static_cast<double>(n);
  c2 /= static_cast<double>(n);
  double d3 = 0.0, d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d3 += (world[i] - c3).norm();
    d2 += (normalized[i] - c2).norm();
  }
  if (!(d3 > 0.0) || !(d2 > 0.0)) return false;
  const double s3 = std::sqrt(3.0) * static_cast<double>(n) / d3;
  const double s2 = std::sqrt(2.0) * static_cast<double>(n) / d2;

  Eigen::MatrixXd a(2 * n, 12);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Vector4d x;
    x << s3 * (world[i] - c3), 1.0;
    const Eigen::Vector2d u = s2 * (normalized[i] - c2);
    a.row(2 * i) << x.transpose(), Eigen::RowVector4d::Zero(), -u.x() * x.transpose();
    a.row(2 * i + 1) << Eigen::RowVector4d::Zero(), x.transpose(), -u.y() * x.transpose();
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd p = svd.matrixV().col(11);
  Eigen::Matrix<double, 3, 4> pn;
  pn << p.segment<4>(0).transpose(), p.segment<4>(4).transpose(), p.segment<4>(8).transpose();

  Eigen::Matrix4d t3 = Eigen::Matrix4d::Identity();
  t3.topLeftCorner<3, 3>() *= s3;
  t3.topRightCorner<3, 1>() = -s3 * c3;
  Eigen::Matrix3d t2_inv = Eigen::Matrix3d::Identity();
  t2_inv.topLeftCorner<2, 2>() /= s2;
  t2_inv.topRightCorner<2, 1>() = c2;
  Eigen::Matrix<double, 3, 4> proj = t2_inv * pn * t3;

  int in_front = 0;
  for (std::size_t i = 0; i < n; ++i)
    in_front += (proj.row(2).head<3>().dot(world[i]) + proj(2, 3) > 0.0) ? 1 : 0;
  if (2 * in_front < static_cast<int>(n)) proj = -proj;

  const Eigen::Matrix3d m = proj.leftCols<3>();
  if (!(m.determinant() > 0.0)) return false;
  const Eigen::JacobiSVD<Eigen::Matrix3d> msvd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double scale = msvd.singularValues().mean();
  if (!(scale > 0.0)) return false;
  rotation = msvd.matrixU() * msvd.matrixV().transpose();
  translation = proj.col(3) / scale;
  return rotation.allFinite() && translation.allFinite();
}

double refine_pose(const geom::Camera& cam, std::span<const Correspondence2D3D> corrs,
                   std::span<const int> idx, Eigen::Matrix3d& rotation,
                   Eigen::Vector3d& translation, int max_iter) {
  double cost = total_cost(cam, corrs, idx, rotation, translation);
  const auto residuals = [&](const Eigen::Matrix3d& r, const Eigen::Vector3d& t,
                             Eigen::VectorXd& out) {
    out.resize(2 * static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const auto& c = corrs[idx[k]];
      out.segment<2>(2 * static_cast<Eigen::Index>(k)) =
          geom::project_camera_point(cam, r * c.world + t) - c.pixel;
    }
  };

  for (int it = 0; it < max_iter && std::isfinite(cost) && cost > 1e-28; ++it) {
    Eigen::VectorXd r0;
    Eigen::MatrixXd jac(2 * static_cast<Eigen::Index>(idx.size()), 6);
    try {
      residuals(rotation, translation, r0);
      for (int j = 0; j < 6; ++j) {
        const double h = j < 3 ? 1e-7 : 1e-7 * std::max(1.0, translation.norm());
        Eigen::VectorXd rp, rm;
        Eigen::Matrix<double, 6, 1> d = Eigen::Matrix<double, 6, 1>::Zero();
        d(j) = h;
        residuals(rotation_increment(d.head<3>()) * rotation, translation + d.tail<3>(), rp);
        residuals(rotation_increment(-d.head<3>()) * rotation, translation - d.tail<3>(), rm);
        jac.col(j) = (rp - rm) / (2.0 * h);
      }
    } catch (const Error&) {
      break;  // a point crossed behind the camera in the finite difference
    }
    const Eigen::Matrix<double, 6, 6> jtj = jac.transpose() * jac;
    const Eigen::Matrix<double, 6, 1> step = jtj.ldlt().solve(-jac.transpose() * r0);
    if (!step.allFinite()) break;

    double scale = 1.0;
    bool accepted = false;
    Eigen::Matrix3d r_new;
    Eigen::Vector3d t_new;
    double new_cost = cost;
    for (int k = 0; k <= 10; ++k, scale *= 0.5) {
      r_new = rotation_increment(scale * step.head<3>()) * rotation;
      t_new = translation + scale * step.tail<3>();
      new_cost = total_cost(cam, corrs, idx, r_new, t_new);
      if (new_cost <= cost) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const double rel = (cost - new_cost) / std::max(cost, 1e-300);
    rotation = r_new;
    translation = t_new;
    cost = new_cost;
    if (rel < 1e-10) break;
  }
  return cost;
}

PoseEstimate solve_pnp_ransac(std::span<const Correspondence2D3D> corrs,
                              const geom::Camera& intrinsics, const PnpParams& params) {
  const int n = static_cast<int>(corrs.size());
  if (n < kSampleSize)
    throw Error(ErrorCode::kTooFewPoints, "solve_pnp_ransac: need at least 6 correspondences");
  if (!(params.inlier_px > 0.0) || params.max_iters < 1)
    throw Error(ErrorCode::kInvalidArgument, "solve_pnp_ransac: invalid RANSAC parameters");

  std::vector<Eigen::Vector3d> world(corrs.size());
  std::vector<Eigen::Vector2d> norm(corrs.size());
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    world[i] = corrs[i].world;
    norm[i] = geom::pixel_to_normalized(intrinsics, corrs[i].pixel);
  }
  if (is_coplanar(world))
    throw Error(ErrorCode::kCoplanar, "solve_pnp_ransac: 3D points are coplanar");

  const auto evaluate = [&](int iteration) {
    auto rng = stream_for(params.seed, static_cast<std::uint64_t>(iteration));
    std::vector<int> pool(corrs.size());
    std::iota(pool.begin(), pool.end(), 0);
    std::array<Eigen::Vector3d, kSampleSize> sw;
    std::array<Eigen::Vector2d, kSampleSize> sn;
    for (int k = 0; k < kSampleSize; ++k) {
      std::uniform_int_distribution<int> pick(k, n - 1);
      std::swap(pool[k], pool[pick(rng)]);
      sw[k] = world[pool[k]];
      sn[k] = norm[pool[k]];
    }
    Hypothesis h;
    h.ok = dlt_pose(sw, sn, h.r, h.t);
    if (h.ok) {
      for (const auto& c : corrs)
        h.count += reprojection_error(intrinsics, h.r, h.t, c) <= params.inlier_px ? 1 : 0;
    }
    return h;
  };

  Hypothesis best;
  int required = params.max_iters;
  int done = 0;
  std::vector<Hypothesis> batch(kBatch);
  while (done < required) {
    const int size = std::min(kBatch, params.max_iters - done);
    parallel_for(static_cast<std::size_t>(size), params.threads,
                 [&](std::size_t k) { batch[k] = evaluate(done + static_cast<int>(k)); });
    // Replay in iteration order so the outcome does not depend on batching.
    for (int k = 0; k < size && done < required; ++k) {
      ++done;
      const auto& h = batch[static_cast<std::size_t>(k)];
      if (h.ok && h.count > best.count) {
        best = h;
        required = std::min(required, required_iterations(static_cast<double>(best.count) / n,
                                                           params.confidence, params.max_iters));
      }
    }
  }
  if (!best.ok || static_cast<double>(best.count) / n < 0.3)
    throw Error(ErrorCode::kNoConsensus, "solve_pnp_ransac: best inlier ratio below 0.3");

  PoseEstimate pose;
  pose.rotation = best.r;
  pose.translation = best.t;
  pose.iterations = done;
  pose.inliers = inlier_set(intrinsics, corrs, best.r, best.t, params.inlier_px);
  for (int pass = 0; pass < 2; ++pass) {
    refine_pose(intrinsics, corrs, pose.inliers, pose.rotation, pose.translation);
    auto updated = inlier_set(intrinsics, corrs, pose.rotation, pose.translation, params.inlier_px);
    const bool same = updated == pose.inliers;
    pose.inliers = std::move(updated);
    if (same) break;
  }
  if (static_cast<double>(pose.inliers.size()) / n < 0.3)
    throw Error(ErrorCode::kNoConsensus, "solve_pnp_ransac: refined pose lost its consensus");
  double err = 0.0;
  for (int i : pose.inliers)
    err += reprojection_error(intrinsics, pose.rotation, pose.translation, corrs[i]);
  pose.mean_reproj_error = err / static_cast<double>(pose.inliers.size());
  return pose;
}

geom::Camera apply_pose(const geom::Camera& intrinsics, const PoseEstimate& pose) {
  geom::Camera cam = intrinsics;
  cam.orientation = pose.rotation;
  cam.position = pose.camera_position();
  return cam;
}

}  // namespace monocheck::calib
