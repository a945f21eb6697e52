#include "monocheck/warp.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "monocheck/error.hpp"

namespace monocheck::warp {

WarpField WarpField::identity() {
  return WarpField([](const Eigen::Vector3d& x, double, double) { return x; }, WarpKind::kAnalytic);
}

WarpField WarpField::analytic(std::function<Eigen::Vector3d(const Eigen::Vector3d&)> f) {
  return WarpField([f = std::move(f)](const Eigen::Vector3d& x, double, double) { return f(x); },
                   WarpKind::kAnalytic);
}

void RaySamples::validate() const {
  if (sigmas.size() != positions.size() || deltas.size() != positions.size())
    throw Error(ErrorCode::kDimensionMismatch, "RaySamples: field lengths differ");
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (!(sigmas[i] >= 0.0) || !std::isfinite(sigmas[i]))
      throw Error(ErrorCode::kInvalidArgument, "RaySamples: densities must be finite and >= 0");
    if (!(deltas[i] > 0.0))
      throw Error(ErrorCode::kInvalidArgument, "RaySamples: spacings must be positive");
  }
}

std::vector<double> volume_weights(const RaySamples& s) {
  s.validate();
  std::vector<double> w(s.sigmas.size());
  double optical_depth = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double tau = s.sigmas[i] * s.deltas[i];
    // T_i (1 - e^-tau) = e^-D - e^-(D+tau); expm1 keeps small tau accurate.
    w[i] = -std::exp(-optical_depth) * std::expm1(-tau);
    optical_depth += tau;
  }
  return w;
}

Eigen::Vector2d warp_integrate_project(const RaySamples& s, const WarpField& warp, double t1,
                                       double t2, const geom::Camera& cam2,
                                       const IntegrateOptions& options) {
  s.validate();
  std::vector<Eigen::Vector3d> warped(s.positions.size());
  for (std::size_t i = 0; i < warped.size(); ++i) warped[i] = warp(s.positions[i], t1, t2);

  std::vector<double> weights;
  if (options.density_source == DensitySource::kSource) {
    weights = volume_weights(s);
  } else {
    if (!options.target_density)
      throw Error(ErrorCode::kInvalidArgument,
                  "warp_integrate_project: target densities requested without an evaluator");
    RaySamples target = s;
    for (std::size_t i = 0; i < warped.size(); ++i) target.sigmas[i] = options.target_density(warped[i]);
    weights = volume_weights(target);
  }

  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 1e-6))
    throw Error(ErrorCode::kVacuumRay, "warp_integrate_project: ray does not hit a surface");

  Eigen::Vector3d expected = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < warped.size(); ++i) expected += weights[i] * warped[i];
  if (options.normalize_weights) expected /= total;
  return geom::project(cam2, expected);
}

BroydenResult broyden_invert_warp(
    const std::function<Eigen::Vector3d(const Eigen::Vector3d&)>& inverse_warp,
    const Eigen::Vector3d& target, std::optional<Eigen::Vector3d> init,
    const BroydenOptions& options) {
  if (!(options.tol > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "broyden_invert_warp: tol must be positive");
  Eigen::Vector3d x = init.value_or(target);
  Eigen::Vector3d g = inverse_warp(x) - target;
  if (!g.allFinite())
    throw Error(ErrorCode::kNonConvergence, "broyden_invert_warp: non-finite residual at init");
  if (g.norm() <= options.tol) return {x, 0, g.norm()};

  Eigen::Matrix3d h = Eigen::Matrix3d::Identity();  // inverse Jacobian estimate
  for (int it = 1; it <= options.max_iter; ++it) {
    const Eigen::Vector3d dx = -h * g;
    double step = 1.0;
    Eigen::Vector3d x_new = x + dx;
    Eigen::Vector3d g_new = inverse_warp(x_new) - target;
    for (int k = 0; k < options.max_halvings && !(g_new.norm() <= g.norm()); ++k) {
      step *= 0.5;
      x_new = x + step * dx;
      g_new = inverse_warp(x_new) - target;
    }
    if (!g_new.allFinite()) break;
    const Eigen::Vector3d s = x_new - x;
    const Eigen::Vector3d y = g_new - g;
    const Eigen::Vector3d hy = h * y;
    const double denom = s.dot(hy);
    if (std::abs(denom) > 1e-300) h += (s - hy) * (s.transpose() * h) / denom;
    x = x_new;
    g = g_new;
    if (g.norm() <= options.tol) return {x, it, g.norm()};
  }
  std::ostringstream msg;
  msg << "broyden_invert_warp: no convergence after " << options.max_iter
      << " iterations (residual " << g.norm() << ")";
  throw Error(ErrorCode::kNonConvergence, msg.str());
}

Eigen::Vector3d chain_scene_flow(std::span<const StepFlow> flows, const Eigen::Vector3d& x, int t1,
                                 int t2) {
  if (t1 > t2) throw Error(ErrorCode::kInvalidArgument, "chain_scene_flow: t1 must be <= t2");
  if (t1 < 0 || static_cast<std::size_t>(t2) > flows.size())
    throw Error(ErrorCode::kInvalidArgument, "chain_scene_flow: steps outside the flow sequence");
  Eigen::Vector3d p = x;
  for (int t = t1; t < t2; ++t) {
    const auto next = flows[static_cast<std::size_t>(t)](p);
    if (!next) {
      std::ostringstream msg;
      msg << "chain_scene_flow: point left the domain of the flow for step " << t << "->" << t + 1;
      throw Error(ErrorCode::kOutOfDomain, msg.str());
    }
    p = *next;
  }
  return p;
}

GridFlow::GridFlow(Eigen::Vector3d origin, Eigen::Vector3d spacing, Eigen::Vector3i dims,
                   std::vector<Eigen::Vector3d> displacement)
    : origin_(std::move(origin)),
      spacing_(std::move(spacing)),
      dims_(std::move(dims)),
      disp_(std::move(displacement)) {
  if ((dims_.array() < 2).any())
    throw Error(ErrorCode::kInvalidArgument, "GridFlow: need at least 2 nodes per axis");
  if (!(spacing_.array() > 0.0).all())
    throw Error(ErrorCode::kInvalidArgument, "GridFlow: spacing must be positive");
  if (disp_.size() != static_cast<std::size_t>(dims_.x()) * dims_.y() * dims_.z())
    throw Error(ErrorCode::kDimensionMismatch, "GridFlow: displacement count does not match dims");
}

std::optional<Eigen::Vector3d> GridFlow::operator()(const Eigen::Vector3d& x) const {
  const Eigen::Vector3d g = (x - origin_).cwiseQuotient(spacing_);
  Eigen::Vector3i i0;
  Eigen::Vector3d f;
  for (int a = 0; a < 3; ++a) {
    const double hi = dims_[a] - 1.0;
    if (!(g[a] >= 0.0 && g[a] <= hi)) return std::nullopt;
    i0[a] = std::min(static_cast<int>(std::floor(g[a])), dims_[a] - 2);
    f[a] = g[a] - i0[a];
  }
  Eigen::Vector3d d = Eigen::Vector3d::Zero();
  for (int dz = 0; dz < 2; ++dz)
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) {
        const double w = (dx ? f.x() : 1.0 - f.x()) * (dy ? f.y() : 1.0 - f.y()) *
                         (dz ? f.z() : 1.0 - f.z());
        if (w != 0.0) d += w * node(i0.x() + dx, i0.y() + dy, i0.z() + dz);
      }
  return x + d;
}

}  // namespace monocheck::warp
