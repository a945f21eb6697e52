#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "monocheck/geom.hpp"

namespace monocheck::warp {

enum class WarpKind { kAnalytic, kGrid, kChained };

/// Deterministic 3D warp x -> W_{src->dst}(x). Evaluators must be safe to
/// call concurrently.
class WarpField {
 public:
  using Evaluator = std::function<Eigen::Vector3d(const Eigen::Vector3d&, double src, double dst)>;

  WarpField(Evaluator eval, WarpKind kind) : eval_(std::move(eval)), kind_(kind) {}

  static WarpField identity();
  /// A time-independent warp x -> f(x).
  static WarpField analytic(std::function<Eigen::Vector3d(const Eigen::Vector3d&)> f);

  Eigen::Vector3d operator()(const Eigen::Vector3d& x, double src, double dst) const {
    return eval_(x, src, dst);
  }
  WarpKind kind() const { return kind_; }

 private:
  Evaluator eval_;
  WarpKind kind_;
};

/// Samples along one ray, ordered by depth.
struct RaySamples {
  std::vector<Eigen::Vector3d> positions;
  std::vector<double> sigmas;  // densities, >= 0
  std::vector<double> deltas;  // spacings, > 0

  void validate() const;
};

/// w_i = T_i (1 - exp(-sigma_i delta_i)), T_i = exp(-sum_{j<i} sigma_j delta_j).
std::vector<double> volume_weights(const RaySamples& s);

enum class DensitySource { kSource, kTarget };

struct IntegrateOptions {
  bool normalize_weights = true;
  DensitySource density_source = DensitySource::kSource;
  /// Required for kTarget: density of a warped point at the target time.
  std::function<double(const Eigen::Vector3d&)> target_density;
};

/// Warps every sample to t2, takes the volume-rendering expectation and
/// projects it with cam2. Throws kVacuumRay when the weights sum to <= 1e-6.
Eigen::Vector2d warp_integrate_project(const RaySamples& s, const WarpField& warp, double t1,
                                       double t2, const geom::Camera& cam2,
                                       const IntegrateOptions& options = {});

struct BroydenResult {
  Eigen::Vector3d x;
  int iterations = 0;
  double residual = 0.0;
};

struct BroydenOptions {
  double tol = 1e-6;
  int max_iter = 50;
  int max_halvings = 10;
};

/// Solves inverse_warp(x) = target for x with Broyden's good method
/// (inverse-Jacobian form, initial estimate identity). `init` defaults to
/// the target. Throws kNonConvergence after max_iter.
BroydenResult broyden_invert_warp(
    const std::function<Eigen::Vector3d(const Eigen::Vector3d&)>& inverse_warp,
    const Eigen::Vector3d& target, std::optional<Eigen::Vector3d> init = std::nullopt,
    const BroydenOptions& options = {});

/// One-step 3D flow: position at t -> position at t+1, or nullopt outside
/// the evaluator's domain.
using StepFlow = std::function<std::optional<Eigen::Vector3d>(const Eigen::Vector3d&)>;

/// W_{t2-1->t2}( ... W_{t1->t1+1}(x)). flows[t] maps step t to t+1.
Eigen::Vector3d chain_scene_flow(std::span<const StepFlow> flows, const Eigen::Vector3d& x, int t1,
                                 int t2);

/// Regular lattice of displacement vectors; evaluates x + trilinear(disp).
class GridFlow {
 public:
  GridFlow(Eigen::Vector3d origin, Eigen::Vector3d spacing, Eigen::Vector3i dims,
           std::vector<Eigen::Vector3d> displacement);

  std::optional<Eigen::Vector3d> operator()(const Eigen::Vector3d& x) const;

  const Eigen::Vector3d& origin() const { return origin_; }
  const Eigen::Vector3d& spacing() const { return spacing_; }
  const Eigen::Vector3i& dims() const { return dims_; }
  const std::vector<Eigen::Vector3d>& displacement() const { return disp_; }

  const Eigen::Vector3d& node(int i, int j, int k) const {
    return disp_[(static_cast<std::size_t>(k) * dims_.y() + j) * dims_.x() + i];
  }

 private:
  Eigen::Vector3d origin_;
  Eigen::Vector3d spacing_;
  Eigen::Vector3i dims_;
  std::vector<Eigen::Vector3d> disp_;
};

}  // namespace monocheck::warp
