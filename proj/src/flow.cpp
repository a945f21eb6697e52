#include "monocheck/flow.hpp"

#include <cmath>

namespace monocheck::flow {

Eigen::Vector2d sample_flow(const FlowField& field, const Eigen::Vector2d& uv) {
  if (!field.contains(uv))
    throw Error(ErrorCode::kOutOfRange, "sample_flow: coordinate outside the flow field");
  const int u0 = std::min(static_cast<int>(std::floor(uv.x())), std::max(field.width - 2, 0));
  const int v0 = std::min(static_cast<int>(std::floor(uv.y())), std::max(field.height - 2, 0));
  const int u1 = std::min(u0 + 1, field.width - 1);
  const int v1 = std::min(v0 + 1, field.height - 1);
  const double fu = uv.x() - u0;
  const double fv = uv.y() - v0;
  // Exact at integer coordinates: the zero-weight terms are skipped.
  Eigen::Vector2d out = Eigen::Vector2d::Zero();
  const auto add = [&](int u, int v, double w) {
    if (w != 0.0) out += w * field.at(u, v);
  };
  add(u0, v0, (1.0 - fu) * (1.0 - fv));
  add(u1, v0, fu * (1.0 - fv));
  add(u0, v1, (1.0 - fu) * fv);
  add(u1, v1, fu * fv);
  return out;
}

bool is_consistent(const FlowField& fwd, const FlowField& bwd, int u, int v) {
  const Eigen::Vector2d& f = fwd.at(u, v);
  const Eigen::Vector2d target = Eigen::Vector2d(u, v) + f;
  if (!bwd.contains(target)) return false;
  const Eigen::Vector2d b = sample_flow(bwd, target);
  const double lhs = (f + b).squaredNorm();
  const double rhs = 0.01 * (f.squaredNorm() + b.squaredNorm()) + 0.5;
  return lhs < rhs;
}

OcclusionMask occlusion_mask(const FlowField& fwd, const FlowField& bwd) {
  require_same_size(fwd.width, fwd.height, bwd.width, bwd.height, "occlusion_mask");
  OcclusionMask mask(fwd.width, fwd.height, false);
  for (int v = 0; v < fwd.height; ++v)
    for (int u = 0; u < fwd.width; ++u) mask.set(u, v, !is_consistent(fwd, bwd, u, v));
  return mask;
}

}  // namespace monocheck::flow
