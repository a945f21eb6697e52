#include "monocheck/depth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "monocheck/error.hpp"
#include "monocheck/random.hpp"

namespace monocheck::depth {

std::size_t DepthMap::valid_count() const {
  return static_cast<std::size_t>(
      std::count_if(data.begin(), data.end(), [](double z) { return z > 0.0; }));
}

std::optional<double> sample_depth(const DepthMap& d, const Eigen::Vector2d& uv) {
  if (!(uv.x() >= 0.0 && uv.y() >= 0.0 && uv.x() <= d.width - 1.0 && uv.y() <= d.height - 1.0))
    return std::nullopt;
  const int u0 = std::min(static_cast<int>(std::floor(uv.x())), std::max(d.width - 2, 0));
  const int v0 = std::min(static_cast<int>(std::floor(uv.y())), std::max(d.height - 2, 0));
  const int u1 = std::min(u0 + 1, d.width - 1);
  const int v1 = std::min(v0 + 1, d.height - 1);
  const double fu = uv.x() - u0;
  const double fv = uv.y() - v0;
  double inv = 0.0;
  const auto add = [&](int u, int v, double w) {
    if (w == 0.0) return true;
    const double z = d.at(u, v);
    if (!(z > 0.0)) return false;
    inv += w / z;
    return true;
  };
  if (!add(u0, v0, (1.0 - fu) * (1.0 - fv)) || !add(u1, v0, fu * (1.0 - fv)) ||
      !add(u0, v1, (1.0 - fu) * fv) || !add(u1, v1, fu * fv))
    return std::nullopt;
  if (!(inv > 0.0)) return std::nullopt;
  return 1.0 / inv;
}

double median_valid_depth(const DepthMap& d) {
  std::vector<double> v;
  v.reserve(d.data.size());
  for (double z : d.data)
    if (z > 0.0) v.push_back(z);
  if (v.empty()) throw Error(ErrorCode::kEmptyStatistics, "median_valid_depth: no valid pixels");
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

DepthMap filter_depth_edges(const DepthMap& d, double grad_threshold) {
  if (!(grad_threshold > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "filter_depth_edges: grad_threshold must be positive");
  const int w = d.width;
  const int h = d.height;
  const auto at = [&](int u, int v) {
    return d.at(std::clamp(u, 0, w - 1), std::clamp(v, 0, h - 1));
  };
  DepthMap out = d;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      bool near_invalid = false;
      for (int dv = -1; dv <= 1 && !near_invalid; ++dv)
        for (int du = -1; du <= 1; ++du)
          if (!(at(u + du, v + dv) > 0.0)) {
            near_invalid = true;
            break;
          }
      if (near_invalid) {
        out.at(u, v) = 0.0;
        continue;
      }
      const double gx = (at(u + 1, v - 1) + 2.0 * at(u + 1, v) + at(u + 1, v + 1)) -
                        (at(u - 1, v - 1) + 2.0 * at(u - 1, v) + at(u - 1, v + 1));
      const double gy = (at(u - 1, v + 1) + 2.0 * at(u, v + 1) + at(u + 1, v + 1)) -
                        (at(u - 1, v - 1) + 2.0 * at(u, v - 1) + at(u + 1, v - 1));
      if (std::sqrt(gx * gx + gy * gy) > grad_threshold) out.at(u, v) = 0.0;
    }
  }
  return out;
}

namespace {

struct DisparityPair {
  double predicted;
  double metric;
};

struct Line {
  double a;
  double b;
};

std::vector<std::size_t> inliers_of(const std::vector<DisparityPair>& pairs, const Line& line,
                                    double tol) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (std::abs(pairs[i].metric - (line.a * pairs[i].predicted + line.b)) <= tol) out.push_back(i);
  return out;
}

std::optional<Line> least_squares_line(const std::vector<DisparityPair>& pairs,
                                       const std::vector<std::size_t>& idx) {
  const double n = static_cast<double>(idx.size());
  double mx = 0.0, my = 0.0;
  for (auto i : idx) {
    mx += pairs[i].predicted;
    my += pairs[i].metric;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (auto i : idx) {
    const double dx = pairs[i].predicted - mx;
    sxx += dx * dx;
    sxy += dx * (pairs[i].metric - my);
  }
  if (!(sxx > 0.0)) return std::nullopt;
  const double a = sxy / sxx;
  return Line{a, my - a * mx};
}

}  // namespace

DisparityAlignment fit_disparity_alignment(const DepthMap& pred, const SparseAnchorSet& anchors,
                                           const geom::Camera& cam, const RansacParams& params) {
  std::vector<DisparityPair> pairs;
  for (const auto& anchor : anchors.points) {
    const Eigen::Vector3d xc = cam.orientation * (anchor.world_position - cam.position);
    if (!(xc.z() > 1e-12)) continue;
    const Eigen::Vector2d px = geom::project_camera_point(cam, xc);
    const auto z_pred = sample_depth(pred, px);
    if (!z_pred) continue;
    pairs.push_back({1.0 / *z_pred, 1.0 / xc.z()});
  }
  if (pairs.size() < 2)
    throw Error(ErrorCode::kTooFewPoints,
                "fit_disparity_alignment: fewer than 2 anchors with valid predicted depth");

  double tol = 0.0;
  if (params.inlier_tol) {
    tol = *params.inlier_tol;
  } else {
    std::vector<double> metric;
    for (const auto& p : pairs) metric.push_back(p.metric);
    const auto mid = metric.begin() + static_cast<std::ptrdiff_t>(metric.size() / 2);
    std::nth_element(metric.begin(), mid, metric.end());
    tol = 0.05 * *mid;
  }
  if (!(tol > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "fit_disparity_alignment: inlier_tol must be positive");

  const auto [min_it, max_it] = std::minmax_element(
      pairs.begin(), pairs.end(),
      [](const auto& l, const auto& r) { return l.predicted < r.predicted; });
  const double spread_eps = 1e-12 * std::max(std::abs(min_it->predicted), std::abs(max_it->predicted));
  if (max_it->predicted - min_it->predicted <= spread_eps)
    throw Error(ErrorCode::kDegenerateSample,
                "fit_disparity_alignment: all predicted disparities are identical");

  std::vector<std::size_t> best;
  std::uniform_int_distribution<std::size_t> pick(0, pairs.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_other(0, pairs.size() - 2);
  for (int it = 0; it < params.iters; ++it) {
    auto rng = stream_for(params.seed, static_cast<std::uint64_t>(it));
    const std::size_t i0 = pick(rng);
    std::size_t i1 = pick_other(rng);
    if (i1 >= i0) ++i1;
    const double dx = pairs[i1].predicted - pairs[i0].predicted;
    if (std::abs(dx) <= spread_eps) continue;
    const double a = (pairs[i1].metric - pairs[i0].metric) / dx;
    const Line line{a, pairs[i0].metric - a * pairs[i0].predicted};
    auto inl = inliers_of(pairs, line, tol);
    if (inl.size() > best.size()) best = std::move(inl);
  }
  if (best.empty())
    throw Error(ErrorCode::kDegenerateSample, "fit_disparity_alignment: every sample was degenerate");

  const auto refit = least_squares_line(pairs, best);
  if (!refit)
    throw Error(ErrorCode::kDegenerateSample, "fit_disparity_alignment: degenerate inlier set");
  auto final_inliers = inliers_of(pairs, *refit, tol);

  DisparityAlignment out;
  out.scale = refit->a;
  out.shift = refit->b;
  out.inlier_count = static_cast<int>(final_inliers.size());
  out.inlier_ratio = static_cast<double>(final_inliers.size()) / static_cast<double>(pairs.size());
  if (out.inlier_ratio < 0.2)
    throw Error(ErrorCode::kNoConsensus, "fit_disparity_alignment: inlier ratio below 0.2");
  return out;
}

DepthMap apply_disparity_alignment(const DepthMap& pred, const DisparityAlignment& align) {
  DepthMap out(pred.width, pred.height, 0.0);
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    const double z = pred.data[i];
    if (!(z > 0.0)) continue;
    const double disparity = align.scale / z + align.shift;
    const double metric = 1.0 / disparity;
    if (std::isfinite(metric) && metric > 0.0) out.data[i] = metric;
  }
  return out;
}

}  // namespace monocheck::depth
