#include "monocheck/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "monocheck/error.hpp"

namespace monocheck::metrics {

namespace {

void check_shapes(const ImageFrame& pred, const ImageFrame& gt, const Mask& mask,
                  const char* what) {
  require_same_size(pred.width, pred.height, gt.width, gt.height, what);
  require_same_size(pred.width, pred.height, mask.width, mask.height, what);
  if (mask.count() == 0) throw Error(ErrorCode::kEmptyMask, std::string(what) + ": empty mask");
}

std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> k(static_cast<std::size_t>(size));
  const double c = (size - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    k[i] = std::exp(-(i - c) * (i - c) / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (auto& x : k) x /= sum;
  return k;
}

/// Valid-mode separable filter: output (w - n + 1) x (h - n + 1).
std::vector<double> filter_valid(const std::vector<double>& img, int w, int h,
                                 const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  const int ow = w - n + 1;
  const int oh = h - n + 1;
  std::vector<double> rows(static_cast<std::size_t>(ow) * h);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < ow; ++u) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += k[i] * img[static_cast<std::size_t>(v) * w + u + i];
      rows[static_cast<std::size_t>(v) * ow + u] = s;
    }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int v = 0; v < oh; ++v)
    for (int u = 0; u < ow; ++u) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += k[i] * rows[static_cast<std::size_t>(v + i) * ow + u];
      out[static_cast<std::size_t>(v) * ow + u] = s;
    }
  return out;
}

}  // namespace

double masked_psnr(const ImageFrame& pred, const ImageFrame& gt, const Mask& mask) {
  check_shapes(pred, gt, mask, "masked_psnr");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t p = 0; p < mask.data.size(); ++p) {
    if (!mask.data[p]) continue;
    for (int c = 0; c < ImageFrame::kChannels; ++c) {
      const double d = pred.data[p * ImageFrame::kChannels + c] - gt.data[p * ImageFrame::kChannels + c];
      sum += d * d;
    }
    n += ImageFrame::kChannels;
  }
  const double mse = sum / static_cast<double>(n);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(mse);
}

double masked_ssim(const ImageFrame& pred, const ImageFrame& gt, const Mask& mask,
                   const SsimParams& params) {
  check_shapes(pred, gt, mask, "masked_ssim");
  const int w = pred.width;
  const int h = pred.height;
  const int n = params.window;
  const int half = n / 2;
  if (w < n || h < n)
    throw Error(ErrorCode::kEmptyMask, "masked_ssim: image smaller than the SSIM window");
  const auto kernel = gaussian_kernel(n, params.sigma);
  const double c1 = params.k1 * params.k1;
  const double c2 = params.k2 * params.k2;
  const int ow = w - n + 1;
  const int oh = h - n + 1;

  const std::size_t npx = static_cast<std::size_t>(w) * h;
  std::vector<double> m(npx);
  for (std::size_t p = 0; p < npx; ++p) m[p] = mask.data[p] ? 1.0 : 0.0;
  const auto weight = filter_valid(m, w, h, kernel);

  double total = 0.0;
  std::size_t count = 0;
  std::vector<double> mx(npx), my(npx), mxx(npx), myy(npx), mxy(npx);
  for (int c = 0; c < ImageFrame::kChannels; ++c) {
    for (std::size_t p = 0; p < npx; ++p) {
      const double x = pred.data[p * ImageFrame::kChannels + c];
      const double y = gt.data[p * ImageFrame::kChannels + c];
      mx[p] = m[p] * x;
      my[p] = m[p] * y;
      mxx[p] = m[p] * x * x;
      myy[p] = m[p] * y * y;
      mxy[p] = m[p] * x * y;
    }
    const auto sx = filter_valid(mx, w, h, kernel);
    const auto sy = filter_valid(my, w, h, kernel);
    const auto sxx = filter_valid(mxx, w, h, kernel);
    const auto syy = filter_valid(myy, w, h, kernel);
    const auto sxy = filter_valid(mxy, w, h, kernel);
    for (int v = 0; v < oh; ++v) {
      for (int u = 0; u < ow; ++u) {
        if (!mask(u + half, v + half)) continue;
        const std::size_t q = static_cast<std::size_t>(v) * ow + u;
        const double wsum = weight[q];
        if (!(wsum > 0.0)) continue;
        const double mu_x = sx[q] / wsum;
        const double mu_y = sy[q] / wsum;
        const double var_x = sxx[q] / wsum - mu_x * mu_x;
        const double var_y = syy[q] / wsum - mu_y * mu_y;
        const double cov = sxy[q] / wsum - mu_x * mu_y;
        const double num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2);
        const double den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2);
        total += num / den;
        ++count;
      }
    }
  }
  if (count == 0)
    throw Error(ErrorCode::kEmptyMask, "masked_ssim: no masked pixel has a full window");
  return total / static_cast<double>(count);
}

Mask downsample_mask(const Mask& mask, int width, int height) {
  if (width <= 0 || height <= 0 || mask.width % width != 0 || mask.height % height != 0)
    throw Error(ErrorCode::kDimensionMismatch,
                "downsample_mask: target size must divide the mask size by an integer factor");
  const int fx = mask.width / width;
  const int fy = mask.height / height;
  Mask out(width, height, false);
  for (int v = 0; v < height; ++v)
    for (int u = 0; u < width; ++u) {
      int on = 0;
      for (int dv = 0; dv < fy; ++dv)
        for (int du = 0; du < fx; ++du) on += mask(u * fx + du, v * fy + dv) ? 1 : 0;
      out.set(u, v, 2 * on > fx * fy);
    }
  return out;
}

double masked_lpips_aggregate(std::span<const DistanceMap> maps, const Mask& mask) {
  if (maps.empty()) throw Error(ErrorCode::kInvalidArgument, "masked_lpips_aggregate: no maps");
  double total = 0.0;
  for (const auto& map : maps) {
    if (map.data.size() != static_cast<std::size_t>(map.width) * map.height)
      throw Error(ErrorCode::kDimensionMismatch, "masked_lpips_aggregate: map size mismatch");
    const Mask small = downsample_mask(mask, map.width, map.height);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < map.data.size(); ++i) {
      if (!small.data[i]) continue;
      sum += map.data[i];
      ++n;
    }
    if (n == 0)
      throw Error(ErrorCode::kEmptyMask, "masked_lpips_aggregate: mask empty after downsampling to " +
                                             std::to_string(map.width) + "x" +
                                             std::to_string(map.height));
    total += sum / static_cast<double>(n);
  }
  return total;
}

PckCounts pck_counts(const KeypointSet& pred, const KeypointSet& gt, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, "pck_transfer: alpha must be in (0, 1]");
  const double threshold = alpha * std::max(gt.width, gt.height);
  std::unordered_map<int, const Keypoint*> by_id;
  for (const auto& k : pred.keypoints) by_id[k.id] = &k;
  PckCounts counts;
  for (const auto& g : gt.keypoints) {
    if (!g.visible) continue;
    ++counts.scored;
    const auto it = by_id.find(g.id);
    if (it == by_id.end() || !it->second->visible) continue;
    if ((it->second->position - g.position).norm() <= threshold) ++counts.correct;
  }
  return counts;
}

double pck_transfer(const KeypointSet& pred, const KeypointSet& gt, double alpha) {
  const auto counts = pck_counts(pred, gt, alpha);
  if (counts.scored == 0)
    throw Error(ErrorCode::kEmptyStatistics, "pck_transfer: no visible ground-truth keypoints");
  return static_cast<double>(counts.correct) / static_cast<double>(counts.scored);
}

}  // namespace monocheck::metrics
