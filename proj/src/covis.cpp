#include "monocheck/covis.hpp"

#include <algorithm>
#include <cmath>

#include "monocheck/error.hpp"
#include "monocheck/parallel.hpp"

namespace monocheck::covis {

CovisibilityHeatmap covisibility_heatmap(std::span<const FlowPair> test_to_train,
                                         unsigned threads) {
  if (test_to_train.empty())
    throw Error(ErrorCode::kInvalidArgument, "covisibility_heatmap: no training frames");
  const int w = test_to_train.front().first.width;
  const int h = test_to_train.front().first.height;
  for (const auto& [fwd, bwd] : test_to_train) {
    require_same_size(w, h, fwd.width, fwd.height, "covisibility_heatmap");
    require_same_size(w, h, bwd.width, bwd.height, "covisibility_heatmap");
  }

  std::vector<flow::OcclusionMask> occlusions(test_to_train.size());
  parallel_for(test_to_train.size(), threads, [&](std::size_t i) {
    occlusions[i] = flow::occlusion_mask(test_to_train[i].first, test_to_train[i].second);
  });

  CovisibilityHeatmap out;
  out.width = w;
  out.height = h;
  out.n_train = static_cast<int>(test_to_train.size());
  out.counts.assign(static_cast<std::size_t>(w) * h, 0);
  for (const auto& occ : occlusions)
    for (std::size_t i = 0; i < occ.data.size(); ++i) out.counts[i] += occ.data[i] ? 0 : 1;
  return out;
}

int covisibility_threshold(int n_train, const BetaParams& params) {
  if (n_train < 1)
    throw Error(ErrorCode::kInvalidArgument, "covisibility_threshold: n_train must be >= 1");
  // The epsilon keeps products such as 0.1 * 70 from rounding one ulp up.
  const int frac = static_cast<int>(std::ceil(params.beta_frac * n_train - 1e-9));
  return std::max(params.beta_min, frac);
}

CovisibilityMask covisibility_mask(const CovisibilityHeatmap& h, const BetaParams& params) {
  CovisibilityMask out;
  out.beta = covisibility_threshold(h.n_train, params);
  out.mask = Mask(h.width, h.height, false);
  for (std::size_t i = 0; i < h.counts.size(); ++i) out.mask.data[i] = h.counts[i] >= out.beta;
  return out;
}

}  // namespace monocheck::covis
