#pragma once

#include <span>
#include <utility>
#include <vector>

#include "monocheck/flow.hpp"
#include "monocheck/raster.hpp"

namespace monocheck::covis {

/// Per test pixel, the number of training frames it is seen in.
struct CovisibilityHeatmap {
  int width = 0;
  int height = 0;
  std::vector<int> counts;
  int n_train = 0;

  int at(int u, int v) const { return counts[static_cast<std::size_t>(v) * width + u]; }
};

/// True = evaluate this pixel.
struct CovisibilityMask {
  Mask mask;
  int beta = 0;
};

/// fwd: test -> train frame, bwd: train -> test frame.
using FlowPair = std::pair<flow::FlowField, flow::FlowField>;

CovisibilityHeatmap covisibility_heatmap(std::span<const FlowPair> test_to_train,
                                         unsigned threads = 1);

struct BetaParams {
  int beta_min = 5;
  double beta_frac = 0.1;
};

/// beta = max(beta_min, ceil(beta_frac * n_train)).
int covisibility_threshold(int n_train, const BetaParams& params = {});

CovisibilityMask covisibility_mask(const CovisibilityHeatmap& h, const BetaParams& params = {});

}  // namespace monocheck::covis
