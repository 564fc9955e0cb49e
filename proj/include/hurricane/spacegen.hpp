#pragma once

#include <vector>

#include "hurricane/backbone.hpp"
#include "hurricane/hw_profiles.hpp"

namespace hurricane {

struct SpaceGenConfig {
  double alpha = 1.0;
  int p = 4;
  std::vector<int> explore_layers{17, 18, 19, 20};  // 1-based
  double kappa = 2.0;
};

/// Last `count` layers of an n-layer backbone, 1-based.
std::vector<int> last_layers(int n, int count);

/// (flops * params)^alpha / latency.
double score_value(double flops, double params, double latency_ms, double alpha);

/// Hardware score of `op` at 1-based `layer`. Throws MissingLatency.
double score(const OperatorSpec& op, int layer, const LatencyTable& table, const LayerContext& ctx,
             double alpha);

/// The whole pool sorted by descending score; equal scores fall back to ascending id.
std::vector<OperatorSpec> rank_layer(int layer, const std::vector<OperatorSpec>& pool,
                                     const LatencyTable& table, const LayerContext& ctx,
                                     double alpha);

/// Top-p per layer, plus one high-capacity exploring operator on the
/// configured layers when one fits under kappa times the slowest selected latency.
SearchSpace generate_space(const Backbone& backbone, const std::vector<OperatorSpec>& pool,
                           const LatencyTable& table, const SpaceGenConfig& cfg);

}  // namespace hurricane
