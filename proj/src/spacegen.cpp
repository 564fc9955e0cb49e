#include "hurricane/spacegen.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hurricane/errors.hpp"

namespace hurricane {

std::vector<int> last_layers(int n, int count) {
  std::vector<int> out;
  for (int layer = std::max(1, n - count + 1); layer <= n; ++layer) out.push_back(layer);
  return out;
}

double score_value(double flops, double params, double latency_ms, double alpha) {
  return std::pow(flops * params, alpha) / latency_ms;
}

double score(const OperatorSpec& op, int layer, const LatencyTable& table, const LayerContext& ctx,
             double alpha) {
  const double latency = table.at(layer, op.id());
  return score_value(static_cast<double>(flops_of(op, ctx)), static_cast<double>(params_of(op, ctx)),
                     latency, alpha);
}

std::vector<OperatorSpec> rank_layer(int layer, const std::vector<OperatorSpec>& pool,
                                     const LatencyTable& table, const LayerContext& ctx,
                                     double alpha) {
  struct Scored {
    double score;
    std::string id;
    OperatorSpec op;
  };
  std::vector<Scored> scored;
  scored.reserve(pool.size());
  for (const auto& op : pool) scored.push_back({score(op, layer, table, ctx, alpha), op.id(), op});
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  std::vector<OperatorSpec> ranked;
  ranked.reserve(scored.size());
  for (auto& s : scored) ranked.push_back(s.op);
  return ranked;
}

SearchSpace generate_space(const Backbone& backbone, const std::vector<OperatorSpec>& pool,
                           const LatencyTable& table, const SpaceGenConfig& cfg) {
  if (cfg.alpha < 0.0 || !std::isfinite(cfg.alpha)) {
    throw Error(ErrorCode::InvalidConfig, "alpha must be non-negative");
  }
  if (cfg.p < 1) throw Error(ErrorCode::InvalidConfig, "p must be at least 1");
  if (cfg.kappa <= 0.0) throw Error(ErrorCode::InvalidConfig, "kappa must be positive");
  const int n = backbone.n_layers();
  const std::set<int> explore(cfg.explore_layers.begin(), cfg.explore_layers.end());
  for (const int layer : explore) {
    if (layer < 1 || layer > n) {
      throw Error(ErrorCode::InvalidConfig, "explore layer out of range", layer);
    }
  }
  if (const auto missing = coverage_check(table, backbone, pool); !missing.empty()) {
    const auto& [layer, id] = missing.front();
    throw Error(ErrorCode::MissingLatency,
                "no latency for (layer " + std::to_string(layer) + ", " + id + "); " +
                    std::to_string(missing.size()) + " pair(s) missing",
                layer);
  }

  std::vector<std::vector<OperatorSpec>> candidates(n);
  std::vector<std::optional<std::string>> exploring(n);
  for (int i = 0; i < n; ++i) {
    const int layer = i + 1;
    const auto& ctx = backbone.contexts[i];
    auto ranked = rank_layer(layer, pool, table, ctx, cfg.alpha);
    const auto keep = std::min<std::size_t>(static_cast<std::size_t>(cfg.p), ranked.size());
    candidates[i].assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep));
    if (!explore.contains(layer)) continue;

    double slowest = 0.0;
    for (const auto& op : candidates[i]) slowest = std::max(slowest, table.at(layer, op.id()));
    const double cap = cfg.kappa * slowest;
    const OperatorSpec* best = nullptr;
    double best_capacity = -1.0;
    std::string best_id;
    for (auto it = ranked.begin() + static_cast<std::ptrdiff_t>(keep); it != ranked.end(); ++it) {
      const auto id = it->id();
      if (table.at(layer, id) > cap) continue;
      const double capacity =
          static_cast<double>(flops_of(*it, ctx)) * static_cast<double>(params_of(*it, ctx));
      if (capacity > best_capacity || (capacity == best_capacity && id < best_id)) {
        best = &*it;
        best_capacity = capacity;
        best_id = id;
      }
    }
    if (best) {
      candidates[i].push_back(*best);
      exploring[i] = best_id;
    }
  }

  SpaceProvenance prov{table.hardware, cfg.alpha, cfg.p,
                       std::vector<int>(explore.begin(), explore.end()), cfg.kappa};
  return make_space(backbone, std::move(candidates), std::move(prov), std::move(exploring));
}

}  // namespace hurricane
