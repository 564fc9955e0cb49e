#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hurricane {

enum class Family { SEP, MB, Choice, ChoiceX };

std::string_view to_string(Family family);

/// One candidate operator of the pool. Identity is (family, kernel, expansion, se).
struct OperatorSpec {
  Family family = Family::SEP;
  int kernel = 3;
  std::optional<int> expansion;  // MB only
  bool se = false;

  /// Stable identifier such as "SEP_5", "MB_3_6_SE" or "ChoiceX".
  std::string id() const;

  friend bool operator==(const OperatorSpec&, const OperatorSpec&) = default;
};

/// Parses an id produced by OperatorSpec::id(). Throws UnknownOperator.
OperatorSpec parse_operator_id(std::string_view id);

/// Geometry of one learnable layer.
struct LayerContext {
  std::int64_t h_in = 0;
  std::int64_t w_in = 0;
  std::int64_t c_in = 0;
  std::int64_t c_out = 0;
  int stride = 1;

  std::int64_t h_out() const { return h_in / stride; }
  std::int64_t w_out() const { return w_in / stride; }

  friend bool operator==(const LayerContext&, const LayerContext&) = default;
};

struct OpCost {
  std::int64_t flops = 0;  // multiply-adds
  std::int64_t params = 0;
  std::int64_t mem_bytes = 0;

  friend bool operator==(const OpCost&, const OpCost&) = default;
};

/// The 32 candidates, ordered by (family, kernel, expansion, se).
std::vector<OperatorSpec> enumerate_pool();

inline constexpr int kSeReduction = 4;
inline constexpr int kDefaultBytesPerElement = 4;

// Block composition. Every operator is lowered to a flat list of stages; the
// cost functions are folds over that list.

enum class StageKind {
  Depthwise,
  Pointwise,
  GlobalPool,
  FullyConnected,
  ChannelScale,
  Split,
  Concat,
  Shuffle,
  ResidualAdd,
};

/// A single primitive. For Concat, `c_in` is the sum of the merged branch
/// channel counts. Spatial fields describe the stage input.
struct Stage {
  StageKind kind = StageKind::Pointwise;
  std::int64_t c_in = 0;
  std::int64_t c_out = 0;
  std::int64_t h = 0;
  std::int64_t w = 0;
  int kernel = 1;
  int stride = 1;

  std::int64_t flops() const;
  std::int64_t params() const;
  std::int64_t elements_read() const;
  std::int64_t elements_written() const;
};

/// Lowers `op` at `ctx` into its stages. Throws InvalidContext / DegenerateGeometry.
std::vector<Stage> plan_block(const OperatorSpec& op, const LayerContext& ctx);

/// Throws if the context cannot host `op`.
void check_context(const OperatorSpec& op, const LayerContext& ctx);

std::int64_t flops_of(const OperatorSpec& op, const LayerContext& ctx);
std::int64_t params_of(const OperatorSpec& op, const LayerContext& ctx);
std::int64_t memory_access_of(const OperatorSpec& op, const LayerContext& ctx,
                              int bytes_per_element = kDefaultBytesPerElement);
std::int64_t memory_access_of(const std::vector<Stage>& stages,
                              int bytes_per_element = kDefaultBytesPerElement);
OpCost cost_of(const OperatorSpec& op, const LayerContext& ctx,
               int bytes_per_element = kDefaultBytesPerElement);

}  // namespace hurricane
