#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hurricane/backbone.hpp"
#include "hurricane/ops_catalog.hpp"

namespace hurricane {

/// Per-(layer, operator) latency in milliseconds for one hardware target.
/// Layers are 1-based.
struct LatencyTable {
  using Key = std::pair<int, std::string>;

  std::string hardware;
  std::map<Key, double> entries;
  std::string source = "measured";  // measured | synthetic
  std::optional<std::uint64_t> seed;

  std::optional<double> find(int layer, const std::string& op_id) const;
  /// Throws MissingLatency.
  double at(int layer, const std::string& op_id) const;
  void insert(int layer, const std::string& op_id, double latency_ms);

  friend bool operator==(const LatencyTable&, const LatencyTable&) = default;
};

/// CSV `hardware,layer,operator,latency_ms`.
LatencyTable parse_latency_csv(std::istream& in);
LatencyTable load_latency_table(const std::filesystem::path& path);
void write_latency_csv(std::ostream& out, const LatencyTable& table);
void save_latency_table(const std::filesystem::path& path, const LatencyTable& table);

enum class HardwareKind { DSP, CPU, VPU, Custom };

std::string_view to_string(HardwareKind kind);
HardwareKind parse_hardware_kind(std::string_view name);

/// Coefficients of the synthetic latency rule
///   base * (w_f * flops + w_m[family] * mem_bytes) * kernel_penalty[k] * se_penalty * (1 + jitter).
struct CostRules {
  std::string name;
  double base_ms = 1e-6;
  double flops_weight = 1.0;
  std::array<double, 4> memory_weight{};       // indexed by Family
  std::array<double, 3> kernel_penalty{1, 1, 1};  // k = 3, 5, 7
  double se_penalty = 1.0;
  double jitter = 0.03;                         // uniform in [-jitter, +jitter]
};

/// Built-in rule sets for DSP, CPU and VPU.
CostRules builtin_rules(HardwareKind kind);

LatencyTable synth_profile(const CostRules& rules, const Backbone& backbone,
                           const std::vector<OperatorSpec>& pool, std::uint64_t seed);
LatencyTable synth_profile(HardwareKind kind, const Backbone& backbone,
                           const std::vector<OperatorSpec>& pool, std::uint64_t seed);

/// Every (layer, operator) pair missing from `table`, in layer-then-pool order.
std::vector<LatencyTable::Key> coverage_check(const LatencyTable& table, const Backbone& backbone,
                                              const std::vector<OperatorSpec>& pool);

}  // namespace hurricane
