#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hurricane/backbone.hpp"
#include "hurricane/latency_model.hpp"

namespace hurricane {

struct EvaluatorCapabilities {
  bool concurrent_safe = false;
};

/// Accuracy oracle. `prepare` binds a search space (supernet training happens
/// here for real evaluators); `evaluate` must then be deterministic.
class Evaluator {
 public:
  virtual ~Evaluator() = default;

  virtual EvaluatorCapabilities capabilities() const = 0;
  virtual void prepare(const SearchSpace& space) = 0;
  /// Accuracy in [0, 1] for `arch` expressed in the prepared space.
  virtual double evaluate(const Architecture& arch) const = 0;
  virtual std::string describe() const = 0;
};

struct SynthOracleConfig {
  std::uint64_t seed = 0;
  double rho = 0.8;       // layer weight decay towards the input
  double epsilon = 0.05;  // adjacent-layer interaction amplitude
};

/// Tabular fitness with layer-importance structure:
///   clamp(sum_i w_i q(i, op_i) + sum_i pair(i, op_i, op_{i+1}), 0, 1)
/// with w_i proportional to rho^(n-i), normalized to sum to 1, and unary /
/// pairwise terms hashed from (seed, layer, operator ids). Keyed by operator
/// id, so the same full architecture scores identically in restricted spaces.
class SynthOracle final : public Evaluator {
 public:
  explicit SynthOracle(SynthOracleConfig config = {});

  EvaluatorCapabilities capabilities() const override { return {true}; }
  void prepare(const SearchSpace& space) override;
  double evaluate(const Architecture& arch) const override;
  std::string describe() const override;

  const SynthOracleConfig& config() const { return config_; }
  /// Normalized per-layer weights of the prepared space.
  const std::vector<double>& layer_weights() const { return weights_; }
  /// Unary quality q(layer, op) in [0, 1]; `layer` is 1-based.
  double unary(int layer, const std::string& op_id) const;
  /// Interaction between layers `layer` and `layer + 1`, in [-1, 1] before scaling.
  double pair(int layer, const std::string& left, const std::string& right) const;

 private:
  SynthOracleConfig config_;
  std::optional<SearchSpace> space_;
  std::vector<double> weights_;
  std::vector<std::vector<std::string>> ids_;
  std::vector<std::vector<double>> unary_;
  std::vector<std::vector<double>> pair_;  // row-major [left][right] per adjacent layer pair
};

/// Looks accuracies up in a CSV `choices,accuracy` table where choices are
/// semicolon-joined operator ids.
class FileOracle final : public Evaluator {
 public:
  explicit FileOracle(std::map<std::string, double> table);
  static FileOracle parse(std::istream& in);
  static FileOracle load(const std::filesystem::path& path);

  EvaluatorCapabilities capabilities() const override { return {true}; }
  void prepare(const SearchSpace& space) override;
  double evaluate(const Architecture& arch) const override;
  std::string describe() const override;

  std::size_t size() const { return table_.size(); }

 private:
  std::map<std::string, double> table_;
  std::optional<SearchSpace> space_;
};

std::string join_ids(const std::vector<std::string>& ids);

/// Builds an evaluator from a spec string: `synth:seed=7[,rho=0.8][,eps=0.05]` or `file:path.csv`.
std::unique_ptr<Evaluator> make_evaluator(const std::string& spec);

struct BruteForceResult {
  Architecture best;
  double accuracy = 0.0;
  double latency_ms = 0.0;
  std::uint64_t feasible = 0;
  std::uint64_t enumerated = 0;
};

inline constexpr std::uint64_t kBruteForceLimit = 1'000'000;

/// Exhaustive constrained argmax. Ties go to the lexicographically smallest
/// choices. Throws SpaceTooLarge or InfeasibleConstraint. `evaluator` must be
/// prepared on `space`.
BruteForceResult brute_force_best(const SearchSpace& space, const Evaluator& evaluator,
                                  const LatencyFn& latency, double tau_c);

}  // namespace hurricane
