#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hurricane/backbone.hpp"
#include "hurricane/errors.hpp"
#include "hurricane/evaluator.hpp"
#include "hurricane/latency_model.hpp"
#include "hurricane/random.hpp"

namespace hurricane {

struct EvolutionConfig {
  int population = 50;
  int iterations = 20;
  int parents_topk = 10;
  int n_crossover = 25;
  int n_mutation = 25;
  double mutation_prob = 0.1;
  int max_sample_attempts = 1000;
  std::uint64_t seed = 0;
  /// Cap on unique evaluations; 0 means population * iterations.
  int max_evaluations = 0;
  /// Worker threads for evaluation; 0 = hardware concurrency, 1 = serial.
  int threads = 1;

  int budget() const { return max_evaluations > 0 ? max_evaluations : population * iterations; }
};

/// Throws InvalidConfig when the fields are inconsistent.
void validate(const EvolutionConfig& cfg);

struct IterationRecord {
  int stage = 1;
  int iteration = 1;  // 1-based within the stage
  double best_accuracy = 0.0;  // best seen so far in the stage
  double mean_accuracy = 0.0;  // over this iteration's population
  int population = 0;
  int new_evaluations = 0;
};

struct StageSummary {
  int stage = 1;
  int first_layer = 1;  // active layers, 1-based inclusive
  int last_layer = 0;
  std::string space_size;
  int evaluations = 0;
  int budget = 0;
  std::vector<std::string> winner;
};

enum class SearchMode { Single, TwoStage, TwoStageDegenerate };

std::string_view to_string(SearchMode mode);
SearchMode parse_search_mode(std::string_view name);

struct SearchReport {
  SearchMode mode = SearchMode::Single;
  Architecture best;
  std::vector<std::string> best_ids;  // operator per layer
  double best_accuracy = 0.0;
  double best_latency = 0.0;           // under the rejection latency function
  std::optional<double> audit_latency; // additive-table latency when the predictor gated the search
  double tau_c = 0.0;
  int t = 0;
  std::vector<IterationRecord> history;
  std::vector<StageSummary> stages;
  int evaluations_used = 0;
};

/// Raised when the evaluator fails mid-search; carries what was found so far.
class SearchAborted : public Error {
 public:
  SearchAborted(const std::string& message, SearchReport partial)
      : Error(ErrorCode::EvaluatorFailure, message), partial_(std::move(partial)) {}
  const SearchReport& partial() const { return partial_; }

 private:
  SearchReport partial_;
};

/// Rank-1 candidate at every layer.
Architecture init_winning(const SearchSpace& space);

/// Layers outside [first, last] (1-based, inclusive; empty when first > last)
/// collapse onto the winner's operator; active layers keep their candidates.
SearchSpace restrict_space(const SearchSpace& space, int first_active, int last_active,
                           const Architecture& winner);

/// Uniform per-layer draws, rejected until latency <= tau_c. Throws
/// InfeasibleConstraint after `max_attempts` consecutive rejections.
Architecture sample_constrained(const SearchSpace& space, const LatencyFn& latency, double tau_c,
                                Rng& rng, int max_attempts = 1000);

/// Evolutionary search: top-k parents, per-layer crossover and mutation,
/// fresh constrained samples for the remainder; evaluator calls memoized.
/// `evaluator` is (re)prepared on `space`.
SearchReport evolve(const SearchSpace& space, Evaluator& evaluator, const LatencyFn& latency,
                    double tau_c, const EvolutionConfig& cfg);

struct SearchRequest {
  SearchSpace space;
  double tau_c = 0.0;
  LatencyFn latency;
  /// Optional audit latency recorded alongside the gating latency.
  LatencyFn audit_latency;
  bool two_stage = true;
  int t = 8;
  /// Divide one budget across stages in proportion to log(space size).
  bool split_budget = false;
};

/// Later layers first (earlier ones pinned to rank-1), then the earlier
/// layers with the later ones pinned to the stage-1 winner. t = 0 (or
/// two_stage = false) runs one full-space search.
SearchReport two_stage_search(const SearchRequest& request, Evaluator& evaluator,
                              const EvolutionConfig& cfg);

}  // namespace hurricane
