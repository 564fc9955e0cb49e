#include "hurricane/search_engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <thread>

#include "hurricane/errors.hpp"

namespace hurricane {

void validate(const EvolutionConfig& cfg) {
  if (cfg.population < 1) throw Error(ErrorCode::InvalidConfig, "population must be positive");
  if (cfg.iterations < 1) throw Error(ErrorCode::InvalidConfig, "iterations must be positive");
  if (cfg.parents_topk < 1) throw Error(ErrorCode::InvalidConfig, "parents_topk must be positive");
  if (cfg.n_crossover < 0 || cfg.n_mutation < 0 ||
      cfg.n_crossover + cfg.n_mutation > cfg.population) {
    throw Error(ErrorCode::InvalidConfig, "n_crossover + n_mutation must not exceed population");
  }
  if (cfg.mutation_prob < 0.0 || cfg.mutation_prob > 1.0) {
    throw Error(ErrorCode::InvalidConfig, "mutation_prob must lie in [0, 1]");
  }
  if (cfg.max_sample_attempts < 1) throw Error(ErrorCode::InvalidConfig, "max_sample_attempts must be positive");
  if (cfg.max_evaluations < 0) throw Error(ErrorCode::InvalidConfig, "max_evaluations must be non-negative");
  if (cfg.threads < 0) throw Error(ErrorCode::InvalidConfig, "threads must be non-negative");
}

std::string_view to_string(SearchMode mode) {
  switch (mode) {
    case SearchMode::Single: return "single";
    case SearchMode::TwoStage: return "two-stage";
    case SearchMode::TwoStageDegenerate: return "two-stage-degenerate";
  }
  return "?";
}

SearchMode parse_search_mode(std::string_view name) {
  if (name == "single") return SearchMode::Single;
  if (name == "two-stage") return SearchMode::TwoStage;
  if (name == "two-stage-degenerate") return SearchMode::TwoStageDegenerate;
  throw Error(ErrorCode::ParseError, "unknown search mode '" + std::string(name) + "'");
}

Architecture init_winning(const SearchSpace& space) {
  return Architecture{std::vector<int>(space.candidates.size(), 0)};
}

SearchSpace restrict_space(const SearchSpace& space, int first_active, int last_active,
                           const Architecture& winner) {
  validate_architecture(space, winner);
  auto candidates = space.candidates;
  auto exploring = space.exploring;
  for (int i = 0; i < space.n_layers(); ++i) {
    const int layer = i + 1;
    if (layer >= first_active && layer <= last_active) continue;
    const auto op = space.candidates[i][winner.choices[i]];
    candidates[i] = {op};
    if (exploring[i] && *exploring[i] != op.id()) exploring[i].reset();
  }
  return make_space(space.backbone, std::move(candidates), space.provenance, std::move(exploring));
}

Architecture sample_constrained(const SearchSpace& space, const LatencyFn& latency, double tau_c,
                                Rng& rng, int max_attempts) {
  Architecture arch{std::vector<int>(space.candidates.size(), 0)};
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    for (std::size_t i = 0; i < arch.choices.size(); ++i) {
      arch.choices[i] = rng.index(static_cast<int>(space.candidates[i].size()));
    }
    if (latency(space, arch) <= tau_c) return arch;
  }
  throw Error(ErrorCode::InfeasibleConstraint,
              "no architecture under " + std::to_string(tau_c) + " ms after " +
                  std::to_string(max_attempts) + " samples");
}

namespace {

struct Scored {
  double accuracy;
  Architecture arch;
};

bool better(const Scored& a, const Scored& b) {
  if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
  return a.arch < b.arch;
}

std::vector<double> evaluate_all(const Evaluator& evaluator, const std::vector<Architecture>& batch,
                                 int threads) {
  std::vector<double> out(batch.size());
  int workers = threads == 0 ? static_cast<int>(std::thread::hardware_concurrency()) : threads;
  if (!evaluator.capabilities().concurrent_safe) workers = 1;
  workers = std::clamp(workers, 1, static_cast<int>(std::max<std::size_t>(1, batch.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < batch.size(); ++i) out[i] = evaluator.evaluate(batch[i]);
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < batch.size(); i += workers) out[i] = evaluator.evaluate(batch[i]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace

namespace detail {

SearchReport evolve_seeded(const SearchSpace& space, Evaluator& evaluator, const LatencyFn& latency,
                           double tau_c, const EvolutionConfig& cfg,
                           const std::vector<Architecture>& seeds, int stage) {
  validate(cfg);
  if (!(tau_c > 0.0)) throw Error(ErrorCode::InvalidConfig, "latency constraint must be positive");
  evaluator.prepare(space);
  Rng rng(cfg.seed);
  const int budget = cfg.budget();
  const int n = space.n_layers();

  std::map<Architecture, double> memo;
  std::vector<Scored> ranked;
  SearchReport report;
  report.tau_c = tau_c;

  const auto feasible = [&](const Architecture& a) { return latency(space, a) <= tau_c; };

  for (int iter = 1; iter <= cfg.iterations && static_cast<int>(memo.size()) < budget; ++iter) {
    const auto remaining = static_cast<std::size_t>(
        std::min(cfg.population, budget - static_cast<int>(memo.size())));
    std::vector<Architecture> generation;
    std::set<Architecture> in_generation;
    const auto accept = [&](const Architecture& a) {
      if (generation.size() >= remaining || memo.contains(a) || in_generation.contains(a)) return false;
      if (!feasible(a)) return false;
      generation.push_back(a);
      in_generation.insert(a);
      return true;
    };

    if (iter == 1) {
      for (const auto& s : seeds) {
        validate_architecture(space, s);
        accept(s);
      }
    }

    if (!ranked.empty()) {
      const int k = std::min<int>(cfg.parents_topk, static_cast<int>(ranked.size()));
      int made = 0;
      for (int tries = 0; made < cfg.n_mutation && tries < 10 * cfg.n_mutation; ++tries) {
        Architecture child = ranked[rng.index(k)].arch;
        for (int i = 0; i < n; ++i) {
          if (rng.bernoulli(cfg.mutation_prob)) {
            child.choices[i] = rng.index(static_cast<int>(space.candidates[i].size()));
          }
        }
        if (accept(child)) ++made;
      }
      made = 0;
      for (int tries = 0; made < cfg.n_crossover && tries < 10 * cfg.n_crossover; ++tries) {
        const auto& a = ranked[rng.index(k)].arch;
        const auto& b = ranked[rng.index(k)].arch;
        Architecture child{std::vector<int>(n)};
        for (int i = 0; i < n; ++i) child.choices[i] = rng.bernoulli(0.5) ? a.choices[i] : b.choices[i];
        if (accept(child)) ++made;
      }
    }

    int duplicates = 0;
    while (generation.size() < remaining && duplicates < cfg.max_sample_attempts) {
      const auto fresh = sample_constrained(space, latency, tau_c, rng, cfg.max_sample_attempts);
      if (!accept(fresh)) ++duplicates;
    }
    if (generation.empty()) break;  // every reachable architecture has been evaluated

    std::vector<double> accuracies;
    try {
      accuracies = evaluate_all(evaluator, generation, cfg.threads);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EvaluatorFailure) throw;
      if (!ranked.empty()) {
        report.best = ranked.front().arch;
        report.best_accuracy = ranked.front().accuracy;
        report.best_ids = architecture_ids(space, report.best);
        report.best_latency = latency(space, report.best);
      }
      report.evaluations_used = static_cast<int>(memo.size());
      throw SearchAborted(e.what(), std::move(report));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < generation.size(); ++i) {
      memo.emplace(generation[i], accuracies[i]);
      ranked.push_back({accuracies[i], generation[i]});
      sum += accuracies[i];
    }
    std::sort(ranked.begin(), ranked.end(), better);

    IterationRecord rec;
    rec.stage = stage;
    rec.iteration = iter;
    rec.best_accuracy = ranked.front().accuracy;
    rec.mean_accuracy = sum / static_cast<double>(generation.size());
    rec.population = static_cast<int>(generation.size());
    rec.new_evaluations = rec.population;
    report.history.push_back(rec);
  }

  if (ranked.empty()) {
    throw Error(ErrorCode::InfeasibleConstraint, "search produced no feasible architecture");
  }
  report.best = ranked.front().arch;
  report.best_accuracy = ranked.front().accuracy;
  report.best_ids = architecture_ids(space, report.best);
  report.best_latency = latency(space, report.best);
  report.evaluations_used = static_cast<int>(memo.size());
  return report;
}

}  // namespace detail

SearchReport evolve(const SearchSpace& space, Evaluator& evaluator, const LatencyFn& latency,
                    double tau_c, const EvolutionConfig& cfg) {
  auto report = detail::evolve_seeded(space, evaluator, latency, tau_c, cfg, {}, 1);
  StageSummary st;
  st.stage = 1;
  st.first_layer = 1;
  st.last_layer = space.n_layers();
  st.space_size = space_size(space).str();
  st.evaluations = report.evaluations_used;
  st.budget = cfg.budget();
  st.winner = report.best_ids;
  report.stages.push_back(std::move(st));
  return report;
}

namespace {

EvolutionConfig stage_config(const EvolutionConfig& base, int budget, std::uint64_t seed) {
  EvolutionConfig cfg = base;
  cfg.seed = seed;
  cfg.max_evaluations = std::max(1, budget);
  cfg.iterations = std::max(1, (cfg.max_evaluations + cfg.population - 1) / cfg.population);
  return cfg;
}

double log_size(const SearchSpace& space) {
  double total = 0.0;
  for (const auto& layer : space.candidates) total += std::log(static_cast<double>(layer.size()));
  return total;
}

}  // namespace

SearchReport two_stage_search(const SearchRequest& request, Evaluator& evaluator,
                              const EvolutionConfig& cfg) {
  validate(cfg);
  const auto& space = request.space;
  const int n = space.n_layers();
  if (request.t < 0 || request.t > n) throw Error(ErrorCode::InvalidConfig, "t must lie in [0, n_layers]");
  if (!request.latency) throw Error(ErrorCode::InvalidConfig, "no latency function");

  SearchReport report;
  if (!request.two_stage || request.t == 0) {
    report = evolve(space, evaluator, request.latency, request.tau_c, cfg);
    report.mode = request.two_stage ? SearchMode::TwoStageDegenerate : SearchMode::Single;
    report.t = request.two_stage ? 0 : request.t;
  } else {
    const int t = request.t;
    const auto stage1_space = restrict_space(space, t + 1, n, init_winning(space));
    int budget1 = cfg.budget(), budget2 = cfg.budget();
    if (request.split_budget) {
      const int total = cfg.budget();
      const double w1 = log_size(stage1_space);
      // Stage 2 frees layers 1..t whatever the stage-1 winner is.
      double w2 = 0.0;
      for (int i = 0; i < t; ++i) w2 += std::log(static_cast<double>(space.candidates[i].size()));
      budget1 = w1 + w2 > 0.0 ? static_cast<int>(std::lround(total * w1 / (w1 + w2))) : total;
      budget1 = std::clamp(budget1, 1, std::max(1, total - 1));
      budget2 = std::max(1, total - budget1);
    }
    const auto cfg1 = stage_config(cfg, budget1, cfg.seed);
    SearchReport r1;
    if (t < n) {
      r1 = detail::evolve_seeded(stage1_space, evaluator, request.latency, request.tau_c, cfg1, {}, 1);
    } else {
      // Nothing to search: the rank-1 architecture is handed to stage 2 as is.
      r1.best = init_winning(stage1_space);
      r1.best_ids = architecture_ids(stage1_space, r1.best);
    }
    const auto winner1 = lift_architecture(stage1_space, r1.best, space);

    const auto stage2_space = restrict_space(space, 1, t, winner1);
    const auto cfg2 = stage_config(cfg, budget2, mix64(cfg.seed));
    const auto carried = lift_architecture(space, winner1, stage2_space);
    auto r2 = detail::evolve_seeded(stage2_space, evaluator, request.latency, request.tau_c, cfg2,
                                    {carried}, 2);

    report.mode = SearchMode::TwoStage;
    report.t = t;
    report.tau_c = request.tau_c;
    report.best = lift_architecture(stage2_space, r2.best, space);
    report.best_ids = r2.best_ids;
    report.best_accuracy = r2.best_accuracy;
    report.best_latency = r2.best_latency;
    report.history = std::move(r1.history);
    report.history.insert(report.history.end(), r2.history.begin(), r2.history.end());
    report.evaluations_used = r1.evaluations_used + r2.evaluations_used;
    report.stages.push_back({1, t + 1, n, space_size(stage1_space).str(), r1.evaluations_used,
                             cfg1.budget(), r1.best_ids});
    report.stages.push_back({2, 1, t, space_size(stage2_space).str(), r2.evaluations_used,
                             cfg2.budget(), r2.best_ids});
  }
  if (request.audit_latency) report.audit_latency = request.audit_latency(space, report.best);
  return report;
}

}  // namespace hurricane
