#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hurricane/backbone.hpp"
#include "hurricane/hw_profiles.hpp"

namespace hurricane {

/// Latency of an architecture expressed in the indices of `space`.
using LatencyFn = std::function<double(const SearchSpace& space, const Architecture& arch)>;

/// Sum of per-layer table latencies. Throws MissingLatency.
double additive_latency(const Architecture& arch, const SearchSpace& space, const LatencyTable& table);

LatencyFn additive_latency_fn(std::shared_ptr<const LatencyTable> table);

/// Additive latency plus a bounded adjacent-layer interaction: each pair
/// (i, i+1) adds amplitude * h * (tau_i + tau_{i+1}) / 2 with h in [-1, 1]
/// hashed from (seed, layer, operator ids). Used as a non-additive fixture.
double interaction_latency(const Architecture& arch, const SearchSpace& space,
                           const LatencyTable& table, double amplitude, std::uint64_t seed);

/// Per-layer one-hot blocks followed by a constant bias feature.
Eigen::VectorXd encode_features(const SearchSpace& space, const Architecture& arch);
int feature_dimension(const SearchSpace& space);

/// Identifies the feature layout: candidate ids of every layer in order.
std::string layout_hash(const SearchSpace& space);

struct BrrConfig {
  int max_iters = 300;
  double tol = 1e-6;
};

struct TrainingStats {
  int n_samples = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> log_evidence;  // one entry per hyperparameter update
};

/// Bayesian linear regression with an isotropic Gaussian prior (precision
/// lambda) and Gaussian noise (precision beta), both set by evidence maximization.
struct PredictorModel {
  std::string layout_hash;
  Eigen::VectorXd weight_mean;
  double lambda = 1.0;
  double beta = 1.0;
  Eigen::MatrixXd covariance;
  TrainingStats stats;
};

PredictorModel fit_brr(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                       const BrrConfig& config = {});

/// Posterior at fixed hyperparameters, no evidence updates.
PredictorModel posterior_at(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                            double lambda, double beta);

/// Log marginal likelihood of `targets` under hyperparameters (lambda, beta).
double log_evidence(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets, double lambda,
                    double beta);

struct LatencySample {
  Architecture arch;
  double latency_ms = 0.0;
};

/// Encodes `samples` against `space` and fits; the result carries the space's layout hash.
PredictorModel fit_predictor(const SearchSpace& space, std::span<const LatencySample> samples,
                             const BrrConfig& config = {});

struct Prediction {
  double mean_ms = 0.0;
  double std_ms = 0.0;
};

Prediction predict_features(const PredictorModel& model, const Eigen::VectorXd& x);
/// Throws LayoutMismatch if the model was fitted on a different layout.
Prediction predict(const PredictorModel& model, const SearchSpace& space, const Architecture& arch);

/// Mean absolute percentage error, in percent. Throws EmptyDataset.
double mape(std::span<const double> predicted, std::span<const double> targets);
double mape(const PredictorModel& model, const SearchSpace& space,
            std::span<const LatencySample> dataset);

/// Predictor-backed latency for any space whose candidates are drawn from
/// `fitted_space` (e.g. restricted stage spaces).
LatencyFn predictor_latency_fn(std::shared_ptr<const PredictorModel> model, SearchSpace fitted_space);

}  // namespace hurricane
