#include "hurricane/latency_model.hpp"

#include <cmath>
#include <numbers>

#include "hurricane/errors.hpp"
#include "hurricane/random.hpp"

namespace hurricane {

double additive_latency(const Architecture& arch, const SearchSpace& space, const LatencyTable& table) {
  validate_architecture(space, arch);
  double total = 0.0;
  for (int i = 0; i < space.n_layers(); ++i) {
    total += table.at(i + 1, space.candidates[i][arch.choices[i]].id());
  }
  return total;
}

LatencyFn additive_latency_fn(std::shared_ptr<const LatencyTable> table) {
  return [table = std::move(table)](const SearchSpace& space, const Architecture& arch) {
    return additive_latency(arch, space, *table);
  };
}

double interaction_latency(const Architecture& arch, const SearchSpace& space,
                           const LatencyTable& table, double amplitude, std::uint64_t seed) {
  validate_architecture(space, arch);
  const int n = space.n_layers();
  std::vector<double> per_layer(n);
  std::vector<std::string> ids(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    ids[i] = space.candidates[i][arch.choices[i]].id();
    per_layer[i] = table.at(i + 1, ids[i]);
    total += per_layer[i];
  }
  for (int i = 0; i + 1 < n; ++i) {
    const double h = 2.0 * hash_unit(seed, static_cast<std::uint64_t>(i + 1), ids[i] + "|" + ids[i + 1]) - 1.0;
    total += amplitude * h * 0.5 * (per_layer[i] + per_layer[i + 1]);
  }
  return total;
}

int feature_dimension(const SearchSpace& space) {
  int dim = 1;
  for (const auto& layer : space.candidates) dim += static_cast<int>(layer.size());
  return dim;
}

Eigen::VectorXd encode_features(const SearchSpace& space, const Architecture& arch) {
  validate_architecture(space, arch);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(feature_dimension(space));
  int offset = 0;
  for (int i = 0; i < space.n_layers(); ++i) {
    x[offset + arch.choices[i]] = 1.0;
    offset += static_cast<int>(space.candidates[i].size());
  }
  x[offset] = 1.0;
  return x;
}

std::string layout_hash(const SearchSpace& space) {
  std::string canon;
  for (const auto& layer : space.candidates) {
    for (const auto& op : layer) canon += op.id() + ",";
    canon += ";";
  }
  return hex64(fnv1a64(canon));
}

namespace {

constexpr double kEigenCutoff = 1e-10;
constexpr double kLambdaMin = 1e-12;
constexpr double kLambdaMax = 1e12;

struct Eigenbasis {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd values;      // eigenvalues of X^T X, numerically-null ones set to 0
  Eigen::VectorXd projection;  // V^T X^T y, zero on the null space
};

Eigenbasis decompose(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const Eigen::MatrixXd gram = X.transpose() * X;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularSystem, "eigendecomposition of the Gram matrix failed");
  }
  Eigenbasis basis{solver.eigenvectors(), solver.eigenvalues(), {}};
  basis.projection = basis.vectors.transpose() * (X.transpose() * y);
  const double top = basis.values.maxCoeff();
  if (!(top > 0.0)) throw Error(ErrorCode::SingularSystem, "feature matrix is identically zero");
  for (Eigen::Index i = 0; i < basis.values.size(); ++i) {
    if (basis.values[i] < kEigenCutoff * top) {
      basis.values[i] = 0.0;
      basis.projection[i] = 0.0;
    }
  }
  return basis;
}

Eigen::VectorXd posterior_mean(const Eigenbasis& b, double lambda, double beta) {
  const Eigen::VectorXd coef =
      (beta * b.projection.array() / (lambda + beta * b.values.array())).matrix();
  return b.vectors * coef;
}

double evidence_from(const Eigenbasis& b, Eigen::Index n, double lambda, double beta,
                     double residual, double weight_norm2) {
  const auto d = static_cast<double>(b.values.size());
  const auto N = static_cast<double>(n);
  const double log_det = (lambda + beta * b.values.array()).log().sum();
  return 0.5 * d * std::log(lambda) + 0.5 * N * std::log(beta) - 0.5 * beta * residual -
         0.5 * lambda * weight_norm2 - 0.5 * log_det - 0.5 * N * std::log(2.0 * std::numbers::pi);
}

void check_inputs(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() < 2) throw Error(ErrorCode::EmptyDataset, "need at least 2 samples to fit");
  if (X.rows() != y.size()) throw Error(ErrorCode::LengthMismatch, "features and targets differ in length");
  if (!X.allFinite() || !y.allFinite()) throw Error(ErrorCode::InvalidConfig, "non-finite training data");
}

PredictorModel finish(const Eigenbasis& basis, double lambda, double beta) {
  PredictorModel model;
  model.lambda = lambda;
  model.beta = beta;
  model.weight_mean = posterior_mean(basis, lambda, beta);
  const Eigen::VectorXd inv = (lambda + beta * basis.values.array()).inverse().matrix();
  model.covariance = basis.vectors * inv.asDiagonal() * basis.vectors.transpose();
  model.covariance = 0.5 * (model.covariance + model.covariance.transpose()).eval();
  if (!model.weight_mean.allFinite() || !model.covariance.allFinite()) {
    throw Error(ErrorCode::SingularSystem, "posterior is not finite");
  }
  return model;
}

}  // namespace

double log_evidence(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda, double beta) {
  check_inputs(X, y);
  const auto basis = decompose(X, y);
  const Eigen::VectorXd m = posterior_mean(basis, lambda, beta);
  return evidence_from(basis, X.rows(), lambda, beta, (y - X * m).squaredNorm(), m.squaredNorm());
}

PredictorModel fit_brr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const BrrConfig& config) {
  check_inputs(X, y);
  const auto basis = decompose(X, y);
  const auto N = static_cast<double>(X.rows());

  const double mean = y.mean();
  double var = (y.array() - mean).square().sum() / N;
  if (!(var > 0.0)) var = std::max(1e-12, 1e-12 * mean * mean);
  const double beta_max = 1e10 / var;

  double lambda = 1.0;
  double beta = 1.0 / var;
  TrainingStats stats;
  stats.n_samples = static_cast<int>(X.rows());

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    const Eigen::VectorXd m = posterior_mean(basis, lambda, beta);
    const double residual = (y - X * m).squaredNorm();
    const double norm2 = m.squaredNorm();
    stats.log_evidence.push_back(evidence_from(basis, X.rows(), lambda, beta, residual, norm2));
    stats.iterations = iter;

    const double gamma = (beta * basis.values.array() / (lambda + beta * basis.values.array())).sum();
    if (!(norm2 > 0.0)) throw Error(ErrorCode::SingularSystem, "posterior mean collapsed to zero");
    const double next_lambda = std::clamp(gamma / norm2, kLambdaMin, kLambdaMax);
    const double next_beta =
        residual > 0.0 ? std::min((N - gamma) / residual, beta_max) : beta_max;
    if (!std::isfinite(next_lambda) || !std::isfinite(next_beta) || next_beta <= 0.0) {
      throw Error(ErrorCode::SingularSystem, "hyperparameter update diverged");
    }
    const double delta =
        std::abs(std::log(next_lambda / lambda)) + std::abs(std::log(next_beta / beta));
    lambda = next_lambda;
    beta = next_beta;
    if (delta < config.tol) {
      stats.converged = true;
      break;
    }
  }

  auto fitted = finish(basis, lambda, beta);
  fitted.stats = std::move(stats);
  return fitted;
}

PredictorModel posterior_at(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda, double beta) {
  check_inputs(X, y);
  if (!(lambda > 0.0) || !(beta > 0.0)) throw Error(ErrorCode::InvalidConfig, "precisions must be positive");
  auto model = finish(decompose(X, y), lambda, beta);
  model.stats.n_samples = static_cast<int>(X.rows());
  return model;
}

PredictorModel fit_predictor(const SearchSpace& space, std::span<const LatencySample> samples,
                             const BrrConfig& config) {
  const int dim = feature_dimension(space);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(samples.size()), dim);
  Eigen::VectorXd y(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    X.row(static_cast<Eigen::Index>(i)) = encode_features(space, samples[i].arch).transpose();
    y[static_cast<Eigen::Index>(i)] = samples[i].latency_ms;
  }
  auto model = fit_brr(X, y, config);
  model.layout_hash = layout_hash(space);
  return model;
}

Prediction predict_features(const PredictorModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.weight_mean.size()) {
    throw Error(ErrorCode::LayoutMismatch, "feature dimension does not match the model");
  }
  const double mean = model.weight_mean.dot(x);
  const double var = x.dot(model.covariance * x) + 1.0 / model.beta;
  return {mean, std::sqrt(std::max(var, 1.0 / model.beta))};
}

Prediction predict(const PredictorModel& model, const SearchSpace& space, const Architecture& arch) {
  if (layout_hash(space) != model.layout_hash) {
    throw Error(ErrorCode::LayoutMismatch, "model was fitted on a different search space layout");
  }
  return predict_features(model, encode_features(space, arch));
}

double mape(std::span<const double> predicted, std::span<const double> targets) {
  if (targets.empty()) throw Error(ErrorCode::EmptyDataset, "MAPE over an empty dataset");
  if (predicted.size() != targets.size()) {
    throw Error(ErrorCode::LengthMismatch, "prediction and target counts differ");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!(targets[i] > 0.0)) throw Error(ErrorCode::NonPositiveLatency, "MAPE target must be positive");
    total += std::abs(predicted[i] - targets[i]) / targets[i];
  }
  return 100.0 * total / static_cast<double>(targets.size());
}

double mape(const PredictorModel& model, const SearchSpace& space,
            std::span<const LatencySample> dataset) {
  if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "MAPE over an empty dataset");
  std::vector<double> pred, target;
  pred.reserve(dataset.size());
  target.reserve(dataset.size());
  for (const auto& s : dataset) {
    pred.push_back(predict(model, space, s.arch).mean_ms);
    target.push_back(s.latency_ms);
  }
  return mape(pred, target);
}

LatencyFn predictor_latency_fn(std::shared_ptr<const PredictorModel> model, SearchSpace fitted_space) {
  if (layout_hash(fitted_space) != model->layout_hash) {
    throw Error(ErrorCode::LayoutMismatch, "model was fitted on a different search space layout");
  }
  auto fitted = std::make_shared<const SearchSpace>(std::move(fitted_space));
  return [model = std::move(model), fitted](const SearchSpace& space, const Architecture& arch) {
    const auto lifted = lift_architecture(space, arch, *fitted);
    return predict_features(*model, encode_features(*fitted, lifted)).mean_ms;
  };
}

}  // namespace hurricane
