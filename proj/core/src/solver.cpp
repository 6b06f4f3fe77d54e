#include "rlr/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rlr/error.hpp"

namespace rlr {

namespace {

constexpr double kClamp = 1e-12;
constexpr double kZeroSnap = 1e-8;

double clampedLog(double p) { return std::log(std::clamp(p, kClamp, 1.0 - kClamp)); }

double nllValue(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    const double s = scores(i);
    total -= labels(i) > 0.5 ? clampedLog(sigmoid(s)) : clampedLog(sigmoid(-s));
  }
  return total;
}

double l1Norm(const Eigen::VectorXd& w, bool penalizeIntercept) {
  double norm = 0.0;
  for (Eigen::Index j = penalizeIntercept ? 0 : 1; j < w.size(); ++j) norm += std::abs(w(j));
  return norm;
}

double softThreshold(double x, double threshold) {
  if (x > threshold) return x - threshold;
  if (x < -threshold) return x + threshold;
  return 0.0;
}

struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  // 0 marks a constant column
};

Standardizer columnStats(const Eigen::MatrixXd& x) {
  Standardizer s;
  s.mean = Eigen::VectorXd::Zero(x.cols());
  s.scale = Eigen::VectorXd::Ones(x.cols());
  const double n = static_cast<double>(x.rows());
  for (Eigen::Index j = 1; j < x.cols(); ++j) {
    const double mu = x.col(j).sum() / n;
    const double var = (x.col(j).array() - mu).square().sum() / n;
    s.mean(j) = mu;
    s.scale(j) = var > 1e-24 ? std::sqrt(var) : 0.0;
  }
  return s;
}

Eigen::MatrixXd applyStandardizer(const Eigen::MatrixXd& x, const Standardizer& s) {
  Eigen::MatrixXd z = x;
  for (Eigen::Index j = 1; j < x.cols(); ++j) {
    if (s.scale(j) == 0.0) z.col(j).setZero();
    else z.col(j) = (x.col(j).array() - s.mean(j)) / s.scale(j);
  }
  return z;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(lambda1 >= 0.0) || !std::isfinite(lambda1))
    throw ValidationError("solver lambda1 must be a finite non-negative number");
  if (!(tolerance > 0.0)) throw ValidationError("solver tolerance must be positive");
  if (maxIterations < 1) throw ValidationError("solver maxIterations must be at least 1");
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double predictProb(const Eigen::VectorXd& weights, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  if (row.size() != weights.size())
    throw std::invalid_argument("predictProb: row and weight dimensions differ");
  return sigmoid(row.dot(weights.transpose()));
}

LossAndGradient negLogLikelihood(const Eigen::VectorXd& weights, const Eigen::MatrixXd& features,
                                 const Eigen::VectorXd& labels) {
  if (features.cols() != weights.size() || features.rows() != labels.size())
    throw std::invalid_argument("negLogLikelihood: dimension mismatch");
  const Eigen::VectorXd scores = features * weights;
  Eigen::VectorXd residual(scores.size());
  for (Eigen::Index i = 0; i < scores.size(); ++i) residual(i) = sigmoid(scores(i)) - labels(i);
  return {nllValue(scores, labels), features.transpose() * residual};
}

double penalizedObjective(const Eigen::VectorXd& weights, const Eigen::MatrixXd& features,
                          const Eigen::VectorXd& labels, double lambda1, bool penalizeIntercept) {
  return nllValue(features * weights, labels) + lambda1 * l1Norm(weights, penalizeIntercept);
}

double lambdaMax(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels, bool standardize) {
  if (features.cols() <= 1 || labels.size() == 0) return 0.0;
  const Eigen::MatrixXd z = standardize ? applyStandardizer(features, columnStats(features)) : features;
  const Eigen::VectorXd centered = labels.array() - labels.mean();
  return (z.rightCols(z.cols() - 1).transpose() * centered).cwiseAbs().maxCoeff();
}

FitResult fitL1(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                const SolverConfig& config, const Eigen::VectorXd* warmStart) {
  config.validate();
  if (features.rows() != labels.size()) throw std::invalid_argument("fitL1: label count mismatch");
  const Eigen::Index p = features.cols();
  if (p == 0) throw std::invalid_argument("fitL1: design has no columns");

  Standardizer stats;
  stats.mean = Eigen::VectorXd::Zero(p);
  stats.scale = Eigen::VectorXd::Ones(p);
  if (config.standardize) stats = columnStats(features);
  const Eigen::MatrixXd scaled = config.standardize ? applyStandardizer(features, stats) : Eigen::MatrixXd();
  const Eigen::MatrixXd& x = config.standardize ? scaled : features;

  std::vector<bool> frozen(static_cast<std::size_t>(p), false);
  for (Eigen::Index j = 1; j < p; ++j) frozen[j] = stats.scale(j) == 0.0;

  Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
  // Cold starts begin at the intercept-only optimum, so columns whose score
  // stays within lambda never leave zero.
  if (labels.size() > 0 && (x.col(0).array() == 1.0).all()) {
    const double rate = std::clamp(labels.mean(), 1e-6, 1.0 - 1e-6);
    w(0) = std::log(rate / (1.0 - rate));
  }
  if (warmStart && warmStart->size() == p) {
    w = *warmStart;
    if (config.standardize) {
      for (Eigen::Index j = 1; j < p; ++j) {
        w(0) += w(j) * stats.mean(j);
        w(j) = frozen[j] ? 0.0 : w(j) * stats.scale(j);
      }
    }
  }

  const double lambda = config.lambda1;
  const bool penalizeIntercept = config.penalizeIntercept;
  auto prox = [&](const Eigen::VectorXd& z, double step) {
    Eigen::VectorXd out = z;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (j > 0 && frozen[j]) out(j) = 0.0;
      else if (j > 0 || penalizeIntercept) out(j) = softThreshold(z(j), step * lambda);
    }
    return out;
  };

  const double frob = x.squaredNorm();
  double step = frob > 0.0 ? 4.0 / frob : 1.0;

  FitResult result;
  auto [smooth, gradient] = negLogLikelihood(w, x, labels);
  double objective = smooth + lambda * l1Norm(w, penalizeIntercept);
  int iteration = 0;
  for (; iteration < config.maxIterations; ++iteration) {
    Eigen::VectorXd next;
    double nextSmooth = 0.0;
    bool accepted = false;
    for (int tries = 0; tries < 60; ++tries) {
      next = prox(w - step * gradient, step);
      const Eigen::VectorXd delta = next - w;
      nextSmooth = nllValue(x * next, labels);
      const double model = smooth + gradient.dot(delta) + delta.squaredNorm() / (2.0 * step);
      if (nextSmooth <= model + 1e-12 * std::abs(smooth)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      result.converged = true;
      break;
    }
    const double nextObjective = nextSmooth + lambda * l1Norm(next, penalizeIntercept);
    const double change = std::abs(objective - nextObjective) / std::max(1.0, std::abs(objective));
    w = std::move(next);
    objective = nextObjective;
    result.history.push_back(objective);
    auto lg = negLogLikelihood(w, x, labels);
    smooth = lg.value;
    gradient = std::move(lg.gradient);
    step *= 2.0;
    if (change < config.tolerance) {
      result.converged = true;
      ++iteration;
      break;
    }
  }
  result.iterations = iteration;
  result.objective = objective;

  for (Eigen::Index j = 0; j < p; ++j)
    if (std::abs(w(j)) < kZeroSnap) w(j) = 0.0;
  if (config.standardize) {
    for (Eigen::Index j = 1; j < p; ++j) {
      w(j) = frozen[j] ? 0.0 : w(j) / stats.scale(j);
      w(0) -= w(j) * stats.mean(j);
    }
    for (Eigen::Index j = 0; j < p; ++j)
      if (std::abs(w(j)) < kZeroSnap) w(j) = 0.0;
  }
  result.weights = std::move(w);
  return result;
}

}  // namespace rlr
