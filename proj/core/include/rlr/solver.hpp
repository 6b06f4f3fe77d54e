#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace rlr {

struct SolverConfig {
  double lambda1 = 0.0;
  int maxIterations = 5000;
  /// Stop when the relative change in the objective falls below this.
  double tolerance = 1e-6;
  bool penalizeIntercept = false;
  /// Fit on standardized columns and map the weights back to raw scale.
  bool standardize = false;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Logistic function, stable for large |x|.
double sigmoid(double x);

/// sigmoid(row . weights); column 0 of the row is the intercept.
double predictProb(const Eigen::VectorXd& weights, const Eigen::Ref<const Eigen::RowVectorXd>& row);

struct LossAndGradient {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

/// Bernoulli negative log-likelihood over a labelled design and its
/// gradient X^T (p - y). Probabilities are clamped to [1e-12, 1 - 1e-12]
/// inside the logarithm only.
LossAndGradient negLogLikelihood(const Eigen::VectorXd& weights, const Eigen::MatrixXd& features,
                                 const Eigen::VectorXd& labels);

struct FitResult {
  Eigen::VectorXd weights;
  /// Final penalized objective, in the scale the solver worked in.
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Objective after each accepted step, in the scale the solver worked in.
  std::vector<double> history;
};

/// L1-penalized logistic regression by proximal gradient descent with
/// backtracking. Column 0 is the intercept. Weights below 1e-8 in
/// magnitude are snapped to zero.
FitResult fitL1(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                const SolverConfig& config, const Eigen::VectorXd* warmStart = nullptr);

/// Smallest lambda1 at which every penalized non-intercept weight is zero,
/// max_j |x_j^T (y - mean(y))| over columns j >= 1 (standardized first when
/// `standardize` is set).
double lambdaMax(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels, bool standardize);

/// Objective value negLogLikelihood + lambda1 * sum |w_j| over penalized columns.
double penalizedObjective(const Eigen::VectorXd& weights, const Eigen::MatrixXd& features,
                          const Eigen::VectorXd& labels, double lambda1, bool penalizeIntercept);

}  // namespace rlr
