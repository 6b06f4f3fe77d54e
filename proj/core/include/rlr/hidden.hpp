#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rlr/database.hpp"
#include "rlr/grounding.hpp"
#include "rlr/model.hpp"
#include "rlr/schema.hpp"

namespace rlr {

/// Defaults for the SGD schedule are our own choices.
struct HiddenConfig {
  std::string population;
  int numHidden = 1;
  double initScale = 0.5;
  double learningRate = 0.3;
  int epochs = 200;
  /// L1 strength on formula weights (mean loss scale); hidden values are not penalized.
  double lambda1 = 1e-3;
  std::uint64_t seed = 0;
  int batchSize = 32;
  /// Binary-literal bound for the candidate formulae used while learning.
  int k = 1;
  int maxRestarts = 5;

  void validate() const;
};

/// H1, ..., Hn.
std::vector<std::string> hiddenNames(int count);

/// `db` plus continuous attributes H1..Hn on cfg.population, uniform in
/// [-initScale, initScale].
RelationalDatabase augmentWithHidden(const RelationalDatabase& db, const HiddenConfig& cfg);

/// Values of `names` read back from an augmented database.
HiddenValues extractHidden(const RelationalDatabase& db, const std::string& population,
                           const std::vector<std::string>& names);

/// [feature][individual] values of the hidden attributes.
using HiddenMatrix = std::vector<std::vector<double>>;

/// The k-BL, 1-UL logistic problem in which formulae holding a hidden literal
/// are linear in the hidden values: x_ij = sum_m C_j[i,m] * H(m).
class HiddenProblem {
 public:
  HiddenProblem(const RelationalDatabase& augmented, const TargetSpec& t, const HiddenConfig& cfg,
                std::span<const int> rows);

  /// Non-intercept formulae in weight order (weight 0 is the intercept).
  const std::vector<Formula>& formulas() const { return formulas_; }
  Eigen::Index dimension() const { return static_cast<Eigen::Index>(formulas_.size()) + 1; }
  std::size_t rows() const { return labels_.size(); }
  const std::vector<double>& labels() const { return labels_; }
  const std::vector<int>& rowKeys() const { return rowKeys_; }

  /// Scaled feature row i (intercept first) under hidden values H.
  Eigen::VectorXd featureRow(std::size_t i, const HiddenMatrix& hidden) const;

  struct Objective {
    double value = 0.0;
    Eigen::VectorXd gradWeights;
    HiddenMatrix gradHidden;
  };

  /// Mean negative log-likelihood over `batch` (row positions; all rows when
  /// empty) and its gradients. The L1 term is handled separately.
  Objective objective(const Eigen::VectorXd& weights, const HiddenMatrix& hidden,
                      std::span<const int> batch = {}) const;

  /// Weight columns whose feature is identically zero on the training rows.
  const std::vector<bool>& frozen() const { return frozen_; }

 private:
  struct Contribution {
    int hidden;  // index into the hidden names
    double scale;
    std::vector<std::vector<std::pair<int, double>>> entries;  // per row: (individual, coefficient)
  };

  std::vector<Formula> formulas_;
  std::vector<double> labels_;
  std::vector<int> rowKeys_;
  // Per formula: standardized fixed column, or a contribution index.
  std::vector<int> contributionOf_;
  std::vector<std::vector<double>> fixed_;
  std::vector<Contribution> contributions_;
  std::vector<bool> frozen_;
  std::size_t hiddenCount_ = 0;
  std::size_t populationSize_ = 0;
};

struct HiddenResult {
  HiddenValues hidden;
  std::vector<Formula> formulas;
  /// Intercept first, in the scaled feature space.
  Eigen::VectorXd weights;
  /// Training objective (mean loss plus L1) after each epoch of the final run.
  std::vector<double> epochLosses;
  int restarts = 0;
  double learningRate = 0.0;
};

/// Mini-batch SGD over weights and hidden values, with an L1 proximal step
/// on the weights after each epoch. On a non-finite loss the learning rate is
/// halved and the run restarts from the initial values.
HiddenResult learnHidden(const RelationalDatabase& augmented, const TargetSpec& t, const HiddenConfig& cfg,
                         std::span<const int> trainRows);

}  // namespace rlr
