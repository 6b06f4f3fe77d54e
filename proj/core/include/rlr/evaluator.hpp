#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rlr/database.hpp"
#include "rlr/schema.hpp"

namespace rlr {

/// Mean of ln p_i for label 1 and ln(1 - p_i) for label 0. A confident
/// wrong prediction yields -infinity, which is returned as is.
double acll(std::span<const double> predictions, std::span<const int> labels);

/// Fraction of examples where (p >= 0.5) equals the label.
double accuracy(std::span<const double> predictions, std::span<const int> labels);

/// Shuffles `items` with `seed` and deals them into `folds` disjoint parts
/// whose sizes differ by at most one.
std::vector<std::vector<int>> splitFolds(std::span<const int> items, int folds, std::uint64_t seed);

/// Probabilities for the given target individuals.
using Predictor = std::function<std::vector<double>(std::span<const int> individuals)>;

/// Trains on `trainRows` and returns a predictor. `seed` is fold specific.
using Learner = std::function<Predictor(const RelationalDatabase& db, const TargetSpec& t,
                                        std::span<const int> trainRows, std::uint64_t seed)>;

struct FoldResult {
  double acll = 0.0;
  double accuracy = 0.0;
  std::size_t testSize = 0;
  /// Training split had a single label class; an intercept-only model was used.
  bool flagged = false;
};

struct EvalReport {
  std::string name;
  double acll = 0.0;
  double accuracy = 0.0;
  std::vector<FoldResult> perFold;
  int foldCount = 0;
};

struct EvalConfig {
  int folds = 5;
  std::vector<double> lambdaMeanGrid{0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5};
  std::uint64_t seed = 0;

  void validate() const;
};

/// k-fold protocol: shuffle the labelled target individuals, hold out each
/// fold in turn, train on the rest, score the held-out fold, and average.
EvalReport crossValidate(const RelationalDatabase& db, const TargetSpec& t, const Learner& learner,
                         const EvalConfig& config, const std::string& name = "model");

/// Training positive rate over `rows`.
double positiveRate(const RelationalDatabase& db, const TargetSpec& t, std::span<const int> rows);
std::vector<int> labelsFor(const RelationalDatabase& db, const TargetSpec& t, std::span<const int> rows);

/// `model,fold,acll,accuracy,test_size,flagged` rows, then a `mean` row per report.
void writeReportCsv(std::span<const EvalReport> reports, std::ostream& out, bool header = true);
/// Human-readable table of the mean metrics.
void writeReportText(std::span<const EvalReport> reports, std::ostream& out);

}  // namespace rlr
