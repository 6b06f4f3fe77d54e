#pragma once

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rlr/database.hpp"
#include "rlr/schema.hpp"

namespace rlr {

/// Logical variable name -> individual index within its population.
using Assignment = std::map<std::string, int, std::less<>>;

/// Product semantics: binary literal -> tuple present, equality literal ->
/// value matches, continuous literal -> stored value. True evaluates to 1.
/// Every variable of `f` must be assigned.
double evaluateFormula(const Formula& f, const Assignment& assignment, const RelationalDatabase& db);

/// Sum of evaluateFormula over every assignment of the non-target variables,
/// with the target variable fixed to `individual`.
double countFormula(const Formula& f, const TargetSpec& t, int individual,
                    const RelationalDatabase& db);

/// countFormula for every individual of the target population at once. Tree
/// shaped formulae are counted by message passing over the relation
/// adjacency; anything else falls back to per-individual backtracking.
std::vector<double> countColumn(const Formula& f, const TargetSpec& t, const RelationalDatabase& db);

/// Label of one individual: 1 for the positive class, 0 for any other
/// value, nullopt when missing.
std::optional<int> labelOf(const TargetSpec& t, const RelationalDatabase& db, int individual);

/// Individuals of the target population whose label is observed.
std::vector<int> labelledIndividuals(const TargetSpec& t, const RelationalDatabase& db);

/// Memoizes countColumn results by canonical formula text. Thread-safe.
class FeatureCache {
 public:
  FeatureCache(const RelationalDatabase& db, TargetSpec target);

  std::shared_ptr<const std::vector<double>> column(const Formula& f);
  const RelationalDatabase& database() const { return *db_; }
  const TargetSpec& target() const { return target_; }

 private:
  const RelationalDatabase* db_;
  TargetSpec target_;
  std::mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<const std::vector<double>>> columns_;
};

/// Count-feature matrix: one row per target individual, one column per
/// formula. Column 0 is always the True intercept.
struct DesignMatrix {
  std::vector<Formula> columns;
  Eigen::MatrixXd features;
  Eigen::VectorXd labels;
  std::vector<int> rowKeys;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index cols() const { return features.cols(); }
  bool hasLabels() const { return labels.size() == features.rows(); }
};

struct DesignOptions {
  /// Restrict to these target individuals (in this order).
  std::optional<std::vector<int>> rows;
  /// Training matrices drop rows with missing labels; prediction matrices
  /// keep every row and carry no labels.
  bool labelled = true;
  FeatureCache* cache = nullptr;
};

DesignMatrix buildDesignMatrix(std::span<const Formula> formulas, const TargetSpec& t,
                               const RelationalDatabase& db, const DesignOptions& options = {});

/// CSV with canonical formula strings as header, then `label` if present.
void writeDesignMatrixCsv(const DesignMatrix& dm, std::ostream& out);

}  // namespace rlr
