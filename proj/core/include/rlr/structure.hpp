#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rlr/database.hpp"
#include "rlr/grounding.hpp"
#include "rlr/model.hpp"
#include "rlr/schema.hpp"
#include "rlr/solver.hpp"

namespace rlr {

inline constexpr std::size_t kDefaultCandidateCap = 100000;

/// One attribute-value choice available as a unary literal. `value` is
/// empty for continuous attributes.
struct UnaryTemplate {
  std::string attribute;
  std::string population;
  std::optional<std::string> value;

  Literal bind(const std::string& var) const;
};

/// Every unary literal type over the schema except the target attribute.
std::vector<UnaryTemplate> unaryVocabulary(const Schema& schema, const TargetSpec& t);

/// Canonical connected sets of at most k positive binary literals that
/// contain the target variable. The empty skeleton comes first.
std::vector<Formula> binarySkeletons(const Schema& schema, const TargetSpec& t, int k);

/// Targeted chain where every non-target variable is a connector, is
/// attributed, or occurs only in binary literals that also hold the target.
bool isAdmissible(const Formula& f, const TargetSpec& t);

/// All admissible canonical formulae with at most k binary and at most r
/// unary literals, True first and the rest sorted by key. Throws LimitError
/// once more than `cap` formulae are produced.
std::vector<Formula> generateCandidates(const Schema& schema, const TargetSpec& t, int k, int r,
                                        std::size_t cap = kDefaultCandidateCap);

/// The binary literals of f.
Formula skeletonOf(const Formula& f);

/// psi_f: the same binary literals with each nonempty strict subset of the
/// unary literals, canonicalized.
std::vector<Formula> subformulaFamily(const Formula& f, const TargetSpec& t);

/// Canonical text, used as the identity of a formula in search sets.
std::string formulaKey(const Formula& f, const TargetSpec& t);

/// Canonical formulae keyed by formulaKey.
using FormulaSet = std::map<std::string, Formula>;

void insertFormula(FormulaSet& set, const Formula& f, const TargetSpec& t);

/// Admissible formulae with at most k binary and exactly r unary literals
/// none of whose psi_f members is in `removed`. Skeletons whose fitted
/// formulae were all removed are not extended.
std::vector<Formula> expandHA(const FormulaSet& fitted, const FormulaSet& removed, int k, int r,
                              const Schema& schema, const TargetSpec& t,
                              std::size_t cap = kDefaultCandidateCap);

struct StructureConfig {
  int k = 1;
  std::vector<int> kCandidates{1, 2};
  /// Fixed L1 strength; when unset it is chosen by cross-validation over
  /// `lambdaRatios` times lambdaMax at the first level.
  std::optional<double> lambda1;
  std::vector<double> lambdaRatios{0.5, 0.2, 0.1, 0.05, 0.02, 0.01};
  int folds = 5;
  int maxUnary = 3;
  std::size_t candidateCap = kDefaultCandidateCap;
  SolverConfig solver = defaultSolver();
  std::uint64_t seed = 0;

  void validate() const;
  static SolverConfig defaultSolver() {
    SolverConfig s;
    s.standardize = true;
    return s;
  }
};

struct TraceRecord {
  std::string phase;  // lambda_cv, k_cv, level, final
  int k = 0;
  int level = 0;
  std::size_t candidates = 0;
  std::size_t removed = 0;
  std::size_t nonzero = 0;
  double lambda1 = 0.0;
  double score = 0.0;
  int fold = -1;
};

void writeTraceCsv(std::span<const TraceRecord> trace, std::ostream& out);

struct SearchState {
  FormulaSet current;
  FormulaSet removed;
  FormulaSet fitted;
  int r = 1;
  Eigen::VectorXd weights;
};

struct StructureResult {
  RlrModel model;
  double lambda1 = 0.0;
  int k = 0;
  int levels = 0;
  SearchState state;
  std::vector<TraceRecord> trace;
};

/// Level-wise search on `trainRows`: fit L1 LR, move zero-weight formulae to
/// the removed set, raise r, expand under the hierarchical assumption, and
/// finally refit the survivors. `cache`, if given, must wrap `db`.
StructureResult learnStructure(const RelationalDatabase& db, const TargetSpec& t,
                               const StructureConfig& cfg, std::span<const int> trainRows,
                               FeatureCache* cache = nullptr);

/// Best k in cfg.kCandidates by mean inner-fold ACLL on `trainRows`; ties go
/// to the smaller k. A single candidate is returned without fitting.
int selectK(const RelationalDatabase& db, const TargetSpec& t, const StructureConfig& cfg,
            std::span<const int> trainRows, FeatureCache* cache = nullptr,
            std::vector<TraceRecord>* trace = nullptr);

/// Process-wide counters for the hierarchy check run before every fit.
struct HierarchyAudit {
  std::size_t fits = 0;
  std::size_t checkedFormulas = 0;
  std::size_t violations = 0;
};

HierarchyAudit hierarchyAudit();

}  // namespace rlr
