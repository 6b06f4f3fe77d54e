#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rlr/database.hpp"
#include "rlr/evaluator.hpp"
#include "rlr/hidden.hpp"
#include "rlr/model.hpp"
#include "rlr/schema.hpp"
#include "rlr/structure.hpp"

namespace rlr {

struct PipelineConfig {
  StructureConfig structure;
  /// Hidden-feature learning runs when set and numHidden > 0.
  std::optional<HiddenConfig> hidden;
  EvalConfig eval;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PipelineFit {
  RlrModel model;
  int k = 0;
  std::vector<TraceRecord> trace;
  /// Set when hidden features were learned.
  std::optional<HiddenResult> hidden;
};

/// Population that receives hidden attributes when none is configured: the
/// first population other than the target's reachable through a relation,
/// else the target population.
std::string defaultHiddenPopulation(const Schema& schema, const TargetSpec& t);

/// k selection, optional hidden features, structure search and the
/// lambdaMean choice on an inner holdout, all on `trainRows`.
PipelineFit fitPipeline(const RelationalDatabase& db, const TargetSpec& t, const PipelineConfig& cfg,
                        std::span<const int> trainRows);

/// Always predicts the training positive rate.
Learner baselineLearner();
/// Logistic regression on the target individual's own attributes, one-hot.
Learner flatLearner(const PipelineConfig& cfg);
/// The full pipeline with hidden features switched off.
Learner rlrBaseLearner(const PipelineConfig& cfg);
/// The full pipeline with hidden features (cfg.hidden, defaulting to one).
Learner rlrHiddenLearner(const PipelineConfig& cfg);

/// Cross-validated full pipeline as configured.
EvalReport crossValidate(const RelationalDatabase& db, const TargetSpec& t, const PipelineConfig& cfg);

/// baseline, flat-lr, rlr-base and, when cfg.hidden is set, rlr-h, all on
/// the same folds.
std::vector<EvalReport> compareModels(const RelationalDatabase& db, const TargetSpec& t,
                                      const PipelineConfig& cfg);

}  // namespace rlr
