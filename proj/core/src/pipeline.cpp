#include "rlr/pipeline.hpp"

#include <algorithm>
#include <limits>
#include <memory>

#include "rlr/error.hpp"
#include "rlr/random.hpp"

namespace rlr {

void PipelineConfig::validate() const {
  structure.validate();
  if (hidden) hidden->validate();
  eval.validate();
}

std::string defaultHiddenPopulation(const Schema& schema, const TargetSpec& t) {
  for (const auto& rel : schema.relations()) {
    if (rel.from == t.population && rel.to != t.population) return rel.to;
    if (rel.to == t.population && rel.from != t.population) return rel.from;
  }
  return t.population;
}

namespace {

bool hiddenEnabled(const PipelineConfig& cfg) { return cfg.hidden && cfg.hidden->numHidden > 0; }

double chooseLambdaMean(const RlrModel& model, const RelationalDatabase& world, const TargetSpec& t,
                        std::span<const int> validation, const std::vector<double>& grid) {
  const auto raw = predictIndividuals(model, world, validation, false);
  const auto labels = labelsFor(world, t, validation);
  double best = grid.front();
  double bestScore = -std::numeric_limits<double>::infinity();
  std::vector<double> blended(raw.size());
  for (double lambda : grid) {
    for (std::size_t i = 0; i < raw.size(); ++i) blended[i] = blendWithMean(raw[i], model.trainMean, lambda);
    const double score = acll(blended, labels);
    if (score > bestScore) {
      bestScore = score;
      best = lambda;
    }
  }
  return best;
}

Predictor modelPredictor(RlrModel model, const RelationalDatabase& db) {
  auto world = std::make_shared<RelationalDatabase>(attachHidden(model, db));
  auto shared = std::make_shared<RlrModel>(std::move(model));
  return [world, shared](std::span<const int> rows) {
    return predictIndividuals(*shared, *world, rows, true);
  };
}

PipelineConfig reseeded(const PipelineConfig& cfg, std::uint64_t seed) {
  PipelineConfig out = cfg;
  out.seed = seed;
  return out;
}

}  // namespace

PipelineFit fitPipeline(const RelationalDatabase& db, const TargetSpec& t, const PipelineConfig& cfg,
                        std::span<const int> trainRows) {
  cfg.validate();
  PipelineFit out;
  RelationalDatabase world = db;
  std::optional<HiddenValues> hiddenValues;
  if (hiddenEnabled(cfg)) {
    HiddenConfig hc = *cfg.hidden;
    if (hc.population.empty()) hc.population = defaultHiddenPopulation(db.schema(), t);
    hc.seed = mixSeed(cfg.seed, 3);
    const auto augmented = augmentWithHidden(db, hc);
    auto learned = learnHidden(augmented, t, hc, trainRows);
    hiddenValues = learned.hidden;
    RlrModel carrier;
    carrier.hidden = learned.hidden;
    world = attachHidden(carrier, db);
    out.hidden = std::move(learned);
  }

  FeatureCache cache(world, t);
  StructureConfig sc = cfg.structure;
  sc.seed = mixSeed(cfg.seed, 5);
  out.k = selectK(world, t, sc, trainRows, &cache, &out.trace);
  sc.k = out.k;

  double lambdaMean = cfg.eval.lambdaMeanGrid.front();
  std::vector<int> rows(trainRows.begin(), trainRows.end());
  if (cfg.eval.lambdaMeanGrid.size() > 1 && rows.size() >= 10) {
    // Inner 80/20 holdout for the mean-blending weight.
    const auto parts = splitFolds(rows, 5, mixSeed(cfg.seed, 7));
    std::vector<int> inner;
    for (std::size_t g = 1; g < parts.size(); ++g) inner.insert(inner.end(), parts[g].begin(), parts[g].end());
    std::sort(inner.begin(), inner.end());
    if (positiveRate(world, t, inner) > 0.0 && positiveRate(world, t, inner) < 1.0) {
      const auto innerFit = learnStructure(world, t, sc, inner, &cache);
      lambdaMean = chooseLambdaMean(innerFit.model, world, t, parts[0], cfg.eval.lambdaMeanGrid);
    }
  }

  auto result = learnStructure(world, t, sc, trainRows, &cache);
  out.trace.insert(out.trace.end(), result.trace.begin(), result.trace.end());
  out.model = std::move(result.model);
  out.model.lambdaMean = lambdaMean;
  out.model.hidden = std::move(hiddenValues);
  return out;
}

Learner baselineLearner() {
  return [](const RelationalDatabase& db, const TargetSpec& t, std::span<const int> trainRows, std::uint64_t) {
    const double mean = positiveRate(db, t, trainRows);
    return Predictor([mean](std::span<const int> rows) { return std::vector<double>(rows.size(), mean); });
  };
}

Learner flatLearner(const PipelineConfig& cfg) {
  return [cfg](const RelationalDatabase& db, const TargetSpec& t, std::span<const int> trainRows,
               std::uint64_t seed) {
    StructureConfig sc = cfg.structure;
    sc.k = 0;
    sc.kCandidates = {0};
    sc.maxUnary = 1;
    sc.seed = seed;
    auto result = learnStructure(db, t, sc, trainRows);
    return modelPredictor(std::move(result.model), db);
  };
}

Learner rlrBaseLearner(const PipelineConfig& cfg) {
  PipelineConfig base = cfg;
  base.hidden.reset();
  return [base](const RelationalDatabase& db, const TargetSpec& t, std::span<const int> trainRows,
                std::uint64_t seed) {
    auto fit = fitPipeline(db, t, reseeded(base, seed), trainRows);
    return modelPredictor(std::move(fit.model), db);
  };
}

Learner rlrHiddenLearner(const PipelineConfig& cfg) {
  PipelineConfig withHidden = cfg;
  if (!withHidden.hidden) withHidden.hidden = HiddenConfig{};
  return [withHidden](const RelationalDatabase& db, const TargetSpec& t, std::span<const int> trainRows,
                      std::uint64_t seed) {
    auto fit = fitPipeline(db, t, reseeded(withHidden, seed), trainRows);
    return modelPredictor(std::move(fit.model), db);
  };
}

EvalReport crossValidate(const RelationalDatabase& db, const TargetSpec& t, const PipelineConfig& cfg) {
  cfg.validate();
  EvalConfig ec = cfg.eval;
  ec.seed = cfg.seed;
  if (hiddenEnabled(cfg)) return crossValidate(db, t, rlrHiddenLearner(cfg), ec, "rlr-h");
  return crossValidate(db, t, rlrBaseLearner(cfg), ec, "rlr-base");
}

std::vector<EvalReport> compareModels(const RelationalDatabase& db, const TargetSpec& t,
                                      const PipelineConfig& cfg) {
  cfg.validate();
  EvalConfig ec = cfg.eval;
  ec.seed = cfg.seed;
  std::vector<EvalReport> out;
  out.push_back(crossValidate(db, t, baselineLearner(), ec, "baseline"));
  out.push_back(crossValidate(db, t, flatLearner(cfg), ec, "flat-lr"));
  out.push_back(crossValidate(db, t, rlrBaseLearner(cfg), ec, "rlr-base"));
  if (hiddenEnabled(cfg)) out.push_back(crossValidate(db, t, rlrHiddenLearner(cfg), ec, "rlr-h"));
  return out;
}

}  // namespace rlr
