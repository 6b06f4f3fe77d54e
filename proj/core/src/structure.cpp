#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "rlr/error.hpp"
#include "rlr/evaluator.hpp"
#include "rlr/random.hpp"
#include "rlr/structure.hpp"

namespace rlr {

namespace {

std::atomic<std::size_t> gFits{0};
std::atomic<std::size_t> gChecked{0};
std::atomic<std::size_t> gViolations{0};

void auditBeforeFit(const FormulaSet& current, const FormulaSet& removed, const TargetSpec& t) {
  ++gFits;
  for (const auto& [key, f] : current) {
    ++gChecked;
    bool bad = removed.count(key) > 0;
    for (const auto& g : subformulaFamily(f, t))
      if (removed.count(toString(g))) bad = true;
    if (bad) {
      ++gViolations;
      throw std::logic_error("hierarchy violated: " + key + " is fitted after a sub-formula was removed");
    }
  }
}

std::vector<Formula> valuesOf(const FormulaSet& set) {
  std::vector<Formula> out;
  out.reserve(set.size());
  for (const auto& [key, f] : set) out.push_back(f);
  return out;
}

Eigen::MatrixXd selectRows(const Eigen::MatrixXd& m, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

Eigen::VectorXd selectRows(const Eigen::VectorXd& v, const std::vector<int>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(rows[i]);
  return out;
}

double smoothedRate(const Eigen::VectorXd& y) {
  return (y.sum() + 1.0) / (static_cast<double>(y.size()) + 2.0);
}

bool singleClass(const Eigen::VectorXd& y) {
  const double s = y.sum();
  return s == 0.0 || s == static_cast<double>(y.size());
}

double scoreAcll(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
  std::vector<double> p(static_cast<std::size_t>(x.rows()));
  std::vector<int> labels(p.size());
  const Eigen::VectorXd z = x * w;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = sigmoid(z(static_cast<Eigen::Index>(i)));
    labels[i] = static_cast<int>(y(static_cast<Eigen::Index>(i)));
  }
  return acll(p, labels);
}

/// Cross-validated choice among lambdaRatios * lambdaMax; returns the
/// absolute lambda for the full design.
double chooseLambda(const DesignMatrix& dm, const StructureConfig& cfg, std::vector<TraceRecord>& trace) {
  std::vector<double> ratios = cfg.lambdaRatios;
  std::sort(ratios.begin(), ratios.end(), std::greater<>());
  const bool standardize = cfg.solver.standardize;
  const double fullMax = lambdaMax(dm.features, dm.labels, standardize);
  if (dm.cols() <= 1 || ratios.size() == 1 || dm.rows() < cfg.folds) return ratios.front() * fullMax;

  std::vector<int> positions(static_cast<std::size_t>(dm.rows()));
  for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = static_cast<int>(i);
  const auto folds = splitFolds(positions, cfg.folds, mixSeed(cfg.seed, 11));
  std::vector<double> totals(ratios.size(), 0.0);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<int> trainPos;
    for (std::size_t g = 0; g < folds.size(); ++g)
      if (g != f) trainPos.insert(trainPos.end(), folds[g].begin(), folds[g].end());
    std::sort(trainPos.begin(), trainPos.end());
    const auto xTrain = selectRows(dm.features, trainPos);
    const auto yTrain = selectRows(dm.labels, trainPos);
    const auto xVal = selectRows(dm.features, folds[f]);
    const auto yVal = selectRows(dm.labels, folds[f]);
    if (singleClass(yTrain)) {
      Eigen::VectorXd w = Eigen::VectorXd::Zero(dm.cols());
      const double rate = smoothedRate(yTrain);
      w(0) = std::log(rate / (1.0 - rate));
      const double s = scoreAcll(xVal, yVal, w);
      for (auto& total : totals) total += s;
      continue;
    }
    const double foldMax = lambdaMax(xTrain, yTrain, standardize);
    Eigen::VectorXd warm;
    for (std::size_t i = 0; i < ratios.size(); ++i) {
      SolverConfig sc = cfg.solver;
      sc.lambda1 = ratios[i] * foldMax;
      auto fit = fitL1(xTrain, yTrain, sc, warm.size() ? &warm : nullptr);
      warm = fit.weights;
      const double s = scoreAcll(xVal, yVal, fit.weights);
      totals[i] += s;
      trace.push_back({"lambda_cv", cfg.k, 1, static_cast<std::size_t>(dm.cols() - 1), 0,
                       static_cast<std::size_t>((fit.weights.tail(fit.weights.size() - 1).array() != 0.0).count()),
                       sc.lambda1, s, static_cast<int>(f)});
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < ratios.size(); ++i)
    if (totals[i] > totals[best]) best = i;
  return ratios[best] * fullMax;
}

}  // namespace

HierarchyAudit hierarchyAudit() { return {gFits.load(), gChecked.load(), gViolations.load()}; }

void StructureConfig::validate() const {
  if (k < 0) throw ValidationError("k must be non-negative");
  if (kCandidates.empty()) throw ValidationError("k candidate list must be nonempty");
  for (int c : kCandidates)
    if (c < 0) throw ValidationError("k candidates must be non-negative");
  if (folds < 2) throw ValidationError("structure folds must be at least 2");
  if (maxUnary < 1) throw ValidationError("max unary must be at least 1");
  if (lambda1 && !(*lambda1 >= 0.0)) throw ValidationError("lambda1 must be non-negative");
  if (!lambda1 && lambdaRatios.empty()) throw ValidationError("lambda ratio grid must be nonempty");
  for (double r : lambdaRatios)
    if (!(r > 0.0)) throw ValidationError("lambda ratios must be positive");
  solver.validate();
}

void writeTraceCsv(std::span<const TraceRecord> trace, std::ostream& out) {
  const auto precision = out.precision(10);
  out << "phase,k,level,candidates,removed,nonzero,lambda1,score,fold\n";
  for (const auto& r : trace) {
    out << r.phase << ',' << r.k << ',' << r.level << ',' << r.candidates << ',' << r.removed << ','
        << r.nonzero << ',' << r.lambda1 << ',' << r.score << ',';
    if (r.fold >= 0) out << r.fold;
    out << '\n';
  }
  out.precision(precision);
}

StructureResult learnStructure(const RelationalDatabase& db, const TargetSpec& t,
                               const StructureConfig& cfg, std::span<const int> trainRows,
                               FeatureCache* cache) {
  cfg.validate();
  validateTarget(t, db.schema());
  std::optional<FeatureCache> local;
  if (!cache || &cache->database() != &db) cache = &local.emplace(db, t);

  StructureResult result;
  result.k = cfg.k;
  DesignOptions options;
  options.rows = std::vector<int>(trainRows.begin(), trainRows.end());
  options.cache = cache;

  auto& state = result.state;
  for (const auto& f : generateCandidates(db.schema(), t, cfg.k, 1, cfg.candidateCap))
    if (!f.isTrue()) insertFormula(state.current, f, t);

  auto first = buildDesignMatrix(valuesOf(state.current), t, db, options);
  if (first.rows() == 0) throw ValidationError("no labelled training rows");
  const double mean = first.labels.mean();
  if (singleClass(first.labels)) {
    result.model = RlrModel::interceptOnly(t, smoothedRate(first.labels));
    result.model.trainMean = mean;
    return result;
  }
  result.lambda1 = cfg.lambda1 ? *cfg.lambda1 : chooseLambda(first, cfg, result.trace);

  SolverConfig solver = cfg.solver;
  solver.lambda1 = result.lambda1;
  const std::size_t vocabulary = unaryVocabulary(db.schema(), t).size();

  FormulaSet survivors;
  for (state.r = 1;; ++state.r) {
    auditBeforeFit(state.current, state.removed, t);
    const auto formulas = valuesOf(state.current);
    const auto dm = state.r == 1 ? std::move(first) : buildDesignMatrix(formulas, t, db, options);
    const auto fit = fitL1(dm.features, dm.labels, solver);
    state.weights = fit.weights;
    survivors.clear();
    std::size_t i = 1;
    for (const auto& [key, f] : state.current) {
      if (fit.weights(static_cast<Eigen::Index>(i++)) == 0.0)
        state.removed.emplace(key, f);
      else
        survivors.emplace(key, f);
      state.fitted.emplace(key, f);
    }
    // A formula is useless once any member of its family is.
    for (auto it = survivors.begin(); it != survivors.end();) {
      const auto family = subformulaFamily(it->second, t);
      const bool orphaned = std::any_of(family.begin(), family.end(),
                                        [&](const Formula& g) { return state.removed.count(toString(g)) > 0; });
      if (orphaned) {
        state.removed.emplace(it->first, it->second);
        it = survivors.erase(it);
      } else {
        ++it;
      }
    }
    ++result.levels;
    result.trace.push_back({"level", cfg.k, state.r, state.current.size(), state.removed.size(),
                            survivors.size(), result.lambda1, -fit.objective / static_cast<double>(dm.rows()), -1});

    if (state.r + 1 > cfg.maxUnary || static_cast<std::size_t>(state.r + 1) > vocabulary) break;
    auto expansion = expandHA(state.fitted, state.removed, cfg.k, state.r + 1, db.schema(), t, cfg.candidateCap);
    if (expansion.empty()) break;
    state.current = survivors;
    for (const auto& f : expansion) insertFormula(state.current, f, t);
  }

  state.current = survivors;
  auditBeforeFit(state.current, state.removed, t);
  const auto formulas = valuesOf(state.current);
  const auto dm = buildDesignMatrix(formulas, t, db, options);
  const auto fit = fitL1(dm.features, dm.labels, solver);
  state.weights = fit.weights;

  auto& model = result.model;
  model.target = t;
  model.trainMean = mean;
  model.formulas.push_back({Formula{}, fit.weights(0)});
  std::size_t nonzero = 0;
  for (std::size_t j = 0; j < formulas.size(); ++j) {
    const double w = fit.weights(static_cast<Eigen::Index>(j + 1));
    if (w == 0.0) continue;
    model.formulas.push_back({formulas[j], w});
    ++nonzero;
  }
  result.trace.push_back({"final", cfg.k, state.r, formulas.size(), state.removed.size(), nonzero,
                          result.lambda1, -fit.objective / static_cast<double>(dm.rows()), -1});
  return result;
}

int selectK(const RelationalDatabase& db, const TargetSpec& t, const StructureConfig& cfg,
            std::span<const int> trainRows, FeatureCache* cache, std::vector<TraceRecord>* trace) {
  cfg.validate();
  std::vector<int> ks = cfg.kCandidates;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (ks.size() == 1) return ks.front();

  std::optional<FeatureCache> local;
  if (!cache || &cache->database() != &db) cache = &local.emplace(db, t);
  const auto folds = splitFolds(trainRows, cfg.folds, mixSeed(cfg.seed, 23));
  int bestK = ks.front();
  double bestScore = -std::numeric_limits<double>::infinity();
  for (int k : ks) {
    double total = 0.0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      std::vector<int> inner;
      for (std::size_t g = 0; g < folds.size(); ++g)
        if (g != f) inner.insert(inner.end(), folds[g].begin(), folds[g].end());
      std::sort(inner.begin(), inner.end());
      StructureConfig sub = cfg;
      sub.k = k;
      sub.seed = mixSeed(cfg.seed, 100 + f);
      const auto learned = learnStructure(db, t, sub, inner, cache);
      const auto p = predictIndividuals(learned.model, db, folds[f], false, cache);
      const double s = acll(p, labelsFor(db, t, folds[f]));
      total += s;
      if (trace)
        trace->push_back({"k_cv", k, learned.levels, learned.state.fitted.size(), learned.state.removed.size(),
                          learned.model.formulas.size() - 1, learned.lambda1, s, static_cast<int>(f)});
    }
    const double mean = total / static_cast<double>(folds.size());
    if (mean > bestScore) {
      bestScore = mean;
      bestK = k;
    }
  }
  return bestK;
}

}  // namespace rlr
