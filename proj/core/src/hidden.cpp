#include "rlr/hidden.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "grounding_internal.hpp"
#include "rlr/error.hpp"
#include "rlr/random.hpp"
#include "rlr/solver.hpp"
#include "rlr/structure.hpp"

namespace rlr {

void HiddenConfig::validate() const {
  if (numHidden < 0) throw ValidationError("hidden count must be non-negative");
  if (!(initScale >= 0.0)) throw ValidationError("hidden init scale must be non-negative");
  if (!(learningRate > 0.0)) throw ValidationError("hidden learning rate must be positive");
  if (epochs < 0) throw ValidationError("hidden epochs must be non-negative");
  if (!(lambda1 >= 0.0)) throw ValidationError("hidden lambda1 must be non-negative");
  if (batchSize < 1) throw ValidationError("hidden batch size must be positive");
  if (k < 1) throw ValidationError("hidden k must be at least 1");
  if (maxRestarts < 0) throw ValidationError("hidden restart limit must be non-negative");
}

std::vector<std::string> hiddenNames(int count) {
  std::vector<std::string> out;
  for (int i = 1; i <= count; ++i) out.push_back("H" + std::to_string(i));
  return out;
}

RelationalDatabase augmentWithHidden(const RelationalDatabase& db, const HiddenConfig& cfg) {
  cfg.validate();
  if (!db.schema().hasPopulation(cfg.population))
    throw ValidationError("hidden population '" + cfg.population + "' is not declared");
  const auto names = hiddenNames(cfg.numHidden);
  for (const auto& name : names)
    if (db.schema().attribute(name) || db.schema().relation(name))
      throw ValidationError("hidden attribute name '" + name + "' collides with a declared symbol");
  const std::size_t n = db.populationSize(cfg.population);
  std::mt19937_64 rng(mixSeed(cfg.seed, 31));
  RelationalDatabase out = db;
  for (const auto& name : names) {
    std::vector<double> values(n, 0.0);
    if (cfg.initScale > 0.0) {
      std::uniform_real_distribution<double> dist(-cfg.initScale, cfg.initScale);
      for (auto& v : values) v = dist(rng);
    }
    out = out.withContinuousAttribute(name, cfg.population, std::move(values));
  }
  return out;
}

HiddenValues extractHidden(const RelationalDatabase& db, const std::string& population,
                           const std::vector<std::string>& names) {
  HiddenValues h;
  h.population = population;
  h.names = names;
  for (const auto& name : names) h.values.push_back(db.attribute(name).reals);
  return h;
}

HiddenProblem::HiddenProblem(const RelationalDatabase& augmented, const TargetSpec& t,
                             const HiddenConfig& cfg, std::span<const int> rows) {
  cfg.validate();
  const auto names = hiddenNames(cfg.numHidden);
  hiddenCount_ = names.size();
  populationSize_ = augmented.populationSize(cfg.population);
  for (const auto& name : names) {
    const auto* decl = augmented.schema().attribute(name);
    if (!decl || decl->population != cfg.population || decl->isDiscrete())
      throw ValidationError("database is not augmented with hidden attribute '" + name + "'");
  }
  for (int r : rows) {
    auto label = labelOf(t, augmented, r);
    if (!label) continue;
    rowKeys_.push_back(r);
    labels_.push_back(*label);
  }
  const std::size_t n = rowKeys_.size();
  if (n == 0) throw ValidationError("no labelled rows for hidden-feature learning");

  auto hiddenIndex = [&](const Literal& l) -> int {
    if (l.kind != LiteralKind::UnaryContinuous) return -1;
    auto it = std::find(names.begin(), names.end(), l.symbol);
    return it == names.end() ? -1 : static_cast<int>(it - names.begin());
  };

  for (const auto& f : generateCandidates(augmented.schema(), t, cfg.k, 1)) {
    if (f.isTrue()) continue;
    const Literal* hidden = nullptr;
    for (const auto& l : f.literals())
      if (hiddenIndex(l) >= 0) hidden = &l;
    if (hidden && hidden->first == t.variable) continue;  // a free per-row parameter
    formulas_.push_back(f);
    if (!hidden) {
      const auto column = countColumn(f, t, augmented);
      std::vector<double> values(n);
      for (std::size_t i = 0; i < n; ++i) values[i] = column[static_cast<std::size_t>(rowKeys_[i])];
      const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
      double var = 0.0;
      for (double v : values) var += (v - mean) * (v - mean);
      const double sd = std::sqrt(var / static_cast<double>(n));
      for (auto& v : values) v = sd > 0.0 ? (v - mean) / sd : 0.0;
      frozen_.push_back(sd == 0.0);
      contributionOf_.push_back(-1);
      fixed_.push_back(std::move(values));
      continue;
    }
    // Coefficients of H(x): the formula without its hidden literal, grounded with x left open.
    std::vector<Literal> rest;
    for (const auto& l : f.literals())
      if (&l != hidden) rest.push_back(l);
    const auto g = Formula::fromParts(std::move(rest), f.variables());
    const auto compiled = detail::compile(g, t, augmented);
    const auto slotOf = [&](const std::string& name) {
      return static_cast<int>(std::find(compiled.names.begin(), compiled.names.end(), name) -
                              compiled.names.begin());
    };
    const int xSlot = slotOf(hidden->first);
    Contribution c;
    c.hidden = hiddenIndex(*hidden);
    c.entries.resize(n);
    detail::Enumerator e(compiled, {compiled.target});
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::map<int, double> acc;
      e.forEach({rowKeys_[i]}, [&](const std::vector<int>& bound, double weight) {
        acc[bound[static_cast<std::size_t>(xSlot)]] += weight;
      });
      for (const auto& [m, w] : acc) {
        c.entries[i].emplace_back(m, w);
        total += w;
      }
    }
    c.scale = std::max(1.0, total / static_cast<double>(n));
    frozen_.push_back(total == 0.0);
    contributionOf_.push_back(static_cast<int>(contributions_.size()));
    fixed_.emplace_back();
    contributions_.push_back(std::move(c));
  }
}

Eigen::VectorXd HiddenProblem::featureRow(std::size_t i, const HiddenMatrix& hidden) const {
  Eigen::VectorXd x(dimension());
  x(0) = 1.0;
  for (std::size_t j = 0; j < formulas_.size(); ++j) {
    double v = 0.0;
    if (contributionOf_[j] < 0) {
      v = fixed_[j][i];
    } else {
      const auto& c = contributions_[static_cast<std::size_t>(contributionOf_[j])];
      const auto& h = hidden[static_cast<std::size_t>(c.hidden)];
      for (const auto& [m, coeff] : c.entries[i]) v += coeff * h[static_cast<std::size_t>(m)];
      v /= c.scale;
    }
    x(static_cast<Eigen::Index>(j + 1)) = v;
  }
  return x;
}

HiddenProblem::Objective HiddenProblem::objective(const Eigen::VectorXd& weights, const HiddenMatrix& hidden,
                                                  std::span<const int> batch) const {
  if (weights.size() != dimension()) throw std::invalid_argument("hidden objective: weight size mismatch");
  if (hidden.size() != hiddenCount_) throw std::invalid_argument("hidden objective: hidden count mismatch");
  std::vector<int> all;
  if (batch.empty()) {
    all.resize(rows());
    std::iota(all.begin(), all.end(), 0);
    batch = all;
  }
  Objective out;
  out.gradWeights = Eigen::VectorXd::Zero(dimension());
  out.gradHidden.assign(hiddenCount_, std::vector<double>(populationSize_, 0.0));
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (int pos : batch) {
    const auto i = static_cast<std::size_t>(pos);
    const Eigen::VectorXd x = featureRow(i, hidden);
    const double z = x.dot(weights);
    const double p = sigmoid(z);
    const double y = labels_[i];
    const double pc = std::clamp(p, 1e-12, 1.0 - 1e-12);
    out.value -= inv * (y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
    const double residual = (p - y) * inv;
    out.gradWeights += residual * x;
    for (std::size_t j = 0; j < formulas_.size(); ++j) {
      if (contributionOf_[j] < 0) continue;
      const auto& c = contributions_[static_cast<std::size_t>(contributionOf_[j])];
      const double factor = residual * weights(static_cast<Eigen::Index>(j + 1)) / c.scale;
      if (factor == 0.0) continue;
      auto& g = out.gradHidden[static_cast<std::size_t>(c.hidden)];
      for (const auto& [m, coeff] : c.entries[i]) g[static_cast<std::size_t>(m)] += factor * coeff;
    }
  }
  return out;
}

namespace {

double l1Norm(const Eigen::VectorXd& w) { return w.tail(w.size() - 1).cwiseAbs().sum(); }

}  // namespace

HiddenResult learnHidden(const RelationalDatabase& augmented, const TargetSpec& t, const HiddenConfig& cfg,
                         std::span<const int> trainRows) {
  cfg.validate();
  const HiddenProblem problem(augmented, t, cfg, trainRows);
  const auto names = hiddenNames(cfg.numHidden);
  const HiddenValues initial = extractHidden(augmented, cfg.population, names);

  const auto& y = problem.labels();
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  const double rate = std::clamp(mean, 1e-3, 1.0 - 1e-3);
  Eigen::VectorXd w0 = Eigen::VectorXd::Zero(problem.dimension());
  w0(0) = std::log(rate / (1.0 - rate));

  HiddenResult result;
  result.formulas = problem.formulas();
  double lr = cfg.learningRate;
  for (int attempt = 0;; ++attempt) {
    Eigen::VectorXd w = w0;
    HiddenMatrix h = initial.values;
    std::vector<double> losses;
    std::vector<int> order(problem.rows());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(mixSeed(cfg.seed, 41));
    bool diverged = false;
    const std::size_t batches = (order.size() + static_cast<std::size_t>(cfg.batchSize) - 1) /
                                static_cast<std::size_t>(cfg.batchSize);
    for (int epoch = 0; epoch < cfg.epochs && !diverged; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t b = 0; b < batches; ++b) {
        const std::size_t start = b * static_cast<std::size_t>(cfg.batchSize);
        const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batchSize));
        const std::span<const int> batch(order.data() + start, stop - start);
        const auto obj = problem.objective(w, h, batch);
        w -= lr * obj.gradWeights;
        for (std::size_t k = 0; k < h.size(); ++k)
          for (std::size_t m = 0; m < h[k].size(); ++m) h[k][m] -= lr * obj.gradHidden[k][m];
      }
      const double threshold = lr * cfg.lambda1 * static_cast<double>(batches);
      for (Eigen::Index j = 1; j < w.size(); ++j) {
        const double a = std::abs(w(j)) - threshold;
        w(j) = problem.frozen()[static_cast<std::size_t>(j - 1)] || a <= 0.0 ? 0.0 : std::copysign(a, w(j));
      }
      const double loss = problem.objective(w, h).value + cfg.lambda1 * l1Norm(w);
      bool finite = std::isfinite(loss) && w.allFinite();
      for (const auto& column : h)
        for (double v : column) finite = finite && std::isfinite(v);
      if (!finite) diverged = true;
      losses.push_back(loss);
    }
    if (!diverged) {
      result.hidden = initial;
      result.hidden.values = std::move(h);
      result.weights = std::move(w);
      result.epochLosses = std::move(losses);
      result.restarts = attempt;
      result.learningRate = lr;
      return result;
    }
    if (attempt >= cfg.maxRestarts)
      throw Error("hidden-feature SGD diverged after " + std::to_string(attempt) + " restarts");
    lr *= 0.5;
  }
}

}  // namespace rlr
