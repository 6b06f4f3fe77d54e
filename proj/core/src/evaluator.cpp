#include "rlr/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <limits>
#include <random>
#include <stdexcept>

#include "rlr/error.hpp"
#include "rlr/grounding.hpp"
#include "rlr/random.hpp"

namespace rlr {

double acll(std::span<const double> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw std::invalid_argument("acll: length mismatch");
  if (predictions.empty()) return 0.0;
  double total = 0.0;
  bool infinite = false;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double p = labels[i] == 1 ? predictions[i] : 1.0 - predictions[i];
    if (p <= 0.0) infinite = true;
    total += std::log(p);
  }
  if (infinite)
    std::cerr << "warning: acll: a prediction of exactly 0 or 1 contradicts its label\n";
  return total / static_cast<double>(predictions.size());
}

double accuracy(std::span<const double> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw std::invalid_argument("accuracy: length mismatch");
  if (predictions.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    if ((predictions[i] >= 0.5 ? 1 : 0) == labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

std::vector<std::vector<int>> splitFolds(std::span<const int> items, int folds, std::uint64_t seed) {
  if (folds < 2) throw ValidationError("need at least 2 folds");
  if (items.size() < static_cast<std::size_t>(folds))
    throw ValidationError("fewer items (" + std::to_string(items.size()) + ") than folds (" +
                          std::to_string(folds) + ")");
  std::vector<int> order(items.begin(), items.end());
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(folds));
  const std::size_t base = order.size() / folds;
  const std::size_t extra = order.size() % folds;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < out.size(); ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    out[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                  order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return out;
}

void EvalConfig::validate() const {
  if (folds < 2) throw ValidationError("eval folds must be at least 2");
  if (lambdaMeanGrid.empty()) throw ValidationError("lambda-mean grid must be nonempty");
  for (double l : lambdaMeanGrid)
    if (!(l >= 0.0 && l <= 1.0)) throw ValidationError("lambda-mean values must lie in [0,1]");
}

double positiveRate(const RelationalDatabase& db, const TargetSpec& t, std::span<const int> rows) {
  if (rows.empty()) return 0.5;
  double positives = 0.0;
  for (int r : rows) positives += labelOf(t, db, r).value_or(0);
  return positives / static_cast<double>(rows.size());
}

std::vector<int> labelsFor(const RelationalDatabase& db, const TargetSpec& t, std::span<const int> rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (int r : rows) {
    auto label = labelOf(t, db, r);
    if (!label) throw ValidationError("individual without an observed label");
    out.push_back(*label);
  }
  return out;
}

EvalReport crossValidate(const RelationalDatabase& db, const TargetSpec& t, const Learner& learner,
                         const EvalConfig& config, const std::string& name) {
  config.validate();
  const auto individuals = labelledIndividuals(t, db);
  const auto folds = splitFolds(individuals, config.folds, config.seed);
  EvalReport report;
  report.name = name;
  report.foldCount = config.folds;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<int> train;
    for (std::size_t g = 0; g < folds.size(); ++g)
      if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
    std::sort(train.begin(), train.end());
    const auto& test = folds[f];

    FoldResult fold;
    fold.testSize = test.size();
    const double rate = positiveRate(db, t, train);
    std::vector<double> predictions;
    if (rate == 0.0 || rate == 1.0) {
      fold.flagged = true;
      const double smoothed = (rate * static_cast<double>(train.size()) + 1.0) /
                              (static_cast<double>(train.size()) + 2.0);
      predictions.assign(test.size(), smoothed);
    } else {
      auto predictor = learner(db, t, train, mixSeed(config.seed, f));
      predictions = predictor(test);
    }
    const auto labels = labelsFor(db, t, test);
    fold.acll = acll(predictions, labels);
    fold.accuracy = accuracy(predictions, labels);
    report.perFold.push_back(fold);
  }
  for (const auto& fold : report.perFold) {
    report.acll += fold.acll;
    report.accuracy += fold.accuracy;
  }
  report.acll /= static_cast<double>(report.perFold.size());
  report.accuracy /= static_cast<double>(report.perFold.size());
  return report;
}

void writeReportCsv(std::span<const EvalReport> reports, std::ostream& out, bool header) {
  const auto precision = out.precision(10);
  if (header) out << "model,fold,acll,accuracy,test_size,flagged\n";
  for (const auto& r : reports) {
    for (std::size_t f = 0; f < r.perFold.size(); ++f) {
      const auto& fold = r.perFold[f];
      out << r.name << ',' << f << ',' << fold.acll << ',' << fold.accuracy << ',' << fold.testSize
          << ',' << (fold.flagged ? 1 : 0) << '\n';
    }
    std::size_t total = 0;
    int flagged = 0;
    for (const auto& fold : r.perFold) {
      total += fold.testSize;
      flagged += fold.flagged ? 1 : 0;
    }
    out << r.name << ",mean," << r.acll << ',' << r.accuracy << ',' << total << ',' << flagged << '\n';
  }
  out.precision(precision);
}

void writeReportText(std::span<const EvalReport> reports, std::ostream& out) {
  out << std::left << std::setw(12) << "model" << std::right << std::setw(12) << "ACLL"
      << std::setw(12) << "accuracy" << '\n';
  for (const auto& r : reports) {
    out << std::left << std::setw(12) << r.name << std::right << std::fixed << std::setprecision(4)
        << std::setw(12) << r.acll << std::setw(11) << r.accuracy * 100.0 << "%\n";
    out.unsetf(std::ios::fixed);
  }
}

}  // namespace rlr
