#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "rlr/error.hpp"
#include "rlr/evaluator.hpp"
#include "rlr/grounding.hpp"
#include "rlr/model.hpp"
#include "rlr/solver.hpp"
#include "rlr/synth.hpp"
#include "test_support.hpp"

using namespace rlr;

namespace {

Learner meanLearner() {
  return [](const RelationalDatabase& db, const TargetSpec& t, std::span<const int> rows, std::uint64_t) {
    const double mean = positiveRate(db, t, rows);
    return Predictor([mean](std::span<const int> test) { return std::vector<double>(test.size(), mean); });
  };
}

}  // namespace

TEST(Acll, Examples) {
  const std::vector<int> labels{1, 0, 0, 1, 1};
  EXPECT_NEAR(acll(std::vector<double>(5, 0.5), labels), std::log(0.5), 1e-12);
  EXPECT_EQ(acll(std::vector<double>{1.0, 0.0}, std::vector<int>{1, 0}), 0.0);
  EXPECT_NEAR(acll(std::vector<double>{0.8, 0.4}, std::vector<int>{1, 0}), -0.3669, 1e-4);
  EXPECT_EQ(acll(std::vector<double>{0.0}, std::vector<int>{1}), -std::numeric_limits<double>::infinity());
}

TEST(Acll, MaximizedAtTrainingMeanOverConstants) {
  const std::vector<int> labels{1, 1, 1, 0, 0, 1, 0, 1, 1, 1};
  const double mean = 0.7;
  const double best = acll(std::vector<double>(labels.size(), mean), labels);
  for (double p = 0.01; p < 1.0; p += 0.01) EXPECT_LE(acll(std::vector<double>(labels.size(), p), labels), best + 1e-15);
}

TEST(Accuracy, Examples) {
  EXPECT_EQ(accuracy(std::vector<double>{0.9, 0.1}, std::vector<int>{1, 0}), 1.0);
  EXPECT_EQ(accuracy(std::vector<double>{0.6, 0.6}, std::vector<int>{1, 0}), 0.5);
  EXPECT_EQ(accuracy(std::vector<double>{0.5}, std::vector<int>{1}), 1.0);
}

TEST(Accuracy, InvariantUnderIncreasingTransformOfScores) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  std::vector<double> scores(50);
  std::vector<int> labels(50);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] = normal(rng);
    labels[i] = static_cast<int>(rng() % 2);
  }
  std::vector<double> a, b;
  for (double s : scores) {
    a.push_back(sigmoid(s));
    b.push_back(sigmoid(s * s * s + 3.0 * s));
  }
  EXPECT_EQ(accuracy(a, labels), accuracy(b, labels));
}

TEST(Blend, Examples) {
  EXPECT_DOUBLE_EQ(blendWithMean(0.9, 0.7, 0.5), 0.8);
  EXPECT_EQ(blendWithMean(0.9, 0.7, 0.0), 0.9);
  EXPECT_EQ(blendWithMean(0.123, 0.7, 1.0), 0.7);
}

TEST(Blend, BoundedAwayFromZeroAndOne) {
  for (double mean : {0.1, 0.5, 0.93})
    for (double lambda : {0.05, 0.3, 1.0}) {
      const double margin = lambda * std::min(mean, 1.0 - mean);
      for (double p : {0.0, 1e-300, 0.5, 1.0}) {
        const double q = blendWithMean(p, mean, lambda);
        EXPECT_GE(q, margin - 1e-15);
        EXPECT_LE(q, 1.0 - margin + 1e-15);
      }
    }
}

TEST(SplitFolds, PartitionWithBalancedSizes) {
  std::vector<int> items(940);
  std::iota(items.begin(), items.end(), 0);
  const auto folds = splitFolds(items, 5, 17);
  ASSERT_EQ(folds.size(), 5u);
  std::set<int> seen;
  for (const auto& f : folds) {
    EXPECT_EQ(f.size(), 188u);
    for (int i : f) EXPECT_TRUE(seen.insert(i).second);
  }
  EXPECT_EQ(seen.size(), items.size());
  const auto uneven = splitFolds(std::vector<int>(13, 0), 5, 1);
  for (const auto& f : uneven) EXPECT_TRUE(f.size() == 2 || f.size() == 3);
  EXPECT_EQ(splitFolds(items, 5, 17), folds);
  EXPECT_THROW(splitFolds(std::vector<int>{1, 2}, 3, 0), ValidationError);
  EXPECT_THROW(splitFolds(items, 1, 0), ValidationError);
}

TEST(CrossValidate, MeanPredictorOnBalancedData) {
  // Fair-coin labels.
  auto spec = kindFriendsSpec(400, 1);
  spec.formulas = {{"True", 0.0}};
  const auto coins = generateSynthetic(spec);
  EvalConfig cfg;
  cfg.seed = 3;
  const auto report = crossValidate(coins.db, coins.target, meanLearner(), cfg, "baseline");
  EXPECT_NEAR(report.acll, std::log(0.5), 0.02);
  EXPECT_NEAR(report.accuracy, 0.5, 0.1);
  EXPECT_EQ(report.perFold.size(), 5u);
  EXPECT_EQ(report.foldCount, 5);
  std::size_t total = 0;
  for (const auto& f : report.perFold) total += f.testSize;
  EXPECT_EQ(total, 400u);
}

TEST(CrossValidate, Deterministic) {
  const auto data = generateSynthetic(kindFriendsSpec(120, 2));
  EvalConfig cfg;
  cfg.seed = 11;
  const auto a = crossValidate(data.db, data.target, meanLearner(), cfg);
  const auto b = crossValidate(data.db, data.target, meanLearner(), cfg);
  EXPECT_EQ(a.acll, b.acll);
  EXPECT_EQ(a.accuracy, b.accuracy);
}

TEST(CrossValidate, SingleClassTrainingIsFlagged) {
  // Five labelled people: four negative, one positive. With five folds the
  // fold holding the positive trains on negatives only.
  Schema s;
  s.addPopulation("person");
  s.addAttribute(booleanAttribute("happy", "person"));
  DatabaseBuilder b(s);
  b.setIndividuals("person", {"a", "b", "c", "d", "e"});
  b.setCodes("happy", {0, 0, 1, 0, 0});
  const auto db = std::move(b).build();
  const TargetSpec t{"happy", "person", "p", "true"};
  EvalConfig cfg;
  int calls = 0;
  Learner counting = [&](const RelationalDatabase& d, const TargetSpec& tt, std::span<const int> rows,
                         std::uint64_t seed) {
    ++calls;
    return meanLearner()(d, tt, rows, seed);
  };
  const auto report = crossValidate(db, t, counting, cfg);
  int flagged = 0;
  for (const auto& f : report.perFold) flagged += f.flagged;
  EXPECT_EQ(flagged, 1);
  EXPECT_EQ(calls, 4);
  EXPECT_TRUE(std::isfinite(report.acll));
}

TEST(EvalConfig, Validation) {
  EvalConfig cfg;
  cfg.folds = 1;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.lambdaMeanGrid = {1.5};
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg.lambdaMeanGrid.clear();
  EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(Report, CsvLayout) {
  EvalReport r;
  r.name = "m";
  r.perFold = {{-0.5, 0.75, 4, false}, {-0.25, 1.0, 4, true}};
  r.acll = -0.375;
  r.accuracy = 0.875;
  std::ostringstream out;
  writeReportCsv(std::vector<EvalReport>{r}, out);
  EXPECT_EQ(out.str(),
            "model,fold,acll,accuracy,test_size,flagged\nm,0,-0.5,0.75,4,0\nm,1,-0.25,1,4,1\nm,mean,-0.375,0.875,8,1\n");
}

TEST(Model, InterceptOnlyAndBlending) {
  const auto w = rlr::testing::friendsTableWorld();
  auto m = RlrModel::interceptOnly(w.target, 0.5);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(rlrPredict(m, i, w.db), 0.5);
  m.formulas.push_back({parseFormula("friend(z,y) * kind(y)", w.db.schema()), 1.0});
  m.formulas[0].weight = -4.5;
  m.trainMean = 0.75;
  // Row 0 has three kind friends; row 3 has ten.
  EXPECT_NEAR(rlrPredict(m, 0, w.db), sigmoid(-1.5), 1e-12);
  m.lambdaMean = 1.0;
  for (int i = 0; i < 4; ++i) EXPECT_EQ(regularizedPredict(m, i, w.db), 0.75);
  m.lambdaMean = 0.0;
  EXPECT_EQ(regularizedPredict(m, 3, w.db), rlrPredict(m, 3, w.db));
}

TEST(Model, PredictionMatchesSolverOnDesignRow) {
  const auto w = rlr::testing::friendsTableWorld();
  RlrModel m = RlrModel::interceptOnly(w.target, 0.5);
  m.formulas[0].weight = -1.0;
  m.formulas.push_back({parseFormula("friend(z,y)", w.db.schema()), -0.1});
  m.formulas.push_back({parseFormula("friend(z,y) * kind(y)", w.db.schema()), 0.3});
  std::vector<Formula> fs{m.formulas[1].formula, m.formulas[2].formula};
  const auto dm = buildDesignMatrix(fs, w.target, w.db);
  const Eigen::VectorXd weights = (Eigen::VectorXd(3) << -1.0, -0.1, 0.3).finished();
  const auto batch = predictIndividuals(m, w.db, dm.rowKeys, false);
  for (Eigen::Index i = 0; i < dm.rows(); ++i) {
    EXPECT_NEAR(rlrPredict(m, dm.rowKeys[i], w.db), predictProb(weights, dm.features.row(i)), 1e-12);
    EXPECT_NEAR(batch[static_cast<std::size_t>(i)], predictProb(weights, dm.features.row(i)), 1e-12);
  }
}

TEST(Model, TextRoundTrip) {
  const auto w = rlr::testing::friendsTableWorld();
  RlrModel m = RlrModel::interceptOnly(w.target, 0.6);
  m.formulas[0].weight = -4.123456789012345;
  m.formulas.push_back({parseFormula("friend(z,y) * kind(y)", w.db.schema()), 1.0 / 3.0});
  m.lambdaMean = 0.15;
  const auto dir = std::filesystem::temp_directory_path() / "rlr_model_roundtrip";
  std::filesystem::create_directories(dir);
  saveModel(m, dir / "model.txt", w.db);
  const auto back = loadModel(dir / "model.txt", w.db);
  ASSERT_EQ(back.formulas.size(), 2u);
  EXPECT_EQ(back.trainMean, m.trainMean);
  EXPECT_EQ(back.lambdaMean, m.lambdaMean);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(regularizedPredict(back, i, w.db), regularizedPredict(m, i, w.db), 1e-12);
}

TEST(Model, NewerFormatVersionIsRejected) {
  const auto w = rlr::testing::friendsTableWorld();
  std::ostringstream text;
  writeModel(RlrModel::interceptOnly(w.target, 0.5), text);
  std::string s = text.str();
  const std::string from = "version\t" + std::to_string(kModelFormatVersion);
  const auto pos = s.find(from);
  ASSERT_NE(pos, std::string::npos) << s;
  s.replace(pos, from.size(), "version\t" + std::to_string(kModelFormatVersion + 1));
  const auto path = std::filesystem::temp_directory_path() / "rlr_model_future.txt";
  std::ofstream(path) << s;
  EXPECT_THROW(loadModel(path, w.db), LoadError);
}
