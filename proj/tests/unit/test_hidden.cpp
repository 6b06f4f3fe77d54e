#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rlr/error.hpp"
#include "rlr/hidden.hpp"
#include "rlr/pipeline.hpp"
#include "rlr/synth.hpp"
#include "test_support.hpp"

using namespace rlr;
using rlr::testing::plantedLatentSpec;

namespace {

HiddenConfig movieHidden(std::uint64_t seed) {
  HiddenConfig cfg;
  cfg.population = "movie";
  cfg.seed = seed;
  return cfg;
}

double relativeError(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

}  // namespace

TEST(Augment, RangeDeterminismAndOriginalUntouched) {
  const auto data = generateSynthetic(plantedLatentSpec(1, 30, 25));
  auto cfg = movieHidden(5);
  cfg.numHidden = 2;
  cfg.initScale = 0.3;
  const auto a = augmentWithHidden(data.db, cfg);
  const auto b = augmentWithHidden(data.db, cfg);
  for (const auto& name : hiddenNames(2)) {
    const auto& values = a.attribute(name).reals;
    ASSERT_EQ(values.size(), 25u);
    for (double v : values) {
      EXPECT_GE(v, -0.3);
      EXPECT_LE(v, 0.3);
    }
    EXPECT_EQ(values, b.attribute(name).reals);
  }
  EXPECT_EQ(data.db.schema().attribute("H1"), nullptr);
  EXPECT_EQ(a.attribute("drama").codes, data.db.attribute("drama").codes);
}

TEST(Augment, ZeroScaleGivesZeroValues) {
  const auto data = generateSynthetic(plantedLatentSpec(2, 10, 10));
  auto cfg = movieHidden(1);
  cfg.initScale = 0.0;
  const auto a = augmentWithHidden(data.db, cfg);
  for (double v : a.attribute("H1").reals) EXPECT_EQ(v, 0.0);
  const auto f = parseFormula("rated(u,m) * H1(m)", a.schema());
  for (double c : countColumn(f, data.target, a)) EXPECT_EQ(c, 0.0);
}

TEST(Augment, Errors) {
  const auto data = generateSynthetic(plantedLatentSpec(3, 10, 10));
  auto cfg = movieHidden(1);
  const auto once = augmentWithHidden(data.db, cfg);
  EXPECT_THROW(augmentWithHidden(once, cfg), ValidationError);
  cfg.population = "nobody";
  EXPECT_THROW(augmentWithHidden(data.db, cfg), ValidationError);
}

TEST(HiddenProblem, GradientsMatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    auto spec = plantedLatentSpec(seed, 5, 5);
    spec.relations[0].density = 0.5;
    const auto data = generateSynthetic(spec);
    auto cfg = movieHidden(seed);
    cfg.numHidden = 2;
    cfg.initScale = 0.5;
    const auto augmented = augmentWithHidden(data.db, cfg);
    const auto rows = labelledIndividuals(data.target, augmented);
    const HiddenProblem problem(augmented, data.target, cfg, rows);
    ASSERT_GT(problem.dimension(), 1);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 0.5);
    Eigen::VectorXd w(problem.dimension());
    for (auto& v : w) v = normal(rng);
    HiddenMatrix h = extractHidden(augmented, "movie", hiddenNames(2)).values;
    const auto obj = problem.objective(w, h);
    const double eps = 1e-6;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
      Eigen::VectorXd a = w, b = w;
      a(j) += eps;
      b(j) -= eps;
      const double fd = (problem.objective(a, h).value - problem.objective(b, h).value) / (2 * eps);
      EXPECT_LT(relativeError(fd, obj.gradWeights(j)), 1e-4) << "weight " << j;
    }
    for (std::size_t k = 0; k < h.size(); ++k)
      for (std::size_t m = 0; m < h[k].size(); ++m) {
        auto a = h, b = h;
        a[k][m] += eps;
        b[k][m] -= eps;
        const double fd = (problem.objective(w, a).value - problem.objective(w, b).value) / (2 * eps);
        EXPECT_LT(relativeError(fd, obj.gradHidden[k][m]), 1e-4) << "hidden " << k << "," << m;
      }
  }
}

TEST(HiddenProblem, NoHiddenLiteralOnTheTargetVariable) {
  const auto data = generateSynthetic(plantedLatentSpec(4, 20, 10));
  auto cfg = movieHidden(1);
  cfg.population = "user";
  const auto augmented = augmentWithHidden(data.db, cfg);
  const HiddenProblem problem(augmented, data.target, cfg, labelledIndividuals(data.target, augmented));
  for (const auto& f : problem.formulas())
    for (const auto& l : f.literals())
      if (l.symbol == "H1") EXPECT_NE(l.first, data.target.variable) << toString(f);
}

TEST(LearnHidden, ZeroEpochsReturnsInitialValues) {
  const auto data = generateSynthetic(plantedLatentSpec(5, 30, 15));
  auto cfg = movieHidden(2);
  cfg.epochs = 0;
  const auto augmented = augmentWithHidden(data.db, cfg);
  const auto result = learnHidden(augmented, data.target, cfg, labelledIndividuals(data.target, augmented));
  EXPECT_EQ(result.hidden.values, extractHidden(augmented, "movie", hiddenNames(1)).values);
  EXPECT_TRUE(result.epochLosses.empty());
}

TEST(LearnHidden, UnconnectedIndividualsKeepInitialValues) {
  auto spec = plantedLatentSpec(6, 20, 60);
  spec.relations[0].density = 0.02;
  const auto data = generateSynthetic(spec);
  auto cfg = movieHidden(3);
  cfg.epochs = 20;
  const auto augmented = augmentWithHidden(data.db, cfg);
  const auto result = learnHidden(augmented, data.target, cfg, labelledIndividuals(data.target, augmented));
  const auto& initial = augmented.attribute("H1").reals;
  const auto& rated = augmented.relation("rated");
  int unconnected = 0;
  for (std::size_t m = 0; m < initial.size(); ++m) {
    if (!rated.backward[m].empty()) continue;
    ++unconnected;
    EXPECT_EQ(result.hidden.values[0][m], initial[m]);
  }
  EXPECT_GT(unconnected, 0);
}

TEST(LearnHidden, LossIsNonIncreasingWithinSlack) {
  const auto data = generateSynthetic(plantedLatentSpec(7));
  auto cfg = movieHidden(4);
  cfg.epochs = 60;
  const auto augmented = augmentWithHidden(data.db, cfg);
  const auto result = learnHidden(augmented, data.target, cfg, labelledIndividuals(data.target, augmented));
  ASSERT_EQ(result.epochLosses.size(), 60u);
  EXPECT_EQ(result.restarts, 0);
  for (std::size_t e = 1; e < result.epochLosses.size(); ++e)
    EXPECT_LE(result.epochLosses[e], 1.05 * result.epochLosses[e - 1]) << "epoch " << e;
  EXPECT_LT(result.epochLosses.back(), result.epochLosses.front());
}

TEST(LearnHidden, DivergenceHalvesTheLearningRate) {
  const auto data = generateSynthetic(plantedLatentSpec(8, 60, 20));
  auto cfg = movieHidden(5);
  cfg.learningRate = 1e200;
  cfg.epochs = 3;
  cfg.maxRestarts = 2;
  const auto augmented = augmentWithHidden(data.db, cfg);
  EXPECT_THROW(learnHidden(augmented, data.target, cfg, labelledIndividuals(data.target, augmented)), Error);
}

TEST(LearnHidden, Deterministic) {
  const auto data = generateSynthetic(plantedLatentSpec(9, 50, 20));
  auto cfg = movieHidden(6);
  cfg.epochs = 10;
  const auto augmented = augmentWithHidden(data.db, cfg);
  const auto rows = labelledIndividuals(data.target, augmented);
  const auto a = learnHidden(augmented, data.target, cfg, rows);
  const auto b = learnHidden(augmented, data.target, cfg, rows);
  EXPECT_EQ(a.hidden.values, b.hidden.values);
  EXPECT_EQ(a.epochLosses, b.epochLosses);
}

TEST(Pipeline, ZeroHiddenFeaturesMatchesBase) {
  const auto data = generateSynthetic(plantedLatentSpec(10, 80, 20));
  const auto rows = labelledIndividuals(data.target, data.db);
  PipelineConfig base;
  base.structure.kCandidates = {1};
  base.seed = 3;
  PipelineConfig zero = base;
  zero.hidden = movieHidden(1);
  zero.hidden->numHidden = 0;
  const auto a = fitPipeline(data.db, data.target, base, rows);
  const auto b = fitPipeline(data.db, data.target, zero, rows);
  ASSERT_EQ(a.model.formulas.size(), b.model.formulas.size());
  for (std::size_t i = 0; i < a.model.formulas.size(); ++i) {
    EXPECT_EQ(a.model.formulas[i].formula, b.model.formulas[i].formula);
    EXPECT_EQ(a.model.formulas[i].weight, b.model.formulas[i].weight);
  }
  EXPECT_EQ(a.model.lambdaMean, b.model.lambdaMean);
  EXPECT_FALSE(b.hidden.has_value());
}

TEST(Pipeline, DefaultHiddenPopulationIsTheRelationPartner) {
  const auto data = generateSynthetic(plantedLatentSpec(11, 5, 5));
  EXPECT_EQ(defaultHiddenPopulation(data.db.schema(), data.target), "movie");
  const auto friends = generateSynthetic(kindFriendsSpec(5, 1));
  EXPECT_EQ(defaultHiddenPopulation(friends.db.schema(), friends.target), "person");
}

TEST(HiddenConfig, Validation) {
  HiddenConfig cfg;
  cfg.population = "movie";
  cfg.learningRate = 0.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.batchSize = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
}
