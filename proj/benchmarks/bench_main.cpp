#include <benchmark/benchmark.h>

#include <random>

#include "rlr/grounding.hpp"
#include "rlr/solver.hpp"
#include "rlr/structure.hpp"
#include "rlr/synth.hpp"

namespace {

void BM_CountColumnTree(benchmark::State& state) {
  const auto data = rlr::generateSynthetic(rlr::kindFriendsSpec(static_cast<std::size_t>(state.range(0)), 1));
  const auto f = rlr::parseFormula("friend(z,y) * friend(y,w) * kind(w)", data.db.schema());
  for (auto _ : state) benchmark::DoNotOptimize(rlr::countColumn(f, data.target, data.db));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CountColumnTree)->Arg(500)->Arg(2000);

void BM_CountColumnCycle(benchmark::State& state) {
  const auto data = rlr::generateSynthetic(rlr::kindFriendsSpec(static_cast<std::size_t>(state.range(0)), 1));
  const auto f = rlr::parseFormula("friend(z,y) * friend(y,w) * friend(w,z)", data.db.schema());
  for (auto _ : state) benchmark::DoNotOptimize(rlr::countColumn(f, data.target, data.db));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CountColumnCycle)->Arg(500)->Arg(2000);

void BM_DesignMatrixKTwo(benchmark::State& state) {
  const auto data = rlr::generateSynthetic(rlr::kindFriendsSpec(500, 2));
  const auto formulas = rlr::generateCandidates(data.db.schema(), data.target, 2, 1);
  for (auto _ : state) benchmark::DoNotOptimize(rlr::buildDesignMatrix(formulas, data.target, data.db));
}
BENCHMARK(BM_DesignMatrixKTwo);

void BM_FitL1(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int p = 20;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    double s = 0.0;
    for (int j = 1; j < p; ++j) {
      x(i, j) = normal(rng);
      if (j < 4) s += x(i, j);
    }
    y(i) = unit(rng) < 1.0 / (1.0 + std::exp(-s)) ? 1.0 : 0.0;
  }
  rlr::SolverConfig cfg;
  cfg.lambda1 = 0.05 * rlr::lambdaMax(x, y, false);
  for (auto _ : state) benchmark::DoNotOptimize(rlr::fitL1(x, y, cfg));
}
BENCHMARK(BM_FitL1)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
