#include <benchmark/benchmark.h>

#include "ldpr/bvemos.hpp"
#include "ldpr/ranking.hpp"
#include "ldpr/reorder.hpp"
#include "ldpr/scoring.hpp"
#include "ldpr/uvemos.hpp"

namespace {

using namespace ldpr;

Eigen::MatrixXd points(Eigen::Index n, Eigen::Index l, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(n, l);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < l; ++j) m(i, j) = rng.normal();
  return m;
}

void BM_CrpsTruncnormal(benchmark::State& state) {
  double y = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(crps_truncnormal(0.7, 1.3, y));
    y += 1e-3;
  }
}
BENCHMARK(BM_CrpsTruncnormal);

void BM_Prerank(benchmark::State& state) {
  const auto kind = static_cast<Prerank>(state.range(0));
  const Eigen::MatrixXd z = points(51, 6, 1);
  for (auto _ : state) benchmark::DoNotOptimize(characteristics(z, {kind}));
}
BENCHMARK(BM_Prerank)->DenseRange(0, 3);

void BM_EnergyAndVariogram(benchmark::State& state) {
  const VerificationRecord rec{points(50, 6, 2), Eigen::VectorXd::Zero(6), nullptr};
  for (auto _ : state) {
    benchmark::DoNotOptimize(energy_score(rec));
    benchmark::DoNotOptimize(variogram_score_05(rec));
  }
}
BENCHMARK(BM_EnergyAndVariogram);

void BM_ReorderCase(benchmark::State& state) {
  const Eigen::MatrixXd s = points(50, 2, 3), t = points(50, 2, 4);
  Rng rng(5);
  for (auto _ : state) benchmark::DoNotOptimize(reorder_case(s, t, {Prerank::Multivariate}, rng));
}
BENCHMARK(BM_ReorderCase);

void BM_SampleRejection(benchmark::State& state) {
  const BivariatePredictive d{Eigen::Vector2d(1.0, 0.0), Eigen::Matrix2d::Identity()};
  Rng rng(6);
  for (auto _ : state) benchmark::DoNotOptimize(sample_rejection(d, 50, rng));
}
BENCHMARK(BM_SampleRejection);

void BM_SampleGibbs(benchmark::State& state) {
  const BivariatePredictive d{Eigen::Vector2d(-4.0, 0.0), Eigen::Matrix2d::Identity()};
  Rng rng(7);
  for (auto _ : state) benchmark::DoNotOptimize(sample_gibbs(d, 50, rng));
}
BENCHMARK(BM_SampleGibbs);

std::vector<UnivariateTrainingPoint> univariate_window() {
  Rng rng(8);
  std::vector<UnivariateTrainingPoint> out(50);
  for (auto& p : out) {
    const double c = 3.0 * rng.normal();
    p.members.resize(50);
    for (Eigen::Index m = 0; m < 50; ++m) p.members[m] = c + rng.normal();
    p.observation = c + 1.0 + rng.normal();
  }
  return out;
}

void BM_FitUnivariate(benchmark::State& state) {
  const auto data = univariate_window();
  for (auto _ : state) benchmark::DoNotOptimize(fit_univariate_emos(data, UnivariateFamily::Normal, true));
}
BENCHMARK(BM_FitUnivariate)->Unit(benchmark::kMillisecond);

void BM_FitBivariate(benchmark::State& state) {
  Rng rng(9);
  std::vector<BivariateTrainingPoint> data(50);
  for (auto& p : data) {
    const Eigen::Vector2d c(3.0 + rng.normal(), 5.0 * rng.normal());
    p.members.resize(50, 2);
    for (Eigen::Index m = 0; m < 50; ++m) {
      p.members(m, 0) = std::max(0.0, c[0] + rng.normal());
      p.members(m, 1) = c[1] + rng.normal();
    }
    p.observation = Eigen::Vector2d(std::max(0.0, c[0] + rng.normal()), c[1] + rng.normal());
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_bivariate_emos(data, true));
}
BENCHMARK(BM_FitBivariate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
