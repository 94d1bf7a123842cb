#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "hifuse/embedding.hpp"
#include "hifuse/features.hpp"
#include "hifuse/fusion.hpp"
#include "hifuse/pipeline.hpp"
#include "hifuse/synth.hpp"

namespace {

using namespace hifuse;

Eigen::MatrixXd gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.reshaped()(i) = normal(rng);
  return m;
}

void BM_Pava(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const Eigen::VectorXd h = gaussian(rng, state.range(0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(pava(h));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Pava)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

void BM_ProjectExact(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const Eigen::Index t = state.range(0);
  const Eigen::VectorXd h = gaussian(rng, t, 1);
  const IdealSpaceSpec spec{static_cast<int>(t / 6), static_cast<int>(t - t / 6)};
  for (auto _ : state) benchmark::DoNotOptimize(project_ideal_exact(h, spec));
}
BENCHMARK(BM_ProjectExact)->Arg(300)->Arg(3000);

void BM_RidgeStep(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const Eigen::Index k = state.range(0);
  std::vector<Eigen::MatrixXd> ys;
  std::vector<Eigen::VectorXd> zs;
  for (int i = 0; i < 3; ++i) {
    ys.push_back(gaussian(rng, 300, k));
    zs.push_back(gaussian(rng, 300, 1));
  }
  for (auto _ : state) benchmark::DoNotOptimize(ridge_step(ys, zs, 0.05));
}
BENCHMARK(BM_RidgeStep)->Arg(4)->Arg(16)->Arg(64);

void BM_ApaicFit(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::vector<FusionTarget> targets;
  for (int i = 0; i < 3; ++i) {
    Eigen::MatrixXd y = gaussian(rng, 300, 16);
    y.col(0) += Eigen::VectorXd::LinSpaced(300, 0.0, 3.0);
    targets.push_back({"r" + std::to_string(i), y, {50, i < 2 ? std::optional<int>(250) : std::nullopt}, {}});
  }
  FusionConfig cfg;
  cfg.iters = static_cast<int>(state.range(0));
  cfg.tol = 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(fit(targets, cfg));
}
BENCHMARK(BM_ApaicFit)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_MelSpectrogram(benchmark::State& state) {
  MelConfig cfg;
  cfg.sample_rate_hz = 50000;
  std::mt19937_64 rng(5);
  const Eigen::VectorXd signal = gaussian(rng, state.range(0), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mel_spectrogram(std::span<const double>(signal.data(), signal.size()), cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MelSpectrogram)->Arg(50000)->Unit(benchmark::kMillisecond);

void BM_TrainingEpoch(benchmark::State& state) {
  SynthConfig s;
  const auto fleet = generate_fleet(s, 3);
  RunConfig c;
  c.train.epochs = 1;
  const DatasetSplit split = make_split({fleet[0].trajectory, fleet[1].trajectory}, fleet[2].trajectory, c.labels);
  for (auto _ : state) benchmark::DoNotOptimize(train_embedding(split, c));
}
BENCHMARK(BM_TrainingEpoch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
