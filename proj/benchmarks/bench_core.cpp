#include <benchmark/benchmark.h>

#include "noisecal/noisegen.hpp"
#include "noisecal/numkit.hpp"
#include "noisecal/robustmean.hpp"
#include "noisecal/trainer.hpp"

namespace {

using namespace noisecal;
using numkit::Matrix;
using numkit::Vector;

Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

void BM_AgnosticMean(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  Rng rng(1);
  const GaussianClassModel inlier{0, Vector::Zero(d), Matrix::Identity(d, d), 1};
  const auto h = noisegen::huber_mixture(inlier, noisegen::point_mass(10.0 * Vector::Unit(d, 0)), 0.2, 2000, rng);
  for (auto _ : state) benchmark::DoNotOptimize(robustmean::agnostic_mean(h.points));
}
BENCHMARK(BM_AgnosticMean)->Arg(8)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_SymEig(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  Rng rng(2);
  const Matrix a = normal_matrix(d, d, rng);
  const Matrix s = (a + a.transpose()) / 2.0;
  for (auto _ : state) benchmark::DoNotOptimize(numkit::sym_eig(s));
}
BENCHMARK(BM_SymEig)->Arg(8)->Arg(32)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_TrainEpoch(benchmark::State& state) {
  const noisegen::MixtureOracle oracle = noisegen::simplex_oracle(2, 8, 2.5);
  Rng rng(3);
  const LabeledSet data = oracle.sample(static_cast<std::size_t>(state.range(0)), rng);
  trainer::LinearClassifier f = trainer::LinearClassifier::zeros(2, 8);
  trainer::SgdMomentum opt;
  for (auto _ : state) benchmark::DoNotOptimize(trainer::train_epoch(f, data, 0.01, 128, opt, rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainEpoch)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_ResolveScale(benchmark::State& state) {
  const noisegen::MixtureOracle oracle = noisegen::simplex_oracle(2, 8, 2.5);
  Rng rng(4);
  const LabeledSet clean = oracle.sample(10000, rng);
  noisegen::NoiseSpec spec;
  spec.pmd_type = noisegen::PmdType::TypeI;
  spec.target_level = 0.35;
  for (auto _ : state) benchmark::DoNotOptimize(noisegen::resolve_scale(oracle, clean.features, clean.labels, spec));
}
BENCHMARK(BM_ResolveScale)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
