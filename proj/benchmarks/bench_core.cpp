#include <benchmark/benchmark.h>

#include "fringelab/fitsolver.hpp"
#include "fringelab/sensitivity.hpp"
#include "fringelab/temporal.hpp"

using namespace fringelab;

namespace {

SourceParams lossy_source() {
  SourceParams p;
  p.g2 = 0.018;
  p.indist = 0.974;
  p.eta_c = 0.803;
  p.eta_d = 0.761;
  p.eta_e = 0.178;
  p.eta_f = 0.322;
  return p;
}

void BM_TransferCoefficients(benchmark::State& state) {
  NetworkParams p;
  p.phi = 0.7;
  p.eta_c = 0.8;
  p.eta_d = 0.76;
  for (auto _ : state) {
    benchmark::DoNotOptimize(transfer_coefficients(p));
  }
}
BENCHMARK(BM_TransferCoefficients);

void BM_PropagateFourPhotons(benchmark::State& state) {
  LabeledFockState input;
  input.add({Spatial::a, 0}, 2);
  input.add({Spatial::b, 0}, 2);
  const TransferCoefficients k = transfer_coefficients(NetworkParams{0.9});
  for (auto _ : state) {
    benchmark::DoNotOptimize(propagate(input, k));
  }
}
BENCHMARK(BM_PropagateFourPhotons);

void BM_ThresholdProbabilityMixedInput(benchmark::State& state) {
  const auto ens = build_ensemble(InputConfig::Ket22, lossy_source());
  const TransferCoefficients k =
      transfer_coefficients(lossy_source().network(1.1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ensemble_probability(ens, k, 3, 1));
  }
}
BENCHMARK(BM_ThresholdProbabilityMixedInput);

void BM_FourPhotonScan(benchmark::State& state) {
  const auto grid = uniform_grid(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(scan(InputConfig::Ket22, lossy_source(),
                                  DetectionScheme::at_least(3, 1), grid));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FourPhotonScan)->Arg(181)->Arg(721);

void BM_ContrastAnalysis(benchmark::State& state) {
  const auto sc = scan(InputConfig::Ket22, lossy_source(),
                       DetectionScheme::at_least(3, 1), uniform_grid());
  for (auto _ : state) {
    benchmark::DoNotOptimize(contrast(sc));
  }
}
BENCHMARK(BM_ContrastAnalysis);

void BM_SensitivityCurve(benchmark::State& state) {
  const auto sc = scan(InputConfig::Ket11, SourceParams{},
                       DetectionScheme::at_least(1, 1), uniform_grid());
  for (auto _ : state) {
    benchmark::DoNotOptimize(phase_sensitivity(sc, 2));
  }
}
BENCHMARK(BM_SensitivityCurve);

void BM_TemporalOverlap(benchmark::State& state) {
  const WavepacketParams wp;
  for (auto _ : state) {
    benchmark::DoNotOptimize(temporal_overlap(30.0, wp));
  }
}
BENCHMARK(BM_TemporalOverlap);

void BM_PairFitOneParameter(benchmark::State& state) {
  const auto grid = uniform_grid(41);
  const auto truth = lossy_source();
  const auto data = synthesize_dataset(
      InputConfig::Ket11, truth, DetectionScheme::at_least(1, 1), grid, 1e5, 42);
  for (auto _ : state) {
    FitProblem problem;
    problem.data = data;
    problem.params = truth;
    problem.params.indist = 0.5;  // start away from the optimum
    problem.params.fixed.indist = false;
    benchmark::DoNotOptimize(fit(problem));
  }
}
BENCHMARK(BM_PairFitOneParameter);

}  // namespace

BENCHMARK_MAIN();
