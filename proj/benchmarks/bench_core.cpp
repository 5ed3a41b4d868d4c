#include <benchmark/benchmark.h>

#include "mblab/evolve.hpp"
#include "mblab/observables.hpp"
#include "mblab/prepare.hpp"
#include "mblab/spectrum.hpp"

using namespace mblab;

namespace {

HamiltonianOperator chain(int n) {
  return build_hamiltonian(enumerate_sector(n, half_filling(n)), default_device_couplings(n),
                           sample_disorder(n, 16.0, 11));
}

void BM_Enumerate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(SectorBasis(n, half_filling(n)));
}
BENCHMARK(BM_Enumerate)->Arg(14)->Arg(19)->Unit(benchmark::kMillisecond);

void BM_HoppingTable(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto basis = enumerate_sector(n, half_filling(n));
  const CouplingMatrix j = default_device_couplings(n);
  for (auto _ : state) benchmark::DoNotOptimize(HoppingTable(basis, j));
}
BENCHMARK(BM_HoppingTable)->Arg(14)->Arg(19)->Unit(benchmark::kMillisecond);

void BM_Apply(benchmark::State& state) {
  const HamiltonianOperator h = chain(static_cast<int>(state.range(0)));
  StateVector in = StateVector::Ones(static_cast<Eigen::Index>(h.dim()));
  StateVector out(in.size());
  for (auto _ : state) {
    h.apply(std::span<const std::complex<double>>(in.data(), h.dim()),
            std::span<std::complex<double>>(out.data(), h.dim()));
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * h.hopping()->nonzeros()));
}
BENCHMARK(BM_Apply)->Arg(14)->Arg(19)->Unit(benchmark::kMillisecond);

void BM_ExtremalLanczos(benchmark::State& state) {
  const HamiltonianOperator h = chain(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(extremal_eigenvalues(h));
}
BENCHMARK(BM_ExtremalLanczos)->Arg(14)->Arg(19)->Unit(benchmark::kMillisecond);

void BM_KrylovStep(benchmark::State& state) {
  const HamiltonianOperator h = chain(static_cast<int>(state.range(0)));
  KrylovPropagator p(h);
  StateVector psi = fock_vector(h.basis(), h.basis().state_at(h.dim() / 2));
  for (auto _ : state) p.propagate(psi, 20.0);
  state.counters["matvecs/step"] = benchmark::Counter(static_cast<double>(p.matvecs()) /
                                                      static_cast<double>(state.iterations()));
}
BENCHMARK(BM_KrylovStep)->Arg(14)->Arg(19)->Unit(benchmark::kMillisecond);

void BM_Imbalance(benchmark::State& state) {
  const HamiltonianOperator h = chain(19);
  const ImbalancePattern pattern(h.basis().state_at(0));
  const StateVector psi = StateVector::Constant(static_cast<Eigen::Index>(h.dim()), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(generalized_imbalance(psi, h.basis(), pattern));
}
BENCHMARK(BM_Imbalance)->Unit(benchmark::kMillisecond);

void BM_FullSpectrum(benchmark::State& state) {
  const HamiltonianOperator h = chain(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(full_spectrum(h, state.range(1) != 0));
}
BENCHMARK(BM_FullSpectrum)->Args({12, 0})->Args({12, 1})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
