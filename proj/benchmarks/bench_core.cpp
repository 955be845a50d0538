#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "pspin/disorder.hpp"
#include "pspin/free_energy.hpp"
#include "pspin/ground_state.hpp"
#include "pspin/hamiltonian.hpp"

namespace {

std::vector<double> sphere_point(int n, std::uint64_t seed) {
  return pspin::sample_uniform_sphere(n, seed).coords;
}

void BM_FullContraction(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const int n = static_cast<int>(state.range(1));
  const auto t = pspin::sample_tensor(p, n, pspin::DisorderSpec::gaussian(), 1);
  const auto x = sphere_point(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(pspin::full_contraction(t, x));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(t.entries().size()));
}
BENCHMARK(BM_FullContraction)->Args({2, 1000})->Args({3, 100})->Args({3, 300})->Args({4, 60});

void BM_Gradient(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const int n = static_cast<int>(state.range(1));
  std::vector<double> gammas(static_cast<std::size_t>(p), 0.0);
  gammas.back() = 1.0;
  const pspin::MixtureSpec mix(gammas);
  const std::vector<pspin::SymmetricTensor> tensors{pspin::sample_tensor(p, n, pspin::DisorderSpec::gaussian(), 3)};
  const pspin::Hamiltonian h(tensors, mix);
  const auto x = sphere_point(n, 4);
  std::vector<double> g(static_cast<std::size_t>(n));
  for (auto _ : state) benchmark::DoNotOptimize(h.value_and_gradient(x, g));
}
BENCHMARK(BM_Gradient)->Args({2, 1000})->Args({3, 100})->Args({3, 300});

void BM_SampleTensor(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const int n = static_cast<int>(state.range(1));
  const auto spec = state.range(2) == 0 ? pspin::DisorderSpec::gaussian() : pspin::DisorderSpec::student_t(5.0);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(pspin::sample_tensor(p, n, spec, ++seed));
}
BENCHMARK(BM_SampleTensor)->Args({2, 1000, 0})->Args({2, 1000, 1})->Args({3, 100, 0});

void BM_EigenOracle(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto t = pspin::sample_tensor(2, n, pspin::DisorderSpec::gaussian(), 5);
  for (auto _ : state) benchmark::DoNotOptimize(pspin::eigen_oracle_p2(t).lambda_max);
}
BENCHMARK(BM_EigenOracle)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_FreeEnergyTi(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const pspin::MixtureSpec mix({0.0, 1.0});
  const std::vector<pspin::SymmetricTensor> tensors{pspin::sample_tensor(2, n, pspin::DisorderSpec::gaussian(), 6)};
  const auto grid = pspin::geometric_grid(0.5, 10);
  pspin::GibbsSamplerConfig cfg;
  cfg.sweeps = 100;
  cfg.burn_in = 20;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        pspin::free_energy_ti(tensors, mix, pspin::DomainSpec::l2(), 0.5, grid, cfg, 7).value);
  }
}
BENCHMARK(BM_FreeEnergyTi)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
