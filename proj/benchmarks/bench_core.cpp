#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "sticky/cluster_dynamics.hpp"
#include "sticky/kpz_shape.hpp"
#include "sticky/sde_sim.hpp"

namespace {

struct Instance {
  std::vector<double> x;
  std::vector<double> m;
};

Instance make_instance(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> gap(0.1, 1.0), mass(0.2, 2.0);
  Instance in;
  double p = -0.5 * static_cast<double>(n);
  for (std::size_t c = 0; c < n; ++c) {
    p += gap(rng);
    in.x.push_back(p);
    in.m.push_back(mass(rng));
  }
  return in;
}

std::vector<double> particle_positions(std::size_t n) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::vector<double> x(n);
  for (double& v : x) v = g(rng) * static_cast<double>(n);
  return x;
}

void BM_DriftVector(benchmark::State& state) {
  const auto x = particle_positions(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sticky::drift_vector(x));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DriftVector)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

void BM_Simulate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const double x[] = {0.0};
  const double m[] = {1.0};
  const sticky::Scales sc{n, 100.0 / static_cast<double>(n * n)};
  const auto initial = sticky::cluster_initial_state(x, m, sc);
  const auto config = sticky::default_sim_config(n);
  const double times[] = {0.0, sc.t_scale};
  for (auto _ : state) benchmark::DoNotOptimize(sticky::simulate(initial, config, sc.t_scale, times));
}
BENCHMARK(BM_Simulate)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_OptimalDeviation(benchmark::State& state) {
  const auto in = make_instance(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(sticky::optimal_deviation(in.x, in.m, 0.0, 5.0));
}
BENCHMARK(BM_OptimalDeviation)->RangeMultiplier(4)->Range(2, 128);

void BM_BuildShapeAndIKpz(benchmark::State& state) {
  const auto in = make_instance(static_cast<std::size_t>(state.range(0)), 2);
  const auto h = sticky::invert_gradient(2.0, in.x, in.m);
  for (auto _ : state) benchmark::DoNotOptimize(sticky::i_kpz(sticky::build_hf(2.0, in.x, h)));
}
BENCHMARK(BM_BuildShapeAndIKpz)->RangeMultiplier(4)->Range(2, 128);

void BM_InvertGradient(benchmark::State& state) {
  const auto in = make_instance(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(sticky::invert_gradient(2.0, in.x, in.m));
}
BENCHMARK(BM_InvertGradient)->RangeMultiplier(2)->Range(1, 16);

void BM_DualityCheck(benchmark::State& state) {
  const auto in = make_instance(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(sticky::duality_check(2.0, in.x, in.m));
}
BENCHMARK(BM_DualityCheck)->RangeMultiplier(2)->Range(1, 8);

}  // namespace
