#include <benchmark/benchmark.h>

#include <cmath>
#include <string>
#include <vector>

#include "hlift/hierarchy.hpp"
#include "hlift/inference.hpp"
#include "hlift/metric.hpp"
#include "hlift/planted.hpp"

namespace {

// m factors with 16-row tables over a pool of 64 binary variables
hlift::FactorGraph wide_model(std::size_t m) {
  hlift::Rng rng(m);
  const std::vector<std::string> range{"true", "false"};
  std::vector<hlift::RandomVariable> vars;
  for (std::size_t i = 0; i < 64; ++i) vars.push_back({"X" + std::to_string(i), range});
  std::vector<hlift::FactorSpec> fs;
  for (std::size_t j = 0; j < m; ++j) {
    hlift::FactorSpec f{"f" + std::to_string(j), {}, {}};
    for (std::size_t a = 0; a < 4; ++a) f.args.push_back(vars[(j * 4 + a) % 64].name);
    for (int r = 0; r < 16; ++r) f.table.push_back(std::exp(rng.uniform(-2.3, 2.3)));
    fs.push_back(std::move(f));
  }
  return hlift::build_graph(std::move(vars), std::move(fs));
}

void BM_DistanceMatrix(benchmark::State& state) {
  const hlift::FactorGraph g = wide_model(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(hlift::distance_matrix(g, {1}));
}
BENCHMARK(BM_DistanceMatrix)->Arg(500)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Hierarchy(benchmark::State& state) {
  const hlift::DistanceMatrix dm = hlift::distance_matrix(wide_model(static_cast<std::size_t>(state.range(0))), {1});
  for (auto _ : state) benchmark::DoNotOptimize(hlift::build_hierarchy(dm));
}
BENCHMARK(BM_Hierarchy)->Arg(250)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Enumeration(benchmark::State& state) {
  hlift::PlantedSpec spec;
  spec.num_groups = 4;
  spec.factors_per_group = static_cast<std::size_t>(state.range(0)) / 4;
  spec.topology = hlift::Topology::Chain;
  const hlift::FactorGraph g = hlift::generate_planted(spec).model;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hlift::log_partition_function(g, hlift::Method::Enumeration));
  }
  state.counters["states"] = static_cast<double>(g.state_count());
}
BENCHMARK(BM_Enumeration)->Arg(12)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
