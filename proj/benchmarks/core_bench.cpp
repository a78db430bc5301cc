#include <benchmark/benchmark.h>

#include "ix/merkle.hpp"
#include "ix/samples.hpp"
#include "ix/scenario.hpp"
#include "ix/vm.hpp"

namespace {

using namespace ix;

std::vector<Bytes> make_leaves(std::size_t n) {
  std::vector<Bytes> leaves;
  leaves.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ByteWriter w;
    w.u64(i);
    w.str("receipt");
    leaves.push_back(w.take());
  }
  return leaves;
}

void BM_MerkleRoot(benchmark::State& state) {
  const auto leaves = make_leaves(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(merkle::build_root(leaves));
  }
}
BENCHMARK(BM_MerkleRoot)->Arg(16)->Arg(256)->Arg(4096);

void BM_MerkleProveVerify(benchmark::State& state) {
  const auto leaves = make_leaves(static_cast<std::size_t>(state.range(0)));
  const Digest root = merkle::build_root(leaves);
  for (auto _ : state) {
    const auto proof = merkle::prove(leaves, leaves.size() / 2);
    benchmark::DoNotOptimize(merkle::verify(root, leaves[leaves.size() / 2], proof));
  }
}
BENCHMARK(BM_MerkleProveVerify)->Arg(16)->Arg(4096);

void BM_VmExecute(benchmark::State& state) {
  const vm::Program book = vm::assemble(samples::kTrainBookAsm);
  const GasSchedule gas;
  const std::vector<std::uint64_t> args = {10, 50, 2, 1};
  for (auto _ : state) {
    benchmark::DoNotOptimize(vm::execute(book, args, 1'000'000, gas));
  }
}
BENCHMARK(BM_VmExecute);

void BM_TrainHotelScenario(benchmark::State& state) {
  BuiltinOptions opts;
  opts.protocol = "integratex";
  const ScenarioConfig cfg = builtin_scenarios("train-hotel", opts).front();
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_scenario(cfg));
  }
}
BENCHMARK(BM_TrainHotelScenario)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
