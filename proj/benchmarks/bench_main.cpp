#include <benchmark/benchmark.h>

#include "bopb/recovery.hpp"
#include "bopb/sampling.hpp"
#include "bopb/supportid.hpp"
#include "bopb/testbed.hpp"

using namespace bopb;

namespace {

struct Setup {
  BasisAssignment assign;
  SamplingPlan plan;
  TrialSignal signal;
  SampleSet y;
};

Setup make(std::size_t D, std::size_t N, std::size_t s, std::size_t m1, std::size_t m2, std::size_t m_ce) {
  auto assign = BasisAssignment::uniform(BasisKind::Fourier, D, N, D);
  Rng rng(42);
  auto signal = gen_trial(assign, s, rng);
  auto plan = draw_plan(assign, singleton_partition(D), m1, m2, m_ce, rng());
  auto y = acquire(plan, [&](std::span<const double> xi) { return signal(xi); });
  return {std::move(assign), std::move(plan), std::move(signal), std::move(y)};
}

void BM_EnergyScores(benchmark::State& state) {
  const auto s = static_cast<std::size_t>(state.range(0));
  const auto st = make(10, 64, s, 3 * s, s, 50 * s);
  const auto cands = entry_candidates(st.assign, st.plan.partition()[0], 1'000'000);
  const auto& block = st.plan.entry_block(0);
  for (auto _ : state) benchmark::DoNotOptimize(energy_scores(st.y.sid[0], block, cands, st.assign));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cands.size()));
}
BENCHMARK(BM_EnergyScores)->Arg(10)->Arg(25)->Arg(50);

void BM_PairingScores(benchmark::State& state) {
  const auto s = static_cast<std::size_t>(state.range(0));
  const auto st = make(10, 64, s, 3 * s, s, 50 * s);
  const auto& part = st.plan.partition();
  const auto cands = pairing_candidates(entry_candidates(st.assign, part[0], 1'000'000),
                                        entry_candidates(st.assign, part[1], 1'000'000), 64, 10);
  const auto& block = st.plan.pairing_block(1);
  for (auto _ : state)
    benchmark::DoNotOptimize(pairing_scores(st.y.sid[block.stage + st.plan.pairing_steps()], block, part[0],
                                            part[1], cands, st.assign));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cands.combined.size()));
}
BENCHMARK(BM_PairingScores)->Arg(10)->Arg(25);

void BM_PhiApplyCe(benchmark::State& state) {
  const auto s = static_cast<std::size_t>(state.range(0));
  const auto st = make(10, 64, s, 3 * s, s, 50 * s);
  for (auto _ : state) benchmark::DoNotOptimize(phi_apply_ce(st.plan, st.signal.coeffs));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s * 50 * s));
}
BENCHMARK(BM_PhiApplyCe)->Arg(10)->Arg(50)->Arg(100);

void BM_CosampFourier(benchmark::State& state) {
  const auto s = static_cast<std::size_t>(state.range(0));
  const auto st = make(10, 64, s, 3 * s, s, 50 * s);
  RecoveryConfig cfg;
  cfg.s = s;
  for (auto _ : state) benchmark::DoNotOptimize(cosamp(st.y.sid, st.y.ce, st.plan, cfg));
}
BENCHMARK(BM_CosampFourier)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

// The packaged benchmark_main archive carries LTO bytecode from another compiler release.
BENCHMARK_MAIN();
