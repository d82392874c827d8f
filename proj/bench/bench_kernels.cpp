// Parallel kernels against their serial references. Thread count comes
// from EHRLAB_THREADS or the OpenMP default.

#include <benchmark/benchmark.h>

#include <string>

#include "ehrlab/corpus.hpp"
#include "ehrlab/parallel.hpp"
#include "ehrlab/reference.hpp"

using namespace ehrlab;

namespace {

struct Profiles {
  GridFunction f, g, h;
  CorrelationModel m;
};

const Profiles& profiles() {
  static const Profiles p = [] {
    Rng rng(11);
    const CorrelationModel m = build_model(0.2, 0.5);
    GridFunction f = smooth_bump_profile(rng), g = smooth_bump_profile(rng);
    GridFunction h = ehrhard_hull(f, g, m).h;
    return Profiles{std::move(f), std::move(g), std::move(h), m};
  }();
  return p;
}

template <bool Serial>
void bm_psd_scan(benchmark::State& st) {
  const JSpec s = JSpec::ehrhard_time_varying(build_model(0.3, 0.4), 40.0, 0.2);
  const ScanDomain d = ScanDomain::standard(0.2, static_cast<int>(st.range(0)), 9);
  for (auto _ : st) {
    ScanReport r = Serial ? reference::psd_scan(s, d) : psd_scan(s, d);
    benchmark::DoNotOptimize(r);
  }
}

template <bool Serial>
void bm_ou_apply(benchmark::State& st) {
  const GridFunction& f = profiles().f;
  const QuadRule rule = hermite_rule(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    GridFunction r = Serial ? reference::ou_apply(f, 0.3, 0.8, rule) : ou_apply(f, 0.3, 0.8, rule);
    benchmark::DoNotOptimize(r);
  }
}

template <bool Serial>
void bm_sup_convolution(benchmark::State& st) {
  const Profiles& p = profiles();
  for (auto _ : st) {
    auto r = Serial ? reference::sup_convolution(p.f, p.g, 0.4, SupScore::quantile)
                    : sup_convolution(p.f, p.g, 0.4, SupScore::quantile);
    benchmark::DoNotOptimize(r);
  }
}

template <bool Serial>
void bm_triple_slack(benchmark::State& st) {
  const Profiles& p = profiles();
  for (auto _ : st) {
    SlackReport r = Serial ? reference::triple_slack(p.f, p.g, p.h, p.m)
                           : triple_slack(p.f, p.g, p.h, p.m);
    benchmark::DoNotOptimize(r);
  }
}

}  // namespace

BENCHMARK(bm_psd_scan<true>)->Name("psd_scan/serial")->Arg(17)->Arg(33)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_psd_scan<false>)->Name("psd_scan/parallel")->Arg(17)->Arg(33)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_ou_apply<true>)->Name("ou_apply/serial")->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_ou_apply<false>)->Name("ou_apply/parallel")->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_sup_convolution<true>)->Name("sup_convolution/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(bm_sup_convolution<false>)->Name("sup_convolution/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(bm_triple_slack<true>)->Name("triple_slack/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(bm_triple_slack<false>)->Name("triple_slack/parallel")->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  apply_thread_env();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::AddCustomContext("threads", std::to_string(max_threads()));
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
}
