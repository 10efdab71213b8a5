#include <benchmark/benchmark.h>

#include "pai/cut.hpp"
#include "pai/ntk.hpp"
#include "pai/saliency.hpp"

namespace {

Eigen::MatrixXd gaussian(Eigen::Index d, Eigen::Index n, std::uint64_t seed) {
  pai::Rng64 r(seed);
  Eigen::MatrixXd b(d, n);
  for (Eigen::Index k = 0; k < b.size(); ++k) b.data()[k] = r.normal();
  return b;
}

void BM_CutNormExact(benchmark::State& state) {
  const auto b = gaussian(state.range(0), 64, 1);
  for (auto _ : state) benchmark::DoNotOptimize(pai::cut_norm_exact(b).value);
}
BENCHMARK(BM_CutNormExact)->Arg(12)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_CutNormHeuristic(benchmark::State& state) {
  const auto b = gaussian(state.range(0), state.range(0), 2);
  for (auto _ : state) {
    pai::Rng64 r(3);
    benchmark::DoNotOptimize(pai::cut_norm_heuristic(b, 32, r).value);
  }
}
BENCHMARK(BM_CutNormHeuristic)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_MakeMask(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto spec = pai::NetSpec::one_hidden(n, n, pai::Activation(pai::ActivationKind::Tanh));
  pai::Rng64 r(4);
  const auto params = pai::NetParams::sample(spec, r);
  Eigen::VectorXd x(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = r.normal();
  const auto factors = pai::snip_scores(spec, params, x, 0.0);
  for (auto _ : state) {
    pai::Rng64 tie(5);
    benchmark::DoNotOptimize(pai::make_mask(factors, 0.2, tie).popcount());
  }
}
BENCHMARK(BM_MakeMask)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_NtkGram(benchmark::State& state) {
  const auto width = static_cast<std::size_t>(state.range(0));
  const auto spec = pai::NetSpec::two_hidden(64, width, width, pai::Activation(pai::ActivationKind::Tanh));
  const auto net = pai::sample_pruned_network(pai::PaiMethod::Snip, spec, 0.2, 1.0, pai::Rng64(6));
  const auto X = gaussian(200, 64, 7);
  for (auto _ : state) benchmark::DoNotOptimize(pai::ntk_gram(spec, net.params, net.masks, X).K(0, 0));
}
BENCHMARK(BM_NtkGram)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
