#include <benchmark/benchmark.h>

#include <cmath>

#include "uncnet/network.hpp"
#include "uncnet/options_iv.hpp"
#include "uncnet/pipeline.hpp"
#include "uncnet/simulate.hpp"
#include "uncnet/tvp_var.hpp"

using namespace uncnet;

namespace {

OptionChain make_chain(double spacing) {
  OptionChain chain;
  chain.underlying_id = "BM";
  chain.quote_date = Date::from_ymd(2020, 1, 2);
  chain.expiry_date = chain.quote_date.plus_days(30);
  chain.spot = 100;
  chain.risk_free_rate = 0.02;
  const double years = 30.0 / 365.0;
  const double sd = 0.2 * std::sqrt(years);
  for (double k = std::floor(100 * std::exp(-5 * sd) / spacing) * spacing;
       k <= 100 * std::exp(5 * sd); k += spacing)
    for (OptionKind kind : {OptionKind::call, OptionKind::put}) {
      const double price = bs_price(100, k, 0.02, years, 0.2, kind);
      chain.quotes.push_back({k, price, price, kind});
    }
  return chain;
}

void bm_chain_vix(benchmark::State& state) {
  const OptionChain chain = make_chain(100.0 / state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(chain_vix(chain));
  state.SetLabel(std::to_string(chain.quotes.size() / 2) + " strikes");
}
BENCHMARK(bm_chain_vix)->Arg(200)->Arg(400);

void bm_posterior_update(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const VarSimResult sim = simulate_var(preset_constant(n, 600, 7), 10);
  TvpVarSpec spec;
  spec.lags = 2;
  const MinnesotaPrior prior = minnesota_prior(sim.panel.values, spec);
  const RegressionData design = lag_design(sim.panel.values, 2);
  const int rows = static_cast<int>(design.targets.rows());
  const KernelWeights w = kernel_weights(rows, rows / 2, std::sqrt(rows));
  for (auto _ : state)
    benchmark::DoNotOptimize(posterior_update(design, w.weights, prior, 2));
}
BENCHMARK(bm_posterior_update)->Arg(6)->Arg(11);

void bm_sample_posterior(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const VarSimResult sim = simulate_var(preset_constant(n, 600, 7), 10);
  TvpVarSpec spec;
  spec.lags = 2;
  spec.n_draws = 100;
  const MinnesotaPrior prior = minnesota_prior(sim.panel.values, spec);
  const RegressionData design = lag_design(sim.panel.values, 2);
  const int rows = static_cast<int>(design.targets.rows());
  const KernelWeights w = kernel_weights(rows, rows / 2, std::sqrt(rows));
  const PosteriorParams post = posterior_update(design, w.weights, prior, 2);
  std::uint64_t seed = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(sample_posterior(post, spec, ++seed));
  state.SetLabel("100 draws");
}
BENCHMARK(bm_sample_posterior)->Arg(6)->Arg(11);

void bm_gfevd_stats(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const VarSimResult sim = simulate_var(preset_constant(n, 400, 3), 10);
  TvpVarSpec spec;
  spec.lags = 2;
  spec.n_draws = 1;
  const PosteriorDrawSet set = estimate_point(sim.panel.values, spec, 200);
  const PosteriorDraw& draw = set.draws.front();
  for (auto _ : state) {
    const AdjacencyMatrix adj =
        row_normalize(gfevd(vma_coefficients(draw, 10), draw.sigma));
    benchmark::DoNotOptimize(directional(adj));
  }
}
BENCHMARK(bm_gfevd_stats)->Arg(6)->Arg(11);

void bm_estimate_network_series(benchmark::State& state) {
  const VarSimResult sim = simulate_var(preset_constant(6, 300, 5), 10);
  TvpVarSpec spec;
  spec.lags = 2;
  spec.n_draws = 50;
  for (auto _ : state)
    benchmark::DoNotOptimize(estimate_network_series(sim.panel, spec, 10));
  state.SetLabel("N=6, T=300, 50 draws/point");
}
BENCHMARK(bm_estimate_network_series)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
