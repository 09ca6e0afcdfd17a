// Serial reference vs OpenMP kernel timings. The second argument of every
// benchmark selects the policy: 0 = Serial, 1 = Parallel.
#include <numeric>
#include <random>

#include <benchmark/benchmark.h>

#include "avdelay/baselines.hpp"
#include "avdelay/fusion.hpp"
#include "avdelay/geo.hpp"
#include "avdelay/lstm.hpp"
#include "avdelay/synth.hpp"

using namespace avdelay;

namespace {

Exec policy(const benchmark::State& st) { return st.range(1) ? Exec::Parallel : Exec::Serial; }

seq::SequenceDataset random_sequences(std::size_t s, std::size_t n, std::size_t m) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  seq::SequenceDataset ds;
  ds.n = n;
  ds.m = m;
  ds.x.resize(s * n * m);
  for (auto& v : ds.x) v = u(rng);
  ds.y.resize(s);
  for (auto& v : ds.y) v = u(rng);
  ds.last_ts.assign(s, 0);
  return ds;
}

const synth::Scenario& scenario() {
  static const synth::Scenario s = [] {
    synth::ScenarioConfig c;
    c.days = 1;
    c.flights_per_day = 600;
    return synth::generate(c);
  }();
  return s;
}

void BM_LstmBatchGradient(benchmark::State& st) {
  const std::size_t n = static_cast<std::size_t>(st.range(0));
  const auto ds = random_sequences(64, n, 40);
  lstm::StackedLstm model({n, 40, 16, 16, 0.2});
  model.initialize(1);
  std::vector<std::size_t> batch(64);
  std::iota(batch.begin(), batch.end(), 0);
  for (auto _ : st) {
    auto r = lstm::batch_loss_gradient(model, ds, batch, ds.y, {}, policy(st));
    benchmark::DoNotOptimize(r.grad.data());
  }
  st.SetItemsProcessed(st.iterations() * 64);
}
BENCHMARK(BM_LstmBatchGradient)->ArgsProduct({{30, 120}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_LstmPredict(benchmark::State& st) {
  const std::size_t n = static_cast<std::size_t>(st.range(0));
  const auto ds = random_sequences(256, n, 40);
  lstm::StackedLstm model({n, 40, 16, 16, 0.2});
  model.initialize(1);
  for (auto _ : st) benchmark::DoNotOptimize(lstm::predict(model, ds, policy(st)));
  st.SetItemsProcessed(st.iterations() * 256);
}
BENCHMARK(BM_LstmPredict)->ArgsProduct({{30, 120}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_ForestFit(benchmark::State& st) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  baselines::Mat x(static_cast<Eigen::Index>(st.range(0)), 60);
  for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = nd(rng);
  std::vector<double> y(static_cast<std::size_t>(x.rows()));
  for (auto& v : y) v = nd(rng);
  baselines::ForestConfig cfg;
  cfg.n_trees = 16;
  for (auto _ : st) benchmark::DoNotOptimize(baselines::forest_fit(x, y, cfg, policy(st)));
}
BENCHMARK(BM_ForestFit)->ArgsProduct({{2000}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_DistancesFrom(benchmark::State& st) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lat(-80, 80), lon(-180, 180);
  std::vector<geo::GeoPoint> pts(static_cast<std::size_t>(st.range(0)));
  for (auto& p : pts) p = {lat(rng), lon(rng)};
  std::vector<double> out(pts.size());
  for (auto _ : st) {
    geo::distances_from({33.64, -84.43}, pts, out, policy(st));
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_DistancesFrom)->ArgsProduct({{1 << 20}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_BuildDt(benchmark::State& st) {
  const auto& s = scenario();
  const fusion::StationIndex stations(s.data.airports);
  const fusion::FusionConfig cfg;
  for (auto _ : st) benchmark::DoNotOptimize(fusion::build_dt(s.data.trajectories, s.data.weather, stations, cfg, policy(st)));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(s.data.trajectories.size()));
}
BENCHMARK(BM_BuildDt)->ArgsProduct({{0}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
