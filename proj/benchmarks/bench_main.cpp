#include <benchmark/benchmark.h>

#include <cmath>

#include "sympcae/architecture.hpp"
#include "sympcae/conv.hpp"
#include "sympcae/pde.hpp"
#include "sympcae/psd.hpp"
#include "sympcae/train.hpp"

using namespace sympcae;

namespace {

void BM_ConvForward1D(benchmark::State& st) {
  const ConvGeometry g{1, st.range(0), 1, 21, 1};
  ConvLift m(g, 4, 4, Orientation::Up);
  Rng rng(1);
  m.set_params(rng.uniform_vec(m.num_params(), -0.1, 0.1));
  const Vec x = rng.normal_vec(m.in_dim());
  for (auto _ : st) benchmark::DoNotOptimize(m.forward(x));
  st.SetItemsProcessed(st.iterations() * m.in_dim());
}
BENCHMARK(BM_ConvForward1D)->Arg(256)->Arg(1024);

void BM_ConvVjp1D(benchmark::State& st) {
  const ConvGeometry g{1, st.range(0), 1, 21, 1};
  ConvLift m(g, 4, 4, Orientation::Up);
  Rng rng(2);
  m.set_params(rng.uniform_vec(m.num_params(), -0.1, 0.1));
  const Vec x = rng.normal_vec(m.in_dim());
  const Vec w = rng.normal_vec(m.out_dim());
  Vec gt = Vec::Zero(m.num_params());
  for (auto _ : st) benchmark::DoNotOptimize(m.vjp(x, w, &gt));
}
BENCHMARK(BM_ConvVjp1D)->Arg(256)->Arg(1024);

void BM_ConvForward2D(benchmark::State& st) {
  const ConvGeometry g{2, st.range(0), st.range(0), 7, 7};
  ConvLift m(g, 4, 8, Orientation::Low);
  Rng rng(3);
  m.set_params(rng.uniform_vec(m.num_params(), -0.1, 0.1));
  const Vec x = rng.normal_vec(m.in_dim());
  for (auto _ : st) benchmark::DoNotOptimize(m.forward(x));
}
BENCHMARK(BM_ConvForward2D)->Arg(50)->Arg(100);

void BM_AutoencoderBatchGradient(benchmark::State& st) {
  ArchitectureSpec a;
  a.n1 = st.range(0);
  a.latent = 1;
  Rng rng(4);
  Autoencoder ae = build_autoencoder(a, rng);
  const Mat X = rng.normal_mat(ae.encoder.in_dim(), 16);
  ae.freeze_pooling(X.col(0));
  Vec g = Vec::Zero(ae.num_params());
  for (auto _ : st) {
    g.setZero();
    benchmark::DoNotOptimize(loss_autoencoder(ae, X, 1e-5, false, &g));
  }
  st.SetItemsProcessed(st.iterations() * X.cols());
}
BENCHMARK(BM_AutoencoderBatchGradient)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_PsdFit(benchmark::State& st) {
  Rng rng(5);
  const Mat X = rng.normal_mat(2 * st.range(0), st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(psd_fit(X, 3));
}
BENCHMARK(BM_PsdFit)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_WaveGenerate(benchmark::State& st) {
  PdeConfig c;
  c.kind = PdeKind::Wave;
  c.n = st.range(0);
  c.lo = 0.0;
  c.hi = 5.0;
  c.t_end = 5.0;
  c.nt = st.range(0);
  for (auto _ : st) benchmark::DoNotOptimize(generate(c));
}
BENCHMARK(BM_WaveGenerate)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_NlsMidpointStep(benchmark::State& st) {
  const Index n = st.range(0);
  const double dx = 4.0 * 3.141592653589793 / static_cast<double>(n);
  const NlsField f(n, 1.0, 1.5, dx);
  Vec z = Vec::Zero(2 * n);
  for (Index i = 0; i < n; ++i) z[n + i] = 1.4142135623730951 / std::cosh(-6.283185307179586 + i * dx);
  for (auto _ : st) benchmark::DoNotOptimize(implicit_midpoint_step(f, z, 0.01, 1e-12, 50));
}
BENCHMARK(BM_NlsMidpointStep)->Arg(128)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
