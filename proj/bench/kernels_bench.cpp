// Serial reference kernels against their OpenMP counterparts on a tripartite
// array the size of the compact default run.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "iit/kernels.hpp"

namespace k = iit::kernels;
using iit::kernels::cplx;

namespace {

const k::Shape3 kShape{{43, 233, 425}};

std::vector<cplx> filled(std::size_t n, double phase) {
  std::vector<cplx> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::polar(1.0 / (1.0 + i % 97), phase * i);
  return v;
}

template <bool Parallel>
void BM_shear(benchmark::State& st) {
  const auto in = filled(kShape.size(), 0.01);
  std::vector<cplx> out(in.size());
  std::vector<std::int64_t> shift(kShape.n[1], 0);  // identity shift keeps every sample on-grid
  for (auto _ : st) {
    std::fill(out.begin(), out.end(), cplx{});
    const bool ok = Parallel ? k::parallel::shear(in, out, kShape, 1, 2, shift, 1e-14)
                             : k::serial::shear(in, out, kShape, 1, 2, shift, 1e-14);
    benchmark::DoNotOptimize(ok);
  }
  st.SetItemsProcessed(st.iterations() * kShape.size());
}

template <bool Parallel>
void BM_add_outer(benchmark::State& st) {
  const auto f = filled(kShape.n[0], 0.1);
  const auto g = filled(kShape.n[1], 0.2);
  const auto h = filled(kShape.n[2], 0.3);
  std::vector<cplx> out(kShape.size());
  for (auto _ : st) {
    if (Parallel) {
      k::parallel::add_outer(out, {0.5, 0.0}, f, g, h);
    } else {
      k::serial::add_outer(out, {0.5, 0.0}, f, g, h);
    }
    benchmark::ClobberMemory();
  }
  st.SetItemsProcessed(st.iterations() * kShape.size());
}

template <bool Parallel>
void BM_project_axis(benchmark::State& st) {
  const auto psi = filled(kShape.size(), 0.01);
  const auto plus = filled(kShape.n[0], 0.1);
  const auto minus = filled(kShape.n[0], 0.2);
  for (auto _ : st) {
    auto c = Parallel ? k::parallel::project_axis(psi, kShape, 0, plus, minus, 0.1)
                      : k::serial::project_axis(psi, kShape, 0, plus, minus, 0.1);
    benchmark::DoNotOptimize(c.plus.data());
  }
  st.SetItemsProcessed(st.iterations() * kShape.size());
}

template <bool Parallel>
void BM_marginal(benchmark::State& st) {
  const auto psi = filled(kShape.size(), 0.01);
  for (auto _ : st) {
    auto m = Parallel ? k::parallel::marginal(psi, kShape, 1, 0.1)
                      : k::serial::marginal(psi, kShape, 1, 0.1);
    benchmark::DoNotOptimize(m.data());
  }
  st.SetItemsProcessed(st.iterations() * kShape.size());
}

template <bool Parallel>
void BM_dot(benchmark::State& st) {
  const auto a = filled(kShape.size(), 0.01);
  const auto b = filled(kShape.size(), 0.02);
  for (auto _ : st) {
    benchmark::DoNotOptimize(Parallel ? k::parallel::dot(a, b) : k::serial::dot(a, b));
  }
  st.SetItemsProcessed(st.iterations() * kShape.size());
}

template <bool Parallel>
void BM_weighted_shift(benchmark::State& st) {
  const std::size_t n = 425;
  std::vector<double> w(233, 1.0 / 233);
  std::vector<std::int64_t> shift(233);
  for (std::size_t i = 0; i < shift.size(); ++i) shift[i] = static_cast<std::int64_t>(i) - 116;
  const auto carrier = filled(n, 0.05);
  std::vector<cplx> out(n);
  for (auto _ : st) {
    if (Parallel) {
      k::parallel::weighted_shift(w, shift, carrier, out);
    } else {
      k::serial::weighted_shift(w, shift, carrier, out);
    }
    benchmark::ClobberMemory();
  }
}

}  // namespace

BENCHMARK(BM_shear<false>)->Name("shear/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_shear<true>)->Name("shear/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_add_outer<false>)->Name("add_outer/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_add_outer<true>)->Name("add_outer/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_project_axis<false>)->Name("project_axis/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_project_axis<true>)->Name("project_axis/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_marginal<false>)->Name("marginal/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_marginal<true>)->Name("marginal/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_dot<false>)->Name("dot/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_dot<true>)->Name("dot/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_weighted_shift<false>)->Name("weighted_shift/serial");
BENCHMARK(BM_weighted_shift<true>)->Name("weighted_shift/parallel");

BENCHMARK_MAIN();
