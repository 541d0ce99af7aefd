#include "levyns/basis.hpp"
#include "levyns/config.hpp"
#include "levyns/galerkin.hpp"
#include "levyns/harness.hpp"
#include "levyns/noise.hpp"
#include "levyns/rng.hpp"
#include "levyns/transport.hpp"

#include <benchmark/benchmark.h>

using namespace levyns;

namespace {

Problem make_problem(int n, int res) {
    RunConfig c;
    c.basis.n = n;
    c.basis.resolution = res;
    return build_problem(c);
}

} // namespace

static void BM_Philox(benchmark::State& st) {
    PathRng r(1, 0, Stream::Test);
    for (auto _ : st) benchmark::DoNotOptimize(r.normal());
}
BENCHMARK(BM_Philox);

static void BM_TorusBasis(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(build_basis(Provider::TorusFourier, st.range(0), 32, 2));
}
BENCHMARK(BM_TorusBasis)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_BoxBasis(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(build_basis(Provider::DirichletStokes, 8, st.range(0), 2));
}
BENCHMARK(BM_BoxBasis)->Arg(12)->Arg(17)->Unit(benchmark::kMillisecond);

static void BM_AssembleMass(benchmark::State& st) {
    const auto p = make_problem(st.range(0), 32);
    for (auto _ : st) benchmark::DoNotOptimize(assemble_mass(p.rho0, *p.basis));
}
BENCHMARK(BM_AssembleMass)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);

static void BM_Convection(benchmark::State& st) {
    const auto p = make_problem(st.range(0), 32);
    for (auto _ : st) benchmark::DoNotOptimize(convection_rhs(p.rho0, p.phi0, *p.basis));
}
BENCHMARK(BM_Convection)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);

static void BM_Transport(benchmark::State& st) {
    const auto p = make_problem(8, st.range(0));
    const SpectralVelocity v(*p.basis, p.phi0);
    for (auto _ : st) benchmark::DoNotOptimize(advance_density(p.rho0, v, 1.0 / 128));
}
BENCHMARK(BM_Transport)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

static void BM_GalerkinStep(benchmark::State& st) {
    const auto p = make_problem(st.range(0), 32);
    const auto noise = NoisePath::generate(p.noise, p.T, p.n_steps, 1, 0);
    const auto s0 = p.model->initial_state(p.rho0, p.phi0);
    const auto slice = noise.slice(0);
    for (auto _ : st) benchmark::DoNotOptimize(p.model->step(s0, slice));
}
BENCHMARK(BM_GalerkinStep)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);

static void BM_NoisePath(benchmark::State& st) {
    const auto p = make_problem(4, 16);
    std::uint64_t i = 0;
    for (auto _ : st) benchmark::DoNotOptimize(NoisePath::generate(p.noise, p.T, p.n_steps, 1, i++));
}
BENCHMARK(BM_NoisePath)->Unit(benchmark::kMicrosecond);

static void BM_SimulatePath(benchmark::State& st) {
    const auto p = make_problem(8, 32);
    std::uint64_t i = 0;
    for (auto _ : st) benchmark::DoNotOptimize(simulate_path(p, i++));
}
BENCHMARK(BM_SimulatePath)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
