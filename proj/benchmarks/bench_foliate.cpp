#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "foliate/inversion.hpp"
#include "foliate/presets.hpp"
#include "foliate/quantize.hpp"
#include "foliate/symbols.hpp"
#include "foliate/transform.hpp"

using namespace foliate;

namespace {

const Geometry& disk(const std::string& name) {
    static const Geometry euc = named_geometry("euclidean"), conf = named_geometry("conformal");
    return name == "conformal" ? conf : euc;
}

void BM_ShootRay(benchmark::State& st) {
    const Geometry& geo = disk(st.range(0) ? "conformal" : "euclidean");
    auto w = WeightSpec::constant();
    FoliationFrame frame(geo);
    RayGrid grid = make_ray_grid(geo.fol.c, 8, -0.3, 0.3, 8, 1.0, 4);
    auto l = launch(frame, grid, 4, 4, 2, 1);
    for (auto _ : st) benchmark::DoNotOptimize(ray_nodes(geo, w, l->z, l->v, 5e-3));
}
BENCHMARK(BM_ShootRay)->Arg(0)->Arg(1);

void BM_Sinogram(benchmark::State& st) {
    const Geometry& geo = disk("euclidean");
    auto w = WeightSpec::constant();
    const int n = static_cast<int>(st.range(0));
    RayGrid grid = make_ray_grid(geo.fol.c, n, -0.3, 0.3, n, 1.0, n / 4);
    ScalarField f = [](Vec2 z) { return std::exp(-4.0 * (z.x * z.x + z.y * z.y)); };
    for (auto _ : st) benchmark::DoNotOptimize(sinogram(geo, w, f, grid, 5e-3));
    st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(n) * n * (n / 4) * 2);
}
BENCHMARK(BM_Sinogram)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_NumericSymbol(benchmark::State& st) {
    const Geometry& geo = disk("conformal");
    NormalOpConfig cfg;
    cfg.F = 1.0;
    cfg.chi = CutoffChi::gaussian(FoliationFrame(geo).alpha_boundary(0.0), 1e-10);
    auto w = WeightSpec::constant();
    const double r = static_cast<double>(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(numeric_symbol({0, 0}, r, 0.3 * r, cfg, geo, w));
}
BENCHMARK(BM_NumericSymbol)->Arg(4)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_QuantizeLeft(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    const Rect frame{0.05, 0.95, -1.0, 1.0};
    auto a = sample_frequency_symbol(frame, n, n, [](Vec2, double xi, double eta) {
        return cplx(boundary_symbol_closed(xi, eta, 1.0, 1.0));
    });
    std::mt19937 rng(1);
    std::normal_distribution<double> n01;
    GridField f(frame, n, n);
    for (double& v : f.values) v = n01(rng);
    for (auto _ : st) benchmark::DoNotOptimize(quantize_left(a, f));
}
BENCHMARK(BM_QuantizeLeft)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_RayBundle(benchmark::State& st) {
    Scene scene = make_scene(disk("euclidean"), static_cast<int>(st.range(0)), 8, 1.0, 1e-2);
    for (auto _ : st) benchmark::DoNotOptimize(RayBundle(scene, 33));
}
BENCHMARK(BM_RayBundle)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_LocalReconstruct(benchmark::State& st) {
    Scene scene = make_scene(disk("euclidean"), 20, 8, 1.0, 1e-2);
    RayBundle bundle(scene, 25);
    const double c = scene.c();
    auto truth = AdaptedProfile::sampled(-c, 0.0, 25, [c](double s) { return std::exp(-std::pow((s + 0.5 * c) / (0.15 * c), 2)); },
                                         AdaptedProfile::Outside::Zero);
    Sinogram data = restricted_forward(truth, bundle);
    InversionConfig cfg;
    cfg.profile_nodes = 25;
    for (auto _ : st) benchmark::DoNotOptimize(local_reconstruct(data, bundle, scene, cfg));
}
BENCHMARK(BM_LocalReconstruct)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
