#include <cmath>
#include <numbers>
#include <random>

#include <benchmark/benchmark.h>

#include "surfcomp/geometry/nn_index.hpp"
#include "surfcomp/geometry/sampling.hpp"
#include "surfcomp/metrics/metrics.hpp"
#include "surfcomp/render/rasterizer.hpp"

using namespace surfcomp;

namespace {

PointCloud uniform_cloud(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = Vec3(u(rng), u(rng), u(rng));
  return PointCloud(std::move(pts));
}

TriangleMesh sphere(int stacks, int slices) {
  std::vector<Vec3> v;
  std::vector<Triangle> t;
  for (int i = 0; i <= stacks; ++i) {
    const double phi = std::numbers::pi * i / stacks;
    for (int j = 0; j < slices; ++j) {
      const double theta = 2 * std::numbers::pi * j / slices;
      v.emplace_back(std::sin(phi) * std::cos(theta), std::sin(phi) * std::sin(theta), std::cos(phi));
    }
  }
  auto id = [&](int i, int j) { return static_cast<std::uint32_t>(i * slices + (j % slices)); };
  for (int i = 0; i < stacks; ++i) {
    for (int j = 0; j < slices; ++j) {
      t.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      t.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return TriangleMesh(std::move(v), std::move(t));
}

void BM_NnIndexBuild(benchmark::State& state) {
  const PointCloud c = uniform_cloud(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(NnIndex(c));
}
BENCHMARK(BM_NnIndexBuild)->Arg(2048)->Arg(16384);

void BM_NnQuery(benchmark::State& state) {
  const PointCloud c = uniform_cloud(static_cast<std::size_t>(state.range(0)), 1);
  const PointCloud q = uniform_cloud(1024, 2);
  const NnIndex index(c);
  for (auto _ : state) benchmark::DoNotOptimize(nearest_distances(q, index, Norm::kL2));
  state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_NnQuery)->Arg(2048)->Arg(16384);

void BM_Evaluate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const PointCloud p = uniform_cloud(n, 3);
  const PointCloud g = uniform_cloud(n, 4);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(p, g));
}
BENCHMARK(BM_Evaluate)->Arg(2048)->Arg(16384)->Unit(benchmark::kMillisecond);

void BM_Render(benchmark::State& state) {
  const TriangleMesh mesh = sphere(static_cast<int>(state.range(0)), 2 * static_cast<int>(state.range(0)));
  const CameraPose pose = CameraPose::look_at(Vec3(3, 1, 1), Vec3::Zero());
  for (auto _ : state) benchmark::DoNotOptimize(render(mesh, default_intrinsics(), pose));
  state.counters["triangles"] = static_cast<double>(mesh.triangles().size());
}
BENCHMARK(BM_Render)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_SampleSurface(benchmark::State& state) {
  const TriangleMesh mesh = sphere(64, 128);
  for (auto _ : state) benchmark::DoNotOptimize(sample_surface(mesh, 2048, 7));
}
BENCHMARK(BM_SampleSurface);

}  // namespace
BENCHMARK_MAIN();
