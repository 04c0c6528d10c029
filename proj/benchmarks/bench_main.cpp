#include <benchmark/benchmark.h>

#include "sphreg/activations.hpp"
#include "sphreg/datasets.hpp"
#include "sphreg/network.hpp"
#include "sphreg/rotations.hpp"

using namespace sphreg;

static void BM_SexpForward(benchmark::State& state) {
  Rng rng(1);
  const Vector o = rng.normal_vector(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sexp_forward(o));
}
BENCHMARK(BM_SexpForward)->Arg(4)->Arg(16);

static void BM_SexpJacobian(benchmark::State& state) {
  Rng rng(2);
  const Vector p = sexp_forward(rng.normal_vector(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(sexp_jacobian(p));
}
BENCHMARK(BM_SexpJacobian)->Arg(4)->Arg(16);

static void BM_GeodesicDistance(benchmark::State& state) {
  Rng rng(3);
  const RotationMatrix a = quat_to_matrix(sample_uniform_so3(rng));
  const RotationMatrix b = quat_to_matrix(sample_uniform_so3(rng));
  for (auto _ : state) benchmark::DoNotOptimize(geodesic_distance(a, b));
}
BENCHMARK(BM_GeodesicDistance);

static void BM_SampleSo3(benchmark::State& state) {
  Rng rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(sample_uniform_so3(rng));
}
BENCHMARK(BM_SampleSo3);

static void BM_ModelForwardBackward(benchmark::State& state) {
  Rng rng(5);
  MlpModel m = MlpModel::create(
      default_architecture(3 * kCloudPoints, SphereKind::S3, ActivationKind::SphericalExp), rng);
  const SyntheticDataset data = gen_s3(rng, 1, 0.01);
  Gradients acc = m.zero_gradients();
  for (auto _ : state) {
    const ForwardResult f = m.forward(data.features[0]);
    const SampleLoss l = sample_loss(f, data.raw_targets[0], data.targets[0],
                                     RegressionLoss::Cosine, true, 1.0);
    benchmark::DoNotOptimize(m.accumulate_backward(l.grad_output, l.grad_logits, acc));
  }
}
BENCHMARK(BM_ModelForwardBackward);

static void BM_TrainEpoch(benchmark::State& state) {
  Rng rng(6);
  const SyntheticDataset data = gen_s3(rng, 1024, 0.01);
  const MlpModel m = MlpModel::create(
      default_architecture(3 * kCloudPoints, SphereKind::S3, ActivationKind::SphericalExp), rng);
  TrainConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train(m, data, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
