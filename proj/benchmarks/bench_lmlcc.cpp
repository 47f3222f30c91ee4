#include <benchmark/benchmark.h>

#include <random>

#include "lmlcc/diffkit/ops.hpp"
#include "lmlcc/huwindow/window.hpp"
#include "lmlcc/metrics/metrics.hpp"
#include "lmlcc/network/trainer.hpp"
#include "lmlcc/phantom/phantom.hpp"

using namespace lmlcc;

namespace {

diff::Tensor<float> random_tensor(diff::Shape shape, std::uint64_t seed) {
  diff::Tensor<float> t(std::move(shape));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  for (auto& v : t.storage()) v = u(rng);
  return t;
}

// Args: batch, in channels, out channels, side.
void BM_Conv3dForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto ci = static_cast<std::size_t>(state.range(1));
  const auto co = static_cast<std::size_t>(state.range(2));
  const auto s = static_cast<std::size_t>(state.range(3));
  const auto x = diff::constant(random_tensor({n, ci, s, s, s}, 1));
  const auto k = diff::constant(random_tensor({co, ci, 3, 3, 3}, 2));
  const auto b = diff::constant(random_tensor({co}, 3));
  for (auto _ : state) benchmark::DoNotOptimize(diff::conv3d(x, k, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * co * s * s * s * ci * 27));
}
BENCHMARK(BM_Conv3dForward)->Args({32, 1, 4, 16})->Args({32, 4, 8, 8})->Unit(benchmark::kMillisecond);

void BM_Conv3dBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto ci = static_cast<std::size_t>(state.range(1));
  const auto co = static_cast<std::size_t>(state.range(2));
  const auto s = static_cast<std::size_t>(state.range(3));
  const auto x = diff::parameter(random_tensor({n, ci, s, s, s}, 1), "x");
  const auto k = diff::parameter(random_tensor({co, ci, 3, 3, 3}, 2), "k");
  const auto b = diff::parameter(random_tensor({co}, 3), "b");
  for (auto _ : state) {
    x->zero_grad();
    k->zero_grad();
    b->zero_grad();
    diff::backward(diff::sum(diff::conv3d(x, k, b)));
    benchmark::DoNotOptimize(k->grad.data().data());
  }
}
BENCHMARK(BM_Conv3dBackward)->Args({32, 1, 4, 16})->Args({32, 4, 8, 8})->Unit(benchmark::kMillisecond);

void BM_WindowBranches(benchmark::State& state) {
  const int n_branches = static_cast<int>(state.range(0));
  const auto cv = CutVector::make(n_branches, CutsInit::Random, CutsMode::Learnable, 5);
  auto x = random_tensor({32, 1, 16, 16, 16}, 4);
  for (auto& v : x.storage()) v = 0.5f * (v + 1.0f);
  const auto xv = diff::parameter(std::move(x), "x");
  std::vector<float> theta(cv.theta.begin(), cv.theta.end());
  const auto th = diff::parameter(diff::Tensor<float>(diff::Shape{theta.size()}, theta), "theta");
  for (auto _ : state) {
    th->zero_grad();
    xv->zero_grad();
    diff::backward(diff::sum(diff::window_branches(xv, th, cv.tau, false)));
    benchmark::DoNotOptimize(th->grad.data().data());
  }
}
BENCHMARK(BM_WindowBranches)->Arg(2)->Arg(3)->Arg(6)->Arg(11)->Unit(benchmark::kMillisecond);

// One Adam step on a batch of 32 phantom patches. Arg: branches (0 = backbone).
void BM_TrainStep(benchmark::State& state) {
  const auto patches = to_patches(generate_dataset(16, 16, 16, 7));
  std::vector<std::size_t> idx(patches.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const auto x = make_batch<float>(patches, idx);
  diff::Tensor<float> y(diff::Shape{patches.size()});
  for (std::size_t i = 0; i < patches.size(); ++i) y[i] = static_cast<float>(*patches[i].label);

  LmlccConfig c;
  c.backbone = BackboneConfig::desk(16);
  if (state.range(0) == 0) {
    c.mode = ModelMode::Backbone;
    c.n_branches = 1;
  } else {
    c.n_branches = static_cast<int>(state.range(0));
  }
  LmlccModel<float> model(c, 1);
  diff::Adam<float> opt(model.parameters(), diff::AdamHyper{1e-3});
  std::uint64_t step = 0;
  for (auto _ : state) {
    opt.zero_grad();
    diff::backward(diff::bce_loss(model.forward(x, ForwardOptions{true, step++}).probs, y));
    opt.step();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(patches.size()));
}
BENCHMARK(BM_TrainStep)->Arg(0)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_RocAuc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<int> labels(n);
  std::vector<double> probs(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = u(rng) < 0.5;
    probs[i] = u(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(roc_auc(labels, probs).auc);
}
BENCHMARK(BM_RocAuc)->Arg(112)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
