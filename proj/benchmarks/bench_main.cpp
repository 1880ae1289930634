// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "clifvqa/encoder.hpp"
#include "clifvqa/hashing.hpp"
#include "clifvqa/losses.hpp"
#include "clifvqa/metrics.hpp"
#include "clifvqa/model.hpp"
#include "clifvqa/sfe.hpp"
#include "clifvqa/spatial.hpp"
#include "clifvqa/trainer.hpp"

namespace clifvqa {
namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

FrameSequence random_video(std::size_t frames, std::size_t h, std::size_t w) {
  SplitMix64 rng(1);
  FrameSequence seq;
  for (std::size_t t = 0; t < frames; ++t) {
    Image img(h, w);
    for (auto& p : img.pixels()) p = static_cast<float>(rng.uniform());
    seq.frames.push_back(std::move(img));
    seq.timestamps.push_back(static_cast<double>(t));
  }
  return seq;
}

void BM_Srocc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_vector(n, 1), b = random_vector(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(srocc(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Srocc)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

void BM_Krocc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_vector(n, 3), b = random_vector(n, 4);
  for (auto _ : state) benchmark::DoNotOptimize(krocc(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Krocc)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

void BM_TotalLoss(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = random_vector(n, 5), g = random_vector(n, 6);
  for (auto _ : state) benchmark::DoNotOptimize(total_loss(p, g, 1.0, 1.0));
}
BENCHMARK(BM_TotalLoss)->Arg(12)->Arg(64);

void BM_SemanticExtraction(benchmark::State& state) {
  const MockEncoder enc(0, 512);
  const auto prompts = embed_prompts(enc, PromptBank::default_bank());
  const auto video = random_video(4, 448, 640);
  const auto jobs = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(extract_video_semantics(video, enc, prompts, {3, 3}, jobs));
  state.SetItemsProcessed(state.iterations() * 4);
}
BENCHMARK(BM_SemanticExtraction)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_FragmentSampling(benchmark::State& state) {
  const auto video = random_video(16, 360, 640);
  FragmentSpec spec;
  for (auto _ : state) {
    ++spec.seed;
    benchmark::DoNotOptimize(sample_fragments(video, spec));
  }
}
BENCHMARK(BM_FragmentSampling)->Unit(benchmark::kMicrosecond);

void BM_TinyBackboneForward(benchmark::State& state) {
  const TinyBackbone bb(0);
  const auto clip = sample_fragments(random_video(8, 224, 224), FragmentSpec{.frames = 8});
  for (auto _ : state) benchmark::DoNotOptimize(bb.forward(clip, nullptr));
}
BENCHMARK(BM_TinyBackboneForward)->Unit(benchmark::kMillisecond);

// One optimiser step over a batch of 12: forward, loss, backward, AdamW.
void BM_TrainStep(benchmark::State& state) {
  ModelConfig config;
  config.use_spatial = state.range(0) != 0;
  config.fragment_frames = 8;
  QualityModel model(config);
  SplitMix64 rng(9);
  std::vector<VideoSample> batch(12);
  const auto clip = sample_fragments(random_video(8, 224, 224), FragmentSpec{.frames = 8});
  for (auto& s : batch) {
    s.semantic = Tensor({config.semantic_channels, 16});
    for (auto& v : s.semantic.values()) v = rng.uniform();
    s.mos = rng.uniform();
    if (config.use_spatial) s.fragments = clip;
  }
  TrainConfig tc;
  AdamW opt(model.parameters(), tc);
  std::vector<double> pred(12), gt(12);
  std::vector<QualityModel::Tape> tapes(12);
  for (std::size_t i = 0; i < 12; ++i) gt[i] = batch[i].mos;
  for (auto _ : state) {
    model.zero_grad();
    for (std::size_t i = 0; i < 12; ++i) pred[i] = model.forward(batch[i], &tapes[i]);
    const auto loss = total_loss(pred, gt, 1.0, 1.0);
    for (std::size_t i = 0; i < 12; ++i) model.backward(tapes[i], loss.grad[i]);
    opt.step();
  }
}
BENCHMARK(BM_TrainStep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace clifvqa

BENCHMARK_MAIN();
