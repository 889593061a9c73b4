#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "flowgnn/curation.hpp"
#include "flowgnn/pipeline.hpp"
#include "flowgnn/synth.hpp"

using flowgnn::AttackType;

namespace {

std::vector<flowgnn::RawFlow> small_corpus(std::uint64_t seed) {
  flowgnn::synth::SynthConfig c;
  c.seed = seed;
  c.n_benign = 600;
  c.n_ddos = 200;
  c.n_scan = 200;
  c.n_password = 100;
  c.n_dos = 101;
  return flowgnn::synth::generate(c);
}

}  // namespace

TEST(StratifiedSplit, PerClassShares) {
  const auto flows = small_corpus(1);
  const auto s = flowgnn::stratified_split(flows, 0.7, 5);
  EXPECT_EQ(s.train.size() + s.test.size(), flows.size());
  const auto all = flowgnn::summarize(flows);
  const auto tr = flowgnn::summarize(s.train);
  for (int c = 0; c < flowgnn::kNumAttackTypes; ++c) {
    EXPECT_EQ(tr.counts[c], static_cast<std::uint64_t>(std::llround(0.7 * static_cast<double>(all.counts[c])))) << c;
  }
  EXPECT_EQ(tr[AttackType::Dos], 71u);  // 70.7 rounds up
}

TEST(StratifiedSplit, PreservesOrderAndIsDeterministic) {
  const auto flows = small_corpus(2);
  const auto a = flowgnn::stratified_split(flows, 0.7, 5);
  const auto b = flowgnn::stratified_split(flows, 0.7, 5);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  // Each half is a subsequence of the input.
  for (const auto* half : {&a.train, &a.test}) {
    auto it = flows.begin();
    for (const auto& f : *half) {
      it = std::find(it, flows.end(), f);
      ASSERT_NE(it, flows.end());
      ++it;
    }
  }
  EXPECT_NE(flowgnn::stratified_split(flows, 0.7, 6).train, a.train);
}

TEST(StratifiedSplit, Extremes) {
  const auto flows = small_corpus(3);
  EXPECT_TRUE(flowgnn::stratified_split(flows, 0.0, 1).train.empty());
  EXPECT_TRUE(flowgnn::stratified_split(flows, 1.0, 1).test.empty());
  EXPECT_THROW(flowgnn::stratified_split(flows, 1.5, 1), flowgnn::Error);
}

TEST(Experiment, DeterministicEndToEnd) {
  const auto flows = small_corpus(4);
  flowgnn::ExperimentConfig c;
  c.train.seed = 11;
  c.train.epochs = 20;
  c.train.hidden = 16;
  const auto a = flowgnn::run_experiment(flows, c);
  const auto b = flowgnn::run_experiment(flows, c);
  EXPECT_EQ(a.model.params, b.model.params);
  EXPECT_EQ(a.metrics.confusion, b.metrics.confusion);
  EXPECT_EQ(a.train_flows + a.test_flows, flows.size());
  std::uint64_t evaluated = 0;
  for (auto s : a.metrics.supports) evaluated += s;
  EXPECT_EQ(evaluated, a.test_flows);
  EXPECT_GT(a.metrics.weighted_average, 0.5);
}
