#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "flowgnn/egraphsage.hpp"
#include "flowgnn/features.hpp"
#include "flowgnn/flow.hpp"
#include "flowgnn/flowgraph.hpp"
#include "flowgnn/metrics.hpp"
#include "flowgnn/random.hpp"

namespace flowgnn {

struct Split {
  std::vector<RawFlow> train;
  std::vector<RawFlow> test;
};

/// Per attack type, round(train_fraction * n) flows go to training, chosen
/// uniformly. Both halves keep the input order.
inline Split stratified_split(const std::vector<RawFlow>& flows, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "train fraction must lie in [0, 1]");
  }
  std::array<std::vector<std::size_t>, kNumAttackTypes> by_class;
  for (std::size_t i = 0; i < flows.size(); ++i) by_class[class_index(flows[i].attack_type)].push_back(i);

  std::vector<bool> to_train(flows.size(), false);
  for (int c = 0; c < kNumAttackTypes; ++c) {
    auto& idx = by_class[c];
    Rng rng(stream_id(seed, 0x73706c74ull /* "splt" */, static_cast<std::uint64_t>(c)));
    shuffle(idx, rng);
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(idx.size())));
    for (std::size_t k = 0; k < n_train; ++k) to_train[idx[k]] = true;
  }
  Split out;
  for (std::size_t i = 0; i < flows.size(); ++i) (to_train[i] ? out.train : out.test).push_back(flows[i]);
  return out;
}

struct ExperimentConfig {
  NormCoefficients norm;
  sage::TrainConfig train;
  double train_fraction = 0.7;
  bool mask_ddos = true;
};

struct ExperimentResult {
  sage::TrainResult model;
  MetricsReport metrics;
  std::size_t train_flows = 0;
  std::size_t test_flows = 0;
};

/// Masks DDoS sources, splits 70/30 by class, trains on the training graph
/// and evaluates on a separately built test graph.
inline ExperimentResult run_experiment(const std::vector<RawFlow>& flows, const ExperimentConfig& config) {
  config.norm.validate();
  const auto seed = config.train.seed;
  const auto prepared = config.mask_ddos ? mask_ddos_sources(flows, seed) : flows;
  const auto split = stratified_split(prepared, config.train_fraction, seed);

  ExperimentResult result;
  result.train_flows = split.train.size();
  result.test_flows = split.test.size();
  const auto train_graph = build_graph(split.train, config.norm);
  result.model = sage::train(train_graph, config.train);

  const auto test_graph = build_graph(split.test, config.norm);
  const sage::Sampling sampling{seed, 0x74657374ull /* "test" */, config.train.max_neighbors};
  const auto predictions = sage::predict(test_graph, result.model.params, sampling);
  result.metrics = evaluate(predictions, sage::edge_labels(test_graph), result.model.params.dims.classes);
  return result;
}

}  // namespace flowgnn
