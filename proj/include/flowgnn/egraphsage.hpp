#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "flowgnn/error.hpp"
#include "flowgnn/flowgraph.hpp"
#include "flowgnn/random.hpp"

// Two-layer edge-aware GraphSAGE classifier with mean aggregation.
//
// Layer k (k = 1, 2), for every node v with sampled incident edges S(v):
//   m_v   = mean_{e in S(v)} [ h_u^{k-1} , x_e ]        u = other end of e
//   h_v^k = ReLU( W_k [ h_v^{k-1} , m_v ] + b_k )
// Edge (u -> v) logits:  W_c [ h_u^2 , h_v^2 ] + b_c
//
// Neighborhoods are drawn once per forward pass per node and shared by both
// layers. Gradients are exact for that frozen draw.

namespace flowgnn::sage {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct ModelDims {
  int node_dim = kNodeFeatureDim;
  int edge_dim = kEdgeFeatureDim;
  int hidden = 64;
  int classes = kNumAttackTypes;

  int layer1_in() const { return 2 * node_dim + edge_dim; }
  int layer2_in() const { return 2 * hidden + edge_dim; }
  int classifier_in() const { return 2 * hidden; }

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

struct ModelParams {
  ModelDims dims;
  Matrix w1, w2, wc;
  Vector b1, b2, bc;

  static ModelParams zeros(const ModelDims& d) {
    ModelParams p;
    p.dims = d;
    p.w1 = Matrix::Zero(d.hidden, d.layer1_in());
    p.b1 = Vector::Zero(d.hidden);
    p.w2 = Matrix::Zero(d.hidden, d.layer2_in());
    p.b2 = Vector::Zero(d.hidden);
    p.wc = Matrix::Zero(d.classes, d.classifier_in());
    p.bc = Vector::Zero(d.classes);
    return p;
  }

  /// Glorot-uniform weights, zero biases.
  static ModelParams glorot(const ModelDims& d, std::uint64_t seed) {
    auto p = zeros(d);
    Rng rng(stream_id(seed, 0x696e6974ull /* "init" */));
    for (Matrix* w : {&p.w1, &p.w2, &p.wc}) {
      const double a = std::sqrt(6.0 / static_cast<double>(w->rows() + w->cols()));
      for (Eigen::Index i = 0; i < w->size(); ++i) w->data()[i] = rng.uniform(-a, a);
    }
    return p;
  }

  /// Throws DimensionMismatch unless every tensor matches `dims` and the
  /// model consumes features of the given widths.
  void validate(int node_dim, int edge_dim) const {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::DimensionMismatch, what); };
    if (dims.node_dim != node_dim || dims.edge_dim != edge_dim) {
      fail("model expects node/edge dims " + std::to_string(dims.node_dim) + "/" + std::to_string(dims.edge_dim) +
           ", graph has " + std::to_string(node_dim) + "/" + std::to_string(edge_dim));
    }
    if (dims.hidden <= 0 || dims.classes <= 0) fail("hidden and class counts must be positive");
    if (w1.rows() != dims.hidden || w1.cols() != dims.layer1_in() || b1.size() != dims.hidden) fail("layer 1 shape");
    if (w2.rows() != dims.hidden || w2.cols() != dims.layer2_in() || b2.size() != dims.hidden) fail("layer 2 shape");
    if (wc.rows() != dims.classes || wc.cols() != dims.classifier_in() || bc.size() != dims.classes) {
      fail("classifier shape");
    }
  }

  /// Visits (tensor, name) pairs in a fixed order.
  template <typename Fn>
  void for_each_tensor(Fn&& fn) {
    fn(w1, "W1");
    fn(b1, "b1");
    fn(w2, "W2");
    fn(b2, "b2");
    fn(wc, "Wc");
    fn(bc, "bc");
  }
  template <typename Fn>
  void for_each_tensor(Fn&& fn) const {
    fn(w1, "W1");
    fn(b1, "b1");
    fn(w2, "W2");
    fn(b2, "b2");
    fn(wc, "Wc");
    fn(bc, "bc");
  }

  /// this += scale * other
  void axpy(double scale, const ModelParams& other) {
    w1 += scale * other.w1;
    b1 += scale * other.b1;
    w2 += scale * other.w2;
    b2 += scale * other.b2;
    wc += scale * other.wc;
    bc += scale * other.bc;
  }

  bool all_finite() const {
    bool ok = true;
    for_each_tensor([&](const auto& t, const char*) { ok = ok && t.allFinite(); });
    return ok;
  }

  friend bool operator==(const ModelParams& a, const ModelParams& b) {
    return a.dims == b.dims && a.w1 == b.w1 && a.b1 == b.b1 && a.w2 == b.w2 && a.b2 == b.b2 && a.wc == b.wc &&
           a.bc == b.bc;
  }
};

/// Which neighborhoods a forward pass draws: node v uses the stream
/// (seed, pass, key(v)).
struct Sampling {
  std::uint64_t seed = 0;
  std::uint64_t pass = 0;
  std::size_t max_neighbors = kDefaultMaxNeighbors;
};

/// Dense views of a FlowGraph, built once and reused across passes.
struct GraphTensors {
  const FlowGraph* graph = nullptr;
  Matrix h0;  // nodes x node_dim
  Matrix x;   // edges x edge_dim
  std::vector<std::uint32_t> src, dst;

  explicit GraphTensors(const FlowGraph& g) : graph(&g) {
    h0.resize(static_cast<Eigen::Index>(g.node_count()), kNodeFeatureDim);
    for (std::size_t v = 0; v < g.node_count(); ++v) {
      for (int i = 0; i < kNodeFeatureDim; ++i) h0(static_cast<Eigen::Index>(v), i) = g.node_features(v)[i];
    }
    x.resize(static_cast<Eigen::Index>(g.edge_count()), kEdgeFeatureDim);
    src.reserve(g.edge_count());
    dst.reserve(g.edge_count());
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
      const auto& edge = g.edges()[e];
      for (int i = 0; i < kEdgeFeatureDim; ++i) x(static_cast<Eigen::Index>(e), i) = edge.features[i];
      src.push_back(edge.src);
      dst.push_back(edge.dst);
    }
  }

  std::size_t nodes() const { return graph->node_count(); }
  std::size_t edges() const { return graph->edge_count(); }
};

/// Intermediate activations kept for the backward pass.
struct ForwardCache {
  std::vector<std::vector<std::uint32_t>> neighborhoods;
  Matrix x1, p1, h1;  // layer 1 input, pre-activation, output
  Matrix x2, p2, h2;  // layer 2
  Matrix z;           // edge embeddings
  Matrix logits;
};

namespace detail {

inline std::vector<std::vector<std::uint32_t>> draw_neighborhoods(const FlowGraph& g, const Sampling& s) {
  std::vector<std::vector<std::uint32_t>> out(g.node_count());
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    if (g.incident(v).size() <= s.max_neighbors) {
      out[v] = g.incident(v);
    } else {
      auto rng = node_stream(s.seed, s.pass, g.nodes()[v]);
      out[v] = sample_neighborhood(g, v, s.max_neighbors, rng);
    }
  }
  return out;
}

// Writes [h_v, mean_{e in S(v)} [h_u, x_e]] into row v of `out`.
inline void aggregate(const GraphTensors& t, const std::vector<std::vector<std::uint32_t>>& hoods, const Matrix& h,
                      Matrix& out) {
  const auto hd = h.cols();
  const auto ed = t.x.cols();
  out.resize(h.rows(), 2 * hd + ed);
  out.leftCols(hd) = h;
  out.rightCols(hd + ed).setZero();
  for (std::size_t v = 0; v < hoods.size(); ++v) {
    const auto& hood = hoods[v];
    if (hood.empty()) continue;
    const auto row = static_cast<Eigen::Index>(v);
    for (const auto e : hood) {
      const auto u = static_cast<Eigen::Index>(t.graph->opposite(e, v));
      out.row(row).segment(hd, hd) += h.row(u);
      out.row(row).segment(2 * hd, ed) += t.x.row(static_cast<Eigen::Index>(e));
    }
    out.row(row).rightCols(hd + ed) /= static_cast<double>(hood.size());
  }
}

// Adds the h_u part of d(mean message) back onto the neighbors.
inline void scatter_aggregate_grad(const GraphTensors& t, const std::vector<std::vector<std::uint32_t>>& hoods,
                                   const Matrix& d_in, Eigen::Index hd, Matrix& d_h) {
  for (std::size_t v = 0; v < hoods.size(); ++v) {
    const auto& hood = hoods[v];
    if (hood.empty()) continue;
    const double inv = 1.0 / static_cast<double>(hood.size());
    const auto row = static_cast<Eigen::Index>(v);
    for (const auto e : hood) {
      const auto u = static_cast<Eigen::Index>(t.graph->opposite(e, v));
      d_h.row(u) += inv * d_in.row(row).segment(hd, hd);
    }
  }
}

inline void dense_relu(const Matrix& x, const Matrix& w, const Vector& b, Matrix& pre, Matrix& out) {
  pre.noalias() = x * w.transpose();
  pre.rowwise() += b.transpose();
  out = pre.cwiseMax(0.0);
}

}  // namespace detail

inline Matrix forward(const GraphTensors& t, const ModelParams& params, const Sampling& sampling,
                      ForwardCache* cache = nullptr) {
  params.validate(static_cast<int>(t.h0.cols()), static_cast<int>(t.x.cols()));
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.neighborhoods = detail::draw_neighborhoods(*t.graph, sampling);

  detail::aggregate(t, c.neighborhoods, t.h0, c.x1);
  detail::dense_relu(c.x1, params.w1, params.b1, c.p1, c.h1);
  detail::aggregate(t, c.neighborhoods, c.h1, c.x2);
  detail::dense_relu(c.x2, params.w2, params.b2, c.p2, c.h2);

  const auto hd = c.h2.cols();
  c.z.resize(static_cast<Eigen::Index>(t.edges()), 2 * hd);
  for (std::size_t e = 0; e < t.edges(); ++e) {
    const auto row = static_cast<Eigen::Index>(e);
    c.z.row(row).head(hd) = c.h2.row(t.src[e]);
    c.z.row(row).tail(hd) = c.h2.row(t.dst[e]);
  }
  c.logits.noalias() = c.z * params.wc.transpose();
  c.logits.rowwise() += params.bc.transpose();
  return c.logits;
}

inline Matrix forward(const FlowGraph& graph, const ModelParams& params, const Sampling& sampling) {
  return forward(GraphTensors(graph), params, sampling);
}

/// Class index per edge from the graph's attack types.
inline std::vector<int> edge_labels(const FlowGraph& graph) {
  std::vector<int> labels;
  labels.reserve(graph.edge_count());
  for (const auto& e : graph.edges()) labels.push_back(class_index(e.attack_type));
  return labels;
}

namespace detail {

inline void check_labels(std::span<const int> labels, Eigen::Index rows, std::span<const double> weights,
                         Eigen::Index classes) {
  if (static_cast<Eigen::Index>(labels.size()) != rows) {
    throw Error(ErrorCode::LengthMismatch, "label count differs from logits rows");
  }
  if (static_cast<Eigen::Index>(weights.size()) != classes) {
    throw Error(ErrorCode::DimensionMismatch, "class weight count differs from class count");
  }
  for (int y : labels) {
    if (y < 0 || y >= classes) throw Error(ErrorCode::UnknownClass, "label " + std::to_string(y));
  }
}

}  // namespace detail

/// Row-wise softmax with max subtraction.
inline Matrix softmax(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    p.row(r) = (logits.row(r).array() - m).exp();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

/// Mean over rows of weight[y] * (logsumexp(row) - row[y]).
inline double loss(const Matrix& logits, std::span<const int> labels, std::span<const double> class_weights) {
  detail::check_labels(labels, logits.rows(), class_weights, logits.cols());
  if (logits.rows() == 0) return 0.0;
  double total = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    const double lse = m + std::log((logits.row(r).array() - m).exp().sum());
    const int y = labels[static_cast<std::size_t>(r)];
    total += class_weights[static_cast<std::size_t>(y)] * (lse - logits(r, y));
  }
  return total / static_cast<double>(logits.rows());
}

struct LossAndGradient {
  double loss = 0.0;
  ModelParams gradient;
};

/// Loss and its exact gradient for the neighborhoods drawn by `sampling`.
inline LossAndGradient gradients(const GraphTensors& t, const ModelParams& params, std::span<const int> labels,
                                 std::span<const double> class_weights, const Sampling& sampling) {
  ForwardCache c;
  forward(t, params, sampling, &c);
  detail::check_labels(labels, c.logits.rows(), class_weights, c.logits.cols());

  LossAndGradient out;
  out.loss = loss(c.logits, labels, class_weights);
  auto& g = out.gradient;
  g = ModelParams::zeros(params.dims);
  const auto edges = c.logits.rows();
  if (edges == 0) return out;

  Matrix d_logits = softmax(c.logits);
  for (Eigen::Index r = 0; r < edges; ++r) {
    const int y = labels[static_cast<std::size_t>(r)];
    d_logits(r, y) -= 1.0;
    d_logits.row(r) *= class_weights[static_cast<std::size_t>(y)] / static_cast<double>(edges);
  }

  g.wc.noalias() = d_logits.transpose() * c.z;
  g.bc = d_logits.colwise().sum().transpose();
  const Matrix d_z = d_logits * params.wc;

  const auto hd = c.h2.cols();
  Matrix d_h2 = Matrix::Zero(c.h2.rows(), hd);
  for (Eigen::Index e = 0; e < edges; ++e) {
    d_h2.row(t.src[static_cast<std::size_t>(e)]) += d_z.row(e).head(hd);
    d_h2.row(t.dst[static_cast<std::size_t>(e)]) += d_z.row(e).tail(hd);
  }

  // ReLU'(0) = 0.
  const Matrix d_p2 = d_h2.cwiseProduct((c.p2.array() > 0.0).cast<double>().matrix());
  g.w2.noalias() = d_p2.transpose() * c.x2;
  g.b2 = d_p2.colwise().sum().transpose();
  const Matrix d_x2 = d_p2 * params.w2;

  Matrix d_h1 = d_x2.leftCols(c.h1.cols());
  detail::scatter_aggregate_grad(t, c.neighborhoods, d_x2, c.h1.cols(), d_h1);

  const Matrix d_p1 = d_h1.cwiseProduct((c.p1.array() > 0.0).cast<double>().matrix());
  g.w1.noalias() = d_p1.transpose() * c.x1;
  g.b1 = d_p1.colwise().sum().transpose();
  return out;
}

/// Argmax per row, lowest index on ties.
inline std::vector<int> argmax_rows(const Matrix& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    int best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c) {
      if (logits(r, c) > logits(r, best)) best = static_cast<int>(c);
    }
    out[static_cast<std::size_t>(r)] = best;
  }
  return out;
}

inline std::vector<int> predict(const FlowGraph& graph, const ModelParams& params, const Sampling& sampling) {
  return argmax_rows(forward(graph, params, sampling));
}

struct TrainConfig {
  int epochs = 300;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
  std::vector<double> class_weights;  // empty: inverse class frequency
  std::size_t max_neighbors = kDefaultMaxNeighbors;
  int hidden = 64;
  int layers = 2;

  void validate() const {
    if (epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be >= 1");
    if (!(learning_rate > 0.0)) throw Error(ErrorCode::InvalidConfig, "learning_rate must be > 0");
    if (max_neighbors < 1) throw Error(ErrorCode::InvalidConfig, "max_neighbors must be >= 1");
    if (hidden < 1) throw Error(ErrorCode::InvalidConfig, "hidden must be >= 1");
    if (layers != 2) throw Error(ErrorCode::InvalidConfig, "only 2 message-passing layers are supported");
    for (double w : class_weights) {
      if (!(w > 0.0)) throw Error(ErrorCode::InvalidConfig, "class weights must be > 0");
    }
  }
};

/// Inverse class frequency over the classes present, scaled so the present
/// classes average 1. Absent classes get weight 1.
inline std::vector<double> inverse_frequency_weights(std::span<const int> labels, int classes) {
  std::vector<double> counts(static_cast<std::size_t>(classes), 0.0);
  for (int y : labels) {
    if (y < 0 || y >= classes) throw Error(ErrorCode::UnknownClass, "label " + std::to_string(y));
    counts[static_cast<std::size_t>(y)] += 1.0;
  }
  std::vector<double> weights(static_cast<std::size_t>(classes), 1.0);
  double sum = 0.0;
  int present = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] > 0) {
      weights[c] = 1.0 / counts[c];
      sum += weights[c];
      ++present;
    }
  }
  if (present == 0) return weights;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] > 0) weights[c] *= present / sum;
  }
  return weights;
}

struct TrainResult {
  ModelParams params;
  std::vector<double> loss_history;  // loss before each epoch's update
};

/// Full-batch gradient descent. Epoch i resamples neighborhoods with
/// pass = i, so the run is a pure function of (graph, config).
inline TrainResult train(const FlowGraph& graph, const TrainConfig& config, int classes = kNumAttackTypes) {
  config.validate();
  ModelDims dims;
  dims.hidden = config.hidden;
  dims.classes = classes;

  const GraphTensors tensors(graph);
  const auto labels = edge_labels(graph);
  const auto weights =
      config.class_weights.empty() ? inverse_frequency_weights(labels, classes) : config.class_weights;

  TrainResult result;
  result.params = ModelParams::glorot(dims, config.seed);
  result.loss_history.reserve(static_cast<std::size_t>(config.epochs));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const Sampling sampling{config.seed, static_cast<std::uint64_t>(epoch), config.max_neighbors};
    auto step = gradients(tensors, result.params, labels, weights, sampling);
    result.loss_history.push_back(step.loss);
    result.params.axpy(-config.learning_rate, step.gradient);
  }
  return result;
}

}  // namespace flowgnn::sage
