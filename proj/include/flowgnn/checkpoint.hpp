#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowgnn/egraphsage.hpp"
#include "flowgnn/error.hpp"

namespace flowgnn::sage {

inline constexpr std::string_view kCheckpointFormat = "flowgnn-checkpoint";
inline constexpr int kCheckpointVersion = 1;

namespace detail {

template <typename Tensor>
nlohmann::ordered_json tensor_to_json(const Tensor& t) {
  nlohmann::ordered_json j;
  j["rows"] = t.rows();
  j["cols"] = t.cols();
  j["data"] = std::vector<double>(t.data(), t.data() + t.size());
  return j;
}

template <typename Tensor>
void tensor_from_json(const nlohmann::json& j, Tensor& t, const char* name) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size()) {
    throw Error(ErrorCode::DimensionMismatch, std::string("tensor ") + name + " data length does not match shape");
  }
  if constexpr (Tensor::ColsAtCompileTime == 1) {
    if (cols != 1) throw Error(ErrorCode::DimensionMismatch, std::string("tensor ") + name + " must be a vector");
    t.resize(rows);
  } else {
    t.resize(rows, cols);
  }
  std::copy(data.begin(), data.end(), t.data());
}

}  // namespace detail

/// JSON checkpoint: format tag, version, dims, seed, and every tensor in
/// row-major order. Doubles are written in shortest round-trip form.
inline nlohmann::ordered_json checkpoint_to_json(const ModelParams& p, std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["seed"] = seed;
  j["dims"] = {{"node_dim", p.dims.node_dim},
               {"edge_dim", p.dims.edge_dim},
               {"hidden", p.dims.hidden},
               {"classes", p.dims.classes}};
  auto& tensors = j["tensors"];
  p.for_each_tensor([&](const auto& t, const char* name) { tensors[name] = detail::tensor_to_json(t); });
  return j;
}

struct Checkpoint {
  ModelParams params;
  std::uint64_t seed = 0;
};

/// Parses and shape-checks a checkpoint. Shape errors are DimensionMismatch;
/// anything else malformed is InvalidConfig.
inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kCheckpointFormat) {
      throw Error(ErrorCode::InvalidConfig, "not a flowgnn checkpoint");
    }
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw Error(ErrorCode::InvalidConfig, "unsupported checkpoint version");
    }
    Checkpoint c;
    c.seed = j.at("seed").get<std::uint64_t>();
    const auto& d = j.at("dims");
    c.params.dims.node_dim = d.at("node_dim").get<int>();
    c.params.dims.edge_dim = d.at("edge_dim").get<int>();
    c.params.dims.hidden = d.at("hidden").get<int>();
    c.params.dims.classes = d.at("classes").get<int>();
    const auto& tensors = j.at("tensors");
    c.params.for_each_tensor([&](auto& t, const char* name) { detail::tensor_from_json(tensors.at(name), t, name); });
    c.params.validate(c.params.dims.node_dim, c.params.dims.edge_dim);
    if (!c.params.all_finite()) throw Error(ErrorCode::InvalidConfig, "checkpoint holds non-finite values");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("malformed checkpoint: ") + e.what());
  }
}

}  // namespace flowgnn::sage
