#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "skilllab/numeric/autodiff.hpp"
#include "skilllab/numeric/normalizer.hpp"

namespace skilllab::nn {

using Rng = std::mt19937_64;
using NamedParams = std::vector<std::pair<std::string, Var>>;

// Fully connected ReLU network. Weights are stored in x out so a batch of
// row vectors maps as X * W + b.
class Mlp {
 public:
  struct Layer {
    Var weight;
    Var bias;
  };

  Mlp() = default;
  // `output_scale` shrinks the last layer's initial weights.
  Mlp(Index in, const std::vector<Index>& hidden, Index out, Rng& rng,
      double output_scale = 1.0);

  Index input_dim() const { return layers_.front().weight.rows(); }
  Index output_dim() const { return layers_.back().weight.cols(); }

  Var forward(const Var& x) const;
  // Graph-free evaluation with identical arithmetic.
  Matrix infer(const Matrix& x) const;

  std::vector<Var> parameters() const;
  void append_named(NamedParams& out, const std::string& prefix) const;
  // Deep copy with fresh parameter nodes.
  Mlp clone() const;

 private:
  std::vector<Layer> layers_;
};

// Parameter checkpoints: {name: {shape: [r, c], data: [...]}} with running
// normalizers stored under the reserved kNormalizerKey.
inline constexpr const char* kNormalizerKey = "__normalizers__";

nlohmann::json save_checkpoint(
    const NamedParams& params,
    const std::vector<std::pair<std::string, const RunningNormalizer*>>&
        normalizers = {});
// Overwrites the values of `params` in place; every name must be present
// with a matching shape.
void load_checkpoint(const nlohmann::json& j, const NamedParams& params,
                     const std::vector<std::pair<std::string, RunningNormalizer*>>&
                         normalizers = {});

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

// FNV-1a over the raw bytes of every parameter value, in order.
std::uint64_t parameter_checksum(const std::vector<Var>& params);

}  // namespace skilllab::nn
