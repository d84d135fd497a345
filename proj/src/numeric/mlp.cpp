#include "skilllab/numeric/mlp.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace skilllab::nn {

Mlp::Mlp(Index in, const std::vector<Index>& hidden, Index out, Rng& rng,
         double output_scale) {
  std::vector<Index> dims{in};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)), as in common NN libraries.
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    std::uniform_real_distribution<double> u(-bound, bound);
    Matrix w(dims[l], dims[l + 1]);
    Matrix b(1, dims[l + 1]);
    for (Index i = 0; i < w.size(); ++i) w.data()[i] = u(rng);
    for (Index i = 0; i < b.size(); ++i) b.data()[i] = u(rng);
    if (l + 2 == dims.size()) {
      w *= output_scale;
      b *= output_scale;
    }
    layers_.push_back({Var::parameter(std::move(w)), Var::parameter(std::move(b))});
  }
}

Var Mlp::forward(const Var& x) const {
  Var h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    h = add(matmul(h, layers_[l].weight), layers_[l].bias);
    if (l + 1 < layers_.size()) h = relu(h);
  }
  return h;
}

Matrix Mlp::infer(const Matrix& x) const {
  if (x.cols() != input_dim()) {
    throw ShapeError("Mlp::infer: expected " + std::to_string(input_dim()) +
                     " input columns, got " + std::to_string(x.cols()));
  }
  Matrix h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Matrix next = h * layers_[l].weight.value();
    next.rowwise() += layers_[l].bias.value().row(0);
    if (l + 1 < layers_.size()) next = next.cwiseMax(0.0);
    h = std::move(next);
  }
  return h;
}

std::vector<Var> Mlp::parameters() const {
  std::vector<Var> out;
  for (const auto& l : layers_) {
    out.push_back(l.weight);
    out.push_back(l.bias);
  }
  return out;
}

void Mlp::append_named(NamedParams& out, const std::string& prefix) const {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const std::string base = prefix + ".layer" + std::to_string(l);
    out.emplace_back(base + ".weight", layers_[l].weight);
    out.emplace_back(base + ".bias", layers_[l].bias);
  }
}

Mlp Mlp::clone() const {
  Mlp m;
  for (const auto& l : layers_) {
    m.layers_.push_back(
        {Var::parameter(l.weight.value()), Var::parameter(l.bias.value())});
  }
  return m;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  return {{"shape", {m.rows(), m.cols()}},
          {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto shape = j.at("shape").get<std::vector<Index>>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (shape.size() != 2 || shape[0] * shape[1] != static_cast<Index>(data.size())) {
    throw ShapeError("matrix_from_json: shape does not match data length");
  }
  Matrix m(shape[0], shape[1]);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

nlohmann::json save_checkpoint(
    const NamedParams& params,
    const std::vector<std::pair<std::string, const RunningNormalizer*>>&
        normalizers) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, v] : params) {
    if (name == kNormalizerKey) {
      throw std::invalid_argument("parameter name collides with reserved key");
    }
    j[name] = matrix_to_json(v.value());
  }
  if (!normalizers.empty()) {
    nlohmann::json n = nlohmann::json::object();
    for (const auto& [name, norm] : normalizers) n[name] = norm->to_json();
    j[kNormalizerKey] = std::move(n);
  }
  return j;
}

void load_checkpoint(
    const nlohmann::json& j, const NamedParams& params,
    const std::vector<std::pair<std::string, RunningNormalizer*>>& normalizers) {
  for (const auto& [name, v] : params) {
    if (!j.contains(name)) {
      throw std::invalid_argument("checkpoint is missing parameter '" + name + "'");
    }
    Matrix m = matrix_from_json(j.at(name));
    if (m.rows() != v.rows() || m.cols() != v.cols()) {
      throw ShapeError("checkpoint parameter '" + name + "' has shape " +
                       Shape{m.rows(), m.cols()}.str() + ", expected " +
                       v.shape().str());
    }
    Var target = v;
    target.mutable_value() = std::move(m);
  }
  for (const auto& [name, norm] : normalizers) {
    *norm = RunningNormalizer::from_json(j.at(kNormalizerKey).at(name));
  }
}

std::uint64_t parameter_checksum(const std::vector<Var>& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& p : params) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(p.value().data());
    const std::size_t n = static_cast<std::size_t>(p.size()) * sizeof(double);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  }
  return h;
}

}  // namespace skilllab::nn
