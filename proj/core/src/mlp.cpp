#include "hifuse/mlp.hpp"

#include <cmath>
#include <string>

#include "hifuse/error.hpp"

namespace hifuse {

std::string_view to_string(Activation activation) {
  return activation == Activation::kRelu ? "relu" : "linear";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "linear") return Activation::kLinear;
  fail(ErrorCode::kConfig, "unknown activation '" + std::string(name) + "'");
}

NetworkSpec NetworkSpec::dense(int input_dim, const std::vector<int>& hidden, int embedding_dim) {
  NetworkSpec spec;
  spec.layer_widths.push_back(input_dim);
  for (int h : hidden) {
    spec.layer_widths.push_back(h);
    spec.activations.push_back(Activation::kRelu);
  }
  spec.layer_widths.push_back(embedding_dim);
  spec.activations.push_back(Activation::kLinear);
  return spec;
}

void validate(const NetworkSpec& spec) {
  require(spec.layer_widths.size() >= 2, ErrorCode::kInvalidArgument, "network needs at least one layer");
  require(spec.activations.size() + 1 == spec.layer_widths.size(), ErrorCode::kInvalidArgument,
          "network needs one activation per weight layer");
  for (int w : spec.layer_widths) require(w >= 1, ErrorCode::kInvalidArgument, "layer widths must be >= 1");
  require(spec.activations.back() == Activation::kLinear, ErrorCode::kInvalidArgument,
          "the output layer must be linear");
}

Mlp::Mlp(NetworkSpec spec) : spec_(std::move(spec)) {
  validate(spec_);
  for (std::size_t l = 0; l < spec_.num_layers(); ++l) {
    weights_.push_back(Eigen::MatrixXd::Zero(spec_.layer_widths[l + 1], spec_.layer_widths[l]));
  }
}

Mlp Mlp::initialized(NetworkSpec spec, std::mt19937_64& rng) {
  Mlp mlp(std::move(spec));
  for (auto& w : mlp.weights_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(w.cols()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    // Row-major fill order so the draw sequence matches the serialized layout.
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
    }
  }
  return mlp;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& inputs) const {
  Cache unused;
  return forward(inputs, unused);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& inputs, Cache& cache) const {
  require(inputs.cols() == spec_.input_dim(), ErrorCode::kShapeMismatch,
          "network expects " + std::to_string(spec_.input_dim()) + " inputs, got " + std::to_string(inputs.cols()));
  cache.inputs.clear();
  cache.preactivations.clear();
  Eigen::MatrixXd activation = inputs;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    cache.inputs.push_back(activation);
    Eigen::MatrixXd z = activation * weights_[l].transpose();
    cache.preactivations.push_back(z);
    activation = spec_.activations[l] == Activation::kRelu ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
  }
  return activation;
}

std::vector<Eigen::MatrixXd> Mlp::backward(const Cache& cache, const Eigen::MatrixXd& output_grad) const {
  std::vector<Eigen::MatrixXd> grads(weights_.size());
  Eigen::MatrixXd upstream = output_grad;
  for (std::size_t i = weights_.size(); i-- > 0;) {
    Eigen::MatrixXd dz = upstream;
    if (spec_.activations[i] == Activation::kRelu) {
      dz = (cache.preactivations[i].array() > 0.0).select(upstream, 0.0);
    }
    grads[i] = dz.transpose() * cache.inputs[i];
    if (i > 0) upstream = dz * weights_[i];
  }
  return grads;
}

double Mlp::squared_norm() const {
  double total = 0.0;
  for (const auto& w : weights_) total += w.squaredNorm();
  return total;
}

bool Mlp::all_finite() const {
  for (const auto& w : weights_) {
    if (!w.allFinite()) return false;
  }
  return true;
}

std::size_t Mlp::num_parameters() const {
  std::size_t n = 0;
  for (const auto& w : weights_) n += static_cast<std::size_t>(w.size());
  return n;
}

}  // namespace hifuse
