#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace hifuse {

enum class Activation { kRelu, kLinear };

std::string_view to_string(Activation activation);
Activation parse_activation(std::string_view name);

// Dense network shape: layer_widths = {F, h1, ..., K}, one activation per
// weight layer. Layers carry no bias term.
struct NetworkSpec {
  std::vector<int> layer_widths;
  std::vector<Activation> activations;

  // {F, hidden..., K} with relu on hidden layers and a linear output layer.
  static NetworkSpec dense(int input_dim, const std::vector<int>& hidden = {32, 32}, int embedding_dim = 16);

  int input_dim() const { return layer_widths.front(); }
  int embedding_dim() const { return layer_widths.back(); }
  std::size_t num_layers() const { return activations.size(); }
};

void validate(const NetworkSpec& spec);

// Bias-free multilayer perceptron with hand-written backpropagation.
class Mlp {
 public:
  struct Cache {
    std::vector<Eigen::MatrixXd> inputs;       // input to each layer, N x in
    std::vector<Eigen::MatrixXd> preactivations;  // N x out
  };

  Mlp() = default;
  explicit Mlp(NetworkSpec spec);

  // Symmetric uniform fan-in initialization: U(-1/sqrt(in), 1/sqrt(in)).
  static Mlp initialized(NetworkSpec spec, std::mt19937_64& rng);

  const NetworkSpec& spec() const { return spec_; }

  // weights()[l] is out x in.
  const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
  std::vector<Eigen::MatrixXd>& weights() { return weights_; }

  // Rows of `inputs` are samples; returns N x K.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs, Cache& cache) const;

  // Gradient of a scalar loss w.r.t. every weight matrix given dLoss/dOutput.
  std::vector<Eigen::MatrixXd> backward(const Cache& cache, const Eigen::MatrixXd& output_grad) const;

  double squared_norm() const;
  bool all_finite() const;
  std::size_t num_parameters() const;

 private:
  NetworkSpec spec_;
  std::vector<Eigen::MatrixXd> weights_;
};

}  // namespace hifuse
