#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hifuse/dataset.hpp"
#include "hifuse/health_index.hpp"
#include "hifuse/mlp.hpp"

namespace hifuse {

struct TrainConfig {
  double lr = 5e-4;
  int epochs = 1000;
  int batch_size = 128;
  double mu = 0.1;           // weight of the unlabeled term
  double nu = 1.0;           // weight decay on all network weights
  double lambda_div = 1e-3;  // diversity regularization; 0 gives plain DeepSAD
  std::uint64_t seed = 0;
  double eps_dist = 1e-6;    // floor under d^2 in the abnormal (inverse) term
  double eps_jitter = 1e-6;  // added to the Gram diagonal before the log-det
};

void validate(const TrainConfig& config);

struct EmbeddingModel {
  Mlp network;
  Eigen::VectorXd center;  // alpha
  ScalerParams scaler;
  TrainConfig config;
  std::vector<double> loss_trace;  // total loss summed over each epoch's batches

  const NetworkSpec& spec() const { return network.spec(); }
};

// Minimum |alpha_k| enforced by init_center.
inline constexpr double kCenterMinMagnitude = 0.1;

// Mean network output over healthy samples, with near-zero coordinates pushed
// out to +-0.1 (sign-preserving, + for exact zero).
Eigen::VectorXd init_center(const Mlp& network, const Eigen::MatrixXd& healthy_samples);

// --- Loss terms. `embeddings` rows are y_i = phi(x_i) - alpha. ------------

// sum_healthy d^2 + sum_abnormal 1/max(d^2, eps_dist) + mu * sum_unlabeled d^2
// + nu * weight_squared_norm.
double deepsad_loss(const Eigen::MatrixXd& embeddings, std::span<const Label> labels, double mu, double nu,
                    double weight_squared_norm, double eps_dist = 1e-6);

// d(deepsad_loss)/d(embeddings), excluding the weight-decay term.
Eigen::MatrixXd deepsad_loss_gradient(const Eigen::MatrixXd& embeddings, std::span<const Label> labels, double mu,
                                      double eps_dist = 1e-6);

// C = Y^T Y + jitter * I.
Eigen::MatrixXd jittered_gram(const Eigen::MatrixXd& embeddings, double eps_jitter);

// -ln det(C) + trace(C) through a Cholesky factor.
double diversity_loss_logdet(const Eigen::MatrixXd& gram);

// sum_k (sigma_k - ln sigma_k) over the eigenvalues of C.
double diversity_loss_eigen(const Eigen::MatrixXd& gram);

// Diversity loss of the jittered Gram of `embeddings` (eigenvalue form).
double diversity_loss(const Eigen::MatrixXd& embeddings, double eps_jitter = 1e-6);

// dL/dC = I - C^{-1}.
Eigen::MatrixXd diversity_gram_gradient(const Eigen::MatrixXd& gram);

// dL/dY = 2 Y (I - C^{-1}).
Eigen::MatrixXd diversity_embedding_gradient(const Eigen::MatrixXd& embeddings, double eps_jitter = 1e-6);

struct LossEvaluation {
  double deepsad = 0.0;
  double diversity = 0.0;
  double total = 0.0;
  std::vector<Eigen::MatrixXd> weight_gradients;  // empty unless requested
};

// deepsad_loss + lambda_div * diversity_loss on one batch of standardized inputs.
LossEvaluation total_loss(const Mlp& network, const Eigen::VectorXd& center, const Eigen::MatrixXd& inputs,
                          std::span<const Label> labels, const TrainConfig& config, bool with_gradient = false);

// --- Training and inference ---------------------------------------------

// Labeled sample set fed to the optimizer: every train row with its label,
// plus the healthy prefix of the test trajectory.
struct TrainingSamples {
  Eigen::MatrixXd inputs;
  std::vector<Label> labels;
};

TrainingSamples collect_training_samples(const DatasetSplit& split, const ScalerParams& scaler);

// Fits the scaler, initializes the network and center from `config.seed`, then
// runs Adam over shuffled mini-batches for `config.epochs` epochs.
EmbeddingModel train(const DatasetSplit& split, const NetworkSpec& spec, const TrainConfig& config);

// Rows are phi(x_t) - alpha for the standardized trajectory.
Eigen::MatrixXd embed(const EmbeddingModel& model, const Trajectory& trajectory);

// h_t = ||y_t||^2, the plain DeepSAD/2DS health index.
HealthIndex anomaly_score(const EmbeddingModel& model, const Trajectory& trajectory);

void save_model(const std::filesystem::path& path, const EmbeddingModel& model);
EmbeddingModel load_model(const std::filesystem::path& path);

}  // namespace hifuse
