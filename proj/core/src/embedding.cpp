#include "hifuse/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "hifuse/error.hpp"

namespace hifuse {
namespace {

constexpr int kModelFormatVersion = 1;
constexpr const char* kModelFormatName = "hifuse-embedding-model";

// Adam with the usual (0.9, 0.999, 1e-8) moments, one state slot per layer.
class Adam {
 public:
  Adam(const std::vector<Eigen::MatrixXd>& shapes, double lr) : lr_(lr) {
    for (const auto& w : shapes) {
      m_.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
      v_.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    }
  }

  void step(std::vector<Eigen::MatrixXd>& params, const std::vector<Eigen::MatrixXd>& grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t l = 0; l < params.size(); ++l) {
      m_[l] = kBeta1 * m_[l] + (1.0 - kBeta1) * grads[l];
      v_[l] = kBeta2 * v_[l] + (1.0 - kBeta2) * grads[l].cwiseProduct(grads[l]);
      params[l].array() -= lr_ * (m_[l].array() / c1) / ((v_[l].array() / c2).sqrt() + kEps);
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  double lr_;
  long t_ = 0;
  std::vector<Eigen::MatrixXd> m_;
  std::vector<Eigen::MatrixXd> v_;
};

Eigen::MatrixXd centered(const Eigen::MatrixXd& outputs, const Eigen::VectorXd& center) {
  return outputs.rowwise() - center.transpose();
}

Eigen::MatrixXd gram_inverse(const Eigen::MatrixXd& gram) {
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  require(llt.info() == Eigen::Success, ErrorCode::kSingularSystem, "Gram matrix is not positive definite");
  return llt.solve(Eigen::MatrixXd::Identity(gram.rows(), gram.cols()));
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", flat}};
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto flat = j.at("data").get<std::vector<double>>();
  require(static_cast<Eigen::Index>(flat.size()) == rows * cols, ErrorCode::kMalformedRow,
          "model matrix data length does not match its shape");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
  }
  return m;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

void validate(const TrainConfig& c) {
  require(c.lr > 0.0, ErrorCode::kInvalidArgument, "train.lr must be positive");
  require(c.epochs >= 0, ErrorCode::kInvalidArgument, "train.epochs must be >= 0");
  require(c.batch_size >= 1, ErrorCode::kInvalidArgument, "train.batch_size must be >= 1");
  require(c.mu >= 0.0, ErrorCode::kInvalidArgument, "train.mu must be >= 0");
  require(c.nu >= 0.0, ErrorCode::kInvalidArgument, "train.nu must be >= 0");
  require(c.lambda_div >= 0.0, ErrorCode::kInvalidArgument, "train.lambda_div must be >= 0");
  require(c.eps_dist > 0.0, ErrorCode::kInvalidArgument, "train.eps_dist must be positive");
  require(c.eps_jitter > 0.0, ErrorCode::kInvalidArgument, "train.eps_jitter must be positive");
}

Eigen::VectorXd init_center(const Mlp& network, const Eigen::MatrixXd& healthy_samples) {
  require(healthy_samples.rows() >= 1, ErrorCode::kInvalidArgument, "init_center needs at least one healthy sample");
  Eigen::VectorXd center = network.forward(healthy_samples).colwise().mean().transpose();
  for (Eigen::Index k = 0; k < center.size(); ++k) {
    if (std::abs(center(k)) < kCenterMinMagnitude) {
      center(k) = center(k) < 0.0 ? -kCenterMinMagnitude : kCenterMinMagnitude;
    }
  }
  return center;
}

double deepsad_loss(const Eigen::MatrixXd& embeddings, std::span<const Label> labels, double mu, double nu,
                    double weight_squared_norm, double eps_dist) {
  require(static_cast<Eigen::Index>(labels.size()) == embeddings.rows(), ErrorCode::kShapeMismatch,
          "one label per embedding row required");
  double labeled = 0.0;
  double unlabeled = 0.0;
  for (Eigen::Index i = 0; i < embeddings.rows(); ++i) {
    const double d2 = embeddings.row(i).squaredNorm();
    switch (labels[static_cast<std::size_t>(i)]) {
      case Label::kHealthy: labeled += d2; break;
      case Label::kAbnormal: labeled += 1.0 / std::max(d2, eps_dist); break;
      case Label::kUnlabeled: unlabeled += d2; break;
    }
  }
  return labeled + mu * unlabeled + nu * weight_squared_norm;
}

Eigen::MatrixXd deepsad_loss_gradient(const Eigen::MatrixXd& embeddings, std::span<const Label> labels, double mu,
                                      double eps_dist) {
  require(static_cast<Eigen::Index>(labels.size()) == embeddings.rows(), ErrorCode::kShapeMismatch,
          "one label per embedding row required");
  Eigen::MatrixXd grad(embeddings.rows(), embeddings.cols());
  for (Eigen::Index i = 0; i < embeddings.rows(); ++i) {
    const double d2 = embeddings.row(i).squaredNorm();
    double scale = 0.0;
    switch (labels[static_cast<std::size_t>(i)]) {
      case Label::kHealthy: scale = 2.0; break;
      case Label::kAbnormal: scale = d2 > eps_dist ? -2.0 / (d2 * d2) : 0.0; break;
      case Label::kUnlabeled: scale = 2.0 * mu; break;
    }
    grad.row(i) = scale * embeddings.row(i);
  }
  return grad;
}

Eigen::MatrixXd jittered_gram(const Eigen::MatrixXd& embeddings, double eps_jitter) {
  Eigen::MatrixXd gram = embeddings.transpose() * embeddings;
  gram.diagonal().array() += eps_jitter;
  return gram;
}

double diversity_loss_logdet(const Eigen::MatrixXd& gram) {
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  require(llt.info() == Eigen::Success, ErrorCode::kSingularSystem, "Gram matrix is not positive definite");
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -log_det + gram.trace();
}

double diversity_loss_eigen(const Eigen::MatrixXd& gram) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
  require(solver.info() == Eigen::Success, ErrorCode::kNonFiniteLoss, "eigendecomposition of the Gram matrix failed");
  const Eigen::VectorXd& sigma = solver.eigenvalues();
  require(sigma.minCoeff() > 0.0, ErrorCode::kSingularSystem, "Gram matrix is not positive definite");
  return (sigma.array() - sigma.array().log()).sum();
}

double diversity_loss(const Eigen::MatrixXd& embeddings, double eps_jitter) {
  return diversity_loss_eigen(jittered_gram(embeddings, eps_jitter));
}

Eigen::MatrixXd diversity_gram_gradient(const Eigen::MatrixXd& gram) {
  return Eigen::MatrixXd::Identity(gram.rows(), gram.cols()) - gram_inverse(gram);
}

Eigen::MatrixXd diversity_embedding_gradient(const Eigen::MatrixXd& embeddings, double eps_jitter) {
  return 2.0 * embeddings * diversity_gram_gradient(jittered_gram(embeddings, eps_jitter));
}

LossEvaluation total_loss(const Mlp& network, const Eigen::VectorXd& center, const Eigen::MatrixXd& inputs,
                          std::span<const Label> labels, const TrainConfig& config, bool with_gradient) {
  Mlp::Cache cache;
  const Eigen::MatrixXd y = centered(network.forward(inputs, cache), center);

  LossEvaluation eval;
  eval.deepsad = deepsad_loss(y, labels, config.mu, config.nu, network.squared_norm(), config.eps_dist);
  if (config.lambda_div > 0.0) eval.diversity = diversity_loss(y, config.eps_jitter);
  eval.total = eval.deepsad + config.lambda_div * eval.diversity;

  if (with_gradient) {
    Eigen::MatrixXd dy = deepsad_loss_gradient(y, labels, config.mu, config.eps_dist);
    if (config.lambda_div > 0.0) dy += config.lambda_div * diversity_embedding_gradient(y, config.eps_jitter);
    eval.weight_gradients = network.backward(cache, dy);
    for (std::size_t l = 0; l < eval.weight_gradients.size(); ++l) {
      eval.weight_gradients[l] += 2.0 * config.nu * network.weights()[l];
    }
  }
  return eval;
}

TrainingSamples collect_training_samples(const DatasetSplit& split, const ScalerParams& scaler) {
  Eigen::Index rows = split.test.labels.t_healthy;
  for (const auto& entry : split.train) rows += entry.trajectory.length();

  TrainingSamples samples;
  samples.inputs.resize(rows, split.test.trajectory.num_features());
  samples.labels.reserve(static_cast<std::size_t>(rows));
  Eigen::Index offset = 0;
  for (const auto& entry : split.train) {
    const auto n = entry.trajectory.length();
    samples.inputs.middleRows(offset, n) = scaler.transform(entry.trajectory.features);
    const auto labels = assign_labels(n, entry.labels);
    samples.labels.insert(samples.labels.end(), labels.begin(), labels.end());
    offset += n;
  }
  const auto prefix = split.test.labels.t_healthy;
  samples.inputs.middleRows(offset, prefix) = scaler.transform(split.test.trajectory.features.topRows(prefix));
  samples.labels.insert(samples.labels.end(), static_cast<std::size_t>(prefix), Label::kHealthy);
  return samples;
}

EmbeddingModel train(const DatasetSplit& split, const NetworkSpec& spec, const TrainConfig& config) {
  validate(split);
  validate(spec);
  validate(config);
  require(spec.input_dim() == split.test.trajectory.num_features(), ErrorCode::kShapeMismatch,
          "network input width " + std::to_string(spec.input_dim()) + " differs from feature count " +
              std::to_string(split.test.trajectory.num_features()));

  EmbeddingModel model;
  model.config = config;
  model.scaler = fit_scaler(split);
  const TrainingSamples samples = collect_training_samples(split, model.scaler);

  std::mt19937_64 rng(config.seed);
  model.network = Mlp::initialized(spec, rng);

  std::vector<Eigen::Index> healthy_rows;
  for (std::size_t i = 0; i < samples.labels.size(); ++i) {
    if (samples.labels[i] == Label::kHealthy) healthy_rows.push_back(static_cast<Eigen::Index>(i));
  }
  model.center = init_center(model.network, samples.inputs(healthy_rows, Eigen::all));

  Adam adam(model.network.weights(), config.lr);
  const auto n = static_cast<Eigen::Index>(samples.labels.size());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::vector<Label> batch_labels;
  model.loss_trace.reserve(static_cast<std::size_t>(config.epochs));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    int batch = 0;
    for (Eigen::Index start = 0; start < n; start += config.batch_size, ++batch) {
      const Eigen::Index size = std::min<Eigen::Index>(config.batch_size, n - start);
      const std::span<const Eigen::Index> rows(order.data() + start, static_cast<std::size_t>(size));
      batch_labels.clear();
      for (auto r : rows) batch_labels.push_back(samples.labels[static_cast<std::size_t>(r)]);
      const Eigen::MatrixXd inputs = samples.inputs(std::vector<Eigen::Index>(rows.begin(), rows.end()), Eigen::all);

      const auto eval = total_loss(model.network, model.center, inputs, batch_labels, config, true);
      if (!std::isfinite(eval.total)) {
        fail(ErrorCode::kNonFiniteLoss,
             "training loss is not finite at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch));
      }
      epoch_loss += eval.total;
      adam.step(model.network.weights(), eval.weight_gradients);
    }
    model.loss_trace.push_back(epoch_loss);
  }
  require(model.network.all_finite(), ErrorCode::kNonFiniteLoss, "network weights became non-finite");
  return model;
}

Eigen::MatrixXd embed(const EmbeddingModel& model, const Trajectory& trajectory) {
  return centered(model.network.forward(model.scaler.transform(trajectory.features)), model.center);
}

HealthIndex anomaly_score(const EmbeddingModel& model, const Trajectory& trajectory) {
  const Eigen::MatrixXd y = embed(model, trajectory);
  HealthIndex hi;
  hi.trajectory_id = trajectory.id;
  hi.method = model.config.lambda_div > 0.0 ? "2ds" : "deepsad";
  hi.value = y.rowwise().squaredNorm();
  hi.raw = hi.value;
  for (Eigen::Index t = 0; t < trajectory.length(); ++t) hi.time.push_back(trajectory.time_at(t));
  return hi;
}

void save_model(const std::filesystem::path& path, const EmbeddingModel& model) {
  nlohmann::json j;
  j["format"] = kModelFormatName;
  j["version"] = kModelFormatVersion;
  std::vector<std::string> activations;
  for (auto a : model.spec().activations) activations.emplace_back(to_string(a));
  j["network"] = {{"layer_widths", model.spec().layer_widths}, {"activations", activations}};
  j["weights"] = nlohmann::json::array();
  for (const auto& w : model.network.weights()) j["weights"].push_back(matrix_to_json(w));
  j["center"] = to_std(model.center);
  j["scaler"] = {{"mean", to_std(model.scaler.mean)}, {"scale", to_std(model.scaler.scale)}};
  const auto& c = model.config;
  j["train_config"] = {{"lr", c.lr},         {"epochs", c.epochs},         {"batch_size", c.batch_size},
                       {"mu", c.mu},         {"nu", c.nu},                 {"lambda_div", c.lambda_div},
                       {"seed", c.seed},     {"eps_dist", c.eps_dist},     {"eps_jitter", c.eps_jitter}};
  j["loss_trace"] = model.loss_trace;

  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << j.dump(1) << '\n';
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

EmbeddingModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kMalformedRow, path.string() + ": " + e.what());
  }
  try {
    require(j.at("format") == kModelFormatName, ErrorCode::kMalformedHeader, path.string() + ": not a model file");
    require(j.at("version") == kModelFormatVersion, ErrorCode::kMalformedHeader,
            path.string() + ": unsupported model version " + j.at("version").dump());
    NetworkSpec spec;
    spec.layer_widths = j.at("network").at("layer_widths").get<std::vector<int>>();
    for (const auto& a : j.at("network").at("activations")) spec.activations.push_back(parse_activation(a.get<std::string>()));

    EmbeddingModel model;
    model.network = Mlp(spec);
    const auto& weights = j.at("weights");
    require(weights.size() == spec.num_layers(), ErrorCode::kShapeMismatch, path.string() + ": layer count mismatch");
    for (std::size_t l = 0; l < spec.num_layers(); ++l) {
      Eigen::MatrixXd w = matrix_from_json(weights[l]);
      require(w.rows() == model.network.weights()[l].rows() && w.cols() == model.network.weights()[l].cols(),
              ErrorCode::kShapeMismatch, path.string() + ": weight shape mismatch in layer " + std::to_string(l));
      model.network.weights()[l] = std::move(w);
    }
    model.center = vector_from_json(j.at("center"));
    model.scaler.mean = vector_from_json(j.at("scaler").at("mean"));
    model.scaler.scale = vector_from_json(j.at("scaler").at("scale"));
    const auto& c = j.at("train_config");
    model.config.lr = c.at("lr").get<double>();
    model.config.epochs = c.at("epochs").get<int>();
    model.config.batch_size = c.at("batch_size").get<int>();
    model.config.mu = c.at("mu").get<double>();
    model.config.nu = c.at("nu").get<double>();
    model.config.lambda_div = c.at("lambda_div").get<double>();
    model.config.seed = c.at("seed").get<std::uint64_t>();
    model.config.eps_dist = c.at("eps_dist").get<double>();
    model.config.eps_jitter = c.at("eps_jitter").get<double>();
    model.loss_trace = j.at("loss_trace").get<std::vector<double>>();
    require(model.center.size() == spec.embedding_dim(), ErrorCode::kShapeMismatch, path.string() + ": center size");
    require(model.scaler.mean.size() == spec.input_dim() && model.scaler.scale.size() == spec.input_dim(),
            ErrorCode::kShapeMismatch, path.string() + ": scaler size");
    return model;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kMalformedRow, path.string() + ": " + e.what());
  }
}

}  // namespace hifuse
