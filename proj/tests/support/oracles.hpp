#pragma once

// Independent reference implementations used only by the tests. None of them
// share code with the library: each is the slowest obviously-correct way to
// compute the quantity it checks.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace hifuse::oracle {

// Isotonic least squares via the min-max formula:
// z_i = max_{k <= i} min_{j >= i} mean(h_k..h_j). O(T^3).
inline Eigen::VectorXd isotonic_minmax(const Eigen::VectorXd& h) {
  const Eigen::Index n = h.size();
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k <= i; ++k) {
      double inner = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = i; j < n; ++j) {
        inner = std::min(inner, h.segment(k, j - k + 1).mean());
      }
      best = std::max(best, inner);
    }
    z(i) = best;
  }
  return z;
}

// Euclidean projection onto {z_i <= 0 for i < t_healthy, z_i >= 1 for
// i >= t_faulty - 1, z nondecreasing} by Dykstra's algorithm over the two
// boxes and the T-1 half-spaces z_i <= z_{i+1}.
inline Eigen::VectorXd dykstra_projection(const Eigen::VectorXd& h, int t_healthy, std::optional<int> t_faulty,
                                          bool isotonic = true, int sweeps = 20000) {
  const Eigen::Index n = h.size();
  const Eigen::Index sets = 2 + (isotonic ? n - 1 : 0);
  std::vector<Eigen::VectorXd> corrections(static_cast<std::size_t>(sets), Eigen::VectorXd::Zero(n));
  Eigen::VectorXd x = h;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    const Eigen::VectorXd before = x;
    for (Eigen::Index s = 0; s < sets; ++s) {
      Eigen::VectorXd& p = corrections[static_cast<std::size_t>(s)];
      const Eigen::VectorXd y = x + p;
      Eigen::VectorXd proj = y;
      if (s == 0) {
        for (Eigen::Index i = 0; i < std::min<Eigen::Index>(t_healthy, n); ++i) proj(i) = std::min(y(i), 0.0);
      } else if (s == 1) {
        if (t_faulty) {
          for (Eigen::Index i = *t_faulty - 1; i < n; ++i) proj(i) = std::max(y(i), 1.0);
        }
      } else {
        const Eigen::Index i = s - 2;
        if (y(i) > y(i + 1)) proj(i) = proj(i + 1) = 0.5 * (y(i) + y(i + 1));
      }
      p = y - proj;
      x = proj;
    }
    if ((x - before).lpNorm<Eigen::Infinity>() < 1e-15) break;
  }
  return x;
}

// Power spectrum |X_k|^2 for k = 0..n/2 by the defining DFT sum.
inline Eigen::VectorXd dft_power(const Eigen::VectorXd& frame) {
  const Eigen::Index n = frame.size();
  Eigen::VectorXd power(n / 2 + 1);
  for (Eigen::Index k = 0; k < power.size(); ++k) {
    std::complex<double> acc = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k * t) / static_cast<double>(n);
      acc += frame(t) * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    power(k) = std::norm(acc);
  }
  return power;
}

inline Eigen::VectorXd periodic_hann(Eigen::Index n) {
  Eigen::VectorXd w(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    w(t) = std::pow(std::sin(std::numbers::pi * static_cast<double>(t) / static_cast<double>(n)), 2);
  }
  return w;
}

// Central differences of f with respect to every entry of `x`.
inline Eigen::MatrixXd central_difference(const std::function<double(const Eigen::MatrixXd&)>& f,
                                          const Eigen::MatrixXd& x, double step = 1e-5) {
  Eigen::MatrixXd grad(x.rows(), x.cols());
  Eigen::MatrixXd probe = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      probe(i, j) = x(i, j) + step;
      const double up = f(probe);
      probe(i, j) = x(i, j) - step;
      const double down = f(probe);
      probe(i, j) = x(i, j);
      grad(i, j) = (up - down) / (2.0 * step);
    }
  }
  return grad;
}

// Max entrywise relative error with an absolute floor on the denominator.
inline double relative_error(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& numeric, double floor = 1e-8) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    const double a = analytic.reshaped()(i);
    const double b = numeric.reshaped()(i);
    worst = std::max(worst, std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor}));
  }
  return worst;
}

// ||(sum Y_i^T Y_i + beta I) w - sum Y_i^T z_i|| and ||sum Y_i^T z_i||.
struct NormalResidual {
  double residual = 0.0;
  double rhs_norm = 0.0;
};

inline NormalResidual normal_equation_residual(const std::vector<Eigen::MatrixXd>& ys,
                                               const std::vector<Eigen::VectorXd>& zs, const Eigen::VectorXd& w,
                                               double beta) {
  const Eigen::Index k = w.size();
  Eigen::MatrixXd lhs = beta * Eigen::MatrixXd::Identity(k, k);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  for (std::size_t i = 0; i < ys.size(); ++i) {
    for (Eigen::Index r = 0; r < ys[i].rows(); ++r) {
      for (Eigen::Index a = 0; a < k; ++a) {
        rhs(a) += ys[i](r, a) * zs[i](r);
        for (Eigen::Index b = 0; b < k; ++b) lhs(a, b) += ys[i](r, a) * ys[i](r, b);
      }
    }
  }
  return {(lhs * w - rhs).norm(), rhs.norm()};
}

// Uncentered cosine computed with plain loops.
inline double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    dot += a(i) * b(i);
    na += a(i) * a(i);
    nb += b(i) * b(i);
  }
  return dot / std::sqrt(na * nb);
}

// Numerical rank: eigenvalues above rel * max eigenvalue.
inline int numerical_rank(const Eigen::MatrixXd& gram, double rel = 1e-6) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  return static_cast<int>((es.eigenvalues().array() > rel * top).count());
}

}  // namespace hifuse::oracle
