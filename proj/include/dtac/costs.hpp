#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dtac/graph.hpp"

namespace dtac {

/// One agent's smooth, strongly convex local objective.
class CostModel {
 public:
  virtual ~CostModel() = default;
  virtual int dim() const = 0;
  virtual double value(const Vector& z) const = 0;
  virtual Vector gradient(const Vector& z) const = 0;
  /// Strong-convexity constant (on the regularized block where noted).
  virtual double strong_convexity() const = 0;
  /// Gradient Lipschitz constant.
  virtual double lipschitz() const = 0;
  virtual std::string name() const = 0;
};

using CostPtr = std::shared_ptr<const CostModel>;

/// f(z) = 1/2 z^T A z + b^T z.
class QuadraticCost final : public CostModel {
 public:
  QuadraticCost(Matrix A, Vector b);
  int dim() const override { return static_cast<int>(b_.size()); }
  double value(const Vector& z) const override;
  Vector gradient(const Vector& z) const override;
  double strong_convexity() const override { return s_; }
  double lipschitz() const override { return l_; }
  std::string name() const override { return "quadratic"; }
  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }

 private:
  Matrix A_;
  Vector b_;
  double s_, l_;
};

/// f(z) = 1/2 ||H z - b||^2 + ridge/2 ||z||^2.
class LeastSquaresCost final : public CostModel {
 public:
  LeastSquaresCost(Matrix H, Vector b, double ridge);
  int dim() const override { return static_cast<int>(H_.cols()); }
  double value(const Vector& z) const override;
  Vector gradient(const Vector& z) const override;
  double strong_convexity() const override { return s_; }
  double lipschitz() const override { return l_; }
  std::string name() const override { return "least_squares"; }
  const Matrix& H() const { return H_; }
  const Vector& b() const { return b_; }
  double ridge() const { return ridge_; }

 private:
  Matrix H_;
  Vector b_;
  double ridge_, s_, l_;
};

/// State (w, b) with w in R^p. Per sample j:
///   log(1 + exp(-(w^T c_j + b) y_j)), averaged over samples when
/// `average` is set, plus lambda/2 ||w||^2 + bias_ridge/2 b^2.
class LogisticCost final : public CostModel {
 public:
  LogisticCost(Matrix features, Vector labels, double lambda, bool average, double bias_ridge = 0.0);
  int dim() const override { return static_cast<int>(features_.cols()) + 1; }
  double value(const Vector& z) const override;
  Vector gradient(const Vector& z) const override;
  /// lambda (+ bias_ridge if that is smaller): the bias is only curved by data.
  double strong_convexity() const override { return s_; }
  double lipschitz() const override { return l_; }
  std::string name() const override { return "logistic"; }

 private:
  Matrix features_;  // m x p
  Vector labels_;    // +-1
  double lambda_, scale_, bias_ridge_, s_, l_;
};

/// Linear smooth SVM on state (omega, nu):
///   omega^T omega + C sum_j (1/mu) log(1 + exp(mu x_j)),
///   x_j = 1 - label_j (omega^T chi_j - nu).
class SmoothSvmCost final : public CostModel {
 public:
  SmoothSvmCost(Matrix features, Vector labels, double margin, double mu);
  int dim() const override { return static_cast<int>(features_.cols()) + 1; }
  double value(const Vector& z) const override;
  Vector gradient(const Vector& z) const override;
  /// 2, from the omega^T omega block; nu is curved only through the data.
  double strong_convexity() const override { return 2.0; }
  double lipschitz() const override { return l_; }
  std::string name() const override { return "svm"; }

 private:
  Matrix features_;
  Vector labels_;
  double margin_, mu_, l_;
};

/// F = sum_i f_i with its minimizer.
struct GlobalProblem {
  std::vector<CostPtr> locals;
  Vector z_star;
  double f_star = 0.0;

  int agents() const { return static_cast<int>(locals.size()); }
  int dim() const { return locals.empty() ? 0 : locals.front()->dim(); }
  double value(const Vector& z) const;
  Vector gradient(const Vector& z) const;
  /// min_i s_i and max_i l_i.
  double strong_convexity() const;
  double lipschitz() const;
};

/// Eigenvalues of each A_i drawn uniformly from [1, 10]; b_i ~ N(0, b_scale^2).
GlobalProblem make_quadratic(int n, int p, std::uint64_t seed, double b_scale = 1.0);
/// z_star from (sum A_i) z = -sum b_i.
GlobalProblem make_quadratic(std::vector<std::pair<Matrix, Vector>> terms);

GlobalProblem make_least_squares(int n, int p, int rows_per_agent, std::uint64_t seed, double ridge = 0.0);
GlobalProblem make_least_squares(std::vector<std::pair<Matrix, Vector>> blocks, double ridge = 0.0);

struct ClassificationData {
  Matrix features;  // m x p
  Vector labels;    // +-1
};

/// Two Gaussian clusters at +-separation/2 along a random unit direction,
/// labels split evenly within every agent.
std::vector<ClassificationData> make_two_cluster_data(int n, int p, int samples_per_agent, double separation,
                                                      std::uint64_t seed);

GlobalProblem make_logistic(int n, int p, int samples_per_agent, double lambda, std::uint64_t seed,
                            bool average = true, double bias_ridge = 0.0, double separation = 2.0);
GlobalProblem make_logistic(const std::vector<ClassificationData>& data, double lambda, bool average,
                            double bias_ridge = 0.0);

GlobalProblem make_smooth_svm(int n, int p, int samples_per_agent, double margin, double mu, std::uint64_t seed,
                              double separation = 2.0);
GlobalProblem make_smooth_svm(const std::vector<ClassificationData>& data, double margin, double mu);

/// Nesterov-accelerated gradient descent (step 1/L, adaptive restart) on F
/// until ||grad F|| < tol. Throws ErrorCode::Engine past the iteration cap.
struct OracleResult {
  Vector z;
  double grad_norm = 0.0;
  long long iterations = 0;
};
OracleResult centralized_minimize(const GlobalProblem& problem, double tol = 1e-10, long long max_iters = 1000000);

}  // namespace dtac
