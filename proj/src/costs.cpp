#include "dtac/costs.hpp"

#include <cmath>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "dtac/error.hpp"
#include "dtac/rng.hpp"

namespace dtac {

namespace {

// log(1 + exp(u)) without overflow.
double softplus(double u) { return u > 0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }

double sigmoid(double u) {
  if (u >= 0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

std::pair<double, double> sym_extreme_eigs(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

// Rows of the bias-augmented design: (c_j, 1).
Matrix with_bias_column(const Matrix& X, double bias_value) {
  Matrix out(X.rows(), X.cols() + 1);
  out << X, Matrix::Constant(X.rows(), 1, bias_value);
  return out;
}

Matrix gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = normal(rng);
  return M;
}

}  // namespace

// --- quadratic -------------------------------------------------------------

QuadraticCost::QuadraticCost(Matrix A, Vector b) : A_(std::move(A)), b_(std::move(b)) {
  require(A_.rows() == A_.cols() && A_.rows() == b_.size(), "quadratic: dimension mismatch");
  A_ = 0.5 * (A_ + A_.transpose());
  std::tie(s_, l_) = sym_extreme_eigs(A_);
  require(s_ > 0.0, "quadratic: A must be positive definite");
}

double QuadraticCost::value(const Vector& z) const { return 0.5 * z.dot(A_ * z) + b_.dot(z); }
Vector QuadraticCost::gradient(const Vector& z) const { return A_ * z + b_; }

// --- least squares ---------------------------------------------------------

LeastSquaresCost::LeastSquaresCost(Matrix H, Vector b, double ridge) : H_(std::move(H)), b_(std::move(b)), ridge_(ridge) {
  require(H_.rows() == b_.size(), "least_squares: H and b row counts differ");
  require(ridge_ >= 0.0, "least_squares: ridge must be >= 0");
  Matrix hess = H_.transpose() * H_;
  hess.diagonal().array() += ridge_;
  std::tie(s_, l_) = sym_extreme_eigs(hess);
  s_ = std::max(s_, 0.0);
}

double LeastSquaresCost::value(const Vector& z) const {
  return 0.5 * (H_ * z - b_).squaredNorm() + 0.5 * ridge_ * z.squaredNorm();
}

Vector LeastSquaresCost::gradient(const Vector& z) const { return H_.transpose() * (H_ * z - b_) + ridge_ * z; }

// --- logistic --------------------------------------------------------------

LogisticCost::LogisticCost(Matrix features, Vector labels, double lambda, bool average, double bias_ridge)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      lambda_(lambda),
      scale_(average ? static_cast<double>(features_.rows()) : 1.0),
      bias_ridge_(bias_ridge) {
  require(features_.rows() == labels_.size() && features_.rows() > 0, "logistic: need matching samples and labels");
  require(lambda_ > 0.0, "logistic: lambda must be > 0");
  require(bias_ridge_ >= 0.0, "logistic: bias ridge must be >= 0");
  for (Eigen::Index j = 0; j < labels_.size(); ++j)
    require(labels_(j) == 1.0 || labels_(j) == -1.0, "logistic: labels must be +-1");
  const Matrix aug = with_bias_column(features_, 1.0);
  const double gram_max = sym_extreme_eigs(aug.transpose() * aug).second;
  s_ = bias_ridge_ > 0.0 ? std::min(lambda_, bias_ridge_) : lambda_;
  l_ = std::max(lambda_, bias_ridge_) + gram_max / (4.0 * scale_);
}

double LogisticCost::value(const Vector& z) const {
  const int p = static_cast<int>(features_.cols());
  const auto w = z.head(p);
  const double b = z(p);
  const Vector margins = ((features_ * w).array() + b).matrix().cwiseProduct(labels_);
  double loss = 0.0;
  for (Eigen::Index j = 0; j < margins.size(); ++j) loss += softplus(-margins(j));
  return loss / scale_ + 0.5 * lambda_ * w.squaredNorm() + 0.5 * bias_ridge_ * b * b;
}

Vector LogisticCost::gradient(const Vector& z) const {
  const int p = static_cast<int>(features_.cols());
  const auto w = z.head(p);
  const double b = z(p);
  const Vector margins = ((features_ * w).array() + b).matrix().cwiseProduct(labels_);
  Vector coef(margins.size());  // d loss_j / d margin_j * label_j
  for (Eigen::Index j = 0; j < margins.size(); ++j) coef(j) = -sigmoid(-margins(j)) * labels_(j);
  Vector g(p + 1);
  g.head(p) = features_.transpose() * coef / scale_ + lambda_ * w;
  g(p) = coef.sum() / scale_ + bias_ridge_ * b;
  return g;
}

// --- smooth svm ------------------------------------------------------------

SmoothSvmCost::SmoothSvmCost(Matrix features, Vector labels, double margin, double mu)
    : features_(std::move(features)), labels_(std::move(labels)), margin_(margin), mu_(mu) {
  require(features_.rows() == labels_.size(), "svm: need matching samples and labels");
  require(margin_ >= 0.0 && mu_ > 0.0, "svm: margin must be >= 0 and mu > 0");
  const Matrix aug = with_bias_column(features_, -1.0);
  const double gram_max = features_.rows() > 0 ? sym_extreme_eigs(aug.transpose() * aug).second : 0.0;
  l_ = 2.0 + margin_ * mu_ / 4.0 * gram_max;
}

double SmoothSvmCost::value(const Vector& z) const {
  const int p = static_cast<int>(features_.cols());
  const auto omega = z.head(p);
  const double nu = z(p);
  double loss = 0.0;
  for (Eigen::Index j = 0; j < features_.rows(); ++j) {
    const double x = 1.0 - labels_(j) * (features_.row(j).dot(omega) - nu);
    loss += softplus(mu_ * x) / mu_;
  }
  return omega.squaredNorm() + margin_ * loss;
}

Vector SmoothSvmCost::gradient(const Vector& z) const {
  const int p = static_cast<int>(features_.cols());
  const auto omega = z.head(p);
  const double nu = z(p);
  Vector g = Vector::Zero(p + 1);
  g.head(p) = 2.0 * omega;
  for (Eigen::Index j = 0; j < features_.rows(); ++j) {
    const double x = 1.0 - labels_(j) * (features_.row(j).dot(omega) - nu);
    const double w = margin_ * sigmoid(mu_ * x);
    g.head(p) -= w * labels_(j) * features_.row(j).transpose();
    g(p) += w * labels_(j);
  }
  return g;
}

// --- global problem --------------------------------------------------------

double GlobalProblem::value(const Vector& z) const {
  double v = 0.0;
  for (const auto& f : locals) v += f->value(z);
  return v;
}

Vector GlobalProblem::gradient(const Vector& z) const {
  Vector g = Vector::Zero(dim());
  for (const auto& f : locals) g += f->gradient(z);
  return g;
}

double GlobalProblem::strong_convexity() const {
  double s = std::numeric_limits<double>::infinity();
  for (const auto& f : locals) s = std::min(s, f->strong_convexity());
  return s;
}

double GlobalProblem::lipschitz() const {
  double l = 0.0;
  for (const auto& f : locals) l = std::max(l, f->lipschitz());
  return l;
}

GlobalProblem make_quadratic(std::vector<std::pair<Matrix, Vector>> terms) {
  require(!terms.empty(), "quadratic: need at least one agent");
  GlobalProblem prob;
  const auto p = terms.front().second.size();
  Matrix A_sum = Matrix::Zero(p, p);
  Vector b_sum = Vector::Zero(p);
  for (auto& [A, b] : terms) {
    A_sum += A;
    b_sum += b;
    prob.locals.push_back(std::make_shared<QuadraticCost>(std::move(A), std::move(b)));
  }
  A_sum = 0.5 * (A_sum + A_sum.transpose());
  prob.z_star = A_sum.llt().solve(-b_sum);
  prob.f_star = prob.value(prob.z_star);
  return prob;
}

GlobalProblem make_quadratic(int n, int p, std::uint64_t seed, double b_scale) {
  require(n >= 1 && p >= 1, "quadratic: n and p must be >= 1");
  auto rng = make_rng(seed, 0x9a);
  std::uniform_real_distribution<double> eig(1.0, 10.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::pair<Matrix, Vector>> terms;
  for (int i = 0; i < n; ++i) {
    const Matrix Q = Eigen::HouseholderQR<Matrix>(gaussian_matrix(rng, p, p)).householderQ();
    Vector lam(p);
    for (int k = 0; k < p; ++k) lam(k) = eig(rng);
    Vector b(p);
    for (int k = 0; k < p; ++k) b(k) = b_scale * normal(rng);
    terms.emplace_back(Q * lam.asDiagonal() * Q.transpose(), std::move(b));
  }
  return make_quadratic(std::move(terms));
}

GlobalProblem make_least_squares(std::vector<std::pair<Matrix, Vector>> blocks, double ridge) {
  require(!blocks.empty(), "least_squares: need at least one agent");
  GlobalProblem prob;
  const auto p = blocks.front().first.cols();
  Matrix normal = Matrix::Zero(p, p);
  Vector rhs = Vector::Zero(p);
  for (auto& [H, b] : blocks) {
    require(H.cols() == p, "least_squares: agents disagree on dimension");
    normal += H.transpose() * H;
    rhs += H.transpose() * b;
    prob.locals.push_back(std::make_shared<LeastSquaresCost>(std::move(H), std::move(b), ridge));
  }
  normal.diagonal().array() += ridge * static_cast<double>(blocks.size());
  const auto [lo, hi] = sym_extreme_eigs(normal);
  if (!(lo > 1e-12 * std::max(1.0, hi)))
    fail(ErrorCode::InvalidArgument, "least_squares: stacked H is rank deficient and ridge is 0");
  prob.z_star = normal.ldlt().solve(rhs);
  prob.f_star = prob.value(prob.z_star);
  return prob;
}

GlobalProblem make_least_squares(int n, int p, int rows_per_agent, std::uint64_t seed, double ridge) {
  require(n >= 1 && p >= 1 && rows_per_agent >= 1, "least_squares: sizes must be >= 1");
  require(static_cast<long long>(n) * rows_per_agent >= p || ridge > 0.0,
          "least_squares: system is underdetermined without a ridge");
  auto rng = make_rng(seed, 0x15);
  std::vector<std::pair<Matrix, Vector>> blocks;
  for (int i = 0; i < n; ++i) {
    Matrix H = gaussian_matrix(rng, rows_per_agent, p);
    Vector b = gaussian_matrix(rng, rows_per_agent, 1);
    blocks.emplace_back(std::move(H), std::move(b));
  }
  return make_least_squares(std::move(blocks), ridge);
}

std::vector<ClassificationData> make_two_cluster_data(int n, int p, int samples_per_agent, double separation,
                                                      std::uint64_t seed) {
  require(n >= 1 && p >= 1 && samples_per_agent >= 2, "two-cluster data: need n, p >= 1 and >= 2 samples");
  auto rng = make_rng(seed, 0x10);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector dir = gaussian_matrix(rng, p, 1);
  dir.normalize();
  std::vector<ClassificationData> out;
  for (int i = 0; i < n; ++i) {
    ClassificationData d{Matrix(samples_per_agent, p), Vector(samples_per_agent)};
    for (int j = 0; j < samples_per_agent; ++j) {
      const double label = (j % 2 == 0) ? 1.0 : -1.0;
      d.labels(j) = label;
      for (int k = 0; k < p; ++k) d.features(j, k) = label * 0.5 * separation * dir(k) + normal(rng);
    }
    out.push_back(std::move(d));
  }
  return out;
}

GlobalProblem make_logistic(const std::vector<ClassificationData>& data, double lambda, bool average,
                            double bias_ridge) {
  require(!data.empty(), "logistic: need at least one agent");
  GlobalProblem prob;
  for (const auto& d : data)
    prob.locals.push_back(std::make_shared<LogisticCost>(d.features, d.labels, lambda, average, bias_ridge));
  const auto opt = centralized_minimize(prob);
  prob.z_star = opt.z;
  prob.f_star = prob.value(opt.z);
  return prob;
}

GlobalProblem make_logistic(int n, int p, int samples_per_agent, double lambda, std::uint64_t seed, bool average,
                            double bias_ridge, double separation) {
  return make_logistic(make_two_cluster_data(n, p, samples_per_agent, separation, seed), lambda, average,
                       bias_ridge);
}

GlobalProblem make_smooth_svm(const std::vector<ClassificationData>& data, double margin, double mu) {
  require(!data.empty(), "svm: need at least one agent");
  GlobalProblem prob;
  for (const auto& d : data) prob.locals.push_back(std::make_shared<SmoothSvmCost>(d.features, d.labels, margin, mu));
  const auto opt = centralized_minimize(prob);
  prob.z_star = opt.z;
  prob.f_star = prob.value(opt.z);
  return prob;
}

GlobalProblem make_smooth_svm(int n, int p, int samples_per_agent, double margin, double mu, std::uint64_t seed,
                              double separation) {
  return make_smooth_svm(make_two_cluster_data(n, p, samples_per_agent, separation, seed), margin, mu);
}

OracleResult centralized_minimize(const GlobalProblem& problem, double tol, long long max_iters) {
  double L = 0.0;
  for (const auto& f : problem.locals) L += f->lipschitz();
  const double step = 1.0 / L;
  Vector x = Vector::Zero(problem.dim());
  Vector x_prev = x;
  Vector g = problem.gradient(x);
  double t = 1.0;
  for (long long it = 0; it < max_iters; ++it) {
    const double gn = g.norm();
    if (gn < tol) return {x, gn, it};
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const Vector yv = x + ((t - 1.0) / t_next) * (x - x_prev);
    const Vector gy = problem.gradient(yv);
    x_prev = x;
    x = yv - step * gy;
    const Vector g_new = problem.gradient(x);
    // Gradient-based adaptive restart.
    if (gy.dot(x - x_prev) > 0.0)
      t = 1.0;
    else
      t = t_next;
    g = g_new;
  }
  fail(ErrorCode::Engine, "centralized oracle: no convergence within iteration cap");
}

}  // namespace dtac
