#include <doctest.h>

#include <cmath>
#include <functional>

#include "../support/oracles.hpp"
#include "dtac/costs.hpp"
#include "dtac/error.hpp"
#include "dtac/rng.hpp"

using namespace dtac;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Extremes of the symmetrized finite-difference Hessian at z.
std::pair<double, double> fd_curvature(const CostModel& f, const Vector& z) {
  const int p = f.dim();
  Matrix H(p, p);
  const double h = 1e-5;
  for (int j = 0; j < p; ++j) {
    Vector a = z, b = z;
    a(j) += h;
    b(j) -= h;
    H.col(j) = (f.gradient(a) - f.gradient(b)) / (2 * h);
  }
  const Matrix S = 0.5 * (H + H.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

void check_gradients(const GlobalProblem& prob, std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    Vector z(prob.dim());
    for (int k = 0; k < z.size(); ++k) z(k) = 2.0 * nd(rng);
    for (const auto& f : prob.locals) {
      const Vector fd = oracle::fd_gradient([&](const Vector& v) { return f->value(v); }, z);
      const Vector an = f->gradient(z);
      CHECK((fd - an).norm() <= 1e-5 * (1.0 + an.norm()));
    }
  }
}

void check_curvature_bounds(const GlobalProblem& prob, std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int t = 0; t < 5; ++t) {
    Vector z(prob.dim());
    for (int k = 0; k < z.size(); ++k) z(k) = nd(rng);
    for (const auto& f : prob.locals) {
      const auto [lo, hi] = fd_curvature(*f, z);
      CHECK(hi <= f->lipschitz() * (1 + 1e-5) + 1e-6);
      CHECK(lo >= f->strong_convexity() * (1 - 1e-5) - 1e-6);
    }
  }
}

}  // namespace

TEST_CASE("two-agent least squares with complementary rows") {
  Matrix H1(1, 2), H2(1, 2);
  H1 << 1, 0;
  H2 << 0, 1;
  const auto prob = make_least_squares({{H1, vec({3})}, {H2, vec({4})}});
  CHECK(prob.z_star(0) == doctest::Approx(3.0));
  CHECK(prob.z_star(1) == doctest::Approx(4.0));
  CHECK(prob.f_star == doctest::Approx(0.0));
  CHECK(prob.gradient(prob.z_star).norm() < 1e-12);
}

TEST_CASE("identity least squares recovers the target") {
  const Vector v = vec({1.5, -2.0, 0.25});
  const auto prob = make_least_squares({{Matrix::Identity(3, 3), v}});
  CHECK((prob.z_star - v).norm() < 1e-12);
}

TEST_CASE("ridge shrinks least squares toward zero") {
  const auto prob = make_least_squares({{Matrix::Identity(2, 2), vec({2, 4})}}, 1.0);
  CHECK(prob.z_star(0) == doctest::Approx(1.0));
  CHECK(prob.z_star(1) == doctest::Approx(2.0));
  CHECK(prob.locals[0]->strong_convexity() == doctest::Approx(2.0));
  CHECK(prob.locals[0]->lipschitz() == doctest::Approx(2.0));
}

TEST_CASE("quadratic: explicit terms") {
  Matrix A1 = Matrix::Identity(2, 2), A2(2, 2);
  A2 << 3, 1, 1, 2;
  const Vector b1 = vec({1, -1}), b2 = vec({0, 2});
  const auto prob = make_quadratic({{A1, b1}, {A2, b2}});
  const Vector expect = (A1 + A2).ldlt().solve(-(b1 + b2));
  CHECK((prob.z_star - expect).norm() < 1e-12);
  const Vector z = vec({0.3, -0.7});
  CHECK(prob.value(z) == doctest::Approx(0.5 * z.dot((A1 + A2) * z) + (b1 + b2).dot(z)));
  CHECK(prob.strong_convexity() == doctest::Approx(1.0));
  CHECK(prob.lipschitz() == doctest::Approx(2.5 + std::sqrt(1.25)));
}

TEST_CASE("quadratic: random instances respect the eigenvalue range") {
  const auto prob = make_quadratic(6, 4, 11);
  CHECK(prob.agents() == 6);
  CHECK(prob.dim() == 4);
  for (const auto& f : prob.locals) {
    CHECK(f->strong_convexity() >= 1.0 - 1e-12);
    CHECK(f->lipschitz() <= 10.0 + 1e-12);
  }
  CHECK(prob.gradient(prob.z_star).norm() < 1e-9);
  check_gradients(prob, 1);
}

TEST_CASE("quadratic generator is deterministic and rejects bad sizes") {
  const auto a = make_quadratic(3, 2, 5), b = make_quadratic(3, 2, 5), c = make_quadratic(3, 2, 6);
  CHECK((a.z_star - b.z_star).norm() == 0.0);
  CHECK((a.z_star - c.z_star).norm() > 0.0);
  CHECK_THROWS_AS(make_quadratic(0, 2, 1), Error);
  CHECK_THROWS_AS(make_quadratic(2, 0, 1), Error);
}

TEST_CASE("least squares: gradients and curvature") {
  const auto prob = make_least_squares(5, 3, 8, 2, 0.1);
  check_gradients(prob, 2);
  check_curvature_bounds(prob, 2);
  CHECK(prob.gradient(prob.z_star).norm() < 1e-9);
}

TEST_CASE("logistic: single sample optimum solves the scalar fixed point") {
  // One sample c = 2, label +1, lambda = bias_ridge = 1: w = c b and
  // b = sigmoid(-(c^2 + 1) b).
  ClassificationData d{Matrix::Constant(1, 1, 2.0), vec({1.0})};
  const auto prob = make_logistic({d}, 1.0, true, 1.0);
  const double b = oracle::bisect([](double v) { return v - 1.0 / (1.0 + std::exp(5.0 * v)); }, 0.0, 1.0);
  CHECK(prob.z_star(1) == doctest::Approx(b).epsilon(1e-9));
  CHECK(prob.z_star(0) == doctest::Approx(2.0 * b).epsilon(1e-9));
}

TEST_CASE("logistic: gradients, curvature, stationarity") {
  for (bool average : {true, false}) {
    const auto prob = make_logistic(4, 3, 10, 0.1, 3, average, 0.05);
    check_gradients(prob, 3);
    check_curvature_bounds(prob, 3);
    CHECK(prob.gradient(prob.z_star).norm() < 1e-9);
  }
}

TEST_CASE("logistic classifier separates well-separated clusters") {
  const auto data = make_two_cluster_data(4, 2, 30, 6.0, 9);
  const auto prob = make_logistic(data, 0.01, true);
  int correct = 0, total = 0;
  for (const auto& d : data)
    for (int j = 0; j < d.labels.size(); ++j) {
      const double score = d.features.row(j).dot(prob.z_star.head(2)) + prob.z_star(2);
      correct += (score > 0) == (d.labels(j) > 0);
      ++total;
    }
  CHECK(correct >= 0.95 * total);
}

TEST_CASE("two-cluster data is balanced and deterministic") {
  const auto a = make_two_cluster_data(3, 2, 6, 2.0, 4), b = make_two_cluster_data(3, 2, 6, 2.0, 4);
  for (int i = 0; i < 3; ++i) {
    CHECK(a[i].labels.sum() == 0.0);
    CHECK((a[i].features - b[i].features).norm() == 0.0);
  }
  CHECK_THROWS_AS(make_two_cluster_data(2, 2, 1, 2.0, 1), Error);
}

TEST_CASE("svm: zero penalty leaves only the quadratic term") {
  const auto prob = make_smooth_svm(3, 2, 10, 0.0, 10.0, 1);
  CHECK(prob.z_star.norm() < 1e-12);
  CHECK(prob.f_star == doctest::Approx(0.0));
}

TEST_CASE("svm: gradients, curvature and accuracy") {
  const auto prob = make_smooth_svm(3, 2, 20, 1.0, 10.0, 5, 6.0);
  check_gradients(prob, 5);
  for (const auto& f : prob.locals) {
    const auto [lo, hi] = fd_curvature(*f, prob.z_star);
    CHECK(hi <= f->lipschitz() * (1 + 1e-5));
    CHECK(lo >= -1e-6);
  }
  CHECK(prob.gradient(prob.z_star).norm() < 1e-9);
  const auto data = make_two_cluster_data(3, 2, 20, 6.0, 5);
  int correct = 0, total = 0;
  for (const auto& d : data)
    for (int j = 0; j < d.labels.size(); ++j) {
      const double score = d.features.row(j).dot(prob.z_star.head(2)) - prob.z_star(2);
      correct += (score > 0) == (d.labels(j) > 0);
      ++total;
    }
  CHECK(correct >= 0.95 * total);
}

TEST_CASE("global problem sums locals and reports extreme constants") {
  const auto prob = make_quadratic(4, 3, 2);
  const Vector z = Vector::LinSpaced(3, -1, 1);
  double v = 0;
  Vector g = Vector::Zero(3);
  double smin = 1e300, lmax = 0;
  for (const auto& f : prob.locals) {
    v += f->value(z);
    g += f->gradient(z);
    smin = std::min(smin, f->strong_convexity());
    lmax = std::max(lmax, f->lipschitz());
  }
  CHECK(prob.value(z) == doctest::Approx(v));
  CHECK((prob.gradient(z) - g).norm() < 1e-12);
  CHECK(prob.strong_convexity() == smin);
  CHECK(prob.lipschitz() == lmax);
}

TEST_CASE("centralized oracle reaches tolerance on every family") {
  for (const auto& prob : {make_quadratic(3, 3, 1), make_least_squares(3, 3, 5, 1), make_logistic(3, 3, 8, 0.1, 1),
                           make_smooth_svm(3, 3, 8, 1.0, 10.0, 1)}) {
    const auto r = centralized_minimize(prob, 1e-10);
    CHECK(r.grad_norm < 1e-10);
    CHECK((r.z - prob.z_star).norm() < 1e-8);
  }
}
