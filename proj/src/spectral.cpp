#include "dtac/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "dtac/error.hpp"

namespace dtac {

double spectral_radius(const Matrix& M) {
  require(M.rows() == M.cols(), "spectral_radius: matrix must be square");
  if (M.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(M, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) fail(ErrorCode::Engine, "spectral_radius: eigen-decomposition failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double norm2(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(M);
  return svd.singularValues()(0);
}

LimitMatrix limit_matrix(const Matrix& Cbar, double tol, int max_squarings) {
  require(Cbar.rows() == Cbar.cols(), "limit_matrix: matrix must be square");
  Matrix power = Cbar;
  for (int k = 1; k <= max_squarings; ++k) {
    Matrix next = power * power;
    const double diff = (next - power).cwiseAbs().maxCoeff();
    power = std::move(next);
    if (!power.allFinite()) break;
    if (diff < tol) {
      LimitMatrix out;
      out.squarings = k;
      out.perron = power.rowwise().mean();
      // Columns of the limit are identical; rebuild it exactly rank one.
      out.limit = out.perron * Vector::Ones(power.cols()).transpose();
      return out;
    }
  }
  fail(ErrorCode::Engine, "limit_matrix: powers did not converge (periodic or non-primitive mixing)");
}

double contraction_sigma(const Matrix& Cbar, double tol) {
  const auto lim = limit_matrix(Cbar, tol);
  return norm2(Cbar - lim.limit);
}

WeightedContraction weighted_contraction(const Matrix& M) {
  require(M.rows() == M.cols(), "weighted_contraction: matrix must be square");
  const Eigen::Index dim = M.rows();
  // Smith doubling for P = sum_k (M^T)^k M^k, i.e. P - M^T P M = I.
  Matrix P = Matrix::Identity(dim, dim);
  Matrix A = M;
  for (int it = 0; it < 64; ++it) {
    Matrix term = A.transpose() * P * A;
    P += term;
    if (!P.allFinite() || P.cwiseAbs().maxCoeff() > 1e15)
      fail(ErrorCode::NoCertifiedStep, "weighted_contraction: rho(M) is not below one");
    if (term.cwiseAbs().maxCoeff() <= 1e-15 * P.cwiseAbs().maxCoeff()) break;
    A = A * A;
  }
  P = 0.5 * (P + P.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(P);
  const Vector lam = es.eigenvalues();
  const Matrix& V = es.eigenvectors();
  WeightedContraction out;
  out.weight = V * lam.cwiseSqrt().asDiagonal() * V.transpose();
  const Matrix inv = V * lam.cwiseSqrt().cwiseInverse().asDiagonal() * V.transpose();
  out.sigma = norm2(out.weight * M * inv);
  out.equivalence = std::sqrt(lam.maxCoeff() / lam.minCoeff());
  return out;
}

SpectralBoundCheck check_spectral_bound(const Matrix& C, const DelayMap& d) {
  SpectralBoundCheck r;
  r.rho_C = spectral_radius(C);
  const auto aug = augment(C, d, SliceCheck::Any);
  r.rho_Cbar = spectral_radius(aug.Cbar);
  r.bound = std::pow(r.rho_C, 1.0 / (1.0 + d.tau_max()));
  r.stochastic = std::abs(r.rho_C - 1.0) <= 1e-9;
  if (r.stochastic)
    r.holds = std::abs(r.rho_Cbar - 1.0) <= 1e-9;
  else
    r.holds = r.rho_Cbar <= r.bound + 1e-9;
  return r;
}

StepSizeBound step_size_bound(const StepSizeInputs& in) {
  require(in.n >= 1 && in.tau_max >= 0, "step_size_bound: bad n or tau_max");
  for (double v : {in.kappa + 1.0, in.epsilon, in.l, in.s, in.y, in.y_minus, in.c, in.d})
    require(v > 0.0 && std::isfinite(v), "step_size_bound: constants must be positive and finite");
  require(in.sigma >= 0.0, "step_size_bound: sigma must be nonnegative");
  if (in.sigma >= 1.0)
    fail(ErrorCode::NoCertifiedStep, "step_size_bound: sigma >= 1, delays too large for a certified rate");
  const double N = in.n_aug();
  StepSizeBound b;
  b.inputs = in;
  b.delta = N * in.s * in.c * in.d * in.epsilon * in.l * in.y_minus * (1.0 - in.sigma + in.kappa);
  b.theta = in.c * in.d * in.epsilon * in.l * in.l * in.y * in.y_minus * in.y_minus * (in.l + N * in.s);
  const double gap = 1.0 - in.sigma;
  const double disc = b.delta * b.delta + 4.0 * N * in.s * gap * gap * b.theta;
  // (sqrt(disc) - delta) / (2 theta), rewritten to avoid cancellation when
  // theta is small relative to delta^2.
  b.alpha3 = 2.0 * N * in.s * gap * gap / (std::sqrt(disc) + b.delta);
  b.cap = 1.0 / (N * in.l);
  b.admissible_max = std::min(b.alpha3, b.cap);
  return b;
}

double eta_factor(double alpha, const StepSizeInputs& in) {
  const double N = in.n_aug();
  return std::max(1.0 - alpha * N * in.l, 1.0 - alpha * N * in.s);
}

double centralized_contraction(double alpha, int n, double l, double s) {
  return std::max(std::abs(1.0 - alpha * n * l), std::abs(1.0 - alpha * n * s));
}

Matrix3 build_G(double alpha, const StepSizeInputs& in) {
  const double c = in.c, d = in.d, e = in.epsilon, l = in.l, y = in.y, ym = in.y_minus;
  Matrix3 G;
  G << in.sigma, 0.0, alpha,                                      //
      alpha * c * l * ym, eta_factor(alpha, in), 0.0,              //
      c * d * e * l * ym * (in.kappa + alpha * l * y * ym), alpha * d * e * l * l * y * ym,
      in.sigma + alpha * c * d * e * l * ym;
  return G;
}

Matrix3 build_H(double alpha, long long k, const StepSizeInputs& in, double T, double gamma1) {
  const double decay = T * std::pow(gamma1, static_cast<double>(k - 1));
  const double l = in.l, ym = in.y_minus;
  Matrix3 H = Matrix3::Zero();
  H(1, 0) = alpha * l * ym * decay;
  H(2, 0) = (alpha * l * in.y + 2.0) * in.d * in.epsilon * l * ym * ym * decay;
  return H;
}

ContractionMatrices build_G_H(double alpha, long long k, const StepSizeInputs& in, double T, double gamma1) {
  return {build_G(alpha, in), build_H(alpha, k, in, T, gamma1), eta_factor(alpha, in)};
}

PilotEstimates pilot_run(const AugmentedMatrix& aug, const Vector& y_limit, int horizon) {
  const int n = aug.n;
  Vector yhat = Vector::Zero(aug.dim());
  yhat.head(n).setOnes();
  PilotEstimates p;
  p.horizon = horizon;
  p.y = 0.0;
  p.y_minus = 0.0;
  std::vector<double> errs;
  errs.reserve(horizon + 1);
  for (int k = 0; k <= horizon; ++k) {
    p.y = std::max(p.y, yhat.cwiseAbs().maxCoeff());
    const double live_min = yhat.head(n).minCoeff();
    if (live_min <= 0.0) fail(ErrorCode::Engine, "pilot_run: non-positive live weight");
    p.y_minus = std::max(p.y_minus, 1.0 / live_min);
    errs.push_back((yhat - y_limit).cwiseAbs().maxCoeff());
    if (k < horizon) yhat = aug.Cbar * yhat;
  }
  // Least-squares fit of log err_k = log T + k log gamma1 over the points
  // above the rounding floor.
  const double floor = 1e-12 * std::max(1.0, errs.front());
  double sk = 0, sl = 0, skk = 0, skl = 0;
  int m = 0;
  for (int k = 0; k <= horizon; ++k) {
    if (errs[k] <= floor) continue;
    const double lg = std::log(errs[k]);
    sk += k;
    sl += lg;
    skk += static_cast<double>(k) * k;
    skl += k * lg;
    ++m;
  }
  if (m >= 2 && m * skk - sk * sk > 0) {
    const double slope = (m * skl - sk * sl) / (m * skk - sk * sk);
    p.gamma1 = std::clamp(std::exp(slope), 1e-6, 1.0 - 1e-12);
  }
  p.T = 0.0;
  for (int k = 0; k <= horizon; ++k) {
    if (errs[k] <= floor) continue;
    p.T = std::max(p.T, errs[k] / std::pow(p.gamma1, k));
  }
  return p;
}

SpectralReport analyze_spectrum(const WeightMatrix& W, const DelayMap& d, double s, double l,
                                const SpectralOptions& opt) {
  const Matrix& C = W.C;
  const int n = W.size();
  SpectralReport r;
  r.n = n;
  r.tau_max = d.tau_max();
  r.s = s;
  r.l = l;
  const auto aug = augment(C, d);
  const auto bound = check_spectral_bound(C, d);
  r.rho_C = bound.rho_C;
  r.rho_Cbar = bound.rho_Cbar;
  r.bound = bound.bound;
  r.bound_holds = bound.holds;

  const auto lim = limit_matrix(aug.Cbar, opt.limit_tol);
  const auto lim1 = limit_matrix(C, opt.limit_tol);
  r.perron = lim.perron;
  const Matrix M = aug.Cbar - lim.limit;
  r.sigma = norm2(M);
  r.sigma1 = norm2(C - lim1.limit);
  r.rho_sigma = spectral_radius(M);
  r.kappa = norm2(C - Matrix::Identity(n, n));
  r.kappa_aug = norm2(aug.Cbar - Matrix::Identity(aug.dim(), aug.dim()));
  r.epsilon = norm2(Matrix::Identity(n, n) - lim1.limit);
  r.epsilon_aug = norm2(Matrix::Identity(aug.dim(), aug.dim()) - lim.limit);

  // ŷ converges to Cbar_inf * (1_n; 0) = n * perron.
  r.pilot = pilot_run(aug, static_cast<double>(n) * lim.perron, opt.pilot_iters);

  StepSizeInputs in;
  in.n = n;
  in.tau_max = d.tau_max();
  in.kappa = r.kappa;
  in.epsilon = r.epsilon;
  in.l = l;
  in.s = s;
  in.y = r.pilot.y;
  in.y_minus = r.pilot.y_minus;

  const bool euclid = opt.norm == NormChoice::Euclidean || (opt.norm == NormChoice::Auto && r.sigma < 1.0);
  try {
    if (euclid) {
      r.norm_used = "euclidean";
      in.sigma = r.sigma;
      r.norm_weight = Matrix::Identity(aug.dim(), aug.dim());
    } else {
      r.norm_used = "weighted";
      const auto wc = weighted_contraction(M);
      in.sigma = wc.sigma;
      in.c = wc.equivalence;
      in.d = wc.equivalence;
      r.norm_weight = wc.weight;
    }
    if (opt.c_override) in.c = *opt.c_override;
    if (opt.d_override) in.d = *opt.d_override;
    r.sigma_cert = in.sigma;
    r.step = step_size_bound(in);
  } catch (const Error& e) {
    r.step.reset();
    r.step_error = e.what();
  }
  return r;
}

namespace {

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

}  // namespace

std::string format_report_text(const SpectralReport& r) {
  std::ostringstream os;
  auto row = [&os](const std::string& k, const std::string& v) { os << std::left << std::setw(16) << k << ": " << v << '\n'; };
  row("n", std::to_string(r.n));
  row("tau_max", std::to_string(r.tau_max));
  row("rho_C", num(r.rho_C));
  row("rho_Cbar", num(r.rho_Cbar));
  row("bound", num(r.bound));
  row("bound_holds", r.bound_holds ? "yes" : "no");
  row("sigma", num(r.sigma));
  row("sigma1", num(r.sigma1));
  row("rho_sigma", num(r.rho_sigma));
  row("perron_min", num(r.perron.size() ? r.perron.minCoeff() : 0.0));
  row("perron_max", num(r.perron.size() ? r.perron.maxCoeff() : 0.0));
  row("kappa", num(r.kappa));
  row("kappa_aug", num(r.kappa_aug));
  row("epsilon", num(r.epsilon));
  row("epsilon_aug", num(r.epsilon_aug));
  row("y", num(r.pilot.y));
  row("y_minus", num(r.pilot.y_minus));
  row("gamma1", num(r.pilot.gamma1));
  row("T", num(r.pilot.T));
  row("s", num(r.s));
  row("l", num(r.l));
  row("norm", r.norm_used);
  row("sigma_cert", num(r.sigma_cert));
  if (r.step) {
    row("c", num(r.step->inputs.c));
    row("d", num(r.step->inputs.d));
    row("delta", num(r.step->delta));
    row("theta", num(r.step->theta));
    row("alpha3", num(r.step->alpha3));
    row("alpha_cap", num(r.step->cap));
    row("admissible_max", num(r.step->admissible_max));
  } else {
    row("admissible_max", "none (" + r.step_error + ")");
  }
  return os.str();
}

std::string format_report_record(const SpectralReport& r) {
  std::ostringstream os;
  os << "n=" << r.n << " tau_max=" << r.tau_max << " rho_C=" << num(r.rho_C) << " rho_Cbar=" << num(r.rho_Cbar)
     << " bound=" << num(r.bound) << " bound_holds=" << (r.bound_holds ? 1 : 0) << " sigma=" << num(r.sigma)
     << " sigma1=" << num(r.sigma1) << " kappa=" << num(r.kappa) << " epsilon=" << num(r.epsilon)
     << " y=" << num(r.pilot.y) << " y_minus=" << num(r.pilot.y_minus) << " gamma1=" << num(r.pilot.gamma1)
     << " T=" << num(r.pilot.T) << " norm=" << r.norm_used << " sigma_cert=" << num(r.sigma_cert);
  if (r.step)
    os << " c=" << num(r.step->inputs.c) << " d=" << num(r.step->inputs.d) << " delta=" << num(r.step->delta)
       << " theta=" << num(r.step->theta) << " alpha3=" << num(r.step->alpha3) << " alpha_cap=" << num(r.step->cap)
       << " admissible_max=" << num(r.step->admissible_max);
  else
    os << " admissible_max=0";
  return os.str();
}

}  // namespace dtac
