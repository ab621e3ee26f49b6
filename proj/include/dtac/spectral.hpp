#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "dtac/delay.hpp"
#include "dtac/graph.hpp"

namespace dtac {

using Matrix3 = Eigen::Matrix3d;

/// Largest eigenvalue modulus (dense eigen-decomposition).
double spectral_radius(const Matrix& M);

/// Induced 2-norm (largest singular value).
double norm2(const Matrix& M);

struct LimitMatrix {
  Matrix limit;   // C_inf = perron * 1^T
  Vector perron;  // nonnegative, sums to 1 (or 0 for sub-stochastic input)
  int squarings = 0;
};

/// lim_k Cbar^k, evaluated by repeated squaring until successive iterates
/// agree to `tol` in max-norm. Throws ErrorCode::Engine when the powers do
/// not settle (periodic or otherwise non-convergent input).
LimitMatrix limit_matrix(const Matrix& Cbar, double tol = 1e-13, int max_squarings = 64);

/// ||Cbar - Cbar_inf||_2.
double contraction_sigma(const Matrix& Cbar, double tol = 1e-13);

/// Contraction factor of M measured in the Lyapunov-weighted norm
/// ||v||_W = ||W v||_2, with W^2 = sum_k (M^T)^k M^k. Strictly below one
/// whenever rho(M) < 1. `equivalence` bounds the ratio between ||.||_W and
/// ||.||_2 in both directions.
struct WeightedContraction {
  double sigma = 0.0;
  double equivalence = 1.0;
  Matrix weight;
};
WeightedContraction weighted_contraction(const Matrix& M);

struct SpectralBoundCheck {
  double rho_C = 0.0;
  double rho_Cbar = 0.0;
  double bound = 0.0;  // rho_C^{1/(1+tau_max)}
  bool stochastic = false;
  bool holds = false;
};

/// rho(Cbar) <= rho(C)^{1/(1+tau)} (+1e-9) when rho(C) < 1, and
/// |rho(Cbar) - 1| <= 1e-9 when rho(C) = 1.
SpectralBoundCheck check_spectral_bound(const Matrix& C, const DelayMap& d);
inline bool verify_spectral_bound(const Matrix& C, const DelayMap& d) { return check_spectral_bound(C, d).holds; }

/// Inputs of the step-size certificate. `c` and `d` are the norm-equivalence
/// constants of whatever norm `sigma` was measured in.
struct StepSizeInputs {
  int n = 1;
  int tau_max = 0;
  double sigma = 0.0;
  double kappa = 0.0;
  double epsilon = 0.0;
  double l = 1.0;
  double s = 1.0;
  double y = 1.0;
  double y_minus = 1.0;
  double c = 1.0;
  double d = 1.0;
  double n_aug() const { return static_cast<double>(n) * (tau_max + 1); }
};

struct StepSizeBound {
  double alpha3 = 0.0;
  double cap = 0.0;  // 1 / (n (tau+1) l)
  double admissible_max = 0.0;
  double delta = 0.0;
  double theta = 0.0;
  StepSizeInputs inputs;
};

/// Throws ErrorCode::NoCertifiedStep when sigma >= 1 and
/// ErrorCode::InvalidArgument on non-positive constants.
StepSizeBound step_size_bound(const StepSizeInputs& in);

struct ContractionMatrices {
  Matrix3 G;
  Matrix3 H;
  double eta = 0.0;
};

/// eta = max{1 - a n(tau+1) l, 1 - a n(tau+1) s}.
double eta_factor(double alpha, const StepSizeInputs& in);

/// max(|1 - a n l|, |1 - a n s|): contraction of one centralized gradient step.
double centralized_contraction(double alpha, int n, double l, double s);

Matrix3 build_G(double alpha, const StepSizeInputs& in);
/// H_k with decay T * gamma1^(k-1).
Matrix3 build_H(double alpha, long long k, const StepSizeInputs& in, double T, double gamma1);
ContractionMatrices build_G_H(double alpha, long long k, const StepSizeInputs& in, double T, double gamma1);

/// Trajectory constants from the weight-only iteration yhat <- Cbar yhat
/// started at (1_n; 0; ...; 0).
struct PilotEstimates {
  double y = 1.0;        // sup_k ||Y_k||_2
  double y_minus = 1.0;  // sup_k ||Y_k^{-1}||_2 over the live (first) block
  double gamma1 = 0.5;   // fitted geometric rate of ||Y_k - Y_inf||_2
  double T = 0.0;        // smallest constant with ||Y_k - Y_inf|| <= T gamma1^k over the horizon
  int horizon = 0;
};
PilotEstimates pilot_run(const AugmentedMatrix& aug, const Vector& y_limit, int horizon = 500);

enum class NormChoice { Auto, Euclidean, Weighted };

struct SpectralOptions {
  int pilot_iters = 500;
  NormChoice norm = NormChoice::Auto;
  std::optional<double> c_override;
  std::optional<double> d_override;
  double limit_tol = 1e-13;
};

struct SpectralReport {
  int n = 0;
  int tau_max = 0;
  double rho_C = 0.0;
  double rho_Cbar = 0.0;
  double bound = 0.0;
  bool bound_holds = false;
  double sigma = 0.0;   // ||Cbar - Cbar_inf||_2
  double sigma1 = 0.0;  // ||C - C_inf||_2
  double rho_sigma = 0.0;  // rho(Cbar - Cbar_inf)
  Vector perron;
  double kappa = 0.0;        // ||C - I||_2
  double kappa_aug = 0.0;    // ||Cbar - I||_2
  double epsilon = 0.0;      // ||I - C_inf||_2
  double epsilon_aug = 0.0;  // ||I - Cbar_inf||_2
  std::string norm_used;     // "euclidean" or "weighted"
  double sigma_cert = 0.0;   // contraction factor fed into the certificate
  Matrix norm_weight;        // ||v|| = ||norm_weight * v||_2
  PilotEstimates pilot;
  double s = 0.0;
  double l = 0.0;
  std::optional<StepSizeBound> step;  // empty when no certificate exists
  std::string step_error;
};

SpectralReport analyze_spectrum(const WeightMatrix& W, const DelayMap& d, double s, double l,
                                const SpectralOptions& opt = {});

/// Aligned `key : value` lines.
std::string format_report_text(const SpectralReport& r);
/// Single line of space-separated key=value pairs.
std::string format_report_record(const SpectralReport& r);

}  // namespace dtac
