#pragma once

#include <optional>
#include <vector>

#include "dtac/optimizer.hpp"
#include "dtac/spectral.hpp"

namespace dtac {

/// One round of the three-term error recursion, measured on the stacked
/// state:
///   t = (||x - C_inf x||, sqrt(n) ||mean - z*||_2, ||g - C_inf g||)
///   s = (||x||_2, 0, 0)
/// where ||.|| is the norm the step-size certificate was computed in.
struct MonitorSample {
  long long iter = 0;
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  Eigen::Vector3d predicted = Eigen::Vector3d::Zero();  // G t_prev + H s_prev
  double s = 0.0;
  /// max_i t_i / predicted_i over components with predicted_i > floor.
  double ratio = 0.0;
};

class ContractionMonitor {
 public:
  /// `report` must carry a step-size certificate.
  ContractionMonitor(const SpectralReport& report, const AugmentedMatrix& aug, const GlobalProblem& problem,
                     double alpha);
  /// Feed the engine after each step (and once before the first step).
  MonitorSample observe(const AugmentedEngine& e);
  const std::vector<MonitorSample>& samples() const { return samples_; }
  double worst_ratio() const { return worst_; }
  /// Components whose prediction falls below this are not compared.
  double floor = 1e-12;

 private:
  Eigen::Vector3d measure(const AugmentedEngine& e, double& s_out) const;

  const GlobalProblem& problem_;
  StepSizeInputs in_;
  PilotEstimates pilot_;
  double alpha_;
  Matrix weight_, limit_;
  int n_;
  std::optional<Eigen::Vector3d> prev_t_;
  double prev_s_ = 0.0;
  std::vector<MonitorSample> samples_;
  double worst_ = 0.0;
};

}  // namespace dtac
