#include "dtac/monitor.hpp"

#include <algorithm>
#include <cmath>

#include "dtac/error.hpp"

namespace dtac {

ContractionMonitor::ContractionMonitor(const SpectralReport& report, const AugmentedMatrix& aug,
                                       const GlobalProblem& problem, double alpha)
    : problem_(problem), pilot_(report.pilot), alpha_(alpha), weight_(report.norm_weight), n_(aug.n) {
  if (!report.step) fail(ErrorCode::NoCertifiedStep, "monitor: report has no certificate: " + report.step_error);
  in_ = report.step->inputs;
  limit_ = limit_matrix(aug.Cbar).limit;
  require(weight_.rows() == aug.dim(), "monitor: norm weight does not match the augmented dimension");
}

Eigen::Vector3d ContractionMonitor::measure(const AugmentedEngine& e, double& s_out) const {
  const Matrix& x = e.xhat();
  const Matrix& g = e.ghat();
  const Vector mean = x.colwise().sum().transpose() / static_cast<double>(n_);
  Eigen::Vector3d t;
  t(0) = (weight_ * (x - limit_ * x)).norm();
  t(1) = std::sqrt(static_cast<double>(n_)) * (mean - problem_.z_star).norm();
  t(2) = (weight_ * (g - limit_ * g)).norm();
  s_out = x.norm();
  return t;
}

MonitorSample ContractionMonitor::observe(const AugmentedEngine& e) {
  MonitorSample m;
  m.iter = e.iteration();
  m.t = measure(e, m.s);
  if (prev_t_) {
    const Matrix3 G = build_G(alpha_, in_);
    const Matrix3 H = build_H(alpha_, m.iter - 1, in_, pilot_.T, pilot_.gamma1);
    m.predicted = G * *prev_t_ + H * Eigen::Vector3d(prev_s_, 0.0, 0.0);
    for (int i = 0; i < 3; ++i)
      if (m.predicted(i) > floor) m.ratio = std::max(m.ratio, m.t(i) / m.predicted(i));
    worst_ = std::max(worst_, m.ratio);
  }
  prev_t_ = m.t;
  prev_s_ = m.s;
  samples_.push_back(m);
  return m;
}

}  // namespace dtac
