#include "sanm/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sanm {

EdmSchedule::EdmSchedule(std::vector<double> sigmas, ChurnParams churn)
    : sigmas_(std::move(sigmas)), churn_(churn) {
  if (sigmas_.size() < 2) throw std::invalid_argument("schedule: need at least one step");
  if (sigmas_.back() != 0.0) throw std::invalid_argument("schedule: terminal sigma must be 0");
  for (std::size_t i = 0; i + 1 < sigmas_.size(); ++i) {
    if (!(sigmas_[i] > sigmas_[i + 1])) throw std::invalid_argument("schedule: sigmas must strictly decrease");
  }
  if (!(churn_.s_tmin <= churn_.s_tmax) || !(churn_.s_churn >= 0.0) || !(churn_.s_noise > 0.0)) {
    throw std::invalid_argument("schedule: invalid churn parameters");
  }
}

EdmSchedule build_schedule(std::size_t steps, double sigma_min, double sigma_max, double rho, ChurnParams churn) {
  if (steps == 0) throw std::invalid_argument("build_schedule: N must be >= 1");
  if (!(sigma_min > 0.0) || !(sigma_min < sigma_max) || !(rho > 0.0)) {
    throw std::invalid_argument("build_schedule: need 0 < sigma_min < sigma_max and rho > 0");
  }
  std::vector<double> sigmas(steps + 1, 0.0);
  const double hi = std::pow(sigma_max, 1.0 / rho);
  const double lo = std::pow(sigma_min, 1.0 / rho);
  for (std::size_t i = 0; i < steps; ++i) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(steps - 1);
    sigmas[i] = std::pow(hi + frac * (lo - hi), rho);
  }
  // Pin the endpoints against pow round-off.
  sigmas[0] = sigma_max;
  if (steps > 1) sigmas[steps - 1] = sigma_min;
  return EdmSchedule(std::move(sigmas), churn);
}

double churn_gamma(const EdmSchedule& sched, std::size_t i) {
  if (i >= sched.steps()) {
    throw std::out_of_range("churn_gamma: step " + std::to_string(i) + " out of range");
  }
  const auto& c = sched.churn();
  const double t = sched.sigma(i);
  if (t < c.s_tmin || t > c.s_tmax) return 0.0;
  return std::min(c.s_churn / static_cast<double>(sched.steps()), std::sqrt(2.0) - 1.0);
}

}  // namespace sanm
