#pragma once

#include <cstddef>
#include <vector>

namespace sanm {

struct ChurnParams {
  double s_churn = 0.0;
  double s_noise = 1.0;
  double s_tmin = 0.0;
  double s_tmax = 1e30;
};

// Stochastic profile used by the CLI defaults.
inline constexpr ChurnParams kStochasticChurn{40.0, 1.003, 0.05, 50.0};

// Noise levels t_0 > ... > t_{N-1} > t_N = 0 in noise-std units.
class EdmSchedule {
 public:
  EdmSchedule(std::vector<double> sigmas, ChurnParams churn);

  std::size_t steps() const { return sigmas_.size() - 1; }
  const std::vector<double>& sigmas() const { return sigmas_; }
  double sigma(std::size_t i) const { return sigmas_.at(i); }
  const ChurnParams& churn() const { return churn_; }

 private:
  std::vector<double> sigmas_;
  ChurnParams churn_;
};

// Karras spacing: t_i = (smax^(1/rho) + i/(N-1) (smin^(1/rho) - smax^(1/rho)))^rho
// for i < N, then t_N = 0. N = 1 yields [sigma_max, 0].
EdmSchedule build_schedule(std::size_t steps, double sigma_min = 0.02, double sigma_max = 80.0,
                           double rho = 7.0, ChurnParams churn = {});

// gamma_i = min(S_churn / N, sqrt(2) - 1) when t_i lies in [S_tmin, S_tmax], else 0.
double churn_gamma(const EdmSchedule& sched, std::size_t i);

}  // namespace sanm
