#pragma once

// Gaussian toy problems with closed-form scores and posteriors. Time runs on
// the unit interval: data sits at t = 1 and X_t = x + (1 - t) n with n ~ N(0, 1),
// so the marginal at time t is N(mu0, tau^2 + (1 - t)^2).

#include <cstddef>
#include <cstdint>

namespace sanm::verification {

struct GaussianToy {
  double mu0 = 0.0;
  double tau = 1.0;    // data std
  double sigma = 0.0;  // observation noise std

  // Throws std::invalid_argument unless tau > 0 and sigma >= 0.
  void validate() const;
};

// d/dx log N(x; mean, var).
double gaussian_score(double x, double mean, double var);

// x + sigma^2 * score of the noisy marginal N(mu0, tau^2 + sigma^2).
double tweedie_posterior_mean(double x, const GaussianToy& g);

// Score of the time-t marginal.
double marginal_score(double x, double t, const GaussianToy& g);

// Drift toward the Tweedie estimate of the endpoint: (x1_hat - X_t) / (1 - t).
double tweedie_target_drift(double x, double t, const GaussianToy& g);

struct SdeReport {
  std::size_t steps = 0;
  std::size_t paths = 0;
  double terminal_mean = 0.0;
  double terminal_std = 0.0;
  double data_mean = 0.0;
  double data_std = 0.0;
  double mean_gap = 0.0;       // |terminal_mean - data_mean|
  double mean_std_error = 0.0; // terminal_std / sqrt(paths)
};

// Euler-Maruyama for dX = (1 - t) score_t(X) dt + dw from X_0 ~ N(mu0, tau^2 + 1)
// to t = 1, one independent stream per path.
SdeReport simulate_guided_sde(const GaussianToy& g, std::size_t steps, std::size_t paths, std::uint64_t seed);

}  // namespace sanm::verification
