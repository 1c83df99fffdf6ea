#include "sanm/verification/gaussian.hpp"

#include <cmath>
#include <stdexcept>

#include "sanm/numerics/rng.hpp"

namespace sanm::verification {

void GaussianToy::validate() const {
  if (!(tau > 0.0)) throw std::invalid_argument("gaussian toy: tau must be > 0");
  if (!(sigma >= 0.0)) throw std::invalid_argument("gaussian toy: sigma must be >= 0");
}

double gaussian_score(double x, double mean, double var) {
  if (!(var > 0.0)) throw std::invalid_argument("gaussian_score: variance must be > 0");
  return -(x - mean) / var;
}

double tweedie_posterior_mean(double x, const GaussianToy& g) {
  g.validate();
  return x + g.sigma * g.sigma * gaussian_score(x, g.mu0, g.tau * g.tau + g.sigma * g.sigma);
}

double marginal_score(double x, double t, const GaussianToy& g) {
  g.validate();
  const double s = 1.0 - t;
  return gaussian_score(x, g.mu0, g.tau * g.tau + s * s);
}

double tweedie_target_drift(double x, double t, const GaussianToy& g) {
  if (!(t < 1.0)) throw std::invalid_argument("tweedie_target_drift: t must be < 1");
  const GaussianToy at_t{g.mu0, g.tau, 1.0 - t};
  return (tweedie_posterior_mean(x, at_t) - x) / (1.0 - t);
}

SdeReport simulate_guided_sde(const GaussianToy& g, std::size_t steps, std::size_t paths, std::uint64_t seed) {
  g.validate();
  if (steps == 0 || paths < 2) throw std::invalid_argument("simulate_guided_sde: need steps >= 1 and paths >= 2");
  const double h = 1.0 / static_cast<double>(steps);
  const double sqrt_h = std::sqrt(h);
  const SeededRng master(seed);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t p = 0; p < paths; ++p) {
    SeededRng rng = master.derive(p);
    double x = g.mu0 + std::sqrt(g.tau * g.tau + 1.0) * rng.normal();
    for (std::size_t i = 0; i < steps; ++i) {
      const double t = static_cast<double>(i) * h;
      x += (1.0 - t) * marginal_score(x, t, g) * h + sqrt_h * rng.normal();
    }
    sum += x;
    sum_sq += x * x;
  }
  SdeReport r;
  r.steps = steps;
  r.paths = paths;
  const double n = static_cast<double>(paths);
  r.terminal_mean = sum / n;
  r.terminal_std = std::sqrt(std::max(0.0, (sum_sq - n * r.terminal_mean * r.terminal_mean) / (n - 1.0)));
  r.data_mean = g.mu0;
  r.data_std = g.tau;
  r.mean_gap = std::abs(r.terminal_mean - r.data_mean);
  r.mean_std_error = r.terminal_std / std::sqrt(n);
  return r;
}

}  // namespace sanm::verification
