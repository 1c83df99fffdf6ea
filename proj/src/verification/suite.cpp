#include "sanm/verification/suite.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "sanm/numerics/rng.hpp"
#include "sanm/verification/control.hpp"
#include "sanm/verification/gaussian.hpp"

namespace sanm::verification {

namespace {

Vec random_vec(SeededRng& rng, std::size_t n, double scale) {
  Vec v(n);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

double max_abs_diff(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double norm(const Vec& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

CheckResult below(std::string name, double measured, double tol, std::string detail = {}) {
  return {std::move(name), measured < tol, measured, tol, std::move(detail)};
}

CheckResult hamiltonian_argmax(SeededRng rng) {
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Vec gamma = random_vec(rng, 4, 2.0);
    Vec c = random_vec(rng, 4, 5.0);
    // Gradient ascent on the concave quadratic: dH/dc = gamma - c.
    for (int it = 0; it < 200; ++it)
      for (std::size_t k = 0; k < c.size(); ++k) c[k] += 0.5 * (gamma[k] - c[k]);
    worst = std::max(worst, max_abs_diff(c, gamma));
  }
  return below("hamiltonian_argmax", worst, 1e-6, "hill climbing from random starts");
}

CheckResult transversality(SeededRng rng) {
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double r = std::exp(rng.uniform(-2.0, 3.0));
    const Vec x = random_vec(rng, 3, 1.0), x1 = random_vec(rng, 3, 1.0);
    const Vec c = optimal_control(1.0, x, x1, r);
    for (std::size_t k = 0; k < x.size(); ++k) worst = std::max(worst, std::abs(c[k] - r * (x1[k] - x[k])));
  }
  return below("control_transversality", worst, 1e-12, "c*(t=1) = r (x1 - X_1)");
}

CheckResult terminal_gap() {
  ControlProblem p{10.0, {1.0, -2.0, 0.5}, {-1.0, 3.0, 2.0}};
  const auto traj = integrate_controlled_ode(p, 10000);
  Vec gap0(3), gap1(3);
  for (std::size_t k = 0; k < 3; ++k) {
    gap0[k] = p.x0[k] - p.x1[k];
    gap1[k] = traj.back()[k] - p.x1[k];
  }
  const double expected = norm(gap0) / (1.0 + p.r);
  return below("terminal_gap", std::abs(norm(gap1) - expected) / expected, 1e-3, "N=10000 r=10");
}

CheckResult trajectory_deviation() {
  ControlProblem p{3.0, {0.7, -1.1}, {-0.4, 2.5}};
  const std::size_t n = 256;
  const auto traj = integrate_controlled_ode(p, n);
  double worst = 0.0;
  for (std::size_t i = 0; i <= n; ++i)
    worst = std::max(worst, max_abs_diff(traj[i], analytic_trajectory(p, static_cast<double>(i) / n)));
  return below("euler_trajectory_deviation", worst, 1e-12, "the optimal path is linear in t");
}

CheckResult gamma_constant(SeededRng rng) {
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    ControlProblem p{std::exp(rng.uniform(-2.0, 3.0)), random_vec(rng, 3, 1.0), random_vec(rng, 3, 1.0)};
    const Vec c0 = optimal_control(0.0, p.x0, p.x1, p.r);
    for (int i = 1; i <= 100; ++i) {
      const double t = i / 100.0;
      worst = std::max(worst, max_abs_diff(optimal_control(t, analytic_trajectory(p, t), p.x1, p.r), c0));
    }
  }
  return below("gamma_constant", worst, 1e-9, "along the analytic trajectory");
}

CheckResult cost_optimality(SeededRng rng) {
  double worst = -1e300;
  for (int trial = 0; trial < 100; ++trial) {
    ControlProblem p{std::exp(rng.uniform(-2.0, 3.0)), random_vec(rng, 3, 1.0), random_vec(rng, 3, 1.0)};
    const double opt = policy_cost(p, [&](double t, const Vec& x) { return optimal_control(t, x, p.x1, p.r); }, 1000);
    Vec line(p.x0.size());
    for (std::size_t k = 0; k < line.size(); ++k) line[k] = p.x1[k] - p.x0[k];
    const double straight = policy_cost(p, [&](double, const Vec&) { return line; }, 1000);
    worst = std::max(worst, opt - straight);
  }
  return {"cost_optimality", worst <= 1e-12, worst, 1e-12, "optimal minus straight-line cost"};
}

CheckResult tweedie_grid() {
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double x = -3.0 + 6.0 * (i % 10) / 9.0;
    const double tau = 0.2 + 0.3 * (i / 10);
    const double sigma = 0.1 * (1 + (i * 7) % 13);
    const GaussianToy g{0.3, tau, sigma};
    const double closed = (tau * tau * x + sigma * sigma * g.mu0) / (tau * tau + sigma * sigma);
    worst = std::max(worst, std::abs(tweedie_posterior_mean(x, g) - closed));
  }
  return below("tweedie_posterior", worst, 1e-9, "100-point (x, tau, sigma) grid");
}

CheckResult drift_identity(SeededRng rng) {
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const GaussianToy g{rng.uniform(-1.0, 1.0), rng.uniform(0.2, 2.0), 0.0};
    const double t = rng.uniform(0.0, 0.99);
    const Vec x = {rng.uniform(-4.0, 4.0)};
    const Vec drift = hjb_drift(x, t, [&](const Vec& v) { return Vec{marginal_score(v[0], t, g)}; });
    worst = std::max(worst, std::abs(drift[0] - tweedie_target_drift(x[0], t, g)));
  }
  return below("drift_identity", worst, 1e-9, "score drift vs Tweedie-target drift, 1000 states");
}

}  // namespace

std::vector<CheckResult> run_verification_suite(const SuiteOptions& o) {
  const SeededRng master(o.seed);
  std::vector<CheckResult> out;
  out.push_back(hamiltonian_argmax(master.derive(1)));
  out.push_back(transversality(master.derive(2)));
  out.push_back(terminal_gap());
  out.push_back(trajectory_deviation());
  out.push_back(gamma_constant(master.derive(3)));
  out.push_back(cost_optimality(master.derive(4)));
  out.push_back(tweedie_grid());
  out.push_back(drift_identity(master.derive(5)));

  const SdeReport sde = simulate_guided_sde({0.0, 1.0, 0.0}, o.sde_steps, o.sde_paths, o.seed + 6);
  out.push_back({"sde_terminal_mean", sde.mean_gap <= 3.0 * sde.mean_std_error, sde.mean_gap,
                 3.0 * sde.mean_std_error, "terminal std " + std::to_string(sde.terminal_std)});
  const SdeReport collapse = simulate_guided_sde({0.0, 1e-4, 0.0}, o.sde_steps, 1000, o.seed + 7);
  out.push_back(below("sde_collapse_std", collapse.terminal_std, 0.05, "tau=1e-4"));
  return out;
}

void write_report(std::ostream& os, const std::vector<CheckResult>& results) {
  std::size_t passed = 0;
  os << std::setprecision(6);
  for (const auto& r : results) {
    passed += r.passed;
    os << "check=" << r.name << " status=" << (r.passed ? "pass" : "fail") << " measured=" << r.measured
       << " tolerance=" << r.tolerance << '\n';
  }
  os << "summary passed=" << passed << " failed=" << results.size() - passed << '\n';
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

}  // namespace sanm::verification
