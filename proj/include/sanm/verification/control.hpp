#pragma once

// Deterministic optimal control on the unit interval:
//   minimize  int_0^1 1/2 |c_t|^2 dt + r/2 |X_1 - x1|^2   s.t.  dX_t = c_t dt.
// The gap u = X - x1 obeys u(t) = u(0) (1 + r(1-t)) / (1 + r) under the
// optimal control, which is constant in time.

#include <cstddef>
#include <functional>
#include <vector>

namespace sanm::verification {

using Vec = std::vector<double>;

// -1/2 |c|^2 + gamma . c. Throws std::invalid_argument on length mismatch.
double hamiltonian(const Vec& c, const Vec& gamma);

// r (x1 - X_t) / (1 + r (1 - t)).
Vec optimal_control(double t, const Vec& x_t, const Vec& x1, double r);

struct ControlProblem {
  double r = 1.0;
  Vec x1;
  Vec x0;

  // Throws std::invalid_argument unless r > 0 and x0, x1 have equal length.
  void validate() const;
};

// Closed-form optimal state at time t.
Vec analytic_trajectory(const ControlProblem& p, double t);

// Forward Euler of dX/dt = optimal_control(t, X) on N uniform steps.
// Returns the N + 1 states. Throws std::invalid_argument for N == 0.
std::vector<Vec> integrate_controlled_ode(const ControlProblem& p, std::size_t steps);

using ControlPolicy = std::function<Vec(double t, const Vec& x)>;

// Running plus terminal cost of a feedback policy, integrated with forward
// Euler on N steps.
double policy_cost(const ControlProblem& p, const ControlPolicy& policy, std::size_t steps);

// r |x1 - x0|^2 / (2 (1 + r)): cost of the optimal control.
double optimal_cost(const ControlProblem& p);

// (1 - t) * score(X_t). Throws std::invalid_argument unless 0 <= t < 1.
Vec hjb_drift(const Vec& x_t, double t, const std::function<Vec(const Vec&)>& score);

}  // namespace sanm::verification
