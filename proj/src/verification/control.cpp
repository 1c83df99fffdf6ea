#include "sanm/verification/control.hpp"

#include <stdexcept>

namespace sanm::verification {

namespace {

void same_length(const Vec& a, const Vec& b, const char* what) {
  if (a.size() != b.size()) throw std::invalid_argument(std::string(what) + ": length mismatch");
}

double sq_dist(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

}  // namespace

double hamiltonian(const Vec& c, const Vec& gamma) {
  same_length(c, gamma, "hamiltonian");
  double h = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) h += -0.5 * c[i] * c[i] + gamma[i] * c[i];
  return h;
}

Vec optimal_control(double t, const Vec& x_t, const Vec& x1, double r) {
  same_length(x_t, x1, "optimal_control");
  const double k = r / (1.0 + r * (1.0 - t));
  Vec c(x_t.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = k * (x1[i] - x_t[i]);
  return c;
}

void ControlProblem::validate() const {
  if (!(r > 0.0)) throw std::invalid_argument("control problem: r must be > 0");
  same_length(x0, x1, "control problem");
}

Vec analytic_trajectory(const ControlProblem& p, double t) {
  p.validate();
  const double f = (1.0 + p.r * (1.0 - t)) / (1.0 + p.r);
  Vec x(p.x0.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = p.x1[i] + (p.x0[i] - p.x1[i]) * f;
  return x;
}

std::vector<Vec> integrate_controlled_ode(const ControlProblem& p, std::size_t steps) {
  p.validate();
  if (steps == 0) throw std::invalid_argument("integrate_controlled_ode: N must be >= 1");
  const double h = 1.0 / static_cast<double>(steps);
  std::vector<Vec> traj;
  traj.reserve(steps + 1);
  traj.push_back(p.x0);
  for (std::size_t i = 0; i < steps; ++i) {
    const Vec& x = traj.back();
    const Vec c = optimal_control(static_cast<double>(i) * h, x, p.x1, p.r);
    Vec next(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) next[k] = x[k] + h * c[k];
    traj.push_back(std::move(next));
  }
  return traj;
}

double policy_cost(const ControlProblem& p, const ControlPolicy& policy, std::size_t steps) {
  p.validate();
  if (steps == 0) throw std::invalid_argument("policy_cost: N must be >= 1");
  const double h = 1.0 / static_cast<double>(steps);
  Vec x = p.x0;
  double running = 0.0;
  for (std::size_t i = 0; i < steps; ++i) {
    const Vec c = policy(static_cast<double>(i) * h, x);
    same_length(c, x, "policy_cost");
    for (std::size_t k = 0; k < x.size(); ++k) {
      running += 0.5 * c[k] * c[k] * h;
      x[k] += h * c[k];
    }
  }
  return running + 0.5 * p.r * sq_dist(x, p.x1);
}

double optimal_cost(const ControlProblem& p) {
  p.validate();
  return p.r * sq_dist(p.x0, p.x1) / (2.0 * (1.0 + p.r));
}

Vec hjb_drift(const Vec& x_t, double t, const std::function<Vec(const Vec&)>& score) {
  if (!(t >= 0.0 && t < 1.0)) throw std::invalid_argument("hjb_drift: t must lie in [0, 1)");
  Vec d = score(x_t);
  same_length(d, x_t, "hjb_drift");
  for (auto& v : d) v *= 1.0 - t;
  return d;
}

}  // namespace sanm::verification
