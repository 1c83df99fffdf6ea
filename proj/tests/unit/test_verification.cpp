#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "sanm/numerics/rng.hpp"
#include "sanm/verification/control.hpp"
#include "sanm/verification/gaussian.hpp"
#include "sanm/verification/suite.hpp"

namespace sanm::verification {
namespace {

double norm(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Vec sub(const Vec& a, const Vec& b) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vec random_vec(SeededRng& rng, std::size_t n, double scale = 1.0) {
  Vec v(n);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

// ---- hamiltonian ----

TEST(Hamiltonian, Examples) {
  const Vec g{0.5, -2.0, 1.0};
  EXPECT_EQ(hamiltonian({0, 0, 0}, g), 0.0);
  EXPECT_DOUBLE_EQ(hamiltonian(g, g), 0.5 * norm(g) * norm(g));
  SeededRng rng(1);
  for (int i = 0; i < 100; ++i) {
    Vec c = g;
    const Vec d = random_vec(rng, 3);
    for (std::size_t k = 0; k < 3; ++k) c[k] += d[k];
    ASSERT_LT(hamiltonian(c, g), hamiltonian(g, g));
  }
  EXPECT_THROW(hamiltonian({1}, g), std::invalid_argument);
}

TEST(Hamiltonian, HillClimbingFindsGamma) {
  SeededRng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec g = random_vec(rng, 4, 3.0);
    Vec c = random_vec(rng, 4, 10.0);
    // Gradient of H in c is gamma - c.
    for (int it = 0; it < 500; ++it)
      for (std::size_t k = 0; k < 4; ++k) c[k] += 0.1 * (g[k] - c[k]);
    ASSERT_LT(norm(sub(c, g)), 1e-6);
  }
}

// ---- optimal control ----

TEST(OptimalControl, Examples) {
  EXPECT_EQ(optimal_control(0.3, {1, 2}, {1, 2}, 5.0), (Vec{0, 0}));
  const Vec x{0.2, -1.0}, x1{1.0, 3.0};
  const Vec at1 = optimal_control(1.0, x, x1, 4.0);
  for (std::size_t k = 0; k < 2; ++k) EXPECT_DOUBLE_EQ(at1[k], 4.0 * (x1[k] - x[k]));
  EXPECT_DOUBLE_EQ(optimal_control(0.0, {0}, {1}, 1.0)[0], 0.5);
}

TEST(ControlledOde, ConstantWhenStartingAtTarget) {
  const ControlProblem p{3.0, {1, -2}, {1, -2}};
  for (const auto& s : integrate_controlled_ode(p, 10)) EXPECT_EQ(s, p.x1);
}

TEST(ControlledOde, TerminalGapMatchesClosedForm) {
  const ControlProblem p{10.0, {1.0, -0.5, 2.0}, {-1.0, 0.5, 0.0}};
  const auto traj = integrate_controlled_ode(p, 10000);
  ASSERT_EQ(traj.size(), 10001u);
  const double gap = norm(sub(traj.back(), p.x1));
  const double expected = norm(sub(p.x0, p.x1)) / (1.0 + p.r);
  EXPECT_LT(std::abs(gap - expected) / expected, 1e-3);
}

TEST(ControlledOde, EulerReproducesTheStraightOptimalPath) {
  // The optimal control is constant along its own trajectory, so each Euler
  // step is exact and refining the grid has nothing left to remove.
  const ControlProblem p{2.5, {0.3, 1.0}, {-1.0, 2.0}};
  for (std::size_t n : {10, 20, 40}) {
    const auto traj = integrate_controlled_ode(p, n);
    double dev = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      dev = std::max(dev, norm(sub(traj[i], analytic_trajectory(p, double(i) / double(n)))));
    EXPECT_LT(dev, 1e-12) << n;
  }
  EXPECT_THROW(integrate_controlled_ode(p, 0), std::invalid_argument);
  EXPECT_THROW((ControlProblem{0.0, {1}, {1}}.validate()), std::invalid_argument);
  EXPECT_THROW((ControlProblem{1.0, {1}, {1, 2}}.validate()), std::invalid_argument);
}

TEST(ControlledOde, GammaConstantAlongTrajectory) {
  const ControlProblem p{7.0, {2.0, -1.0}, {0.0, 0.5}};
  const Vec g0 = optimal_control(0.0, p.x0, p.x1, p.r);
  for (int i = 0; i <= 100; ++i) {
    const double t = i / 100.0;
    const Vec g = optimal_control(t, analytic_trajectory(p, t), p.x1, p.r);
    ASSERT_LT(norm(sub(g, g0)), 1e-9);
  }
}

TEST(ControlledOde, OptimalCostBeatsStraightLineControl) {
  SeededRng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const ControlProblem p{rng.uniform(0.1, 20.0), random_vec(rng, 3), random_vec(rng, 3)};
    const Vec straight = sub(p.x1, p.x0);
    const double opt = policy_cost(
        p, [&](double t, const Vec& x) { return optimal_control(t, x, p.x1, p.r); }, 2000);
    const double lin = policy_cost(p, [&](double, const Vec&) { return straight; }, 2000);
    ASSERT_LE(opt, lin + 1e-12);
    ASSERT_NEAR(opt, optimal_cost(p), 1e-9 * (1.0 + optimal_cost(p)));
  }
}

// ---- Tweedie / drift ----

TEST(Tweedie, Examples) {
  EXPECT_DOUBLE_EQ(tweedie_posterior_mean(1.7, {0.5, 2.0, 0.0}), 1.7);
  EXPECT_DOUBLE_EQ(tweedie_posterior_mean(2.0, {0.0, 1.0, 1.0}), 1.0);
  EXPECT_DOUBLE_EQ(tweedie_posterior_mean(-0.3, {-0.3, 0.7, 2.5}), -0.3);
  EXPECT_THROW(tweedie_posterior_mean(0.0, {0.0, 0.0, 1.0}), std::invalid_argument);
}

TEST(Tweedie, MatchesClosedFormPosteriorOnGrid) {
  const double mu0 = 0.4;
  for (int i = 0; i < 100; ++i) {
    const double x = -3.0 + 6.0 * (i % 10) / 9.0;
    const double tau = 0.2 + 0.3 * (i / 10);
    const double sigma = 0.1 + 0.25 * ((i * 7) % 10);
    const double expected = (tau * tau * x + sigma * sigma * mu0) / (tau * tau + sigma * sigma);
    ASSERT_NEAR(tweedie_posterior_mean(x, {mu0, tau, sigma}), expected, 1e-9);
  }
}

TEST(HjbDrift, Examples) {
  auto score = [](const Vec& x) { return Vec{-x[0], 2.0 * x[1]}; };
  EXPECT_EQ(hjb_drift({1, 1}, 0.0, [](const Vec& x) { return Vec(x.size(), 0.0); }), (Vec{0, 0}));
  const Vec near_end = hjb_drift({3, 3}, 1.0 - 1e-12, score);
  EXPECT_LT(norm(near_end), 1e-10);
  EXPECT_EQ(hjb_drift({1, 2}, 0.5, score), (Vec{-0.5, 2.0}));
  EXPECT_THROW(hjb_drift({1}, 1.0, score), std::invalid_argument);
  EXPECT_THROW(hjb_drift({1}, -0.1, score), std::invalid_argument);
}

TEST(HjbDrift, EqualsTweedieTargetDrift) {
  SeededRng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const GaussianToy g{rng.uniform(-2, 2), rng.uniform(0.1, 3.0), 0.0};
    const double t = rng.uniform(0.0, 0.99);
    const double x = rng.uniform(-5, 5);
    const Vec d = hjb_drift({x}, t, [&](const Vec& v) { return Vec{marginal_score(v[0], t, g)}; });
    ASSERT_NEAR(d[0], tweedie_target_drift(x, t, g), 1e-9);
  }
}

// ---- SDE ----

TEST(GuidedSde, TerminalMeanWithinThreeStandardErrors) {
  const auto rep = simulate_guided_sde({0.0, 1.0, 0.0}, 1000, 10000, 11);
  EXPECT_EQ(rep.paths, 10000u);
  EXPECT_LT(rep.mean_gap, 3.0 * rep.mean_std_error);
}

TEST(GuidedSde, DegenerateDataCollapses) {
  const auto rep = simulate_guided_sde({0.7, 1e-4, 0.0}, 1000, 1000, 12);
  EXPECT_LT(rep.terminal_std, 0.05);
  EXPECT_NEAR(rep.terminal_mean, 0.7, 0.05);
}

TEST(GuidedSde, DeterministicPerSeed) {
  const auto a = simulate_guided_sde({0.0, 1.0, 0.0}, 50, 200, 13);
  const auto b = simulate_guided_sde({0.0, 1.0, 0.0}, 50, 200, 13);
  EXPECT_EQ(a.terminal_mean, b.terminal_mean);
  EXPECT_EQ(a.terminal_std, b.terminal_std);
}

// ---- suite ----

TEST(Suite, AllChecksPassAndReportParses) {
  const auto results = run_verification_suite();
  EXPECT_TRUE(all_passed(results));
  std::ostringstream os;
  write_report(os, results);
  std::istringstream is(os.str());
  std::string line;
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    if (line.rfind("summary ", 0) == 0) {
      EXPECT_EQ(line, "summary passed=" + std::to_string(results.size()) + " failed=0");
      continue;
    }
    ++rows;
    EXPECT_EQ(line.rfind("check=", 0), 0u) << line;
    EXPECT_NE(line.find(" status=pass "), std::string::npos) << line;
  }
  EXPECT_EQ(rows, results.size());
}

}  // namespace
}  // namespace sanm::verification
