// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only when
// every criterion passes inside its time budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>

#include "fd_support.hpp"
#include "op_cases.hpp"
#include "sanm/cli/commands.hpp"
#include "sanm/models/id_adapter.hpp"
#include "sanm/sampler/edm.hpp"
#include "sanm/training/losses.hpp"
#include "sanm/verification/control.hpp"
#include "sanm/verification/gaussian.hpp"
#include "toy_models.hpp"

namespace {

using namespace sanm;
using verification::Vec;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Records the first violated condition and keeps the worst measured value
// for the report line.
class Check {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok && out_.pass) {
      out_.pass = false;
      failure_ = what;
    }
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : ", ") + s; }
  Outcome done() {
    out_.detail = notes_;
    if (!out_.pass) out_.detail += (notes_.empty() ? "" : "; ") + std::string("failed: ") + failure_;
    return out_;
  }

 private:
  Outcome out_;
  std::string notes_, failure_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double vnorm(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Vec vsub(const Vec& a, const Vec& b) {
  Vec o(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) o[i] = a[i] - b[i];
  return o;
}

Vec random_vec(SeededRng& rng, std::size_t n) {
  Vec v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

// ---- 1 ----

Outcome hjb_formulas() {
  Check c;
  SeededRng rng(1);
  double worst_formula = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double r = rng.uniform(0.01, 50.0), t = rng.uniform(0.0, 1.0);
    const Vec x = random_vec(rng, 3), x1 = random_vec(rng, 3);
    const Vec g = verification::optimal_control(t, x, x1, r);
    for (std::size_t k = 0; k < 3; ++k) {
      const double expected = r * (x1[k] - x[k]) / (1.0 + r * (1.0 - t));
      worst_formula = std::max(worst_formula, std::abs(g[k] - expected) / std::max(1.0, std::abs(expected)));
    }
  }
  c.require(worst_formula < 1e-12, "optimal_control formula");

  const verification::ControlProblem p{10.0, {1.0, -0.5, 2.0}, {-1.0, 0.5, 0.0}};
  const auto traj = verification::integrate_controlled_ode(p, 10000);
  const double gap = vnorm(vsub(traj.back(), p.x1));
  const double expected = vnorm(vsub(p.x0, p.x1)) / (1.0 + p.r);
  const double rel = std::abs(gap - expected) / expected;
  c.require(rel < 1e-3, "terminal gap");

  const Vec g0 = verification::optimal_control(0.0, p.x0, p.x1, p.r);
  double drift = 0.0;
  for (std::size_t i = 0; i <= 10000; i += 100)
    drift = std::max(drift, vnorm(vsub(verification::optimal_control(i / 1e4, traj[i], p.x1, p.r), g0)));
  c.require(drift < 1e-9, "gamma constant");

  c.note("formula err " + fmt("%.1e", worst_formula));
  c.note("terminal gap rel err " + fmt("%.1e", rel));
  c.note("gamma drift " + fmt("%.1e", drift));
  return c.done();
}

// ---- 2 ----

Outcome tweedie_grid() {
  Check c;
  const double mu0 = 0.4;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double x = -3.0 + 6.0 * (i % 10) / 9.0;
    const double tau = 0.2 + 0.3 * (i / 10);
    const double sigma = 0.1 + 0.25 * ((i * 7) % 10);
    const double closed = (tau * tau * x + sigma * sigma * mu0) / (tau * tau + sigma * sigma);
    worst = std::max(worst, std::abs(verification::tweedie_posterior_mean(x, {mu0, tau, sigma}) - closed));
  }
  c.require(worst < 1e-9, "posterior mean");
  c.note("100 points, max err " + fmt("%.1e", worst));
  return c.done();
}

// ---- 3 ----

Outcome drift_identity_and_sde() {
  Check c;
  SeededRng rng(3);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const verification::GaussianToy g{rng.uniform(-2, 2), rng.uniform(0.1, 3.0), 0.0};
    const double t = rng.uniform(0.0, 0.99), x = rng.uniform(-5, 5);
    const Vec d = verification::hjb_drift(
        {x}, t, [&](const Vec& v) { return Vec{verification::marginal_score(v[0], t, g)}; });
    worst = std::max(worst, std::abs(d[0] - verification::tweedie_target_drift(x, t, g)));
  }
  c.require(worst < 1e-9, "drift identity");
  const auto rep = verification::simulate_guided_sde({0.5, 1.0, 0.0}, 1000, 10000, 20240601);
  c.require(rep.mean_gap < 3.0 * rep.mean_std_error, "sde terminal mean");
  c.note("identity max err " + fmt("%.1e", worst));
  c.note("sde mean gap " + fmt("%.4f", rep.mean_gap) + " vs 3 SE " + fmt("%.4f", 3.0 * rep.mean_std_error));
  return c.done();
}

// ---- 4 ----

// Probability-flow ODE for N(m, s^2) data ends at m + (x0 - m) s / sqrt(s^2 + t0^2).
double heun_endpoint_error(std::size_t steps) {
  const double m = 0.3, s = 1.0, t0 = 20.0;
  const auto sched = build_schedule(steps, 0.02, t0, 1.0);
  const Tensor x0 = Tensor::vector({-30.0, -5.0, 0.0, 12.0, 41.0});
  SeededRng rng(0);
  Tensor x = x0;
  for (std::size_t i = 0; i < steps; ++i)
    x = sampler::edm_step(sampler::GaussianDenoiser(m, s), sched, i, x, nullptr, rng).x_next;
  double err = 0.0;
  for (std::size_t i = 0; i < x0.numel(); ++i)
    err = std::max(err, std::abs(x[i] - (m + (x0[i] - m) * s / std::sqrt(s * s + t0 * t0))));
  return err;
}

Outcome sampler_order() {
  Check c;
  const double e8 = heun_endpoint_error(8), e16 = heun_endpoint_error(16), e32 = heun_endpoint_error(32);
  const double r1 = e8 / e16, r2 = e16 / e32;
  c.require(r1 >= 3.0 && r1 <= 5.0, "ratio 8->16");
  c.require(r2 >= 3.0 && r2 <= 5.0, "ratio 16->32");
  c.note("ratios " + fmt("%.3f", r1) + " / " + fmt("%.3f", r2));
  return c.done();
}

// ---- 5 ----

Outcome alignment_invariants() {
  Check c;
  SeededRng rng(5);
  double worst_stats = 0.0, worst_resid = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t groups = 1 + rng.below(4), per = 2 + rng.below(12);
    const Shape shape{groups * per, 1 + rng.below(3)};
    const std::size_t chunk = per * shape[1];
    const Tensor face = testing::random_tensor(rng, shape, rng.uniform(0.1, 5.0));
    Tensor img = testing::random_tensor(rng, shape, rng.uniform(0.1, 5.0));
    for (auto& v : img.data()) v += 3.0;
    const Tensor out = models::distribution_align(face, img, groups);
    for (std::size_t g = 0; g < groups; ++g) {
      auto stats = [&](const Tensor& t) {
        double m = 0.0, v = 0.0;
        for (std::size_t i = 0; i < chunk; ++i) m += t[g * chunk + i];
        m /= double(chunk);
        for (std::size_t i = 0; i < chunk; ++i) v += (t[g * chunk + i] - m) * (t[g * chunk + i] - m);
        return std::pair{m, std::sqrt(v / double(chunk))};
      };
      const auto [mo, so] = stats(out);
      const auto [mi, si] = stats(img);
      const auto [mf, sf] = stats(face);
      worst_stats = std::max({worst_stats, std::abs(mo - mi), std::abs(so - si)});
      for (std::size_t i = 0; i < chunk; ++i)
        worst_resid = std::max(worst_resid, std::abs((out[g * chunk + i] - mi) / si - (face[g * chunk + i] - mf) / sf));
    }
  }
  c.require(worst_stats < 1e-9, "target stats");
  c.require(worst_resid < 1e-9, "standardized residuals");
  c.note("1000 pairs, stats err " + fmt("%.1e", worst_stats) + ", residual err " + fmt("%.1e", worst_resid));
  return c.done();
}

// ---- 6 ----

Outcome gradient_suite() {
  Check c;
  double worst = 0.0;
  std::string worst_name;
  const auto ops = testing::op_cases();
  for (std::size_t o = 0; o < ops.size(); ++o) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      SeededRng rng(seed * 7919 + o);
      std::vector<Tensor> inputs;
      for (const auto& s : ops[o].shapes) inputs.push_back(testing::random_tensor(rng, s, ops[o].scale));
      const double e = testing::fd_relative_error(ops[o].fn, inputs);
      if (e > worst) worst = e, worst_name = ops[o].name;
      c.require(e < 1e-4, std::string(ops[o].name) + " seed " + std::to_string(seed));
    }
  }

  models::ModelConfig cfg;
  cfg.latent_h = cfg.latent_w = 2;
  cfg.latent_c = 3;
  cfg.pixel_patch = 2;
  cfg.decoder_hidden = 8;
  cfg.embedder_hidden = 8;
  cfg.id_dim = 4;
  double worst_path = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SeededRng r(1000 + seed);
    const auto dec = models::ToyDecoder::random(cfg, r);
    const auto emb = models::IdentityEmbedder::random(cfg, r);
    Tensor ref = testing::random_tensor(r, {cfg.id_dim, 1});
    ref *= 1.0 / l2_norm(ref);
    auto f = [&](Tape& tape, const std::vector<Var>& in) {
      models::ParamBinder bind(tape);
      Var e = emb.embed(bind, dec.decode(bind, in[0]));
      Var cos = ad::matmul(e, tape.constant(ref));
      return ad::mean(ad::abs(ad::add_scalar(ad::neg(cos), 1.0)));
    };
    const double e = testing::fd_relative_error(f, {testing::random_tensor(r, {2, 2, 2, 3})});
    worst_path = std::max(worst_path, e);
    c.require(e < 1e-4, "face path seed " + std::to_string(seed));
  }
  c.note(std::to_string(ops.size()) + " ops x 100 seeds, worst " + fmt("%.1e", worst) + " (" + worst_name + ")");
  c.note("face path worst " + fmt("%.1e", worst_path));
  return c.done();
}

// ---- 7 ----

Outcome masked_weighting() {
  Check c;
  SeededRng rng(7);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double gt = rng.normal(), resid = rng.uniform(0.1, 2.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    Tape tape;
    Var z_gt = tape.constant(Tensor::vector({gt, gt, gt, gt}));
    Var z_eps = tape.leaf(Tensor::vector({gt + resid, gt + resid, gt + resid, gt + resid}), true);
    const Tensor g = tape.backprop(training::masked_reconstruction_loss(z_gt, z_eps, Tensor::vector({0, 1, 0, 1})))
                         .at(z_eps);
    worst = std::max({worst, std::abs(std::abs(g[1] / g[0]) - 4.0), std::abs(std::abs(g[3] / g[2]) - 4.0)});
  }
  c.require(worst <= 1e-9, "ratio");
  c.note("ratio max |r - 4| " + fmt("%.1e", worst));
  return c.done();
}

// ---- 9 ----

Outcome convex_monotonicity() {
  Check c;
  std::size_t good = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto toy = testing::make_linear_toy(5000 + seed);
    const auto r = sampler::hjb_face_optimize(toy.x_pred, testing::linear_guidance(toy), toy.decoder, toy.embedder);
    bool ok = r.loss_trace.size() == 11;
    for (std::size_t k = 1; ok && k < r.loss_trace.size(); ++k) ok = r.loss_trace[k] < r.loss_trace[k - 1];
    good += ok;
  }
  c.require(good == 100, "monotone seeds");
  c.note(std::to_string(good) + "/100 seeds strictly decreasing over k=10");
  return c.done();
}

// ---- 8, 10: the shipped pipeline through the CLI ----

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "sanm");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run_cli(int(argv.size()), argv.data());
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Every file under a and b, compared byte for byte.
bool same_tree(const fs::path& a, const fs::path& b, std::string& why) {
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a);
    ++files;
    if (!fs::exists(b / rel) || read_bytes(e.path()) != read_bytes(b / rel)) {
      why = rel.string() + " differs";
      return false;
    }
  }
  std::size_t other = 0;
  for (const auto& e : fs::recursive_directory_iterator(b)) other += e.is_regular_file();
  if (other != files) {
    why = "file count differs";
    return false;
  }
  return files > 0 || (why = "no files", false);
}

const fs::path& work_dir() {
  static const fs::path d = [] {
    const fs::path p = fs::temp_directory_path() / "sanm_acceptance";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return d;
}

std::string at(const std::string& rel) { return (work_dir() / rel).string(); }

Outcome directional_ablation() {
  Check c;
  c.require(cli({"generate", "--out", at("data")}) == cli::kOk, "generate");
  c.require(cli({"pretrain", "--data", at("data"), "--out", at("pre")}) == cli::kOk, "pretrain");
  c.require(cli({"train", "--data", at("data"), "--pretrained", at("pre/pretrained.sanm"), "--out", at("train")}) ==
                cli::kOk,
            "train");
  if (!c.done().pass) return c.done();

  cli::EvalOptions eo;
  eo.checkpoints = {at("train/model.sanm")};
  eo.pretrained = at("pre/pretrained.sanm");
  eo.data = at("data");
  eo.out = at("eval");
  const auto reports = cli::cmd_eval(cli::RunConfig{}, eo);
  const auto& full = reports.at(0);
  const auto& noopt = reports.at(1);
  const auto sign = metrics::paired_sign_test(full.csim_values(), noopt.csim_values());
  c.require(full.clips.size() >= 20, "at least 20 eval clips");
  c.require(full.csim > noopt.csim, "mean csim ordering");
  c.require(sign.p_value < 0.05, "sign test");
  c.note(std::to_string(full.clips.size()) + " clips");
  c.note("csim full " + fmt("%.4f", full.csim) + " vs no-opt " + fmt("%.4f", noopt.csim));
  c.note("sign +" + std::to_string(sign.positive) + "/-" + std::to_string(sign.negative) + " p=" +
         fmt("%.2e", sign.p_value));
  return c.done();
}

Outcome reproducibility() {
  Check c;
  std::string why;
  if (!fs::exists(work_dir() / "pre" / "pretrained.sanm"))
    c.require(cli({"generate", "--out", at("data")}) == cli::kOk &&
                  cli({"pretrain", "--data", at("data"), "--out", at("pre")}) == cli::kOk,
              "pipeline setup");
  for (const char* run : {"repro_train_a", "repro_train_b"})
    c.require(cli({"train", "--data", at("data"), "--pretrained", at("pre/pretrained.sanm"), "--out", at(run)}) ==
                  cli::kOk,
              std::string(run) + " exit code");
  c.require(same_tree(work_dir() / "repro_train_a", work_dir() / "repro_train_b", why), "train: " + why);
  for (const char* run : {"repro_sample_a", "repro_sample_b"})
    c.require(cli({"sample", "--checkpoint", at("repro_train_a/model.sanm"), "--pretrained", at("pre/pretrained.sanm"),
                   "--reference", at("data/clips/clip_0000.sclp"), "--seed", "42", "--out", at(run)}) == cli::kOk,
              std::string(run) + " exit code");
  c.require(same_tree(work_dir() / "repro_sample_a", work_dir() / "repro_sample_b", why), "sample: " + why);
  c.note("train and sample output trees byte-identical across two runs");
  return c.done();
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "hjb-formulas", 5, hjb_formulas},
      {2, "tweedie-grid", 1, tweedie_grid},
      {3, "drift-identity-and-sde", 30, drift_identity_and_sde},
      {4, "heun-order", 10, sampler_order},
      {5, "alignment-invariants", 5, alignment_invariants},
      {6, "gradient-suite", 60, gradient_suite},
      {7, "masked-loss-weighting", 1, masked_weighting},
      {8, "directional-ablation", 15 * 60, directional_ablation},
      {9, "convex-monotonicity", 10, convex_monotonicity},
      {10, "reproducibility", 5 * 60, reproducibility},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = cr.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > cr.budget_s) {
      o.pass = false;
      o.detail += "; over budget";
    }
    failed += !o.pass;
    std::printf("criterion %2d %s %-24s %8.2fs (budget %gs)  %s\n", cr.id, o.pass ? "PASS" : "FAIL", cr.name, secs,
                cr.budget_s, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", int(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
