#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "ptsim/sde.hpp"

using namespace ptsim;

namespace {

ModelParams make(double Gamma, double gamma, double nu, double n0 = 1.0, double Nth = 0.0) {
  ModelParams p;
  p.Gamma = Gamma;
  p.gamma = gamma;
  p.nu = nu;
  p.n0 = n0;
  p.Nth = Nth;
  return p;
}

// Kolmogorov-Smirnov p-value against the uniform distribution on [0, 1).
double ks_uniform_pvalue(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const auto n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max({d, std::abs(xs[i] - lo), std::abs(xs[i] - hi)});
  }
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k)
    p += 2.0 * (k % 2 == 1 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

TEST_CASE("integrator config loader and defaults") {
  const IntegratorConfig c = load_integrator(nlohmann::json::object());
  CHECK(c.warmup == 5.0);
  CHECK(c.window == 45.0);
  CHECK(c.samples_per_run == 4000);
  CHECK(c.n_runs == 80);

  CHECK_THROWS_AS(load_integrator(nlohmann::json{{"bogus", 1}}), std::invalid_argument);
  CHECK_THROWS_AS(load_integrator(nlohmann::json{{"n_runs", 0}}), std::invalid_argument);

  const IntegratorConfig c2 = load_integrator(nlohmann::json{{"dt", 0.5}, {"seed", 42}});
  CHECK(c2.dt == 0.5);
  CHECK(c2.seed == 42);

  const ModelParams p = make(10.0, 1e-3, 2.0, 1.0, 10.0);
  CHECK(auto_dt(p) == doctest::Approx(1e-3));
  CHECK(auto_dt(make(0.5, 1e-3, 2.0)) == doctest::Approx(1e-2));
}

TEST_CASE("zero-noise step reduces to deterministic Euler on the drift") {
  const ModelParams p = make(2.0, 1e-3, 2.0, 1.3, 4.0);
  const ModeState s{{0.7, -0.2}, {-0.4, 1.1}};
  const double dt = 1e-3;
  const ModeState stepped = step(s, p, dt, {0.0, 0.0}, {0.0, 0.0});
  const ModeState d = drift(s, p);
  CHECK(std::abs(stepped.alpha - (s.alpha + dt * d.alpha)) < 1e-15);
  CHECK(std::abs(stepped.beta - (s.beta + dt * d.beta)) < 1e-15);
}

TEST_CASE("step aborts on non-finite amplitudes") {
  const ModelParams p = make(2.0, 1e-3, 2.0);
  CHECK_THROWS_AS(step({{1e200, 0.0}, {0.0, 0.0}}, p, 1e-3, {0.0, 0.0}, {0.0, 0.0}),
                  IntegrationError);
}

TEST_CASE("wiener increments have the documented covariance") {
  GaussianRng rng(99);
  const double dt = 0.02;
  const int n = 200000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += std::norm(rng.wiener(dt));
  CHECK(acc / (n * dt) == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("single-cell array step equals the two-mode step") {
  const ModelParams p2 = make(3.0, 1e-2, 2.0, 1.0, 2.0);
  ModelParams p1 = p2;
  p1.ncells = 1;
  GaussianRng rng(1234);
  ModeState s{{0.3, 0.4}, {-0.5, 0.2}};
  ArrayState arr;
  arr.alphas.resize(1);
  arr.betas.resize(1);
  arr.alphas[0] = s.alpha;
  arr.betas[0] = s.beta;
  for (int i = 0; i < 1000; ++i) {
    const Complex dwa = rng.wiener(1e-3), dwb = rng.wiener(1e-3);
    s = step(s, p2, 1e-3, dwa, dwb);
    Eigen::ArrayXcd va(1), vb(1);
    va[0] = dwa;
    vb[0] = dwb;
    step_array(arr, p1, 1e-3, va, vb);
    REQUIRE(arr.alphas[0] == s.alpha);
    REQUIRE(arr.betas[0] == s.beta);
  }
}

TEST_CASE("ensemble reruns are bit-identical and reconstructible from the protocol") {
  const ModelParams p = make(2.0, 0.05, 2.0, 1.0, 3.0);
  IntegratorConfig c;
  c.dt = 2e-3;
  c.warmup = 1.0;
  c.window = 2.0;
  c.samples_per_run = 50;
  c.n_runs = 3;
  c.seed = 777;

  const EnsembleSample a = run_ensemble(p, c);
  const EnsembleSample b = run_ensemble(p, c, 2);
  REQUIRE(a.alphas.size() == b.alphas.size());
  for (Eigen::Index i = 0; i < a.alphas.size(); ++i) {
    REQUIRE(a.alphas(i) == b.alphas(i));
    REQUIRE(a.betas(i) == b.betas(i));
  }

  // Reconstruct run 1 from the documented stream order using the public step.
  const int run = 1;
  GaussianRng rng(splitmix64_at(c.seed, run));
  const double ic = std::sqrt(std::max(p.Nth, 1.0) / 2.0);
  ModeState s;
  s.alpha = Complex{ic * rng.normal(), ic * rng.normal()};
  s.beta = Complex{ic * rng.normal(), ic * rng.normal()};
  const double t_warm = c.warmup / p.gamma;
  const double t_end = t_warm + c.window / p.gamma;
  std::vector<double> times(c.samples_per_run);
  for (double& t : times) t = t_warm + rng.uniform() * (c.window / p.gamma);
  std::sort(times.begin(), times.end());

  const auto n_steps = static_cast<std::int64_t>(std::ceil(t_end / c.dt));
  int k = 0;
  for (std::int64_t i = 0; i < n_steps && k < c.samples_per_run; ++i) {
    s = step(s, p, c.dt, rng.wiener(c.dt), rng.wiener(c.dt));
    const double t_new = static_cast<double>(i + 1) * c.dt;
    while (k < c.samples_per_run && times[k] <= t_new) {
      const Eigen::Index row = run * c.samples_per_run + k;
      REQUIRE(a.alphas(row, 0) == s.alpha);
      REQUIRE(a.betas(row, 0) == s.beta);
      REQUIRE(a.times[row] == t_new);
      ++k;
    }
  }
  CHECK(k == c.samples_per_run);
}

TEST_CASE("decoupled loss mode thermalizes to Nth") {
  // g = 0, Gamma = 0: the loss mode is a damped diffusive oscillator with
  // stationary occupation D / (2 gamma) = Nth.
  ModelParams p = make(0.0, 0.1, 2.0, 1.0, 10.0);
  p.g = 0.0;
  IntegratorConfig c;
  c.warmup = 5.0;
  c.window = 1250.0;
  c.samples_per_run = 4000;
  c.n_runs = 16;
  c.seed = 2024;
  const EnsembleSample sample = run_ensemble(p, c);
  const double occ_beta = sample.betas.abs2().mean();
  CHECK(occ_beta == doctest::Approx(10.0).epsilon(2e-2));
}

TEST_CASE("coupled thermal ensemble reaches Nth in both modes") {
  const ModelParams p = make(0.0, 0.1, 2.0, 1.0, 10.0);  // Gamma = 0, g = 1
  IntegratorConfig c;
  c.warmup = 5.0;
  c.window = 400.0;
  c.samples_per_run = 2000;
  c.n_runs = 8;
  c.seed = 11;
  const EnsembleSample sample = run_ensemble(p, c);
  CHECK(sample.alphas.abs2().mean() == doctest::Approx(10.0).epsilon(5e-2));
  CHECK(sample.betas.abs2().mean() == doctest::Approx(10.0).epsilon(5e-2));
}

TEST_CASE("weak convergence under step halving on a shared noise path") {
  const ModelParams p = make(2.0, 0.1, 2.0, 1.0, 5.0);
  const double dt_fine = 1e-3;
  const double t_end = 60.0;
  const auto n_fine = static_cast<int>(t_end / dt_fine);

  double occ_coarse = 0.0, occ_fine = 0.0;
  const int n_paths = 24;
  for (int path = 0; path < n_paths; ++path) {
    GaussianRng rng(splitmix64_at(4321, path));
    ModeState sc{{1.0, 0.0}, {0.0, 1.0}};
    ModeState sf = sc;
    for (int i = 0; i < n_fine; i += 2) {
      const Complex dwa1 = rng.wiener(dt_fine), dwb1 = rng.wiener(dt_fine);
      const Complex dwa2 = rng.wiener(dt_fine), dwb2 = rng.wiener(dt_fine);
      sf = step(sf, p, dt_fine, dwa1, dwb1);
      sf = step(sf, p, dt_fine, dwa2, dwb2);
      sc = step(sc, p, 2.0 * dt_fine, dwa1 + dwa2, dwb1 + dwb2);
    }
    occ_coarse += std::norm(sc.alpha);
    occ_fine += std::norm(sf.alpha);
  }
  occ_coarse /= n_paths;
  occ_fine /= n_paths;
  CHECK(std::abs(occ_coarse - occ_fine) / occ_fine < 1e-2);
}

TEST_CASE("pooled total phase is uniform") {
  const ModelParams p = make(2.0, 0.01, 2.0, 1.0, 10.0);
  IntegratorConfig c;
  c.warmup = 2.0;
  c.window = 10.0;
  c.samples_per_run = 500;
  c.n_runs = 8;
  c.seed = 31337;
  const EnsembleSample sample = run_ensemble(p, c);
  std::vector<double> phases(static_cast<std::size_t>(sample.alphas.rows()));
  for (Eigen::Index i = 0; i < sample.alphas.rows(); ++i) {
    const double total = std::arg(sample.alphas(i, 0)) + std::arg(sample.betas(i, 0));
    phases[static_cast<std::size_t>(i)] = total / (2.0 * M_PI) - std::floor(total / (2.0 * M_PI));
  }
  CHECK(ks_uniform_pvalue(std::move(phases)) > 0.01);
}

TEST_CASE("deterministic trajectories relax according to the phase") {
  // phase I: decay to the origin
  const Trajectory decay = run_deterministic(make(0.5, 5e-3, 2.0), {{1.0, 0.0}, {0.0, 1.0}},
                                             2.0 / 5e-3);
  CHECK(decay.occ_gain.tail(5).mean() < 1e-3);
  CHECK(decay.occ_loss.tail(5).mean() < 1e-3);

  // phase II: equal plateaus at n0 ((Gamma/g)^{1/nu} - 1)
  const Trajectory ii = run_deterministic(make(2.0, 1e-3, 2.0), {{1.0, 0.0}, {0.0, 1.0}},
                                          5.0 / 1e-3);
  CHECK(ii.occ_gain.tail(5).mean() == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-2));
  CHECK(ii.occ_loss.tail(5).mean() == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-2));

  // phase IIIw (nu = 1): persistent oscillation
  const Trajectory osc = run_deterministic(make(6.0, 1e-3, 1.0), {{1.0, 0.0}, {0.0, 1.0}},
                                           3.0 / 1e-3);
  const OscillationStats st = oscillation_stats(osc, 0.4);
  CHECK(st.cycles >= 3);
  CHECK(st.amplitude > 0.1 * st.mean);
}

TEST_CASE("oscillation statistics on a synthetic tone") {
  Trajectory traj;
  const int n = 4000;
  traj.t.resize(n);
  traj.occ_gain.resize(n);
  traj.occ_loss.resize(n);
  const double omega = 0.83;
  for (int i = 0; i < n; ++i) {
    traj.t[i] = 0.05 * i;
    traj.occ_gain[i] = 2.0 + std::sin(omega * traj.t[i]);
    traj.occ_loss[i] = 2.0 - std::sin(omega * traj.t[i]);
  }
  const OscillationStats st = oscillation_stats(traj, 0.5);
  CHECK(st.omega == doctest::Approx(omega).epsilon(1e-3));
  CHECK(st.amplitude == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(st.mean == doctest::Approx(2.0).epsilon(1e-2));
}

TEST_CASE("array and two-mode ensembles coincide for one decoupled cell") {
  ModelParams p1 = make(2.0, 0.05, 2.0, 1.0, 2.0);
  ModelParams pn = p1;
  pn.ncells = 1;
  pn.gprime = 0.0;
  IntegratorConfig c;
  c.dt = 5e-3;
  c.warmup = 1.0;
  c.window = 3.0;
  c.samples_per_run = 40;
  c.n_runs = 2;
  c.seed = 5150;
  const EnsembleSample a = run_ensemble(p1, c);
  const EnsembleSample b = run_ensemble(pn, c);
  for (Eigen::Index i = 0; i < a.alphas.size(); ++i) {
    REQUIRE(a.alphas(i) == b.alphas(i));
    REQUIRE(a.betas(i) == b.betas(i));
  }
}

TEST_CASE("ring coupling enters with the documented neighbor structure") {
  // n = 2 cells, deterministic step: cell 0's gain couples to its own loss
  // and to the loss of cell n-1.
  ModelParams p = make(0.0, 1e-3, 2.0);
  p.gamma = 1e-3;
  p.ncells = 2;
  p.gprime = 0.5;
  ArrayState s;
  s.alphas.resize(2);
  s.betas.resize(2);
  s.alphas << Complex{1.0, 0.0}, Complex{0.0, 0.0};
  s.betas << Complex{0.0, 0.0}, Complex{2.0, 0.0};
  const Eigen::ArrayXcd zero = Eigen::ArrayXcd::Zero(2);
  const double dt = 1e-4;
  ArrayState out = s;
  step_array(out, p, dt, zero, zero);

  // d alpha_0 = -gamma alpha_0 - i g beta_0 - i g' beta_1
  const Complex expected_a0 =
      s.alphas[0] + dt * (-p.gamma * s.alphas[0] - Complex{0.0, 1.0} * (p.g * s.betas[0]) -
                          Complex{0.0, 1.0} * (p.gprime * s.betas[1]));
  // d beta_1 = -gamma beta_1 - i g alpha_1 - i g' alpha_0 (right neighbor wraps)
  const Complex expected_b1 =
      s.betas[1] + dt * (-p.gamma * s.betas[1] - Complex{0.0, 1.0} * (p.g * s.alphas[1]) -
                         Complex{0.0, 1.0} * (p.gprime * s.alphas[0]));
  CHECK(std::abs(out.alphas[0] - expected_a0) < 1e-15);
  CHECK(std::abs(out.betas[1] - expected_b1) < 1e-15);
}
