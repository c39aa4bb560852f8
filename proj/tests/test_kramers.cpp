#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ptsim/kramers.hpp"
#include "ptsim/sde.hpp"
#include "ptsim/stability.hpp"

using namespace ptsim;

namespace {

ModelParams make(double Gamma, double nth_over_n0, double gamma = 1e-3, double n0 = 1.0) {
  ModelParams p;
  p.Gamma = Gamma;
  p.gamma = gamma;
  p.nu = 2.0;
  p.n0 = n0;
  p.Nth = nth_over_n0 * n0;
  return p;
}

}  // namespace

TEST_CASE("potential limits") {
  ModelParams p = make(6.0, 0.0);
  // gamma Nth = 0: U(0+) -> -n0 Gamma / 2
  CHECK(potential(1e-9, p, 1.9, M_PI / 2.0) == doctest::Approx(-3.0).epsilon(1e-6));
  // large z: dominated by the linear coupling term
  const double alpha_ss = 1.9;
  CHECK(potential(1e4, p, alpha_ss, M_PI / 2.0) / (-alpha_ss * 1e4) ==
        doctest::Approx(1.0).epsilon(1e-3));
  CHECK_THROWS_AS(potential(0.0, p, 1.0, M_PI / 2.0), std::invalid_argument);
  CHECK_THROWS_AS(potential(-1.0, p, 1.0, M_PI / 2.0), std::invalid_argument);
}

TEST_CASE("potential derivatives match central finite differences") {
  const ModelParams p = make(9.0, 10.0);
  const double alpha_ss = phase_iii_amplitudes(p).first;
  for (double z : {0.05, 0.2, 0.45, 0.9, 2.0, 5.0}) {
    const double h = 1e-5 * z;
    const double fd1 =
        (potential(z + h, p, alpha_ss, M_PI / 2.0) - potential(z - h, p, alpha_ss, M_PI / 2.0)) /
        (2.0 * h);
    const double fd2 = (potential(z + h, p, alpha_ss, M_PI / 2.0) -
                        2.0 * potential(z, p, alpha_ss, M_PI / 2.0) +
                        potential(z - h, p, alpha_ss, M_PI / 2.0)) /
                       (h * h);
    CHECK(potential_deriv(z, p, alpha_ss, M_PI / 2.0) == doctest::Approx(fd1).epsilon(1e-6));
    CHECK(potential_second_deriv(z, p, alpha_ss, M_PI / 2.0) ==
          doctest::Approx(fd2).epsilon(1e-4));
  }
}

TEST_CASE("extrema of the metastable well") {
  // Fig. 4a regime: a well separated from the runaway region by a barrier
  const ModelParams p = make(12.0, 10.0);
  const auto [z_min, z_max] = find_extrema(p);
  CHECK(z_min > 0.0);
  CHECK(z_min < z_max);

  const double alpha_ss = phase_iii_amplitudes(p).first;
  CHECK(potential_second_deriv(z_min, p, alpha_ss, M_PI / 2.0) > 0.0);
  CHECK(potential_second_deriv(z_max, p, alpha_ss, M_PI / 2.0) < 0.0);

  // Nth -> 0: the minimum sits at the closed-form |beta_ss|
  const ModelParams cold = make(12.0, 1e-9);
  const auto [z_cold, z_cold_max] = find_extrema(cold);
  CHECK(z_cold == doctest::Approx(phase_iii_amplitudes(cold).second).epsilon(1e-3));

  // large noise just above the deterministic boundary: the well is gone
  CHECK_THROWS_AS(find_extrema(make(4.3, 300.0)), NoBarrierError);
}

TEST_CASE("z_min grows continuously with Gamma until the barrier forms") {
  const double nth = 10.0;
  double prev = 0.0;
  for (double ratio = 6.0; ratio <= 14.0; ratio += 0.5) {
    const auto [z_min, z_max] = find_extrema(make(ratio, nth));
    CHECK(z_min > prev);
    prev = z_min;
  }
}

TEST_CASE("escape rate structure") {
  const EscapePrediction deep = escape_rate(make(30.0, 10.0));
  CHECK(deep.dU > 0.0);
  CHECK(deep.R0 > 0.0);
  CHECK(deep.R_esc < 1e-3);
  CHECK(deep.stable);

  const EscapePrediction shallow = escape_rate(make(5.0, 10.0));
  CHECK(shallow.R_esc > shallow.R0 * 1e-3);
  CHECK(!shallow.stable);

  // barrier height -> infinity sends the rate to zero
  const EscapePrediction frozen = escape_rate(make(12.0, 1e-6));
  CHECK(frozen.R_esc == doctest::Approx(0.0).epsilon(1e-30));
  CHECK(frozen.stable);
}

TEST_CASE("kramers rate against a first-passage Monte-Carlo oracle") {
  // parameter point where escape happens on a simulable timescale
  const ModelParams p = make(7.0, 10.0);
  const EscapePrediction pred = escape_rate(p);
  REQUIRE(pred.R_esc > 1e-4);
  REQUIRE(pred.R_esc < 1e-1);

  const double alpha_ss = phase_iii_amplitudes(p).first;
  const double noise = std::sqrt(p.gamma * p.Nth);
  const double z_abs = pred.z_max + 0.6 * (pred.z_max - pred.z_min);
  const double dt = 5e-4;
  const double t_cap = 200.0 / pred.R_esc;

  double sum_t = 0.0;
  const int n_traj = 30;
  for (int traj = 0; traj < n_traj; ++traj) {
    GaussianRng rng(splitmix64_at(97531, traj));
    double z = pred.z_min;
    double t = 0.0;
    while (z < z_abs && t < t_cap) {
      z += -potential_deriv(z, p, alpha_ss, M_PI / 2.0) * dt +
           noise * std::sqrt(dt) * rng.normal();
      t += dt;
    }
    sum_t += t;
  }
  const double mfpt = sum_t / n_traj;
  CHECK(mfpt * pred.R_esc > 1.0 / 3.0);
  CHECK(mfpt * pred.R_esc < 3.0);
}

TEST_CASE("transition prediction") {
  const double at10 = predict_transition(make(1.0, 10.0));
  CHECK(at10 > 6.0);
  CHECK(at10 < 9.0);

  // monotone in the thermal occupation
  const double at3 = predict_transition(make(1.0, 3.0));
  const double at30 = predict_transition(make(1.0, 30.0));
  CHECK(at3 < at10);
  CHECK(at10 < at30);

  // approaches the deterministic boundary from above as Nth -> 0
  double prev = at3;
  for (double nth : {1.0, 0.3, 0.1, 0.03}) {
    const double cur = predict_transition(make(1.0, nth));
    CHECK(cur > 4.0);
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK(prev < 4.5);

  CHECK_THROWS_AS(predict_transition(make(1.0, 0.0)), std::invalid_argument);
  ModelParams bad = make(1.0, 10.0);
  bad.nu = 1.5;
  CHECK_THROWS_AS(predict_transition(bad), std::invalid_argument);
}
