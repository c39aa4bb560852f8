#include "ptsim/kramers.hpp"

#include <cmath>
#include <vector>

#include "detail/optimize.hpp"
#include "ptsim/stability.hpp"

namespace ptsim {

double potential(double z, const ModelParams& p, double alpha_ss, double phi) {
  if (!(z > 0.0)) throw std::invalid_argument("potential: requires z > 0");
  const double u = z * z / p.n0;
  return -p.n0 * p.Gamma / (2.0 * (1.0 + u)) - p.g * alpha_ss * z * std::sin(phi) -
         0.5 * p.gamma * p.Nth * std::log(z);
}

double potential(double z, const ModelParams& p) {
  return potential(z, p, phase_iii_amplitudes(p).first, M_PI / 2.0);
}

double potential_deriv(double z, const ModelParams& p, double alpha_ss, double phi) {
  if (!(z > 0.0)) throw std::invalid_argument("potential_deriv: requires z > 0");
  const double base = 1.0 + z * z / p.n0;
  return p.Gamma * z / (base * base) - p.g * alpha_ss * std::sin(phi) -
         0.5 * p.gamma * p.Nth / z;
}

double potential_second_deriv(double z, const ModelParams& p, double /*alpha_ss*/,
                              double /*phi*/) {
  if (!(z > 0.0)) throw std::invalid_argument("potential_second_deriv: requires z > 0");
  const double u = z * z / p.n0;
  const double base = 1.0 + u;
  return p.Gamma * (1.0 - 3.0 * u) / (base * base * base) +
         0.5 * p.gamma * p.Nth / (z * z);
}

std::pair<double, double> find_extrema(const ModelParams& p) {
  const double alpha_ss = phase_iii_amplitudes(p).first;
  const double phi = M_PI / 2.0;
  auto du = [&](double z) { return potential_deriv(z, p, alpha_ss, phi); };

  const double sqrt_n0 = std::sqrt(p.n0);
  const double lo = 1e-3 * sqrt_n0;
  const double hi = 1e2 * sqrt_n0;
  const int n_grid = 2000;
  const double step = std::log(hi / lo) / (n_grid - 1);

  std::vector<double> roots;
  double z_prev = lo, f_prev = du(lo);
  for (int i = 1; i < n_grid && roots.size() < 2; ++i) {
    const double z_cur = lo * std::exp(step * i);
    const double f_cur = du(z_cur);
    if (f_prev == 0.0 || f_prev * f_cur < 0.0)
      roots.push_back(detail::brent_root(du, z_prev, z_cur, 1e-10));
    z_prev = z_cur;
    f_prev = f_cur;
  }
  if (roots.size() < 2)
    throw NoBarrierError("find_extrema: no metastable well at Gamma/g = " +
                         std::to_string(p.Gamma / p.g) + ", gamma*Nth = " +
                         std::to_string(p.gamma * p.Nth));
  return {roots[0], roots[1]};
}

EscapePrediction escape_rate(const ModelParams& p) {
  const double alpha_ss = phase_iii_amplitudes(p).first;
  const double phi = M_PI / 2.0;
  const auto [z_min, z_max] = find_extrema(p);

  EscapePrediction out;
  out.z_min = z_min;
  out.z_max = z_max;
  out.dU = potential(z_max, p, alpha_ss, phi) - potential(z_min, p, alpha_ss, phi);
  const double curv_min = potential_second_deriv(z_min, p, alpha_ss, phi);
  const double curv_max = potential_second_deriv(z_max, p, alpha_ss, phi);
  out.R0 = std::sqrt(-curv_min * curv_max) / (2.0 * M_PI);
  const double noise = p.gamma * p.Nth;
  out.R_esc = noise > 0.0 ? out.R0 * std::exp(-2.0 * out.dU / noise) : 0.0;
  out.stable = out.R_esc < p.gamma;
  return out;
}

double predict_transition(const ModelParams& p) {
  if (p.nu != 2.0) throw std::invalid_argument("predict_transition: requires nu = 2");
  if (!(p.Nth > 0.0)) throw std::invalid_argument("predict_transition: requires Nth > 0");

  auto stable_at = [&](double ratio) {
    ModelParams q = p;
    q.Gamma = ratio * p.g;
    try {
      return escape_rate(q).stable;
    } catch (const NoBarrierError&) {
      return false;
    }
  };

  double lo = 4.0 * (1.0 + 1e-9);
  double hi = 40.0;
  while (!stable_at(hi)) {
    hi *= 2.0;
    if (hi > 1e4)
      throw std::runtime_error("predict_transition: no stable regime below Gamma/g = 1e4");
  }
  return detail::bisect_predicate(stable_at, lo, hi, 1e-6 * hi);
}

}  // namespace ptsim
