#include "ptsim/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "detail/optimize.hpp"

namespace ptsim {

namespace {

double rate_scale(const ModelParams& p) { return std::max({p.g, p.Gamma, p.gamma}); }

// Residual of the stationarity system at phi = pi/2:
//   g z = (Gamma(r) - gamma) r,  g r = (Gamma(z) + gamma) z.
Eigen::Vector2d stationarity_residual(double r, double z, const ModelParams& p) {
  Eigen::Vector2d f;
  f << (saturated_rate(r, p) - p.gamma) * r - p.g * z,
      p.g * r - (saturated_rate(z, p) + p.gamma) * z;
  return f;
}

// Damped Newton iteration on the stationarity system. Returns false when the
// residual cannot be pushed below tolerance.
bool newton_polish(double& r, double& z, const ModelParams& p, int max_iter = 80) {
  const double scale = rate_scale(p) * std::sqrt(p.n0);
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::Vector2d f = stationarity_residual(r, z, p);
    const double res = f.norm();
    if (res < 1e-13 * scale * (1.0 + (std::abs(r) + std::abs(z)) / std::sqrt(p.n0))) return true;
    const Eigen::Matrix2d jac = polar_jacobian(r, z, p);
    const Eigen::Vector2d step = jac.partialPivLu().solve(-f);
    if (!step.allFinite()) return false;
    double lambda = 1.0;
    double r_new = r, z_new = z;
    for (int back = 0; back < 30; ++back) {
      r_new = r + lambda * step(0);
      z_new = z + lambda * step(1);
      if (stationarity_residual(r_new, z_new, p).norm() < res) break;
      lambda *= 0.5;
    }
    r = r_new;
    z = z_new;
  }
  return stationarity_residual(r, z, p).norm() < 1e-11 * scale;
}

}  // namespace

PolarState polar_rhs(const PolarState& s, const ModelParams& p) {
  if (!(s.r > 0.0) || !(s.z > 0.0))
    throw std::domain_error("polar_rhs: relative phase undefined at r = 0 or z = 0");
  const double sin_phi = std::sin(s.phi);
  PolarState d;
  d.r = (saturated_rate(s.r, p) - p.gamma) * s.r - p.g * sin_phi * s.z;
  d.z = -(saturated_rate(s.z, p) + p.gamma) * s.z + p.g * sin_phi * s.r;
  d.phi = p.g * (s.r / s.z - s.z / s.r) * std::cos(s.phi);
  return d;
}

Nullclines nullclines(const ModelParams& p) {
  p.validate();
  Nullclines out;
  const ModelParams params = p;
  out.f = [params](double r) { return saturated_rate(r, params) * r / params.g; };
  out.z_of_r = [params, f = out.f](double r) { return f(r) - params.gamma / params.g * r; };
  out.r_of_z = [params, f = out.f](double z) { return f(z) + params.gamma / params.g * z; };
  out.f_argmax = std::sqrt(p.n0 / (2.0 * p.nu - 1.0));
  out.f_max = out.f(out.f_argmax);
  return out;
}

const char* to_string(FixedPointKind k) {
  switch (k) {
    case FixedPointKind::stable_node: return "stable_node";
    case FixedPointKind::stable_spiral: return "stable_spiral";
    case FixedPointKind::unstable_node: return "unstable_node";
    case FixedPointKind::unstable_spiral: return "unstable_spiral";
    case FixedPointKind::saddle: return "saddle";
    case FixedPointKind::center_marginal: return "center_marginal";
  }
  return "?";
}

Eigen::Matrix2d polar_jacobian(double r, double z, const ModelParams& p) {
  Eigen::Matrix2d j;
  j << saturated_rate_deriv(r, p) * r + saturated_rate(r, p) - p.gamma, -p.g, p.g,
      -saturated_rate_deriv(z, p) * z - saturated_rate(z, p) - p.gamma;
  return j;
}

FixedPoint make_fixed_point(double r, double z, const ModelParams& p) {
  const Eigen::Matrix2d j = polar_jacobian(r, z, p);
  FixedPoint fp;
  fp.state = {r, z, M_PI / 2.0};
  fp.tau = j.trace();
  fp.delta = j.determinant();
  const Complex disc = std::sqrt(Complex{fp.tau * fp.tau - 4.0 * fp.delta, 0.0});
  fp.eig1 = (fp.tau + disc) / 2.0;
  fp.eig2 = (fp.tau - disc) / 2.0;
  fp.phi_pinning_valid = r >= z;

  const double s = rate_scale(p);
  const double tol_tau = 1e-9 * s;
  const double tol_delta = 1e-9 * s * s;
  if (std::abs(fp.tau) < tol_tau || std::abs(fp.delta) < tol_delta) {
    fp.kind = FixedPointKind::center_marginal;
  } else if (fp.delta < 0.0) {
    fp.kind = FixedPointKind::saddle;
  } else {
    const bool spiral = fp.tau * fp.tau < 4.0 * fp.delta;
    if (fp.tau < 0.0)
      fp.kind = spiral ? FixedPointKind::stable_spiral : FixedPointKind::stable_node;
    else
      fp.kind = spiral ? FixedPointKind::unstable_spiral : FixedPointKind::unstable_node;
  }
  return fp;
}

FixedPointSet find_fixed_points(const ModelParams& p) {
  p.validate();
  FixedPointSet out;
  std::vector<std::pair<double, double>> roots;
  roots.emplace_back(0.0, 0.0);

  const double sqrt_n0 = std::sqrt(p.n0);
  const double ratio = p.Gamma / p.g;

  // Non-origin roots require Gamma(r) > gamma somewhere, which bounds r.
  if (p.Gamma > p.gamma && p.g > 0.0) {
    const double r_cap =
        sqrt_n0 * std::sqrt(std::pow(p.Gamma / p.gamma, 1.0 / p.nu) - 1.0) * (1.0 - 1e-12);
    const auto z_of_r = [&](double r) { return (saturated_rate(r, p) - p.gamma) * r / p.g; };
    const auto reduced = [&](double r) {
      const double z = z_of_r(r);
      return p.g * r - (saturated_rate(z, p) + p.gamma) * z;
    };

    // Sign scan of the 1-D reduction over a log grid, then bisection.
    const int n_grid = 4096;
    const double lo = 1e-5 * sqrt_n0;
    if (r_cap > lo) {
      const double step = std::log(r_cap / lo) / (n_grid - 1);
      double r_prev = lo, f_prev = reduced(lo);
      for (int i = 1; i < n_grid; ++i) {
        const double r_cur = lo * std::exp(step * i);
        const double f_cur = reduced(r_cur);
        if (f_prev == 0.0 || f_prev * f_cur < 0.0) {
          const double r_root = detail::brent_root(reduced, r_prev, r_cur, 1e-15);
          const double z_root = z_of_r(r_root);
          if (z_root > 0.0) roots.emplace_back(r_root, z_root);
        }
        r_prev = r_cur;
        f_prev = f_cur;
      }
    }

    // Analytic seeds cover root pairs the scan grid may straddle near a
    // nullcline tangency.
    std::vector<std::pair<double, double>> seeds;
    if (ratio >= 1.0) {
      const auto [r2, z2] = phase_ii_amplitudes(p);
      seeds.emplace_back(r2, z2);
    }
    if (p.nu == 2.0 && ratio > 4.0) {
      const auto [r3, z3] = phase_iii_amplitudes(p);
      seeds.emplace_back(r3, z3);
      seeds.emplace_back(z3, r3);
    }
    for (auto [r, z] : seeds) {
      if (!(r > 0.0) || !(z > 0.0)) continue;
      if (newton_polish(r, z, p)) {
        if (r > 0.0 && z > 0.0) roots.emplace_back(r, z);
      } else {
        out.warnings.push_back("newton did not converge from seed (r=" + std::to_string(r) +
                               ", z=" + std::to_string(z) + ")");
      }
    }
  }

  // Polish scan roots and merge duplicates.
  std::vector<std::pair<double, double>> polished;
  for (auto [r, z] : roots) {
    if (r != 0.0 || z != 0.0) {
      if (!newton_polish(r, z, p)) {
        out.warnings.push_back("newton did not converge near (r=" + std::to_string(r) +
                               ", z=" + std::to_string(z) + ")");
        continue;
      }
      if (!(r > 0.0) || !(z > 0.0)) continue;
    }
    polished.emplace_back(r, z);
  }
  std::sort(polished.begin(), polished.end());
  const double merge_tol = 1e-8 * sqrt_n0;
  std::vector<std::pair<double, double>> unique;
  for (const auto& rz : polished) {
    bool dup = false;
    for (const auto& u : unique)
      dup = dup || (std::abs(rz.first - u.first) < merge_tol &&
                    std::abs(rz.second - u.second) < merge_tol);
    if (!dup) unique.push_back(rz);
  }
  for (const auto& [r, z] : unique) out.points.push_back(make_fixed_point(r, z, p));
  return out;
}

PhaseBoundaries phase_boundaries(double nu) {
  if (!(nu >= 1.0)) throw std::invalid_argument("phase_boundaries: nu must be >= 1");
  PhaseBoundaries b;
  if (nu > 1.0) b.ii_to_iii = std::pow(nu / (nu - 1.0), nu);
  const double hopf =
      std::pow((nu + 2.0 * nu * nu + std::sqrt(2.0 * nu + 3.0 * nu * nu)) / (2.0 * nu * nu - 1.0),
               nu);
  if (nu < 2.0) b.ii_to_iiiw = hopf;
  return b;
}

const char* to_string(Phase ph) {
  switch (ph) {
    case Phase::I: return "I";
    case Phase::II: return "II";
    case Phase::IIIw: return "IIIw";
    case Phase::III: return "III";
    case Phase::Intermediate: return "INTERMEDIATE";
  }
  return "?";
}

std::pair<double, double> phase_ii_amplitudes(const ModelParams& p) {
  const double ratio = p.Gamma / p.g;
  if (!(ratio >= 1.0)) throw std::invalid_argument("phase_ii_amplitudes: requires Gamma/g >= 1");
  const double x = std::pow(ratio, 1.0 / p.nu);
  const double r0 = std::sqrt(p.n0 * (x - 1.0));
  if (r0 == 0.0) return {0.0, 0.0};
  const double denom = saturated_rate_deriv(r0, p) * r0 + saturated_rate(r0, p) + p.g;
  const double r1 = r0 / denom;
  return {r0 + p.gamma * r1, r0 - p.gamma * r1};
}

std::pair<double, double> phase_iii_amplitudes(const ModelParams& p) {
  if (p.nu != 2.0) throw std::invalid_argument("phase_iii_amplitudes: closed form requires nu = 2");
  const double ratio = p.Gamma / p.g;
  if (!(ratio > 4.0))
    throw std::invalid_argument("phase_iii_amplitudes: requires Gamma/g > 4");
  const double s = std::sqrt(ratio * (ratio - 4.0));
  return {std::sqrt(p.n0 * ((ratio + s) / 2.0 - 1.0)),
          std::sqrt(p.n0 * ((ratio - s) / 2.0 - 1.0))};
}

double omega_osc_estimate(const ModelParams& p) {
  if (!(p.Gamma > p.g)) return 0.0;
  return 2.0 * std::sqrt(p.g * p.g * p.g * (p.Gamma - p.g)) / p.Gamma;
}

PhaseInfo classify_phase(const ModelParams& p) {
  p.validate();
  const PhaseBoundaries b = phase_boundaries(p.nu);
  const double ratio = p.Gamma / p.g;
  PhaseInfo info;
  if (ratio < b.i_to_ii) {
    info.label = Phase::I;
    return info;
  }
  const double upper_ii =
      std::min(b.ii_to_iiiw.value_or(std::numeric_limits<double>::infinity()),
               b.ii_to_iii.value_or(std::numeric_limits<double>::infinity()));
  if (ratio < upper_ii) {
    info.label = Phase::II;
    const auto [r, z] = phase_ii_amplitudes(p);
    info.r_ss2 = r * r;
    info.z_ss2 = z * z;
    return info;
  }
  if (b.ii_to_iiiw && ratio >= *b.ii_to_iiiw &&
      (!b.ii_to_iii || ratio < *b.ii_to_iii)) {
    info.label = Phase::IIIw;
    const auto [r, z] = phase_ii_amplitudes(p);
    info.r_ss2 = r * r;
    info.z_ss2 = z * z;
    info.omega_osc = omega_osc_estimate(p);
    return info;
  }
  // Beyond the II -> III boundary. For 1 < nu < 2 the first stable state
  // created there has r < z, where the phi = pi/2 reduction breaks down;
  // that window is only detected, not classified.
  const FixedPointSet fps = find_fixed_points(p);
  const FixedPoint* stable = nullptr;
  for (const auto& fp : fps.points) {
    const bool is_stable = fp.kind == FixedPointKind::stable_node ||
                           fp.kind == FixedPointKind::stable_spiral;
    if (is_stable && fp.state.r > 0.0 && (stable == nullptr || fp.state.r > stable->state.r))
      stable = &fp;
  }
  if (stable != nullptr && stable->phi_pinning_valid && stable->state.r > stable->state.z) {
    info.label = Phase::III;
    info.r_ss2 = stable->state.r * stable->state.r;
    info.z_ss2 = stable->state.z * stable->state.z;
    return info;
  }
  info.label = Phase::Intermediate;
  if (stable != nullptr) {
    info.r_ss2 = stable->state.r * stable->state.r;
    info.z_ss2 = stable->state.z * stable->state.z;
  }
  return info;
}

double bloch_coupling(const ModelParams& p, double k) {
  return std::abs(Complex{p.g, 0.0} + p.gprime * std::exp(Complex{0.0, k}));
}

ModelParams bloch_reduce(const ModelParams& p, double k) {
  if (p.ncells >= 1) {
    const double base = 2.0 * M_PI / p.ncells;
    const double j = std::round(k / base);
    if (std::abs(k - j * base) > 1e-9)
      throw std::invalid_argument("bloch_reduce: k must be a multiple of 2*pi/Ncells");
  }
  ModelParams out = p;
  out.g = bloch_coupling(p, k);
  out.gprime = 0.0;
  out.ncells = 1;
  return out;
}

double most_unstable_k(const ModelParams& p) {
  double best_k = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j < p.ncells; ++j) {
    const double k = 2.0 * M_PI * j / p.ncells;
    const double gk = bloch_coupling(p, k);
    if (gk < best) {
      best = gk;
      best_k = k;
    }
  }
  return best_k;
}

namespace {

// Phase-II fixed point solved numerically at the given Gamma/g.
FixedPoint phase_ii_point_numeric(double nu, double gamma, double ratio) {
  ModelParams p;
  p.g = 1.0;
  p.Gamma = ratio;
  p.gamma = gamma;
  p.nu = nu;
  p.n0 = 1.0;
  auto [r, z] = phase_ii_amplitudes(p);
  if (!newton_polish(r, z, p))
    throw std::runtime_error("phase_ii_point_numeric: Newton failed at Gamma/g = " +
                             std::to_string(ratio));
  return make_fixed_point(r, z, p);
}

}  // namespace

double boundary_delta_zero_numeric(double nu, double gamma) {
  if (!(nu > 1.0))
    throw std::invalid_argument("boundary_delta_zero_numeric: no II->III boundary for nu = 1");
  const double guess = *phase_boundaries(nu).ii_to_iii;
  auto delta_at = [&](double ratio) { return phase_ii_point_numeric(nu, gamma, ratio).delta; };
  return detail::brent_root(delta_at, 0.7 * guess, 1.3 * guess, 1e-12);
}

double boundary_tau_zero_numeric(double nu, double gamma) {
  if (!(nu < 2.0))
    throw std::invalid_argument("boundary_tau_zero_numeric: no II->IIIw boundary for nu >= 2");
  const double guess = *phase_boundaries(nu).ii_to_iiiw;
  auto tau_at = [&](double ratio) { return phase_ii_point_numeric(nu, gamma, ratio).tau; };
  return detail::brent_root(tau_at, 0.7 * guess, 1.3 * guess, 1e-12);
}

}  // namespace ptsim
