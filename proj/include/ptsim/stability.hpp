#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ptsim/model.hpp"

namespace ptsim {

/// Polar representation: alpha = r e^{i theta_a}, beta = z e^{i theta_b},
/// phi = theta_a - theta_b in (-pi, pi].
struct PolarState {
  double r = 0.0;
  double z = 0.0;
  double phi = 0.0;
};

/// Time derivative of (r, z, phi). Singular at r = 0 or z = 0 because the
/// relative phase loses meaning there (throws std::domain_error).
PolarState polar_rhs(const PolarState& s, const ModelParams& p);

/// Nullclines of the phi = pi/2 reduced system:
///   z = f(r) - (gamma/g) r  (r-nullcline), r = f(z) + (gamma/g) z,
/// with f(r) = (Gamma/g) r / (1 + r^2/n0)^nu.
struct Nullclines {
  std::function<double(double)> f;       ///< saturable response curve
  std::function<double(double)> z_of_r;  ///< r-nullcline
  std::function<double(double)> r_of_z;  ///< z-nullcline
  double f_argmax = 0.0;                 ///< sqrt(n0) / sqrt(2 nu - 1)
  double f_max = 0.0;                    ///< f(f_argmax)
};
Nullclines nullclines(const ModelParams& p);

enum class FixedPointKind {
  stable_node,
  stable_spiral,
  unstable_node,
  unstable_spiral,
  saddle,
  center_marginal
};
const char* to_string(FixedPointKind k);

/// Stationary state of the (r, z) dynamics at phi = pi/2 with its local
/// linearization.
struct FixedPoint {
  PolarState state;     ///< phi = pi/2 by construction
  double tau = 0.0;     ///< Jacobian trace
  double delta = 0.0;   ///< Jacobian determinant
  Complex eig1, eig2;   ///< (tau +- sqrt(tau^2 - 4 delta)) / 2
  FixedPointKind kind = FixedPointKind::saddle;
  /// False when r < z: there phi = pi/2 is itself unstable and the in-plane
  /// classification does not describe the full four-dimensional flow.
  bool phi_pinning_valid = true;
};

struct FixedPointSet {
  std::vector<FixedPoint> points;       ///< sorted by (r, z); includes origin
  std::vector<std::string> warnings;    ///< per-seed root-finder failures
};

/// Jacobian of the reduced (r, z) dynamics at phi = pi/2.
Eigen::Matrix2d polar_jacobian(double r, double z, const ModelParams& p);

/// Classification of (r, z) as a fixed point candidate (no residual check).
FixedPoint make_fixed_point(double r, double z, const ModelParams& p);

/// All stationary solutions of the phi = pi/2 system in the closed positive
/// quadrant: 1, 2 or 4 points including the origin.
FixedPointSet find_fixed_points(const ModelParams& p);

/// Closed-form transition values of Gamma/g for a given nu (gamma -> 0):
///   I -> II at 1,
///   II -> IIIw at ((nu + 2 nu^2 + sqrt(2 nu + 3 nu^2)) / (2 nu^2 - 1))^nu
///                 (absent for nu >= 2),
///   II -> III at (nu / (nu - 1))^nu (absent for nu = 1).
struct PhaseBoundaries {
  double i_to_ii = 1.0;
  std::optional<double> ii_to_iiiw;
  std::optional<double> ii_to_iii;
};
PhaseBoundaries phase_boundaries(double nu);

enum class Phase { I, II, IIIw, III, Intermediate };
const char* to_string(Phase ph);

/// Phase label plus the attained amplitudes (squared) or, for the limit
/// cycle, the cycle center and approximate angular frequency.
struct PhaseInfo {
  Phase label = Phase::I;
  double r_ss2 = 0.0;
  double z_ss2 = 0.0;
  double omega_osc = 0.0;  ///< nonzero only in phase IIIw
};
PhaseInfo classify_phase(const ModelParams& p);

/// Symmetric steady state of phase II including the O(gamma) splitting:
/// returns (r_ss, z_ss) with r_ss >= z_ss. Requires Gamma/g >= 1.
std::pair<double, double> phase_ii_amplitudes(const ModelParams& p);

/// Asymmetric steady-state amplitudes (r_ss, z_ss) of phase III for nu = 2,
/// Gamma/g > 4 (closed form, gamma -> 0).
std::pair<double, double> phase_iii_amplitudes(const ModelParams& p);

/// Limit-cycle frequency estimate 2 sqrt(g^3 (Gamma - g)) / Gamma.
double omega_osc_estimate(const ModelParams& p);

/// Plane-wave reduction of the alternating-gain-loss ring: a two-mode
/// parameter set with coupling g_k = |g + g' e^{ik}|. Allowed wavenumbers
/// are k = 2 pi j / Ncells (equivalently 4 pi j / N with N = 2 Ncells
/// resonators). At k = pi and g' = g the modes decouple and the returned
/// coupling is zero.
ModelParams bloch_reduce(const ModelParams& p, double k);

/// Coupling magnitude |g + g' e^{ik}| without the wavenumber-grid check.
double bloch_coupling(const ModelParams& p, double k);

/// Allowed wavenumber minimizing |g_k| (the mode that breaks symmetry first).
double most_unstable_k(const ModelParams& p);

/// Numeric continuation diagnostics: Gamma/g where the phase-II fixed point's
/// determinant (resp. trace) crosses zero, located by root finding on the
/// numerically solved fixed point. `gamma` should be small against 1; the
/// closed forms above are its gamma -> 0 limits.
double boundary_delta_zero_numeric(double nu, double gamma);
double boundary_tau_zero_numeric(double nu, double gamma);

}  // namespace ptsim
