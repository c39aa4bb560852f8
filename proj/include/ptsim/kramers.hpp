#pragma once

#include <stdexcept>
#include <utility>

#include "ptsim/model.hpp"

namespace ptsim {

/// Thrown when the effective potential has no metastable well (the minimum
/// has merged with the barrier top).
struct NoBarrierError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Effective one-dimensional potential for the loss-mode amplitude z with the
/// gain mode frozen at alpha_ss and relative phase phi:
///   U(z) = -n0 Gamma / (2 (1 + z^2/n0)) - g alpha_ss z sin(phi)
///          - (gamma Nth / 2) log(z).
/// The saturation term integrates the nu = 2 loss profile; the log term
/// regularizes z -> 0 at finite gamma Nth.
double potential(double z, const ModelParams& p, double alpha_ss, double phi);

/// Same with the defaults of the frozen-gain-mode picture: phi = pi/2 and
/// alpha_ss from the closed-form broken-phase amplitude (requires nu = 2 and
/// Gamma/g > 4).
double potential(double z, const ModelParams& p);

double potential_deriv(double z, const ModelParams& p, double alpha_ss, double phi);
double potential_second_deriv(double z, const ModelParams& p, double alpha_ss, double phi);

/// Locations of the metastable minimum and the barrier top of U, from a
/// bracketed root scan of U' over [1e-3 sqrt(n0), 1e2 sqrt(n0)]. Throws
/// NoBarrierError when U' has fewer than two positive roots.
std::pair<double, double> find_extrema(const ModelParams& p);

/// Thermal-activation summary of the metastable loss-mode amplitude.
struct EscapePrediction {
  double z_min = 0.0;   ///< metastable minimum (near |beta_ss|)
  double z_max = 0.0;   ///< barrier top
  double dU = 0.0;      ///< barrier height U(z_max) - U(z_min)
  double R0 = 0.0;      ///< attempt rate sqrt(-U''(z_min) U''(z_max)) / (2 pi)
  double R_esc = 0.0;   ///< R0 exp(-2 dU / (gamma Nth))
  bool stable = false;  ///< R_esc < gamma
};

EscapePrediction escape_rate(const ModelParams& p);

/// Gamma/g at which the escape rate equals the bare damping, located by
/// bisection; this is the predicted thermal-to-broken transition point.
/// The Gamma field of `p` is ignored.
double predict_transition(const ModelParams& p);

}  // namespace ptsim
