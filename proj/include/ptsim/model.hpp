#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <utility>

#include <nlohmann/json_fwd.hpp>

namespace ptsim {

using Complex = std::complex<double>;

/// Physical parameters of the coupled gain-loss resonator model.
///
/// All rates are expressed in units of the inter-mode coupling g; the JSON
/// loader rescales arbitrary units so that g == 1 internally.
struct ModelParams {
  double g = 1.0;         ///< inter-mode coupling rate (the global rate scale)
  double Gamma = 1.0;     ///< maximal optical gain/loss rate
  double gamma = 1e-3;    ///< bare mechanical damping rate
  double nu = 2.0;        ///< saturation exponent (real, >= 1)
  double n0 = 1.0;        ///< saturation occupation number
  double Nth = 0.0;       ///< thermal occupation number
  bool quantum_noise = false;  ///< include the amplification noise floor D_q
  double gprime = 0.0;    ///< inter-cell coupling (arrays only)
  int ncells = 1;         ///< number of gain-loss unit cells

  /// Throws std::invalid_argument when outside the model's domain.
  /// Coupling g may be zero only for Bloch-reduced parameter sets where the
  /// gain and loss modes decouple; the config loader is stricter.
  void validate() const;

  /// Same physics with all rates rescaled so that g == 1.
  ModelParams normalized() const;

  double gamma_over_g() const { return Gamma / g; }
};

/// Microscopic three-level parameters behind the saturable gain.
struct MicroscopicParams {
  double lambda_c = 1.0;  ///< strain coupling constant
  double Omega = 1.0;     ///< optical drive amplitude
  double Gamma_a = 10.0;  ///< auxiliary-system decay rate

  void validate() const;
};

/// (Gamma, n0) induced by the microscopic parameters:
/// Gamma = 2 lambda^2 Omega^2 / Gamma_a^3, n0 = Gamma_a^2 / (4 lambda^2).
/// Warns on stderr outside the weak-driving regime Omega << Gamma_a.
std::pair<double, double> map_microscopic(const MicroscopicParams& mp);

/// Complex amplitudes of the gain (alpha) and loss (beta) mode.
struct ModeState {
  Complex alpha{0.0, 0.0};
  Complex beta{0.0, 0.0};
};

/// Saturable optical rate magnitude Gamma / (1 + amp^2/n0)^nu and its
/// derivative with respect to the amplitude.
double saturated_rate(double amplitude, const ModelParams& p);
double saturated_rate_deriv(double amplitude, const ModelParams& p);

/// Net amplitude rates of the two modes: +-saturated_rate - gamma.
double gain_rate(Complex a, const ModelParams& p);
double loss_rate(Complex b, const ModelParams& p);

/// Diffusion rates. The gain mode carries the quantum noise floor
/// D_q(a) = 2 Gamma / (1 + |a|^2/n0)^3 when enabled, on top of the thermal
/// 2 gamma Nth shared by both modes.
double quantum_diffusion(Complex a, const ModelParams& p);
double diffusion_plus(Complex a, const ModelParams& p);
double diffusion_minus(const ModelParams& p);

/// Deterministic part of the two-mode equation of motion.
ModeState drift(const ModeState& s, const ModelParams& p);

/// Strict config loader: accepts exactly the keys
/// {g, Gamma, gamma, nu, n0, Nth, quantum_noise, gprime, Ncells},
/// requires {Gamma, gamma, nu, n0}, rejects unknown keys, and returns
/// parameters rescaled to g == 1.
ModelParams load_params(const nlohmann::json& j);
ModelParams load_params_file(const std::string& path);

/// Serialization of the (normalized) parameter set, inverse of load_params.
nlohmann::json params_to_json(const ModelParams& p);

}  // namespace ptsim
