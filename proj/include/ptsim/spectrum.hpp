#pragma once

#include <Eigen/Dense>

#include "ptsim/model.hpp"

namespace ptsim {

enum class PtRegime { pt_symmetric, exceptional, pt_broken };

const char* to_string(PtRegime r);

/// Eigensystem of the linearized two-mode generator H = [[i Gamma, g], [g, -i Gamma]].
struct SpectrumResult {
  Complex lambda_plus;   ///< +sqrt(g^2 - Gamma^2); +i sqrt(Gamma^2 - g^2) when broken
  Complex lambda_minus;  ///< exactly -lambda_plus
  Eigen::Vector2cd psi_plus;   ///< (e^{i theta/2}, e^{-i theta/2}), unnormalized
  Eigen::Vector2cd psi_minus;  ///< (i e^{-i theta/2}, -i e^{i theta/2}), unnormalized
  Complex theta;               ///< mixing angle, sin(theta) = Gamma/g
  PtRegime regime;
};

/// Relative tolerance below which |Gamma - g| is classified as the
/// exceptional point; eigenvector degeneracy makes a finer distinction
/// numerically meaningless.
inline constexpr double kExceptionalTol = 1e-9;

/// Eigenvalues/eigenvectors of H. The bare damping gamma does not enter.
/// In the broken regime lambda_plus is the amplified eigenmode
/// (positive imaginary part).
SpectrumResult spectrum(const ModelParams& p);

/// Combined parity (component swap) and time reversal (conjugation).
Eigen::Vector2cd pt_apply(const Eigen::Vector2cd& v);

/// 1 - |<v, PT v>| / |v|^2: zero iff PT v lies on the ray through v,
/// one when PT maps v onto an orthogonal ray. Requires v != 0.
double pt_defect(const Eigen::Vector2cd& v);

/// Unit-norm copy (plumbing; the eigenvectors above are reported verbatim).
Eigen::Vector2cd normalized(const Eigen::Vector2cd& v);

}  // namespace ptsim
