#pragma once

#include <Eigen/Dense>

#include "ptsim/model.hpp"

namespace ptsim {

/// Uniform-bin density histogram over [0, lo + nbins * width).
struct Histogram {
  double lo = 0.0;
  double width = 0.0;
  Eigen::ArrayXd density;  ///< normalized to unit mass: sum(density) * width = 1

  int nbins() const { return static_cast<int>(density.size()); }
  double center(int i) const { return lo + (i + 0.5) * width; }
};

/// ceil(sqrt(count)) capped at 256.
int default_nbins(Eigen::Index count);

/// Histogram of the radial amplitude |sample| over [0, 1.05 * max].
/// Throws on empty input.
Histogram radial_histogram(const Eigen::ArrayXcd& samples, int nbins);

/// Displaced-Rayleigh fit P(r) ~ r exp(-(r - r0)^2 / sigma^2) of a radial
/// density, by chi^2 = sum_i (H_i - P(r_i))^2 over bin centers with both
/// sides normalized to unit mass (which eliminates the prefactor).
struct RadialFit {
  double r0 = 0.0;     ///< radial location of the distribution maximum
  double sigma = 0.0;  ///< fitted width
  double fluct = 0.0;  ///< <|x|^2> - r0^2, attached from raw moments
  double chi2 = 0.0;
  int nbins = 0;
  bool converged = true;  ///< false: simplex hit the iteration cap, values
                          ///< are the best point found
};

RadialFit fit_radial(const Histogram& hist);

/// Histogram + fit + fluctuation measure from the raw second moment.
RadialFit analyze_radial(const Eigen::ArrayXcd& samples, int nbins = 0);

/// PT-symmetry parameter of a paired sample set (sample i of the gain mode
/// with sample i of the loss mode):
///   Delta = <(|a| - |b|)^2> / (<|a|^2> + <|b|^2>)  in [0, 1].
/// gamma_bar is the average net dissipation <loss magnitude - gain>; it is
/// O(gamma) when the marginals coincide and O(Gamma) in the broken phase.
struct SymmetryReport {
  double delta = 0.0;
  double mean_occ_gain = 0.0;
  double mean_occ_loss = 0.0;
  double gamma_bar = 0.0;
};

SymmetryReport symmetry_delta(const Eigen::ArrayXcd& samples_gain,
                              const Eigen::ArrayXcd& samples_loss, const ModelParams& p);

/// Delta of independent thermal modes, 1 - pi/4.
inline constexpr double kDeltaThermal = 1.0 - M_PI / 4.0;

/// A (Gamma/g, Delta) series from a parameter sweep.
struct DeltaCurve {
  Eigen::ArrayXd gamma_over_g;
  Eigen::ArrayXd delta;
};

/// First upward crossing of Delta = 0.5, linearly interpolated. Throws
/// std::runtime_error when the curve never crosses.
double detect_transition(const DeltaCurve& curve);

}  // namespace ptsim
