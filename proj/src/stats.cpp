#include "ptsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "detail/optimize.hpp"

namespace ptsim {

int default_nbins(Eigen::Index count) {
  const int bins = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
  return std::clamp(bins, 4, 256);
}

Histogram radial_histogram(const Eigen::ArrayXcd& samples, int nbins) {
  if (samples.size() == 0) throw std::invalid_argument("radial_histogram: empty sample set");
  if (nbins < 1) throw std::invalid_argument("radial_histogram: nbins must be >= 1");
  const Eigen::ArrayXd radii = samples.abs();
  const double top = radii.maxCoeff() * 1.05;

  Histogram hist;
  hist.lo = 0.0;
  hist.width = top > 0.0 ? top / nbins : 1.0;
  hist.density = Eigen::ArrayXd::Zero(nbins);
  for (Eigen::Index i = 0; i < radii.size(); ++i) {
    auto bin = static_cast<int>(radii[i] / hist.width);
    bin = std::clamp(bin, 0, nbins - 1);
    hist.density[bin] += 1.0;
  }
  hist.density /= static_cast<double>(radii.size()) * hist.width;
  return hist;
}

namespace {

// Model density at the bin centers, normalized to unit mass on the grid.
Eigen::ArrayXd model_density(const Histogram& hist, double r0, double sigma) {
  const int n = hist.nbins();
  Eigen::ArrayXd out(n);
  for (int i = 0; i < n; ++i) {
    const double r = hist.center(i);
    const double arg = (r - r0) / sigma;
    out[i] = r * std::exp(-arg * arg);
  }
  const double mass = out.sum() * hist.width;
  if (mass > 0.0) out /= mass;
  return out;
}

double chi2(const Histogram& hist, double r0, double sigma) {
  if (!(r0 >= 0.0) || !(sigma > 0.0)) return std::numeric_limits<double>::infinity();
  return (hist.density - model_density(hist, r0, sigma)).square().sum();
}

}  // namespace

RadialFit fit_radial(const Histogram& hist) {
  if (hist.nbins() < 2) throw std::invalid_argument("fit_radial: histogram too coarse");
  const double top = hist.lo + hist.nbins() * hist.width;

  // Coarse grid, then derivative-free refinement (histogram chi^2 is noisy).
  double best_r0 = 0.0, best_sigma = top / 4.0;
  double best = std::numeric_limits<double>::infinity();
  const int n_grid = 24;
  for (int i = 0; i < n_grid; ++i) {
    const double r0 = top * i / (n_grid - 1);
    for (int j = 0; j < n_grid; ++j) {
      const double sigma = top * (0.02 + 0.98 * j / (n_grid - 1));
      const double c = chi2(hist, r0, sigma);
      if (c < best) {
        best = c;
        best_r0 = r0;
        best_sigma = sigma;
      }
    }
  }

  const auto res = detail::nelder_mead_2d(
      [&](double r0, double sigma) { return chi2(hist, r0, sigma); }, {best_r0, best_sigma},
      {0.05 * top, 0.05 * top}, 1e-8, 500);

  RadialFit fit;
  fit.nbins = hist.nbins();
  if (res.fmin <= best) {
    fit.r0 = std::max(0.0, res.x[0]);
    fit.sigma = std::abs(res.x[1]);
    fit.chi2 = res.fmin;
    fit.converged = res.converged;
  } else {
    fit.r0 = best_r0;
    fit.sigma = best_sigma;
    fit.chi2 = best;
    fit.converged = false;
  }
  return fit;
}

RadialFit analyze_radial(const Eigen::ArrayXcd& samples, int nbins) {
  if (nbins <= 0) nbins = default_nbins(samples.size());
  RadialFit fit = fit_radial(radial_histogram(samples, nbins));
  const double mean_occ = samples.abs2().mean();
  fit.fluct = mean_occ - fit.r0 * fit.r0;
  return fit;
}

SymmetryReport symmetry_delta(const Eigen::ArrayXcd& samples_gain,
                              const Eigen::ArrayXcd& samples_loss, const ModelParams& p) {
  if (samples_gain.size() != samples_loss.size() || samples_gain.size() == 0)
    throw std::invalid_argument("symmetry_delta: paired sample lists of equal nonzero length");

  SymmetryReport rep;
  rep.mean_occ_gain = samples_gain.abs2().mean();
  rep.mean_occ_loss = samples_loss.abs2().mean();
  const double imbalance = (samples_gain.abs() - samples_loss.abs()).square().mean();
  rep.delta = imbalance / (rep.mean_occ_gain + rep.mean_occ_loss);

  double acc = 0.0;
  for (Eigen::Index i = 0; i < samples_gain.size(); ++i)
    acc += -loss_rate(samples_loss[i], p) - gain_rate(samples_gain[i], p);
  rep.gamma_bar = acc / static_cast<double>(samples_gain.size());
  return rep;
}

double detect_transition(const DeltaCurve& curve) {
  const Eigen::Index n = curve.gamma_over_g.size();
  if (n != curve.delta.size() || n < 2)
    throw std::invalid_argument("detect_transition: need at least two curve points");
  for (Eigen::Index i = 1; i < n; ++i) {
    const double d0 = curve.delta[i - 1], d1 = curve.delta[i];
    if (d0 < 0.5 && d1 >= 0.5) {
      const double frac = (0.5 - d0) / (d1 - d0);
      return curve.gamma_over_g[i - 1] +
             frac * (curve.gamma_over_g[i] - curve.gamma_over_g[i - 1]);
    }
  }
  throw std::runtime_error("detect_transition: Delta never crosses 0.5 from below");
}

}  // namespace ptsim
