#include "ptsim/spectrum.hpp"

#include <cmath>
#include <stdexcept>

namespace ptsim {

const char* to_string(PtRegime r) {
  switch (r) {
    case PtRegime::pt_symmetric: return "PT_symmetric";
    case PtRegime::exceptional: return "exceptional";
    case PtRegime::pt_broken: return "PT_broken";
  }
  return "?";
}

SpectrumResult spectrum(const ModelParams& p) {
  if (!(p.g > 0.0)) throw std::invalid_argument("spectrum: requires g > 0");
  const double ratio = p.Gamma / p.g;

  SpectrumResult out;
  if (std::abs(ratio - 1.0) < kExceptionalTol) {
    out.regime = PtRegime::exceptional;
    out.theta = Complex{M_PI / 2.0, 0.0};
    out.lambda_plus = Complex{0.0, 0.0};
  } else {
    out.regime = ratio < 1.0 ? PtRegime::pt_symmetric : PtRegime::pt_broken;
    // Principal branch: theta = pi/2 - i arccosh(ratio) for ratio > 1, so
    // lambda_plus = g cos(theta) acquires a positive imaginary part there.
    out.theta = std::asin(Complex{ratio, 0.0});
    out.lambda_plus = p.g * std::cos(out.theta);
    if (out.regime == PtRegime::pt_symmetric) out.lambda_plus.imag(0.0);
    if (out.regime == PtRegime::pt_broken) out.lambda_plus.real(0.0);
  }
  out.lambda_minus = -out.lambda_plus;

  const Complex i{0.0, 1.0};
  const Complex half = out.theta / 2.0;
  out.psi_plus << std::exp(i * half), std::exp(-i * half);
  out.psi_minus << i * std::exp(-i * half), -i * std::exp(i * half);
  return out;
}

Eigen::Vector2cd pt_apply(const Eigen::Vector2cd& v) {
  Eigen::Vector2cd out;
  out << std::conj(v(1)), std::conj(v(0));
  return out;
}

double pt_defect(const Eigen::Vector2cd& v) {
  const double n2 = v.squaredNorm();
  if (!(n2 > 0.0)) throw std::invalid_argument("pt_defect: zero vector");
  // |PT v| = |v|, so the overlap is normalized by |v|^2.
  const Complex overlap = v.dot(pt_apply(v));
  return 1.0 - std::abs(overlap) / n2;
}

Eigen::Vector2cd normalized(const Eigen::Vector2cd& v) {
  const double n = v.norm();
  if (!(n > 0.0)) throw std::invalid_argument("normalized: zero vector");
  return v / n;
}

}  // namespace ptsim
