#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ptsim/spectrum.hpp"

using namespace ptsim;

namespace {

ModelParams at_ratio(double ratio) {
  ModelParams p;
  p.Gamma = ratio;
  return p;
}

}  // namespace

TEST_CASE("hermitian limit, exceptional point, broken regime") {
  const SpectrumResult herm = spectrum(at_ratio(0.0));
  CHECK(herm.regime == PtRegime::pt_symmetric);
  CHECK(herm.lambda_plus == Complex{1.0, 0.0});

  const SpectrumResult ep = spectrum(at_ratio(1.0));
  CHECK(ep.regime == PtRegime::exceptional);
  CHECK(std::abs(ep.lambda_plus) == 0.0);
  CHECK(std::abs(ep.lambda_minus) == 0.0);

  const SpectrumResult broken = spectrum(at_ratio(2.0));
  CHECK(broken.regime == PtRegime::pt_broken);
  CHECK(broken.lambda_plus.real() == doctest::Approx(0.0));
  // characteristic polynomial at Gamma = 2g: lambda^2 = g^2 - Gamma^2 = -3
  CHECK(broken.lambda_plus.imag() == doctest::Approx(std::sqrt(3.0)));
  CHECK(broken.lambda_plus.imag() > 0.0);  // amplified eigenmode
}

TEST_CASE("spectrum is antisymmetric and eigenvectors solve H psi = lambda psi") {
  for (double ratio : {0.1, 0.5, 0.9, 0.999, 1.5, 3.0, 8.0}) {
    const SpectrumResult s = spectrum(at_ratio(ratio));
    CHECK(s.lambda_minus == -s.lambda_plus);

    Eigen::Matrix2cd h;
    h << Complex{0.0, ratio}, Complex{1.0, 0.0}, Complex{1.0, 0.0}, Complex{0.0, -ratio};
    const Eigen::Vector2cd res_p = h * s.psi_plus - s.lambda_plus * s.psi_plus;
    const Eigen::Vector2cd res_m = h * s.psi_minus - s.lambda_minus * s.psi_minus;
    CHECK(res_p.norm() < 1e-12);
    CHECK(res_m.norm() < 1e-12);
  }
}

TEST_CASE("pt defect of reference vectors") {
  Eigen::Vector2cd sym;
  sym << Complex{1.0, 0.0}, Complex{1.0, 0.0};
  CHECK(pt_defect(sym) == doctest::Approx(0.0).epsilon(1e-15));

  Eigen::Vector2cd single;
  single << Complex{1.0, 0.0}, Complex{0.0, 0.0};
  CHECK(pt_defect(single) == doctest::Approx(1.0));

  CHECK(pt_defect(spectrum(at_ratio(0.5)).psi_plus) < 1e-13);

  Eigen::Vector2cd zero = Eigen::Vector2cd::Zero();
  CHECK_THROWS_AS(pt_defect(zero), std::invalid_argument);
}

TEST_CASE("unbroken regime: real spectrum and exact PT eigenstates on a dense grid") {
  for (int i = 1; i < 200; ++i) {
    const double ratio = i / 200.0;
    const SpectrumResult s = spectrum(at_ratio(ratio));
    CHECK(s.lambda_plus.imag() == 0.0);
    CHECK(s.lambda_minus.imag() == 0.0);
    CHECK(pt_defect(s.psi_plus) < 1e-12);
    CHECK(pt_defect(s.psi_minus) < 1e-12);
  }
}

TEST_CASE("broken regime: imaginary spectrum and broken eigenvectors") {
  for (double ratio : {1.01, 1.2, 2.0, 5.0, 20.0}) {
    const SpectrumResult s = spectrum(at_ratio(ratio));
    CHECK(s.lambda_plus.real() == 0.0);
    CHECK(s.lambda_plus.imag() > 0.0);
    CHECK(pt_defect(s.psi_plus) > 1e-6);
    CHECK(pt_defect(s.psi_minus) > 1e-6);
  }
}

TEST_CASE("square-root scaling near the exceptional point") {
  // log-log slope of |lambda| against |g - Gamma| should be 1/2
  double sum_slope = 0.0;
  int count = 0;
  for (double eps = 1e-6; eps < 1e-2; eps *= 10.0) {
    const double l1 = std::abs(spectrum(at_ratio(1.0 - eps)).lambda_plus);
    const double l2 = std::abs(spectrum(at_ratio(1.0 - 10.0 * eps)).lambda_plus);
    sum_slope += std::log(l2 / l1) / std::log(10.0);
    ++count;
  }
  CHECK(sum_slope / count == doctest::Approx(0.5).epsilon(0.1));

  // continuity through the exceptional point
  const double just_below = std::abs(spectrum(at_ratio(1.0 - 1e-7)).lambda_plus);
  const double just_above = std::abs(spectrum(at_ratio(1.0 + 1e-7)).lambda_plus);
  CHECK(just_below < 1e-3);
  CHECK(just_above < 1e-3);
}

TEST_CASE("normalization helper") {
  Eigen::Vector2cd v;
  v << Complex{3.0, 0.0}, Complex{0.0, 4.0};
  CHECK(normalized(v).norm() == doctest::Approx(1.0));
  Eigen::Vector2cd zero = Eigen::Vector2cd::Zero();
  CHECK_THROWS_AS(normalized(zero), std::invalid_argument);
}
