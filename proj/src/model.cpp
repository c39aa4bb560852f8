#include "ptsim/model.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ptsim {

void ModelParams::validate() const {
  if (!(g >= 0.0)) throw std::invalid_argument("ModelParams: g must be >= 0");
  if (!(Gamma >= 0.0)) throw std::invalid_argument("ModelParams: Gamma must be >= 0");
  if (!(gamma > 0.0)) throw std::invalid_argument("ModelParams: gamma must be > 0");
  if (!(nu >= 1.0)) throw std::invalid_argument("ModelParams: nu must be >= 1");
  if (!(n0 > 0.0)) throw std::invalid_argument("ModelParams: n0 must be > 0");
  if (!(Nth >= 0.0)) throw std::invalid_argument("ModelParams: Nth must be >= 0");
  if (!(gprime >= 0.0)) throw std::invalid_argument("ModelParams: gprime must be >= 0");
  if (ncells < 1) throw std::invalid_argument("ModelParams: Ncells must be >= 1");
}

ModelParams ModelParams::normalized() const {
  if (!(g > 0.0)) throw std::invalid_argument("ModelParams: cannot normalize with g <= 0");
  ModelParams out = *this;
  out.Gamma = Gamma / g;
  out.gamma = gamma / g;
  out.gprime = gprime / g;
  out.g = 1.0;
  return out;
}

void MicroscopicParams::validate() const {
  if (!(lambda_c > 0.0) || !(Omega > 0.0) || !(Gamma_a > 0.0))
    throw std::invalid_argument("MicroscopicParams: all rates must be > 0");
}

std::pair<double, double> map_microscopic(const MicroscopicParams& mp) {
  mp.validate();
  if (mp.Omega > 0.2 * mp.Gamma_a)
    std::cerr << "warning: Omega = " << mp.Omega << " is not << Gamma_a = " << mp.Gamma_a
              << "; adiabatic elimination may be inaccurate\n";
  const double Gamma = 2.0 * mp.lambda_c * mp.lambda_c * mp.Omega * mp.Omega /
                       (mp.Gamma_a * mp.Gamma_a * mp.Gamma_a);
  const double n0 = mp.Gamma_a * mp.Gamma_a / (4.0 * mp.lambda_c * mp.lambda_c);
  return {Gamma, n0};
}

namespace {

// (1 + u)^-nu with fast paths for the two mechanisms the model singles out.
inline double sat_factor(double u, double nu) {
  const double base = 1.0 + u;
  if (nu == 2.0) return 1.0 / (base * base);
  if (nu == 1.0) return 1.0 / base;
  return std::pow(base, -nu);
}

}  // namespace

double saturated_rate(double amplitude, const ModelParams& p) {
  return p.Gamma * sat_factor(amplitude * amplitude / p.n0, p.nu);
}

double saturated_rate_deriv(double amplitude, const ModelParams& p) {
  const double u = amplitude * amplitude / p.n0;
  return -2.0 * p.nu * p.Gamma * amplitude / p.n0 * sat_factor(u, p.nu) / (1.0 + u);
}

double gain_rate(Complex a, const ModelParams& p) {
  return saturated_rate(std::abs(a), p) - p.gamma;
}

double loss_rate(Complex b, const ModelParams& p) {
  return -saturated_rate(std::abs(b), p) - p.gamma;
}

double quantum_diffusion(Complex a, const ModelParams& p) {
  if (!p.quantum_noise) return 0.0;
  // Three-level (nu = 2) form; the model does not specify D_q for other nu.
  const double base = 1.0 + std::norm(a) / p.n0;
  return 2.0 * p.Gamma / (base * base * base);
}

double diffusion_plus(Complex a, const ModelParams& p) {
  return quantum_diffusion(a, p) + 2.0 * p.gamma * p.Nth;
}

double diffusion_minus(const ModelParams& p) { return 2.0 * p.gamma * p.Nth; }

ModeState drift(const ModeState& s, const ModelParams& p) {
  const Complex ig{0.0, p.g};
  return {gain_rate(s.alpha, p) * s.alpha - ig * s.beta,
          loss_rate(s.beta, p) * s.beta - ig * s.alpha};
}

ModelParams load_params(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("params: expected a JSON object");
  static const char* known[] = {"g",   "Gamma",         "gamma",  "nu",    "n0",
                                "Nth", "quantum_noise", "gprime", "Ncells"};
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || (item.key() == k);
    if (!ok) throw std::invalid_argument("params: unknown key '" + item.key() + "'");
  }
  for (const char* k : {"Gamma", "gamma", "nu", "n0"})
    if (!j.contains(k)) throw std::invalid_argument(std::string("params: missing key '") + k + "'");

  ModelParams p;
  p.g = j.value("g", 1.0);
  p.Gamma = j.at("Gamma").get<double>();
  p.gamma = j.at("gamma").get<double>();
  p.nu = j.at("nu").get<double>();
  p.n0 = j.at("n0").get<double>();
  p.Nth = j.value("Nth", 0.0);
  p.quantum_noise = j.value("quantum_noise", false);
  p.gprime = j.value("gprime", 0.0);
  p.ncells = j.value("Ncells", 1);
  if (!(p.g > 0.0)) throw std::invalid_argument("params: g must be > 0");
  p = p.normalized();
  p.validate();
  if (p.quantum_noise && p.nu != 2.0)
    std::cerr << "warning: quantum_noise uses the nu = 2 diffusion profile, run has nu = " << p.nu
              << "\n";
  return p;
}

ModelParams load_params_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("params: cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  return load_params(j);
}

nlohmann::json params_to_json(const ModelParams& p) {
  return nlohmann::json{{"g", p.g},
                        {"Gamma", p.Gamma},
                        {"gamma", p.gamma},
                        {"nu", p.nu},
                        {"n0", p.n0},
                        {"Nth", p.Nth},
                        {"quantum_noise", p.quantum_noise},
                        {"gprime", p.gprime},
                        {"Ncells", p.ncells}};
}

}  // namespace ptsim
