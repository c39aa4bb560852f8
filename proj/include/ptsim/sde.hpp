#pragma once

#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "ptsim/model.hpp"

namespace ptsim {

/// Euler-Maruyama protocol parameters. Time step in units of 1/g; warmup and
/// sampling window in units of the relaxation time 1/gamma.
struct IntegratorConfig {
  double dt = 0.0;          ///< 0 selects auto_dt(params)
  double warmup = 5.0;      ///< equilibration before sampling, units of 1/gamma
  double window = 45.0;     ///< sampling period, units of 1/gamma
  int samples_per_run = 4000;
  int n_runs = 80;
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;

  void validate() const;
};

IntegratorConfig load_integrator(const nlohmann::json& j);
nlohmann::json integrator_to_json(const IntegratorConfig& c);

/// Default step bounding both the drift stiffness and the diffusion per step:
/// 1e-2 / max(g, Gamma, gamma (1 + Nth)).
double auto_dt(const ModelParams& p);

/// SplitMix64 stream evaluated at `index`; used to derive independent
/// sub-seeds (per run, per sweep point) from one master seed.
std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t index);

/// Deterministic Gaussian source: std::mt19937_64 (fully specified by the
/// standard) plus an explicit Marsaglia polar transform, so streams are
/// bit-identical across platforms; std::normal_distribution is not.
class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : eng_(seed) {}

  double uniform() {  // in [0, 1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  /// Complex Wiener increment dW = (dW1 + i dW2)/sqrt(2), dW1,2 ~ N(0, dt).
  Complex wiener(double dt) {
    const double s = std::sqrt(0.5 * dt);
    const double re = s * normal();
    const double im = s * normal();
    return {re, im};
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Thrown when a trajectory leaves the finite domain; carries the context the
/// integrator had at that point.
struct IntegrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One Euler-Maruyama update of the two-mode system with caller-supplied
/// complex Wiener increments (variance dt each). With zero increments this is
/// a deterministic Euler step on the drift. Throws IntegrationError when the
/// result is non-finite.
ModeState step(const ModeState& s, const ModelParams& p, double dt, Complex dW_gain,
               Complex dW_loss);

/// Amplitudes of an N-cell alternating gain-loss ring.
struct ArrayState {
  Eigen::ArrayXcd alphas, betas;  ///< size = ncells
};

/// Euler-Maruyama update of the ring (periodic boundaries); increments are
/// per cell. Reduces exactly to `step` for one cell without inter-cell
/// coupling.
void step_array(ArrayState& s, const ModelParams& p, double dt, const Eigen::ArrayXcd& dW_gain,
                const Eigen::ArrayXcd& dW_loss);

/// Steady-state sample set collected with the standard protocol:
/// per run, random initial conditions (complex Gaussian, variance
/// max(Nth, 1)) are evolved for `warmup`/gamma, then samples_per_run states
/// are recorded at uniformly random times in the sampling window. Reruns
/// with identical inputs are bit-identical; runs use SplitMix64-derived
/// sub-seeds and may execute concurrently without changing the result.
///
/// Per-run draw order from the run's own stream: initial conditions (per
/// cell: Re a, Im a, Re b, Im b), then the sample times, then the noise.
struct EnsembleSample {
  Eigen::ArrayXXcd alphas;  ///< rows: samples_per_run * n_runs, cols: cells
  Eigen::ArrayXXcd betas;
  Eigen::ArrayXd times;     ///< sample time of each row (run-local clock)
  ModelParams params;
  IntegratorConfig config;
};

EnsembleSample run_ensemble(const ModelParams& p, const IntegratorConfig& c, int workers = 0);

/// Noiseless relaxation trajectory (classic RK4 on the drift).
struct Trajectory {
  Eigen::ArrayXd t;
  Eigen::ArrayXcd alpha;    ///< recorded amplitudes
  Eigen::ArrayXcd beta;
  Eigen::ArrayXd occ_gain;  ///< |alpha|^2
  Eigen::ArrayXd occ_loss;  ///< |beta|^2
  ModeState final_state;
};

Trajectory run_deterministic(const ModelParams& p, const ModeState& s0, double t_end,
                             double dt = 0.0, int max_points = 20000);

/// Tail statistics of an occupation trace; omega is estimated from upward
/// mean crossings (0 when fewer than two full cycles are present).
struct OscillationStats {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double amplitude = 0.0;  ///< max - min
  double omega = 0.0;
  int cycles = 0;
};

OscillationStats oscillation_stats(const Trajectory& traj, double tail_fraction = 0.5);

}  // namespace ptsim
