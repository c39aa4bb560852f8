#include "ptsim/sde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

namespace ptsim {

void IntegratorConfig::validate() const {
  if (!(dt >= 0.0)) throw std::invalid_argument("integrator: dt must be >= 0");
  if (!(warmup > 0.0)) throw std::invalid_argument("integrator: warmup must be > 0");
  if (!(window > 0.0)) throw std::invalid_argument("integrator: window must be > 0");
  if (samples_per_run < 1) throw std::invalid_argument("integrator: samples_per_run must be >= 1");
  if (n_runs < 1) throw std::invalid_argument("integrator: n_runs must be >= 1");
}

IntegratorConfig load_integrator(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("integrator: expected a JSON object");
  static const char* known[] = {"dt", "warmup", "window", "samples_per_run", "n_runs", "seed"};
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || (item.key() == k);
    if (!ok) throw std::invalid_argument("integrator: unknown key '" + item.key() + "'");
  }
  IntegratorConfig c;
  c.dt = j.value("dt", 0.0);
  c.warmup = j.value("warmup", c.warmup);
  c.window = j.value("window", c.window);
  c.samples_per_run = j.value("samples_per_run", c.samples_per_run);
  c.n_runs = j.value("n_runs", c.n_runs);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

nlohmann::json integrator_to_json(const IntegratorConfig& c) {
  return nlohmann::json{{"dt", c.dt},
                        {"warmup", c.warmup},
                        {"window", c.window},
                        {"samples_per_run", c.samples_per_run},
                        {"n_runs", c.n_runs},
                        {"seed", c.seed}};
}

double auto_dt(const ModelParams& p) {
  return 1e-2 / std::max({p.g, p.Gamma, p.gamma * (1.0 + p.Nth)});
}

std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + (index + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

inline Complex mul_i(Complex v) { return {-v.imag(), v.real()}; }

inline double sat_factor(double u, double nu) {
  const double base = 1.0 + u;
  if (nu == 2.0) return 1.0 / (base * base);
  if (nu == 1.0) return 1.0 / base;
  return std::pow(base, -nu);
}

// Single-cell Euler-Maruyama update shared by every integration path, so the
// two-mode and array code produce bit-identical states for the same stream.
inline void em_cell(const ModelParams& p, double dt, Complex a, Complex b, Complex b_left,
                    Complex a_right, Complex dW_gain, Complex dW_loss, Complex& a_out,
                    Complex& b_out) {
  const double occ_a = std::norm(a);
  const double occ_b = std::norm(b);
  const double sat_a = p.Gamma * sat_factor(occ_a / p.n0, p.nu);
  const double sat_b = p.Gamma * sat_factor(occ_b / p.n0, p.nu);
  Complex coupled_a = p.g * b;
  Complex coupled_b = p.g * a;
  if (p.gprime != 0.0) {
    coupled_a += p.gprime * b_left;
    coupled_b += p.gprime * a_right;
  }
  const Complex da = (sat_a - p.gamma) * a - mul_i(coupled_a);
  const Complex db = (-sat_b - p.gamma) * b - mul_i(coupled_b);
  double d_plus = 2.0 * p.gamma * p.Nth;
  if (p.quantum_noise) {
    const double base = 1.0 + occ_a / p.n0;
    d_plus += 2.0 * p.Gamma / (base * base * base);
  }
  const double d_minus = 2.0 * p.gamma * p.Nth;
  a_out = a + da * dt + std::sqrt(d_plus) * dW_gain;
  b_out = b + db * dt + std::sqrt(d_minus) * dW_loss;
}

[[noreturn]] void throw_nonfinite(const ModelParams& p, double t, Complex a, Complex b) {
  std::ostringstream os;
  os << "non-finite amplitude at t = " << t << ": alpha = (" << a.real() << ", " << a.imag()
     << "), beta = (" << b.real() << ", " << b.imag() << ") [Gamma/g = " << p.Gamma / p.g
     << ", gamma/g = " << p.gamma / p.g << ", nu = " << p.nu << ", n0 = " << p.n0
     << ", Nth = " << p.Nth << ", Ncells = " << p.ncells << "]";
  throw IntegrationError(os.str());
}

inline void check_finite(const ModelParams& p, double t, Complex a, Complex b) {
  if (!(std::norm(a) + std::norm(b) < 1e200)) throw_nonfinite(p, t, a, b);
}

// One full trajectory of the sampling protocol; writes its samples into the
// preassigned rows of the ensemble arrays.
void integrate_run(const ModelParams& p, const IntegratorConfig& c, double dt, int run_index,
                   Eigen::ArrayXXcd& alphas, Eigen::ArrayXXcd& betas, Eigen::ArrayXd& times_out) {
  const int n = p.ncells;
  GaussianRng rng(splitmix64_at(c.seed, static_cast<std::uint64_t>(run_index)));

  // Initial conditions: complex Gaussian of variance max(Nth, 1) per mode.
  const double ic_scale = std::sqrt(std::max(p.Nth, 1.0) / 2.0);
  std::vector<Complex> a(n), b(n), a_next(n), b_next(n);
  for (int i = 0; i < n; ++i) {
    a[i] = Complex{ic_scale * rng.normal(), ic_scale * rng.normal()};
    b[i] = Complex{ic_scale * rng.normal(), ic_scale * rng.normal()};
  }

  const double t_warm = c.warmup / p.gamma;
  const double t_end = t_warm + c.window / p.gamma;
  std::vector<double> times(c.samples_per_run);
  for (double& t : times) t = t_warm + rng.uniform() * (c.window / p.gamma);
  std::sort(times.begin(), times.end());

  const bool gain_noise = p.Nth > 0.0 || p.quantum_noise;
  const bool loss_noise = p.Nth > 0.0;
  const auto n_steps = static_cast<std::int64_t>(std::ceil(t_end / dt));
  const Complex zero{0.0, 0.0};

  int next_sample = 0;
  const std::int64_t row0 =
      static_cast<std::int64_t>(run_index) * static_cast<std::int64_t>(c.samples_per_run);
  for (std::int64_t i = 0; i < n_steps && next_sample < c.samples_per_run; ++i) {
    const double t = static_cast<double>(i) * dt;
    if (n == 1) {
      check_finite(p, t, a[0], b[0]);
      const Complex dWa = gain_noise ? rng.wiener(dt) : zero;
      const Complex dWb = loss_noise ? rng.wiener(dt) : zero;
      em_cell(p, dt, a[0], b[0], zero, zero, dWa, dWb, a_next[0], b_next[0]);
      std::swap(a[0], a_next[0]);
      std::swap(b[0], b_next[0]);
    } else {
      for (int cell = 0; cell < n; ++cell) {
        check_finite(p, t, a[cell], b[cell]);
        const Complex b_left = b[(cell + n - 1) % n];
        const Complex a_right = a[(cell + 1) % n];
        const Complex dWa = gain_noise ? rng.wiener(dt) : zero;
        const Complex dWb = loss_noise ? rng.wiener(dt) : zero;
        em_cell(p, dt, a[cell], b[cell], b_left, a_right, dWa, dWb, a_next[cell], b_next[cell]);
      }
      a.swap(a_next);
      b.swap(b_next);
    }
    const double t_new = static_cast<double>(i + 1) * dt;
    while (next_sample < c.samples_per_run && times[next_sample] <= t_new) {
      const std::int64_t row = row0 + next_sample;
      for (int cell = 0; cell < n; ++cell) {
        alphas(row, cell) = a[cell];
        betas(row, cell) = b[cell];
      }
      times_out[row] = t_new;
      ++next_sample;
    }
  }
  for (int cell = 0; cell < n; ++cell) check_finite(p, t_end, a[cell], b[cell]);
}

}  // namespace

ModeState step(const ModeState& s, const ModelParams& p, double dt, Complex dW_gain,
               Complex dW_loss) {
  ModeState out;
  em_cell(p, dt, s.alpha, s.beta, Complex{0.0, 0.0}, Complex{0.0, 0.0}, dW_gain, dW_loss,
          out.alpha, out.beta);
  check_finite(p, 0.0, out.alpha, out.beta);
  return out;
}

void step_array(ArrayState& s, const ModelParams& p, double dt, const Eigen::ArrayXcd& dW_gain,
                const Eigen::ArrayXcd& dW_loss) {
  const auto n = s.alphas.size();
  if (n != p.ncells || s.betas.size() != n || dW_gain.size() != n || dW_loss.size() != n)
    throw std::invalid_argument("step_array: size mismatch with Ncells");
  const Eigen::ArrayXcd a = s.alphas;
  const Eigen::ArrayXcd b = s.betas;
  for (Eigen::Index cell = 0; cell < n; ++cell) {
    const Complex b_left = b[(cell + n - 1) % n];
    const Complex a_right = a[(cell + 1) % n];
    em_cell(p, dt, a[cell], b[cell], b_left, a_right, dW_gain[cell], dW_loss[cell],
            s.alphas[cell], s.betas[cell]);
    check_finite(p, 0.0, s.alphas[cell], s.betas[cell]);
  }
}

EnsembleSample run_ensemble(const ModelParams& p, const IntegratorConfig& c, int workers) {
  p.validate();
  c.validate();
  const double dt = c.dt > 0.0 ? c.dt : auto_dt(p);

  EnsembleSample out;
  out.params = p;
  out.config = c;
  out.config.dt = dt;
  const std::int64_t rows =
      static_cast<std::int64_t>(c.n_runs) * static_cast<std::int64_t>(c.samples_per_run);
  out.alphas.resize(rows, p.ncells);
  out.betas.resize(rows, p.ncells);
  out.times.resize(rows);

  int n_workers = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  n_workers = std::max(1, std::min(n_workers, c.n_runs));

  std::vector<std::string> errors(c.n_runs);
  auto work = [&](int first) {
    for (int run = first; run < c.n_runs; run += n_workers) {
      try {
        integrate_run(p, c, dt, run, out.alphas, out.betas, out.times);
      } catch (const std::exception& e) {
        errors[run] = e.what();
      }
    }
  };
  if (n_workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  for (int run = 0; run < c.n_runs; ++run)
    if (!errors[run].empty())
      throw IntegrationError("run " + std::to_string(run) + ": " + errors[run]);
  return out;
}

Trajectory run_deterministic(const ModelParams& p, const ModeState& s0, double t_end, double dt,
                             int max_points) {
  p.validate();
  if (!(t_end > 0.0)) throw std::invalid_argument("run_deterministic: t_end must be > 0");
  if (dt <= 0.0) dt = 1e-2 / std::max({p.g, p.Gamma, p.gamma});
  const auto n_steps = static_cast<std::int64_t>(std::ceil(t_end / dt));
  const std::int64_t stride = std::max<std::int64_t>(1, n_steps / std::max(1, max_points - 2));

  std::vector<double> ts, oa, ob;
  std::vector<Complex> as, bs;
  ts.reserve(static_cast<std::size_t>(n_steps / stride) + 2);
  oa.reserve(ts.capacity());
  ob.reserve(ts.capacity());
  as.reserve(ts.capacity());
  bs.reserve(ts.capacity());

  ModeState s = s0;
  auto record = [&](double t) {
    ts.push_back(t);
    as.push_back(s.alpha);
    bs.push_back(s.beta);
    oa.push_back(std::norm(s.alpha));
    ob.push_back(std::norm(s.beta));
  };
  record(0.0);
  for (std::int64_t i = 0; i < n_steps; ++i) {
    const double t = static_cast<double>(i) * dt;
    check_finite(p, t, s.alpha, s.beta);
    const ModeState k1 = drift(s, p);
    const ModeState s2{s.alpha + 0.5 * dt * k1.alpha, s.beta + 0.5 * dt * k1.beta};
    const ModeState k2 = drift(s2, p);
    const ModeState s3{s.alpha + 0.5 * dt * k2.alpha, s.beta + 0.5 * dt * k2.beta};
    const ModeState k3 = drift(s3, p);
    const ModeState s4{s.alpha + dt * k3.alpha, s.beta + dt * k3.beta};
    const ModeState k4 = drift(s4, p);
    s.alpha += dt / 6.0 * (k1.alpha + 2.0 * k2.alpha + 2.0 * k3.alpha + k4.alpha);
    s.beta += dt / 6.0 * (k1.beta + 2.0 * k2.beta + 2.0 * k3.beta + k4.beta);
    if ((i + 1) % stride == 0 || i + 1 == n_steps) record(static_cast<double>(i + 1) * dt);
  }
  check_finite(p, t_end, s.alpha, s.beta);

  Trajectory traj;
  traj.t = Eigen::Map<Eigen::ArrayXd>(ts.data(), static_cast<Eigen::Index>(ts.size()));
  traj.alpha = Eigen::Map<Eigen::ArrayXcd>(as.data(), static_cast<Eigen::Index>(as.size()));
  traj.beta = Eigen::Map<Eigen::ArrayXcd>(bs.data(), static_cast<Eigen::Index>(bs.size()));
  traj.occ_gain = Eigen::Map<Eigen::ArrayXd>(oa.data(), static_cast<Eigen::Index>(oa.size()));
  traj.occ_loss = Eigen::Map<Eigen::ArrayXd>(ob.data(), static_cast<Eigen::Index>(ob.size()));
  traj.final_state = s;
  return traj;
}

OscillationStats oscillation_stats(const Trajectory& traj, double tail_fraction) {
  const Eigen::Index n = traj.t.size();
  if (n < 4) throw std::invalid_argument("oscillation_stats: trajectory too short");
  tail_fraction = std::clamp(tail_fraction, 0.01, 1.0);
  const Eigen::Index i0 = n - std::max<Eigen::Index>(3, static_cast<Eigen::Index>(
                                                            std::floor(tail_fraction * n)));

  OscillationStats st;
  const auto tail = traj.occ_gain.segment(i0, n - i0);
  st.mean = tail.mean();
  st.min = tail.minCoeff();
  st.max = tail.maxCoeff();
  st.amplitude = st.max - st.min;

  std::vector<double> crossings;
  for (Eigen::Index i = i0 + 1; i < n; ++i) {
    const double y0 = traj.occ_gain[i - 1] - st.mean;
    const double y1 = traj.occ_gain[i] - st.mean;
    if (y0 < 0.0 && y1 >= 0.0) {
      const double frac = y1 == y0 ? 0.0 : -y0 / (y1 - y0);
      crossings.push_back(traj.t[i - 1] + frac * (traj.t[i] - traj.t[i - 1]));
    }
  }
  if (crossings.size() >= 2) {
    st.cycles = static_cast<int>(crossings.size()) - 1;
    st.omega = 2.0 * M_PI * st.cycles / (crossings.back() - crossings.front());
  }
  return st;
}

}  // namespace ptsim
