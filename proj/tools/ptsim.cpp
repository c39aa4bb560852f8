// ptsim: steady states, phases, and noise-driven symmetry breaking of
// coupled gain-loss resonators.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ptsim/kramers.hpp"
#include "ptsim/model.hpp"
#include "ptsim/sde.hpp"
#include "ptsim/spectrum.hpp"
#include "ptsim/stability.hpp"
#include "ptsim/stats.hpp"
#include "ptsim/sweep.hpp"
#include "ptsim/version.hpp"

namespace {

using namespace ptsim;
namespace fs = std::filesystem;

struct GlobalOpts {
  std::string out_dir = ".";
  std::string format = "csv";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 0;
};

std::string out_path(const GlobalOpts& g, const std::string& name) {
  return (fs::path(g.out_dir) / name).string();
}

ModelParams base_params(double nu, double n0, double gamma, double nth_over_n0,
                        bool quantum = false) {
  ModelParams p;
  p.g = 1.0;
  p.Gamma = 1.0;
  p.gamma = gamma;
  p.nu = nu;
  p.n0 = n0;
  p.Nth = nth_over_n0 * n0;
  p.quantum_noise = quantum;
  return p;
}

void cmd_spectrum(const GlobalOpts& g, const std::string& grid_text, const std::string& out) {
  Table table;
  table.columns = {"Gamma_over_g", "re_lambda_plus", "im_lambda_plus",
                   "re_lambda_minus", "im_lambda_minus", "regime"};
  for (double ratio : parse_grid(grid_text)) {
    ModelParams p;
    p.Gamma = ratio;
    const SpectrumResult s = spectrum(p);
    table.rows.push_back({Cell{ratio}, Cell{s.lambda_plus.real()}, Cell{s.lambda_plus.imag()},
                          Cell{s.lambda_minus.real()}, Cell{s.lambda_minus.imag()},
                          Cell{std::string(to_string(s.regime))}});
  }
  const std::string path = out_path(g, out);
  emit(table, g.format, path);
  write_metadata(path, nullptr, nullptr, {{"command", "spectrum"}, {"grid", grid_text}});
  std::cout << path << "\n";
}

void cmd_phases(const GlobalOpts& g, double nu, double gamma, double n0,
                const std::string& grid_text, const std::string& out) {
  Table table;
  table.columns = {"Gamma_over_g", "label", "r_ss2", "z_ss2", "tau", "delta", "omega_osc"};
  for (double ratio : parse_grid(grid_text)) {
    ModelParams p = base_params(nu, n0, gamma, 0.0);
    p.Gamma = ratio;
    const PhaseInfo info = classify_phase(p);
    const FixedPointSet fps = find_fixed_points(p);

    const FixedPoint* rep = nullptr;
    if (info.label == Phase::I) {
      for (const auto& fp : fps.points)
        if (fp.state.r == 0.0 && fp.state.z == 0.0) rep = &fp;
    } else if (info.label == Phase::II || info.label == Phase::IIIw) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& fp : fps.points) {
        if (fp.state.r == 0.0) continue;
        const double asym = std::abs(fp.state.r - fp.state.z);
        if (asym < best) {
          best = asym;
          rep = &fp;
        }
      }
    } else {
      for (const auto& fp : fps.points) {
        const bool stable = fp.kind == FixedPointKind::stable_node ||
                            fp.kind == FixedPointKind::stable_spiral;
        if (stable && fp.state.r > 0.0 && (rep == nullptr || fp.state.r > rep->state.r))
          rep = &fp;
      }
    }
    std::vector<Cell> row{Cell{ratio}, Cell{std::string(to_string(info.label))},
                          Cell{info.r_ss2}, Cell{info.z_ss2}};
    if (rep != nullptr) {
      row.emplace_back(rep->tau);
      row.emplace_back(rep->delta);
    } else {
      row.emplace_back(std::string());
      row.emplace_back(std::string());
    }
    if (info.omega_osc > 0.0)
      row.emplace_back(info.omega_osc);
    else
      row.emplace_back(std::string());
    table.rows.push_back(std::move(row));
  }
  const std::string path = out_path(g, out);
  emit(table, g.format, path);
  write_metadata(path, nullptr, nullptr,
                 {{"command", "phases"}, {"nu", nu}, {"gamma", gamma}, {"grid", grid_text}});
  std::cout << path << "\n";
}

void cmd_boundaries(const GlobalOpts& g, const std::string& nu_grid, const std::string& out) {
  Table table;
  table.columns = {"nu", "I_to_II", "II_to_IIIw", "II_to_III"};
  for (double nu : parse_grid(nu_grid)) {
    const PhaseBoundaries b = phase_boundaries(nu);
    table.rows.push_back({Cell{nu}, Cell{b.i_to_ii},
                          b.ii_to_iiiw ? Cell{*b.ii_to_iiiw} : Cell{std::string()},
                          b.ii_to_iii ? Cell{*b.ii_to_iii} : Cell{std::string()}});
  }
  const std::string path = out_path(g, out);
  emit(table, g.format, path);
  write_metadata(path, nullptr, nullptr, {{"command", "boundaries"}, {"nu_grid", nu_grid}});
  std::cout << path << "\n";
}

void cmd_simulate(const GlobalOpts& g, const std::string& config_path, const std::string& out,
                  bool deterministic) {
  std::ifstream in(config_path);
  if (!in) throw std::invalid_argument("simulate: cannot open '" + config_path + "'");
  nlohmann::json doc;
  in >> doc;
  if (!doc.contains("params")) throw std::invalid_argument("simulate: config missing 'params'");
  const ModelParams p = load_params(doc.at("params"));
  IntegratorConfig c =
      doc.contains("integrator") ? load_integrator(doc.at("integrator")) : IntegratorConfig{};
  if (g.seed_set) c.seed = g.seed;

  const std::string path = out_path(g, out);
  if (deterministic) {
    GaussianRng rng(c.seed);
    const double ic = std::sqrt(std::max(p.Nth, 1.0) / 2.0);
    const ModeState s0{Complex{ic * rng.normal(), ic * rng.normal()},
                       Complex{ic * rng.normal(), ic * rng.normal()}};
    const Trajectory traj = run_deterministic(p, s0, (c.warmup + c.window) / p.gamma);
    Table table;
    table.columns = {"run", "t", "re_alpha", "im_alpha", "re_beta", "im_beta"};
    for (Eigen::Index i = 0; i < traj.t.size(); ++i)
      table.rows.push_back({Cell{0.0}, Cell{traj.t[i]}, Cell{traj.alpha[i].real()},
                            Cell{traj.alpha[i].imag()}, Cell{traj.beta[i].real()},
                            Cell{traj.beta[i].imag()}});
    emit(table, g.format, path);
  } else {
    const EnsembleSample sample = run_ensemble(p, c, g.workers);
    emit(samples_table(sample), g.format, path);
  }
  write_metadata(path, &p, &c,
                 {{"command", "simulate"}, {"deterministic", deterministic}});
  std::cout << path << "\n";
}

void cmd_analyze(const GlobalOpts& g, const std::string& in_path, const std::string& config_path,
                 const std::string& out) {
  const LoadedSamples samples = read_samples_csv(in_path);

  ModelParams p;
  const std::string meta_path = in_path + ".meta.json";
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw std::invalid_argument("analyze: cannot open '" + config_path + "'");
    nlohmann::json doc;
    in >> doc;
    p = load_params(doc.contains("params") ? doc.at("params") : doc);
  } else if (fs::exists(meta_path)) {
    std::ifstream in(meta_path);
    nlohmann::json doc;
    in >> doc;
    if (!doc.contains("params"))
      throw std::invalid_argument("analyze: sidecar has no params; pass --config");
    p = load_params(doc.at("params"));
  } else {
    throw std::invalid_argument("analyze: no sidecar metadata found; pass --config");
  }

  const SymmetryReport rep = symmetry_delta(samples.alphas, samples.betas, p);
  const RadialFit fa = analyze_radial(samples.alphas);
  const RadialFit fb = analyze_radial(samples.betas);

  nlohmann::ordered_json result{{"r0", fa.r0},        {"z0", fb.r0},
                                {"sigma_a", fa.sigma}, {"sigma_b", fb.sigma},
                                {"fluct_a", fa.fluct}, {"fluct_b", fb.fluct},
                                {"delta", rep.delta},  {"gamma_bar", rep.gamma_bar}};
  const std::string path = out_path(g, out);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("analyze: cannot write '" + path + "'");
  os << result.dump(1) << "\n";
  write_metadata(path, &p, nullptr, {{"command", "analyze"}, {"input", in_path}});
  std::cout << path << "\n";
}

void cmd_sweep_delta(const GlobalOpts& g, double nu, double n0, double nth_over_n0, double gamma,
                     bool quantum, const std::string& grid_text, const IntegratorConfig& c,
                     const std::string& out) {
  SweepSpec spec;
  spec.axis = SweepAxis::gamma_over_g;
  spec.grid = parse_grid(grid_text);
  spec.base = base_params(nu, n0, gamma, nth_over_n0, quantum);
  spec.pipeline = {"delta"};
  const Table table = run_sweep(spec, c, g.workers);
  const std::string path = out_path(g, out);
  emit(table, g.format, path);
  write_metadata(path, &spec.base, &c, {{"command", "sweep-delta"}, {"grid", grid_text}});
  std::cout << path << "\n";
}

void cmd_kramers(const GlobalOpts& g, double nu, double n0, double gamma,
                 const std::string& nth_grid, const std::string& out) {
  Table table;
  table.columns = {"Nth_over_n0", "predicted_Gamma_over_g"};
  for (double v : parse_grid(nth_grid)) {
    const ModelParams p = base_params(nu, n0, gamma, v);
    table.rows.push_back({Cell{v}, Cell{predict_transition(p)}});
  }
  const std::string path = out_path(g, out);
  emit(table, g.format, path);
  write_metadata(path, nullptr, nullptr,
                 {{"command", "kramers"}, {"nu", nu}, {"gamma", gamma}, {"nth_grid", nth_grid}});
  std::cout << path << "\n";
}

void cmd_potential(const GlobalOpts& g, double ratio, double nu, double n0, double nth_over_n0,
                   double gamma, const std::string& z_grid, const std::string& out) {
  ModelParams p = base_params(nu, n0, gamma, nth_over_n0);
  p.Gamma = ratio;
  Table table;
  table.columns = {"z", "U"};
  for (double z : parse_grid(z_grid)) table.rows.push_back({Cell{z}, Cell{potential(z, p)}});
  const std::string path = out_path(g, out);
  emit(table, g.format, path);
  write_metadata(path, &p, nullptr, {{"command", "potential"}, {"z_grid", z_grid}});
  std::cout << path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ptsim: steady-state dynamics of coupled gain-loss resonators"};
  app.set_version_flag("--version", std::string("ptsim ") + kVersion);
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--out-dir", g.out_dir, "Directory for output files")->capture_default_str();
  app.add_option("--format", g.format, "Output format: csv or json")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", g.seed, "Master RNG seed");
  app.add_option("--workers", g.workers, "Worker threads (0 = hardware)");

  std::function<void()> action;

  // spectrum
  auto* sc_spectrum = app.add_subcommand("spectrum", "Eigenvalues of the linear generator");
  {
    auto grid = std::make_shared<std::string>("0:2:81");
    auto out = std::make_shared<std::string>("spectrum.csv");
    sc_spectrum->add_option("--gamma-over-g", *grid, "Gamma/g grid")->capture_default_str();
    sc_spectrum->add_option("--out", *out, "Output file name")->capture_default_str();
    sc_spectrum->callback([&, grid, out] { action = [&, grid, out] { cmd_spectrum(g, *grid, *out); }; });
  }

  // phases
  auto* sc_phases = app.add_subcommand("phases", "Deterministic phase classification");
  {
    auto nu = std::make_shared<double>(2.0);
    auto gamma = std::make_shared<double>(1e-3);
    auto n0 = std::make_shared<double>(1.0);
    auto grid = std::make_shared<std::string>("0.2:12:60");
    auto out = std::make_shared<std::string>("phases.csv");
    sc_phases->add_option("--nu", *nu, "Saturation exponent")->capture_default_str();
    sc_phases->add_option("--gamma", *gamma, "gamma/g")->capture_default_str();
    sc_phases->add_option("--n0", *n0, "Saturation occupation")->capture_default_str();
    sc_phases->add_option("--gamma-over-g", *grid, "Gamma/g grid")->capture_default_str();
    sc_phases->add_option("--out", *out, "Output file name")->capture_default_str();
    sc_phases->callback([&, nu, gamma, n0, grid, out] {
      action = [&, nu, gamma, n0, grid, out] { cmd_phases(g, *nu, *gamma, *n0, *grid, *out); };
    });
  }

  // boundaries
  auto* sc_bound = app.add_subcommand("boundaries", "Closed-form phase boundaries vs nu");
  {
    auto grid = std::make_shared<std::string>("1:2:41");
    auto out = std::make_shared<std::string>("boundaries.csv");
    sc_bound->add_option("--nu-grid", *grid, "nu grid")->capture_default_str();
    sc_bound->add_option("--out", *out, "Output file name")->capture_default_str();
    sc_bound->callback([&, grid, out] { action = [&, grid, out] { cmd_boundaries(g, *grid, *out); }; });
  }

  // simulate
  auto* sc_sim = app.add_subcommand("simulate", "Integrate the stochastic model");
  {
    auto config = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>("samples.csv");
    auto det = std::make_shared<bool>(false);
    sc_sim->add_option("--config", *config, "JSON run configuration")->required();
    sc_sim->add_option("--out", *out, "Output file name")->capture_default_str();
    sc_sim->add_flag("--deterministic", *det, "Noiseless trajectory instead of an ensemble");
    sc_sim->callback([&, config, out, det] {
      action = [&, config, out, det] { cmd_simulate(g, *config, *out, *det); };
    });
  }

  // analyze
  auto* sc_an = app.add_subcommand("analyze", "Fit and summarize a sample file");
  {
    auto in = std::make_shared<std::string>();
    auto config = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>("analysis.json");
    sc_an->add_option("--in", *in, "Samples CSV produced by simulate")->required();
    sc_an->add_option("--config", *config, "Params JSON (default: <in>.meta.json)");
    sc_an->add_option("--out", *out, "Output file name")->capture_default_str();
    sc_an->callback([&, in, config, out] {
      action = [&, in, config, out] { cmd_analyze(g, *in, *config, *out); };
    });
  }

  // sweep-delta
  auto* sc_sd = app.add_subcommand("sweep-delta", "Delta(Gamma/g) from simulated ensembles");
  {
    auto nu = std::make_shared<double>(2.0);
    auto n0 = std::make_shared<double>(1.0);
    auto nth = std::make_shared<double>(10.0);
    auto gamma = std::make_shared<double>(1e-3);
    auto quantum = std::make_shared<bool>(false);
    auto grid = std::make_shared<std::string>("log:1:16:12");
    auto out = std::make_shared<std::string>("sweep_delta.csv");
    auto cfg = std::make_shared<IntegratorConfig>();
    sc_sd->add_option("--nu", *nu)->capture_default_str();
    sc_sd->add_option("--n0", *n0)->capture_default_str();
    sc_sd->add_option("--nth-over-n0", *nth)->capture_default_str();
    sc_sd->add_option("--gamma", *gamma, "gamma/g")->capture_default_str();
    sc_sd->add_flag("--quantum", *quantum, "Enable the quantum diffusion term");
    sc_sd->add_option("--gamma-over-g", *grid, "Gamma/g grid")->capture_default_str();
    sc_sd->add_option("--runs", cfg->n_runs, "Trajectories per point")->capture_default_str();
    sc_sd->add_option("--samples", cfg->samples_per_run, "Samples per run")->capture_default_str();
    sc_sd->add_option("--warmup", cfg->warmup, "Warmup in units of 1/gamma")->capture_default_str();
    sc_sd->add_option("--window", cfg->window, "Window in units of 1/gamma")->capture_default_str();
    sc_sd->add_option("--dt", cfg->dt, "Time step (0 = auto)")->capture_default_str();
    sc_sd->add_option("--out", *out, "Output file name")->capture_default_str();
    sc_sd->callback([&, nu, n0, nth, gamma, quantum, grid, out, cfg] {
      action = [&, nu, n0, nth, gamma, quantum, grid, out, cfg] {
        IntegratorConfig c = *cfg;
        if (g.seed_set) c.seed = g.seed;
        cmd_sweep_delta(g, *nu, *n0, *nth, *gamma, *quantum, *grid, c, *out);
      };
    });
  }

  // kramers
  auto* sc_kr = app.add_subcommand("kramers", "Thermal-activation transition prediction");
  {
    auto nu = std::make_shared<double>(2.0);
    auto n0 = std::make_shared<double>(1.0);
    auto gamma = std::make_shared<double>(1e-3);
    auto grid = std::make_shared<std::string>("log:1:100:21");
    auto out = std::make_shared<std::string>("kramers.csv");
    sc_kr->add_option("--nu", *nu)->capture_default_str();
    sc_kr->add_option("--n0", *n0)->capture_default_str();
    sc_kr->add_option("--gamma", *gamma, "gamma/g")->capture_default_str();
    sc_kr->add_option("--nth-over-n0", *grid, "Nth/n0 grid")->capture_default_str();
    sc_kr->add_option("--out", *out, "Output file name")->capture_default_str();
    sc_kr->callback([&, nu, n0, gamma, grid, out] {
      action = [&, nu, n0, gamma, grid, out] { cmd_kramers(g, *nu, *n0, *gamma, *grid, *out); };
    });
  }

  // potential
  auto* sc_pot = app.add_subcommand("potential", "Effective loss-mode potential U(z)");
  {
    auto ratio = std::make_shared<double>(12.0);
    auto nu = std::make_shared<double>(2.0);
    auto n0 = std::make_shared<double>(1.0);
    auto nth = std::make_shared<double>(10.0);
    auto gamma = std::make_shared<double>(1e-3);
    auto zg = std::make_shared<std::string>("log:0.01:10:400");
    auto out = std::make_shared<std::string>("potential.csv");
    sc_pot->add_option("--gamma-over-g", *ratio, "Gamma/g")->capture_default_str();
    sc_pot->add_option("--nu", *nu)->capture_default_str();
    sc_pot->add_option("--n0", *n0)->capture_default_str();
    sc_pot->add_option("--nth-over-n0", *nth)->capture_default_str();
    sc_pot->add_option("--gamma", *gamma, "gamma/g")->capture_default_str();
    sc_pot->add_option("--z-grid", *zg, "z grid")->capture_default_str();
    sc_pot->add_option("--out", *out, "Output file name")->capture_default_str();
    sc_pot->callback([&, ratio, nu, n0, nth, gamma, zg, out] {
      action = [&, ratio, nu, n0, nth, gamma, zg, out] {
        cmd_potential(g, *ratio, *nu, *n0, *nth, *gamma, *zg, *out);
      };
    });
  }

  // recipe
  auto* sc_rec = app.add_subcommand("recipe", "Run a figure-reproduction recipe");
  {
    auto name = std::make_shared<std::string>();
    auto dir = std::make_shared<std::string>("recipes");
    auto runs = std::make_shared<int>(0);
    auto samples = std::make_shared<int>(0);
    auto window = std::make_shared<double>(0.0);
    sc_rec->add_option("name", *name, "Recipe name (e.g. figure-3b) or path")->required();
    sc_rec->add_option("--recipe-dir", *dir, "Recipe search directory")->capture_default_str();
    sc_rec->add_option("--runs", *runs, "Override n_runs (0 = recipe value)");
    sc_rec->add_option("--samples", *samples, "Override samples_per_run (0 = recipe value)");
    sc_rec->add_option("--window", *window, "Override window (0 = recipe value)");
    sc_rec->callback([&, name, dir, runs, samples, window] {
      action = [&, name, dir, runs, samples, window] {
        RecipeOverrides ov;
        if (g.seed_set) ov.seed = g.seed;
        if (*runs > 0) ov.n_runs = *runs;
        if (*samples > 0) ov.samples_per_run = *samples;
        if (*window > 0.0) ov.window = *window;
        const RecipeResult res =
            run_recipe(resolve_recipe_path(*name, *dir), g.out_dir, g.format, ov, g.workers);
        for (const auto& f : res.files) std::cout << f << "\n";
      };
    });
  }

  try {
    app.parse(argc, argv);
    g.seed_set = seed_opt->count() > 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    action();
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
