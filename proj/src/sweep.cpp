#include "ptsim/sweep.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ptsim/kramers.hpp"
#include "ptsim/stability.hpp"
#include "ptsim/version.hpp"

namespace ptsim {

namespace fs = std::filesystem;

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string cell_text(const Cell& cell) {
  if (std::holds_alternative<double>(cell)) return format_number(std::get<double>(cell));
  return std::get<std::string>(cell);
}

std::uint64_t point_seed(std::uint64_t master, double value) {
  return splitmix64_at(master, std::bit_cast<std::uint64_t>(value));
}

std::uint64_t point_seed2(std::uint64_t master, double a, double b) {
  return point_seed(point_seed(master, a), b);
}

Eigen::Map<const Eigen::ArrayXcd> flat(const Eigen::ArrayXXcd& m) {
  return {m.data(), m.size()};
}

std::vector<double> geomspace(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > 0.0)) throw std::invalid_argument("geometric grid needs positive ends");
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double step = std::log(hi / lo) / (n - 1);
  for (int i = 0; i < n; ++i) out[i] = lo * std::exp(step * i);
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace

std::string render_csv(const Table& table) {
  std::ostringstream os;
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    os << (i ? "," : "") << csv_escape(table.columns[i]);
  os << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw std::invalid_argument("render_csv: row width mismatch");
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_escape(cell_text(row[i]));
    os << '\n';
  }
  return os.str();
}

std::string render_json(const Table& table) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw std::invalid_argument("render_json: row width mismatch");
    nlohmann::ordered_json obj;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (std::holds_alternative<double>(row[i]))
        obj[table.columns[i]] = std::get<double>(row[i]);
      else
        obj[table.columns[i]] = std::get<std::string>(row[i]);
    }
    rows.push_back(std::move(obj));
  }
  return rows.dump(1) + "\n";
}

void emit(const Table& table, const std::string& format, const std::string& path) {
  std::string payload;
  if (format == "csv")
    payload = render_csv(table);
  else if (format == "json")
    payload = render_json(table);
  else
    throw std::invalid_argument("emit: unknown format '" + format + "'");
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit: cannot write '" + path + "'");
  out << payload;
}

Table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open '" + path + "'");
  Table table;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cur += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    fields.push_back(std::move(cur));
    if (header) {
      table.columns = std::move(fields);
      header = false;
    } else {
      std::vector<Cell> row;
      row.reserve(fields.size());
      for (auto& f : fields) row.emplace_back(std::move(f));
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

void write_metadata(const std::string& data_path, const ModelParams* params,
                    const IntegratorConfig* config, const nlohmann::json& extra) {
  nlohmann::ordered_json meta;
  meta["tool"] = "ptsim";
  meta["version"] = kVersion;
  if (params != nullptr) meta["params"] = params_to_json(*params);
  if (config != nullptr) meta["integrator"] = integrator_to_json(*config);
  if (extra.is_object())
    for (const auto& item : extra.items()) meta[item.key()] = item.value();
  std::ofstream out(data_path + ".meta.json", std::ios::binary);
  if (!out) throw std::runtime_error("write_metadata: cannot write '" + data_path + ".meta.json'");
  out << meta.dump(1) << "\n";
}

std::vector<double> parse_grid(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("grid: empty specification");
  if (text.find(',') != std::string::npos) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
  }
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  const bool log = !parts.empty() && parts[0] == "log";
  if (log) parts.erase(parts.begin());
  if (parts.size() == 1) return {std::stod(parts[0])};
  if (parts.size() != 3)
    throw std::invalid_argument("grid: expected 'start:stop:count', 'log:start:stop:count', or a comma list");
  const double start = std::stod(parts[0]);
  const double stop = std::stod(parts[1]);
  const int count = std::stoi(parts[2]);
  if (count < 1) throw std::invalid_argument("grid: count must be >= 1");
  if (log) return geomspace(start, stop, count);
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i)
    out[i] = count == 1 ? start : start + (stop - start) * i / (count - 1);
  return out;
}

SweepAxis axis_from_string(const std::string& name) {
  if (name == "Gamma_over_g") return SweepAxis::gamma_over_g;
  if (name == "Nth_over_n0") return SweepAxis::nth_over_n0;
  if (name == "gprime_over_g") return SweepAxis::gprime_over_g;
  if (name == "nu") return SweepAxis::nu;
  throw std::invalid_argument("axis: unknown name '" + name + "'");
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::gamma_over_g: return "Gamma_over_g";
    case SweepAxis::nth_over_n0: return "Nth_over_n0";
    case SweepAxis::gprime_over_g: return "gprime_over_g";
    case SweepAxis::nu: return "nu";
  }
  return "?";
}

ModelParams apply_axis(const ModelParams& base, SweepAxis axis, double value) {
  ModelParams p = base;
  switch (axis) {
    case SweepAxis::gamma_over_g: p.Gamma = value * p.g; break;
    case SweepAxis::nth_over_n0: p.Nth = value * p.n0; break;
    case SweepAxis::gprime_over_g: p.gprime = value * p.g; break;
    case SweepAxis::nu: p.nu = value; break;
  }
  return p;
}

void SweepSpec::validate() const {
  if (grid.empty()) throw std::invalid_argument("sweep: empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const bool up = grid[1] > grid[0];
    if (up ? !(grid[i] > grid[i - 1]) : !(grid[i] < grid[i - 1]))
      throw std::invalid_argument("sweep: grid must be strictly monotone");
  }
  for (const auto& stage : pipeline)
    if (stage != "deterministic" && stage != "stats" && stage != "delta")
      throw std::invalid_argument("sweep: unknown pipeline stage '" + stage + "'");
  if (pipeline.empty()) throw std::invalid_argument("sweep: empty pipeline");
  base.validate();
}

PointStats ensemble_stats(const EnsembleSample& sample) {
  PointStats st;
  const auto a = flat(sample.alphas);
  const auto b = flat(sample.betas);
  st.symmetry = symmetry_delta(a, b, sample.params);
  st.fit_gain = analyze_radial(a);
  st.fit_loss = analyze_radial(b);
  return st;
}

namespace {

struct DeterministicPoint {
  double occ_gain, occ_loss;
  double gain_min, gain_max, loss_min, loss_max;
  double omega;
};

DeterministicPoint deterministic_point(const ModelParams& p, const IntegratorConfig& c,
                                       std::uint64_t seed) {
  GaussianRng rng(seed);
  const double ic = std::sqrt(std::max(p.Nth, 1.0) / 2.0);
  const ModeState s0{Complex{ic * rng.normal(), ic * rng.normal()},
                     Complex{ic * rng.normal(), ic * rng.normal()}};
  const double t_end = (c.warmup + c.window) / p.gamma;
  const Trajectory traj = run_deterministic(p, s0, t_end);
  const double tail = c.window / (c.warmup + c.window);
  const OscillationStats st = oscillation_stats(traj, tail);
  const Eigen::Index tail_n = std::max<Eigen::Index>(
      3, static_cast<Eigen::Index>(static_cast<double>(traj.occ_loss.size()) * tail));
  const auto loss_tail = traj.occ_loss.tail(tail_n);

  DeterministicPoint out{};
  out.occ_gain = st.mean;
  out.gain_min = st.min;
  out.gain_max = st.max;
  out.occ_loss = loss_tail.mean();
  out.loss_min = loss_tail.minCoeff();
  out.loss_max = loss_tail.maxCoeff();
  const bool oscillating = st.cycles >= 3 && st.amplitude > 1e-2 * st.mean + 1e-9 * p.n0;
  out.omega = oscillating ? st.omega : 0.0;
  return out;
}

}  // namespace

Table run_sweep(const SweepSpec& spec, const IntegratorConfig& c, int workers) {
  spec.validate();
  c.validate();
  const bool det = std::count(spec.pipeline.begin(), spec.pipeline.end(), "deterministic") > 0;
  const bool stats = std::count(spec.pipeline.begin(), spec.pipeline.end(), "stats") > 0;
  const bool delta = std::count(spec.pipeline.begin(), spec.pipeline.end(), "delta") > 0;

  Table table;
  table.columns.push_back(to_string(spec.axis));
  if (det)
    for (const char* col : {"occ_gain", "occ_loss", "occ_gain_min", "occ_gain_max",
                            "occ_loss_min", "occ_loss_max", "omega_osc", "phase"})
      table.columns.push_back(col);
  if (stats)
    for (const char* col : {"r0", "z0", "sigma_a", "sigma_b", "fluct_a", "fluct_b"})
      table.columns.push_back(col);
  if (delta)
    for (const char* col : {"delta", "mean_occ_gain", "mean_occ_loss", "gamma_bar"})
      table.columns.push_back(col);
  table.columns.push_back("error");

  for (double value : spec.grid) {
    std::vector<Cell> row;
    row.emplace_back(value);
    std::string error;
    try {
      const ModelParams p = apply_axis(spec.base, spec.axis, value);
      p.validate();
      const std::uint64_t seed = point_seed(c.seed, value);
      if (det) {
        const DeterministicPoint dp = deterministic_point(p, c, seed);
        row.emplace_back(dp.occ_gain);
        row.emplace_back(dp.occ_loss);
        row.emplace_back(dp.gain_min);
        row.emplace_back(dp.gain_max);
        row.emplace_back(dp.loss_min);
        row.emplace_back(dp.loss_max);
        row.emplace_back(dp.omega);
        row.emplace_back(std::string(to_string(classify_phase(p).label)));
      }
      if (stats || delta) {
        IntegratorConfig cc = c;
        cc.seed = seed;
        const EnsembleSample sample = run_ensemble(p, cc, workers);
        if (stats) {
          const auto a = flat(sample.alphas);
          const auto b = flat(sample.betas);
          const RadialFit fa = analyze_radial(a);
          const RadialFit fb = analyze_radial(b);
          row.emplace_back(fa.r0);
          row.emplace_back(fb.r0);
          row.emplace_back(fa.sigma);
          row.emplace_back(fb.sigma);
          row.emplace_back(fa.fluct);
          row.emplace_back(fb.fluct);
        }
        if (delta) {
          const SymmetryReport rep = symmetry_delta(flat(sample.alphas), flat(sample.betas), p);
          row.emplace_back(rep.delta);
          row.emplace_back(rep.mean_occ_gain);
          row.emplace_back(rep.mean_occ_loss);
          row.emplace_back(rep.gamma_bar);
        }
      }
    } catch (const std::exception& e) {
      error = e.what();
      while (row.size() + 1 < table.columns.size()) row.emplace_back(std::string());
    }
    row.emplace_back(error);
    table.rows.push_back(std::move(row));
  }
  return table;
}

DeltaCurve delta_sweep(const ModelParams& base, const std::vector<double>& grid,
                       const IntegratorConfig& c, int workers) {
  DeltaCurve curve;
  curve.gamma_over_g.resize(static_cast<Eigen::Index>(grid.size()));
  curve.delta.resize(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ModelParams p = base;
    p.Gamma = grid[i] * p.g;
    IntegratorConfig cc = c;
    cc.seed = point_seed(c.seed, grid[i]);
    const EnsembleSample sample = run_ensemble(p, cc, workers);
    const SymmetryReport rep = symmetry_delta(flat(sample.alphas), flat(sample.betas), p);
    curve.gamma_over_g[static_cast<Eigen::Index>(i)] = grid[i];
    curve.delta[static_cast<Eigen::Index>(i)] = rep.delta;
  }
  return curve;
}

double find_delta_crossing(const ModelParams& base, double lo, double hi, int n_coarse,
                           const IntegratorConfig& c, int workers) {
  if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("find_delta_crossing: bad range");
  n_coarse = std::max(3, n_coarse);
  const DeltaCurve coarse = delta_sweep(base, geomspace(lo, hi, n_coarse), c, workers);

  Eigen::Index bracket = -1;
  for (Eigen::Index i = 1; i < coarse.delta.size(); ++i)
    if (coarse.delta[i - 1] < 0.5 && coarse.delta[i] >= 0.5) {
      bracket = i;
      break;
    }
  if (bracket < 0) throw std::runtime_error("find_delta_crossing: no crossing in range");

  const double a = coarse.gamma_over_g[bracket - 1];
  const double b = coarse.gamma_over_g[bracket];
  const std::vector<double> fine_grid = geomspace(a, b, 6);
  const std::vector<double> inner(fine_grid.begin() + 1, fine_grid.end() - 1);
  const DeltaCurve fine = delta_sweep(base, inner, c, workers);

  DeltaCurve merged;
  merged.gamma_over_g.resize(fine.delta.size() + 2);
  merged.delta.resize(fine.delta.size() + 2);
  merged.gamma_over_g[0] = a;
  merged.delta[0] = coarse.delta[bracket - 1];
  for (Eigen::Index i = 0; i < fine.delta.size(); ++i) {
    merged.gamma_over_g[i + 1] = fine.gamma_over_g[i];
    merged.delta[i + 1] = fine.delta[i];
  }
  merged.gamma_over_g[fine.delta.size() + 1] = b;
  merged.delta[fine.delta.size() + 1] = coarse.delta[bracket];
  try {
    return detect_transition(merged);
  } catch (const std::runtime_error&) {
    DeltaCurve pair;
    pair.gamma_over_g.resize(2);
    pair.delta.resize(2);
    pair.gamma_over_g << a, b;
    pair.delta << coarse.delta[bracket - 1], coarse.delta[bracket];
    return detect_transition(pair);
  }
}

Table samples_table(const EnsembleSample& sample) {
  const int cells = sample.params.ncells;
  Table table;
  table.columns = {"run", "t", "re_alpha", "im_alpha", "re_beta", "im_beta"};
  if (cells > 1) table.columns.push_back("cell");
  const Eigen::Index rows = sample.alphas.rows();
  table.rows.reserve(static_cast<std::size_t>(rows) * cells);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto run = static_cast<double>(r / sample.config.samples_per_run);
    for (int cell = 0; cell < cells; ++cell) {
      std::vector<Cell> row{Cell{run},
                            Cell{sample.times[r]},
                            Cell{sample.alphas(r, cell).real()},
                            Cell{sample.alphas(r, cell).imag()},
                            Cell{sample.betas(r, cell).real()},
                            Cell{sample.betas(r, cell).imag()}};
      if (cells > 1) row.emplace_back(static_cast<double>(cell));
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

LoadedSamples read_samples_csv(const std::string& path) {
  const Table table = read_csv(path);
  auto col = [&](const std::string& name) {
    const auto it = std::find(table.columns.begin(), table.columns.end(), name);
    if (it == table.columns.end())
      throw std::invalid_argument("samples: missing column '" + name + "' in " + path);
    return static_cast<std::size_t>(it - table.columns.begin());
  };
  const std::size_t ra = col("re_alpha"), ia = col("im_alpha");
  const std::size_t rb = col("re_beta"), ib = col("im_beta");
  const bool has_cell =
      std::find(table.columns.begin(), table.columns.end(), "cell") != table.columns.end();
  const std::size_t cc = has_cell ? col("cell") : 0;

  LoadedSamples out;
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  if (n == 0) throw std::invalid_argument("samples: empty file " + path);
  out.alphas.resize(n);
  out.betas.resize(n);
  int max_cell = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    auto num = [&](std::size_t c) { return std::stod(std::get<std::string>(row[c])); };
    out.alphas[i] = Complex{num(ra), num(ia)};
    out.betas[i] = Complex{num(rb), num(ib)};
    if (has_cell) max_cell = std::max(max_cell, static_cast<int>(num(cc)));
  }
  out.ncells = has_cell ? max_cell + 1 : 1;
  return out;
}

namespace {

std::vector<double> grid_from_json(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw std::invalid_argument(std::string("recipe: missing grid '") + key + "'");
  return parse_grid(j.at(key).get<std::string>());
}

struct RecipeContext {
  nlohmann::json doc;
  std::string path;
  std::string out_dir;
  std::string format;
  ModelParams params;
  IntegratorConfig integ;
  int workers = 0;
};

std::string output_path(const RecipeContext& ctx, const std::string& name) {
  return (fs::path(ctx.out_dir) / name).string();
}

void emit_with_metadata(const RecipeContext& ctx, const Table& table, const std::string& name,
                        RecipeResult& result) {
  const std::string path = output_path(ctx, name);
  emit(table, ctx.format, path);
  nlohmann::json extra;
  extra["recipe"] = ctx.path;
  extra["figure"] = ctx.doc.value("figure", "");
  extra["pipeline"] = ctx.doc.value("pipeline", "");
  write_metadata(path, &ctx.params, &ctx.integ, extra);
  result.files.push_back(path);
}

std::string single_output(const RecipeContext& ctx) {
  if (ctx.doc.contains("output")) return ctx.doc.at("output").get<std::string>();
  throw std::invalid_argument("recipe: missing 'output'");
}

void recipe_axis_sweep(const RecipeContext& ctx, const std::vector<std::string>& pipeline,
                       RecipeResult& result) {
  SweepSpec spec;
  spec.axis = axis_from_string(ctx.doc.value("axis", "Gamma_over_g"));
  spec.grid = grid_from_json(ctx.doc, "grid");
  spec.base = ctx.params;
  spec.pipeline = pipeline;
  const Table table = run_sweep(spec, ctx.integ, ctx.workers);
  emit_with_metadata(ctx, table, single_output(ctx), result);
}

void recipe_scatter(const RecipeContext& ctx, RecipeResult& result) {
  const std::vector<double> points = grid_from_json(ctx.doc, "points");
  const int per_point = ctx.doc.value("per_point", 2000);
  Table table;
  table.columns = {"Gamma_over_g", "re_alpha", "im_alpha", "re_beta", "im_beta"};
  for (double ratio : points) {
    ModelParams p = ctx.params;
    p.Gamma = ratio * p.g;
    IntegratorConfig cc = ctx.integ;
    cc.seed = point_seed(ctx.integ.seed, ratio);
    const EnsembleSample sample = run_ensemble(p, cc, ctx.workers);
    const Eigen::Index rows = sample.alphas.rows();
    const Eigen::Index stride = std::max<Eigen::Index>(1, rows / per_point);
    for (Eigen::Index r = 0; r < rows; r += stride) {
      table.rows.push_back({Cell{ratio}, Cell{sample.alphas(r, 0).real()},
                            Cell{sample.alphas(r, 0).imag()}, Cell{sample.betas(r, 0).real()},
                            Cell{sample.betas(r, 0).imag()}});
    }
  }
  emit_with_metadata(ctx, table, single_output(ctx), result);
}

void recipe_potential(const RecipeContext& ctx, RecipeResult& result) {
  const std::vector<double> zs = grid_from_json(ctx.doc, "z_grid");
  Table table;
  table.columns = {"z", "U"};
  for (double z : zs) table.rows.push_back({Cell{z}, Cell{potential(z, ctx.params)}});
  emit_with_metadata(ctx, table, single_output(ctx), result);
}

void recipe_kramers(const RecipeContext& ctx, RecipeResult& result) {
  const std::vector<double> nths = grid_from_json(ctx.doc, "nth_grid");
  const bool simulate = ctx.doc.value("simulate", false);
  const double lo = ctx.doc.value("search_lo", 4.2);
  const double hi = ctx.doc.value("search_hi", 20.0);
  const int coarse = ctx.doc.value("search_points", 8);

  Table table;
  table.columns = {"Nth_over_n0", "predicted_Gamma_over_g", "simulated_Gamma_over_g", "error"};
  for (double v : nths) {
    std::vector<Cell> row;
    row.emplace_back(v);
    std::string error;
    try {
      const ModelParams p = apply_axis(ctx.params, SweepAxis::nth_over_n0, v);
      row.emplace_back(predict_transition(p));
      if (simulate) {
        IntegratorConfig cc = ctx.integ;
        cc.seed = point_seed(ctx.integ.seed, v);
        row.emplace_back(find_delta_crossing(p, lo, hi, coarse, cc, ctx.workers));
      } else {
        row.emplace_back(std::string());
      }
    } catch (const std::exception& e) {
      error = e.what();
      while (row.size() + 1 < table.columns.size()) row.emplace_back(std::string());
    }
    row.emplace_back(error);
    table.rows.push_back(std::move(row));
  }
  emit_with_metadata(ctx, table, single_output(ctx), result);
}

void recipe_array_map(const RecipeContext& ctx, RecipeResult& result) {
  const std::vector<double> gps = grid_from_json(ctx.doc, "gprime_grid");
  const std::vector<double> ratios = grid_from_json(ctx.doc, "gamma_grid");

  Table map;
  map.columns = {"gprime_over_g", "Gamma_over_g", "delta", "error"};
  for (double gp : gps) {
    for (double ratio : ratios) {
      std::vector<Cell> row{Cell{gp}, Cell{ratio}};
      std::string error;
      try {
        ModelParams p = apply_axis(ctx.params, SweepAxis::gprime_over_g, gp);
        p.Gamma = ratio * p.g;
        IntegratorConfig cc = ctx.integ;
        cc.seed = point_seed2(ctx.integ.seed, gp, ratio);
        const EnsembleSample sample = run_ensemble(p, cc, ctx.workers);
        const SymmetryReport rep =
            symmetry_delta(flat(sample.alphas), flat(sample.betas), p);
        row.emplace_back(rep.delta);
      } catch (const std::exception& e) {
        error = e.what();
        row.emplace_back(std::string());
      }
      row.emplace_back(error);
      map.rows.push_back(std::move(row));
    }
  }

  // Plane-wave boundaries of the k = pi mode: coupling g -> |g - g'|.
  Table boundary;
  boundary.columns = {"gprime_over_g", "I_to_II", "II_to_III"};
  const PhaseBoundaries pb = phase_boundaries(ctx.params.nu);
  for (double gp : gps) {
    const double geff = std::abs(1.0 - gp);
    boundary.rows.push_back(
        {Cell{gp}, Cell{pb.i_to_ii * geff},
         pb.ii_to_iii ? Cell{*pb.ii_to_iii * geff} : Cell{std::string()}});
  }

  const auto& outputs = ctx.doc.at("outputs");
  emit_with_metadata(ctx, map, outputs.at(0).get<std::string>(), result);
  emit_with_metadata(ctx, boundary, outputs.at(1).get<std::string>(), result);
}

void recipe_array_boundary(const RecipeContext& ctx, RecipeResult& result) {
  const std::vector<double> gps = grid_from_json(ctx.doc, "gprime_grid");
  const double lo = ctx.doc.value("search_lo", 0.2);
  const double hi = ctx.doc.value("search_hi", 20.0);
  const int coarse = ctx.doc.value("search_points", 8);

  Table table;
  table.columns = {"gprime_over_g", "predicted_Gamma_over_g", "simulated_Gamma_over_g", "error"};
  for (double gp : gps) {
    std::vector<Cell> row{Cell{gp}};
    std::string error;
    try {
      const double geff = std::abs(1.0 - gp);
      if (geff > 1e-9) {
        ModelParams two_mode = ctx.params;
        two_mode.g = geff;
        two_mode.gprime = 0.0;
        two_mode.ncells = 1;
        row.emplace_back(predict_transition(two_mode) * geff);
      } else {
        row.emplace_back(0.0);
      }
      ModelParams p = apply_axis(ctx.params, SweepAxis::gprime_over_g, gp);
      IntegratorConfig cc = ctx.integ;
      cc.seed = point_seed(ctx.integ.seed, gp);
      row.emplace_back(find_delta_crossing(p, lo, hi, coarse, cc, ctx.workers));
    } catch (const std::exception& e) {
      error = e.what();
      while (row.size() + 1 < table.columns.size()) row.emplace_back(std::string());
    }
    row.emplace_back(error);
    table.rows.push_back(std::move(row));
  }
  emit_with_metadata(ctx, table, single_output(ctx), result);
}

}  // namespace

std::string resolve_recipe_path(const std::string& name, const std::string& recipe_dir) {
  if (fs::exists(name)) return name;
  const fs::path candidate = fs::path(recipe_dir) / (name + ".json");
  if (fs::exists(candidate)) return candidate.string();
  throw std::invalid_argument("recipe: cannot find '" + name + "' (looked for " +
                              candidate.string() + ")");
}

RecipeResult run_recipe(const std::string& path, const std::string& out_dir,
                        const std::string& format, const RecipeOverrides& overrides,
                        int workers) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("recipe: cannot open '" + path + "'");
  RecipeContext ctx;
  in >> ctx.doc;
  ctx.path = path;
  ctx.out_dir = out_dir;
  ctx.format = format;
  ctx.workers = workers;
  if (!ctx.doc.contains("params")) throw std::invalid_argument("recipe: missing 'params'");
  ctx.params = load_params(ctx.doc.at("params"));
  ctx.integ = ctx.doc.contains("integrator") ? load_integrator(ctx.doc.at("integrator"))
                                             : IntegratorConfig{};
  if (overrides.seed) ctx.integ.seed = *overrides.seed;
  if (overrides.n_runs) ctx.integ.n_runs = *overrides.n_runs;
  if (overrides.samples_per_run) ctx.integ.samples_per_run = *overrides.samples_per_run;
  if (overrides.window) ctx.integ.window = *overrides.window;
  ctx.integ.validate();

  const std::string pipeline = ctx.doc.value("pipeline", "");
  RecipeResult result;
  if (pipeline == "deterministic-sweep")
    recipe_axis_sweep(ctx, {"deterministic"}, result);
  else if (pipeline == "stats-sweep")
    recipe_axis_sweep(ctx, {"stats", "delta"}, result);
  else if (pipeline == "delta-sweep")
    recipe_axis_sweep(ctx, {"delta"}, result);
  else if (pipeline == "scatter")
    recipe_scatter(ctx, result);
  else if (pipeline == "potential-curve")
    recipe_potential(ctx, result);
  else if (pipeline == "kramers-curve")
    recipe_kramers(ctx, result);
  else if (pipeline == "array-map")
    recipe_array_map(ctx, result);
  else if (pipeline == "array-boundary")
    recipe_array_boundary(ctx, result);
  else
    throw std::invalid_argument("recipe: unknown pipeline '" + pipeline + "'");
  return result;
}

}  // namespace ptsim
