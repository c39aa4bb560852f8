#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ptsim/model.hpp"
#include "ptsim/sde.hpp"
#include "ptsim/stats.hpp"

namespace ptsim {

/// Column-ordered result table; numeric cells are serialized with 12
/// significant digits.
using Cell = std::variant<double, std::string>;
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string format_number(double v);
std::string render_csv(const Table& table);
std::string render_json(const Table& table);

/// Writes the table in the requested format ("csv" or "json"); any other
/// format name is rejected.
void emit(const Table& table, const std::string& format, const std::string& path);

/// CSV read-back (all cells as strings), used for round-trip checks and by
/// the analyze command.
Table read_csv(const std::string& path);

/// Sidecar record (`<data_path>.meta.json`) holding everything needed to
/// re-run the producing command bit-exactly.
void write_metadata(const std::string& data_path, const ModelParams* params,
                    const IntegratorConfig* config, const nlohmann::json& extra);

/// Grid expressions: "start:stop:count" (linear), "log:start:stop:count"
/// (geometric), or a comma list "1,2,3".
std::vector<double> parse_grid(const std::string& text);

enum class SweepAxis { gamma_over_g, nth_over_n0, gprime_over_g, nu };
SweepAxis axis_from_string(const std::string& name);
const char* to_string(SweepAxis axis);

/// Base parameters with the swept axis set to `value`.
ModelParams apply_axis(const ModelParams& base, SweepAxis axis, double value);

/// A one-axis sweep over a strictly monotone grid. Pipelines (any subset):
///   "deterministic" - noiseless relaxation plateaus, envelopes, frequency
///   "stats"         - radial fits of both marginals
///   "delta"         - symmetry parameter and mean occupations
struct SweepSpec {
  SweepAxis axis = SweepAxis::gamma_over_g;
  std::vector<double> grid;
  ModelParams base;
  std::vector<std::string> pipeline;

  void validate() const;
};

/// One row per grid point; per-point sub-seeds are derived from the config
/// seed and the grid value, and failures are recorded in the final "error"
/// column instead of aborting the sweep.
Table run_sweep(const SweepSpec& spec, const IntegratorConfig& c, int workers = 0);

/// Ensemble statistics of one parameter point (cells pooled for arrays).
struct PointStats {
  SymmetryReport symmetry;
  RadialFit fit_gain;
  RadialFit fit_loss;
};
PointStats ensemble_stats(const EnsembleSample& sample);

/// Delta as a function of Gamma/g over an explicit grid.
DeltaCurve delta_sweep(const ModelParams& base, const std::vector<double>& grid,
                       const IntegratorConfig& c, int workers = 0);

/// Adaptive Delta = 0.5 crossing search: geometric coarse grid on
/// [lo, hi], then a refinement pass inside the bracketing interval.
double find_delta_crossing(const ModelParams& base, double lo, double hi, int n_coarse,
                           const IntegratorConfig& c, int workers = 0);

/// Samples as a table with columns (run, t, re_alpha, im_alpha, re_beta,
/// im_beta[, cell]); the cell column appears only for arrays.
Table samples_table(const EnsembleSample& sample);

/// Read-back of a samples table; cells are pooled but pairing of rows is
/// preserved.
struct LoadedSamples {
  Eigen::ArrayXcd alphas, betas;
  int ncells = 1;
};
LoadedSamples read_samples_csv(const std::string& path);

/// Figure-reproduction recipes (JSON documents shipped under recipes/).
struct RecipeOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> n_runs;
  std::optional<int> samples_per_run;
  std::optional<double> window;
};

struct RecipeResult {
  std::vector<std::string> files;  ///< data files written (each with sidecar)
};

/// Runs the recipe at `path` (a JSON document) writing into `out_dir`.
RecipeResult run_recipe(const std::string& path, const std::string& out_dir,
                        const std::string& format, const RecipeOverrides& overrides,
                        int workers = 0);

/// Resolves a short recipe name like "figure-3b" against a recipe directory.
std::string resolve_recipe_path(const std::string& name, const std::string& recipe_dir);

}  // namespace ptsim
