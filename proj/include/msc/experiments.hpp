#pragma once

// Benchmark runners for the MSC solvers and the DLRA engines.
//
// A run is split into independent cells (parameter point x instance x init
// x solver). Each cell regenerates its data from seeds derived from
// (master seed, instance, init), so cells can run on any number of threads
// and the merged table is identical.

#include "msc/config.hpp"
#include "msc/linalg.hpp"
#include "msc/solvers.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace msc {

const std::vector<std::string>& known_tests();
const std::vector<std::string>& msc_solver_names();

struct ExperimentConfig {
  std::string test_name;
  std::uint64_t seed = 0;

  Index n = 50;
  Index m = 50;
  Index m1 = 21;
  Index m2 = 22;
  Index d = 100;
  Index k = 5;
  Index r = 6;
  /// Second-mode dictionary size and sparsity (denoise).
  Index d2 = 81;
  Index k2 = 6;

  std::vector<double> snr_db{20.0};
  std::vector<double> cond_b{200.0};
  /// kd_sweep grids; runtime_sweep uses them for its (d, k) half.
  std::vector<long long> k_grid;
  std::vector<long long> d_grid;
  /// runtime_sweep (n, m) half.
  std::vector<long long> n_grid;
  std::vector<long long> m_grid;
  /// alpha_sensitivity absolute and relative (percent) grids.
  std::vector<double> alpha_grid;
  std::vector<double> relative_grid;
  /// auto_alpha search grid.
  std::vector<double> auto_grid{1e-5, 1e-4, 1e-3, 1e-2, 1e-1};

  int n_instances = 50;
  int n_inits = 1;
  std::vector<std::string> solvers;
  /// Per-solver alpha; solvers missing here are tuned with auto_alpha.
  std::map<std::string, double> alpha;
  /// SNR used when tuning alpha automatically.
  double tuning_snr_db = 20.0;

  StoppingRule stop;

  // DLRA settings
  double dlra_alpha = 1e-2;
  Index tau = 20;
  int l_max = 100;
  int ipalm_iters = 1000;
  double mu = 0.5;

  // completion
  Index patch_h = 20;
  Index patch_w = 20;
  Index bands = 162;
  double missing_fraction = 0.125;

  /// Defaults for a test, as in the reference protocols.
  static ExperimentConfig defaults(const std::string& test_name);
  /// Overrides fields from a key = value configuration. Unknown keys throw.
  void apply(const KeyValueConfig& cfg);
  /// Full resolved configuration in the same key = value format.
  std::string to_text() const;
  void validate() const;
};

struct ResultRow {
  std::string test;
  std::size_t point_index = 0;
  std::string point;
  std::string solver;
  std::size_t solver_index = 0;
  int instance = 0;
  int init = 0;
  std::uint64_t instance_seed = 0;
  std::uint64_t init_seed = 0;
  double support_recovery = 0.0;
  double rel_error = 0.0;
  int iterations = 0;
  /// Mean spectral angle on the missing rows (completion only, else NaN).
  double sam = 0.0;
  double alpha = 0.0;
  double wall_time = 0.0;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  /// Extra "key = value" lines for run_meta.txt (tuned alphas).
  std::vector<std::string> meta;

  /// Sorts by (point, instance, init, solver).
  void sort();
  /// CSV with a fixed header; wall times are left out so identical seeds
  /// give identical bytes.
  std::string to_csv() const;
  std::string timings_csv() const;

  /// Rows matching a solver (and point label when nonempty).
  std::vector<const ResultRow*> select(const std::string& solver, const std::string& point = "") const;
  double mean_recovery(const std::string& solver, const std::string& point = "") const;
  double mean_rel_error(const std::string& solver, const std::string& point = "") const;
  double mean_wall_time(const std::string& solver, const std::string& point = "") const;
};

/// Problem family for alpha tuning and MSC instance generation.
struct MscFamily {
  Index n = 50;
  Index m = 50;
  Index d = 100;
  Index k = 5;
  Index r = 6;
  double cond = 200.0;
  double snr_db = 20.0;
  bool nonneg = false;
};

struct MscInstance {
  Matrix y;
  Dictionary dictionary;
  Matrix b;
  SparseCodes truth;
};

/// D, B and X depend on seed only; the noise also on noise_key, so several
/// noise draws can share one (D, B, X) triplet.
MscInstance make_msc_instance(const MscFamily& family, std::uint64_t seed, std::uint64_t noise_key = 0);

/// Runs a named MSC solver (trick_omp, homp, iht, block_fista, mixed_fista,
/// nn_block_fista).
SolverReport run_msc_solver(const std::string& name, const MscProblem& problem, Index k, double alpha,
                            const Matrix& x0, const StoppingRule& stop = {});

/// Mean over three generated instances of the grid alpha with the best
/// support recovery (smallest alpha on ties).
double auto_alpha(const MscFamily& family, const std::string& solver, std::uint64_t seed,
                  const std::vector<double>& grid = {1e-5, 1e-4, 1e-3, 1e-2, 1e-1}, const StoppingRule& stop = {});

/// Runs the configured test with `jobs` worker threads.
ResultTable run_experiment(const ExperimentConfig& config, int jobs = 1);

/// run_experiment plus results.csv, timings.csv and run_meta.txt in out_dir.
ResultTable run_and_write(const ExperimentConfig& config, const std::string& out_dir, int jobs = 1);

}  // namespace msc
