// msc: benchmark runner and single-problem MSC solver.
//
//   msc bench <test> [--config file] --out dir [--seed N] [--jobs N]
//   msc solve --data Y.csv --dict D.csv --mixing B.csv [--mixing2 C.csv]
//             --solver name --k K [--alpha A] [--out X.csv]

#include "msc/config.hpp"
#include "msc/experiments.hpp"
#include "msc/io.hpp"
#include "msc/solvers.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>

namespace {

int run_bench(const std::string& test, const std::string& config_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed, int jobs) {
  msc::ExperimentConfig cfg = msc::ExperimentConfig::defaults(test);
  if (!config_path.empty()) cfg.apply(msc::KeyValueConfig::load(config_path));
  if (seed) cfg.seed = *seed;
  const msc::ResultTable table = msc::run_and_write(cfg, out_dir, jobs);
  std::cerr << "msc bench " << test << ": " << table.rows.size() << " rows written to " << out_dir << "\n";
  return 0;
}

int run_solve(const std::string& data, const std::string& dict_path, const std::string& mixing_path,
              const std::string& mixing2_path, const std::string& solver, msc::Index k, double alpha,
              const std::string& out) {
  const msc::Matrix y = msc::read_matrix_csv(data);
  auto [dict, norms] = msc::normalize_columns(msc::read_matrix_csv(dict_path));
  const msc::Matrix b = msc::read_matrix_csv(mixing_path);
  const msc::MixingOperator mix = mixing2_path.empty()
                                      ? msc::MixingOperator::dense(b)
                                      : msc::MixingOperator::khatri_rao(b, msc::read_matrix_csv(mixing2_path));
  const msc::MscProblem problem(y, dict, mix);
  const msc::Matrix x0 = msc::Matrix::Zero(dict.atoms(), mix.rank());
  const msc::SolverReport rep = msc::run_msc_solver(solver, problem, k, alpha, x0);
  // codes for the dictionary as given (not normalized)
  const msc::Matrix x = norms.cwiseInverse().asDiagonal() * rep.codes.values;
  if (out.empty()) {
    for (msc::Index i = 0; i < x.rows(); ++i) {
      for (msc::Index j = 0; j < x.cols(); ++j) std::printf(j ? ",%.17g" : "%.17g", x(i, j));
      std::printf("\n");
    }
  } else {
    msc::write_matrix_csv(out, x);
  }
  std::fprintf(stderr, "%s: cost %.6g (relative %.6g), %d iterations, %s, %.3fs\n", solver.c_str(), rep.final_cost,
               std::sqrt(rep.final_cost / y.squaredNorm()), rep.iterations, msc::to_string(rep.termination).c_str(),
               rep.wall_time);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed sparse coding solvers and benchmarks"};
  app.require_subcommand(1);

  auto* bench = app.add_subcommand("bench", "Run a benchmark test and write results.csv");
  std::string test, config_path, out_dir;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  bench->add_option("test", test, "Test name")->required()->check(CLI::IsMember(msc::known_tests()));
  bench->add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
  bench->add_option("--out", out_dir, "Output directory")->required();
  bench->add_option("--seed", seed, "Master seed (overrides the config)");
  bench->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* solve = app.add_subcommand("solve", "Solve one MSC problem and print the codes");
  std::string data, dict, mixing, mixing2, solver, out;
  msc::Index k = 1;
  double alpha = 1e-3;
  solve->add_option("--data", data, "Y as CSV")->required()->check(CLI::ExistingFile);
  solve->add_option("--dict", dict, "D as CSV (columns are normalized internally)")->required()->check(CLI::ExistingFile);
  solve->add_option("--mixing", mixing, "B as CSV")->required()->check(CLI::ExistingFile);
  solve->add_option("--mixing2", mixing2, "C as CSV; the mixing becomes B (.) C")->check(CLI::ExistingFile);
  solve->add_option("--solver", solver, "Solver")->required()->check(CLI::IsMember(msc::msc_solver_names()));
  solve->add_option("--k", k, "Sparsity per column")->required()->check(CLI::PositiveNumber);
  solve->add_option("--alpha", alpha, "Regularization ratio in [0, 1] (convex solvers)")->check(CLI::Range(0.0, 1.0));
  solve->add_option("--out", out, "Write the codes here instead of stdout");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*bench) return run_bench(test, config_path, out_dir, seed, jobs);
    return run_solve(data, dict, mixing, mixing2, solver, k, alpha, out);
  } catch (const std::exception& e) {
    std::cerr << "msc: " << e.what() << "\n";
    return 1;
  }
}
