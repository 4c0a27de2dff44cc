#include "msc/experiments.hpp"

#include "msc/dictionaries.hpp"
#include "msc/dlra.hpp"
#include "msc/generators.hpp"
#include "msc/metrics.hpp"
#include "msc/random.hpp"
#include "msc/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace msc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
const char* const kVersion = "0.1.0";

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Short form for point labels.
std::string short_fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) out += ", ";
    if constexpr (std::is_same_v<T, double>)
      out += fmt(xs[i]);
    else if constexpr (std::is_same_v<T, std::string>)
      out += xs[i];
    else
      out += std::to_string(xs[i]);
  }
  return out;
}

bool is_convex(const std::string& solver) {
  return solver == "block_fista" || solver == "mixed_fista" || solver == "nn_block_fista";
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs tasks on `jobs` threads; results keep task order. The first failing
// task (in task order) rethrows.
template <class T>
std::vector<T> run_parallel(const std::vector<std::function<T()>>& tasks, int jobs) {
  std::vector<T> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        results[i] = tasks[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

using Cell = std::function<std::vector<ResultRow>()>;

Matrix gaussian_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

// Columnwise OMP of `target` on a dictionary, clipped at zero if asked.
Matrix sparse_code_columns(const Matrix& target, const Dictionary& dict, Index k, bool nonneg) {
  Matrix x(dict.atoms(), target.cols());
  const Index kk = std::min({k, dict.atoms(), dict.signal_size()});
  for (Index i = 0; i < target.cols(); ++i) x.col(i) = omp(target.col(i), dict, kk).x;
  return nonneg ? Matrix(x.cwiseMax(0.0)) : x;
}

MscFamily base_family(const ExperimentConfig& c) {
  MscFamily f;
  f.n = c.n;
  f.m = c.m;
  f.d = c.d;
  f.k = c.k;
  f.r = c.r;
  f.cond = c.cond_b.front();
  f.snr_db = c.tuning_snr_db;
  return f;
}

ResultRow base_row(const ExperimentConfig& c, std::size_t point_index, const std::string& point,
                   const std::string& solver, std::size_t solver_index, int instance, int init,
                   std::uint64_t instance_seed, std::uint64_t init_seed) {
  ResultRow row;
  row.test = c.test_name;
  row.point_index = point_index;
  row.point = point;
  row.solver = solver;
  row.solver_index = solver_index;
  row.instance = instance;
  row.init = init;
  row.instance_seed = instance_seed;
  row.init_seed = init_seed;
  row.sam = kNaN;
  row.alpha = kNaN;
  return row;
}

// One MSC solver run on one instance.
void fill_msc_row(ResultRow& row, const MscInstance& inst, const std::string& solver, double alpha, Index k,
                  const Matrix& x0, const StoppingRule& stop) {
  const MixingOperator mix = MixingOperator::dense(inst.b);
  const MscProblem problem(inst.y, inst.dictionary, mix);
  row.alpha = is_convex(solver) ? alpha : kNaN;
  const auto start = Clock::now();
  try {
    const SolverReport rep = run_msc_solver(solver, problem, k, alpha, x0, stop);
    row.wall_time = seconds_since(start);
    row.support_recovery = support_recovery(rep.codes.support, inst.truth.support, false);
    row.rel_error = std::sqrt(rep.final_cost / inst.y.squaredNorm());
    row.iterations = rep.iterations;
  } catch (const NumericalError&) {
    row.wall_time = seconds_since(start);
    row.support_recovery = kNaN;
    row.rel_error = kNaN;
    row.iterations = -1;
  }
}

struct AlphaRequest {
  std::string key;
  MscFamily family;
  std::string solver;
};

// Resolves every requested alpha: fixed values from the config, the others
// by auto_alpha (in parallel).
std::map<std::string, double> resolve_alphas(const ExperimentConfig& c, const std::vector<AlphaRequest>& requests,
                                             int jobs) {
  std::map<std::string, double> out;
  std::vector<std::function<double()>> tasks;
  std::vector<std::string> keys;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& req = requests[i];
    if (auto it = c.alpha.find(req.solver); it != c.alpha.end()) {
      out[req.key] = it->second;
      continue;
    }
    keys.push_back(req.key);
    const std::uint64_t seed = derive_seed({c.seed, 0xA1FAULL, i});
    tasks.push_back([&c, req, seed] { return auto_alpha(req.family, req.solver, seed, c.auto_grid, c.stop); });
  }
  const std::vector<double> tuned = run_parallel(tasks, jobs);
  for (std::size_t i = 0; i < keys.size(); ++i) out[keys[i]] = tuned[i];
  return out;
}

// ---------------------------------------------------------------- MSC tests

// noise_sweep, cond_sweep, nn_compare and init_study share this shape: one
// (D, B, X) triplet per instance, parameter points varying noise or B.
std::vector<Cell> msc_grid_cells(const ExperimentConfig& c, const std::map<std::string, double>& alpha,
                                 bool nonneg_codes) {
  std::vector<Cell> cells;
  const bool sweep_cond = c.test_name == "cond_sweep";
  const bool init_study = c.test_name == "init_study";
  const std::size_t points = sweep_cond ? c.cond_b.size() : c.snr_db.size();
  const int inits = init_study ? c.n_inits + 1 : 1;
  for (std::size_t p = 0; p < points; ++p) {
    for (int i = 0; i < c.n_instances; ++i) {
      for (int init = 0; init < inits; ++init) {
        for (std::size_t s = 0; s < c.solvers.size(); ++s) {
          cells.push_back([&c, &alpha, p, i, init, s, sweep_cond, nonneg_codes]() {
            MscFamily fam = base_family(c);
            fam.nonneg = nonneg_codes;
            fam.snr_db = sweep_cond ? c.snr_db.front() : c.snr_db[p];
            fam.cond = sweep_cond ? c.cond_b[p] : c.cond_b.front();
            const std::uint64_t inst_seed = derive_seed({c.seed, static_cast<std::uint64_t>(i)});
            // cond points share the noise draw; SNR points get their own
            const MscInstance inst = make_msc_instance(fam, inst_seed, sweep_cond ? 0 : p);
            const std::uint64_t init_seed = derive_seed({inst_seed, static_cast<std::uint64_t>(init), 0x1417ULL});
            const Matrix x0 = init == 0 ? Matrix(Matrix::Zero(c.d, c.r)) : gaussian_matrix(c.d, c.r, init_seed);
            const std::string label = sweep_cond ? "cond=" + short_fmt(c.cond_b[p])
                                                 : "snr=" + short_fmt(c.snr_db[p]);
            const std::string& solver = c.solvers[s];
            ResultRow row = base_row(c, p, label, solver, s, i, init, inst_seed, init == 0 ? 0 : init_seed);
            const double a = is_convex(solver) ? alpha.at(solver) : kNaN;
            fill_msc_row(row, inst, solver, a, c.k, x0, c.stop);
            return std::vector<ResultRow>{row};
          });
        }
      }
    }
  }
  return cells;
}

struct DimPoint {
  Index n, m, d, k;
  std::string label;
};

std::vector<DimPoint> kd_points(const ExperimentConfig& c) {
  std::vector<DimPoint> pts;
  for (long long k : c.k_grid)
    for (long long d : c.d_grid)
      if (k <= d && k <= c.n) pts.push_back({c.n, c.m, d, k, "k=" + std::to_string(k) + ";d=" + std::to_string(d)});
  return pts;
}

std::vector<DimPoint> runtime_points(const ExperimentConfig& c) {
  std::vector<DimPoint> pts;
  for (long long n : c.n_grid)
    for (long long m : c.m_grid)
      if (c.k <= n && m >= c.r)
        pts.push_back({n, m, c.d, c.k,
                       "n=" + std::to_string(n) + ";m=" + std::to_string(m) + ";d=" + std::to_string(c.d) +
                           ";k=" + std::to_string(c.k)});
  for (long long d : c.d_grid)
    for (long long k : c.k_grid)
      if (k <= d && k <= c.n)
        pts.push_back({c.n, c.m, d, k,
                       "n=" + std::to_string(c.n) + ";m=" + std::to_string(c.m) + ";d=" + std::to_string(d) +
                           ";k=" + std::to_string(k)});
  return pts;
}

std::vector<Cell> dim_cells(const ExperimentConfig& c, const std::vector<DimPoint>& pts,
                            const std::map<std::string, double>& alpha, bool alpha_per_point) {
  std::vector<Cell> cells;
  for (std::size_t p = 0; p < pts.size(); ++p)
    for (int i = 0; i < c.n_instances; ++i)
      for (std::size_t s = 0; s < c.solvers.size(); ++s)
        cells.push_back([&c, &alpha, pts, p, i, s, alpha_per_point]() {
          const DimPoint& pt = pts[p];
          MscFamily fam = base_family(c);
          fam.n = pt.n;
          fam.m = pt.m;
          fam.d = pt.d;
          fam.k = pt.k;
          fam.snr_db = c.snr_db.front();
          const std::uint64_t inst_seed = derive_seed({c.seed, static_cast<std::uint64_t>(i)});
          const MscInstance inst = make_msc_instance(fam, inst_seed);
          const std::string& solver = c.solvers[s];
          ResultRow row = base_row(c, p, pt.label, solver, s, i, 0, inst_seed, 0);
          double a = kNaN;
          if (is_convex(solver)) a = alpha.at(alpha_per_point ? solver + "@" + pt.label : solver);
          fill_msc_row(row, inst, solver, a, pt.k, Matrix::Zero(pt.d, c.r), c.stop);
          return std::vector<ResultRow>{row};
        });
  return cells;
}

std::vector<Cell> alpha_sensitivity_cells(const ExperimentConfig& c) {
  std::vector<Cell> cells;
  for (int i = 0; i < c.n_instances; ++i)
    for (std::size_t s = 0; s < c.solvers.size(); ++s)
      cells.push_back([&c, i, s]() {
        MscFamily fam = base_family(c);
        fam.snr_db = c.snr_db.front();
        const std::uint64_t inst_seed = derive_seed({c.seed, static_cast<std::uint64_t>(i)});
        const MscInstance inst = make_msc_instance(fam, inst_seed);
        const std::string& solver = c.solvers[s];
        const Matrix x0 = Matrix::Zero(c.d, c.r);
        std::vector<ResultRow> rows;
        double best_alpha = c.alpha_grid.front();
        double best_rec = -1.0;
        for (std::size_t g = 0; g < c.alpha_grid.size(); ++g) {
          ResultRow row = base_row(c, g, "alpha=" + short_fmt(c.alpha_grid[g]), solver, s, i, 0, inst_seed, 0);
          fill_msc_row(row, inst, solver, c.alpha_grid[g], c.k, x0, c.stop);
          if (row.support_recovery > best_rec) {
            best_rec = row.support_recovery;
            best_alpha = c.alpha_grid[g];
          }
          rows.push_back(row);
        }
        for (std::size_t g = 0; g < c.relative_grid.size(); ++g) {
          const double a = std::clamp(best_alpha * (1.0 + c.relative_grid[g] / 100.0), 0.0, 1.0);
          ResultRow row = base_row(c, c.alpha_grid.size() + g, "rel=" + short_fmt(c.relative_grid[g]), solver, s, i,
                                   0, inst_seed, 0);
          fill_msc_row(row, inst, solver, a, c.k, x0, c.stop);
          rows.push_back(row);
        }
        return rows;
      });
  return cells;
}

// ---------------------------------------------------------------- DLRA tests

double support_of(const Matrix& x, const Support& truth) {
  return support_recovery(Support::from_values(x), truth, true);
}

void fill_dlra_row(ResultRow& row, const DlraData& data, const DlraModel& model, const DlraFactors& f,
                   const Support& truth, int iterations, double seconds) {
  row.support_recovery = support_of(f.x, truth);
  row.rel_error = std::sqrt(dlra_cost(data, model, f) / data.squared_norm());
  row.iterations = iterations;
  row.wall_time = seconds;
}

std::vector<Cell> dlra_synth_cells(const ExperimentConfig& c) {
  const bool tensor = c.test_name == "dcpd_synth";
  std::vector<Cell> cells;
  for (int i = 0; i < c.n_instances; ++i)
    for (std::size_t s = 0; s < c.solvers.size(); ++s)
      cells.push_back([&c, i, s, tensor]() {
        const std::uint64_t inst_seed = derive_seed({c.seed, static_cast<std::uint64_t>(i)});
        const double cond = c.cond_b.front();
        const Dictionary dict = gen_dictionary(c.n, c.d, derive_seed({inst_seed, 1}));
        const SparseCodes truth = gen_codes(c.d, c.r, c.k, derive_seed({inst_seed, 3}));
        const Matrix a = dict.matrix() * truth.values;
        DlraData data;
        if (tensor) {
          const Matrix b = gen_mixing(c.m1, c.r, cond, derive_seed({inst_seed, 2}));
          const Matrix cc = gen_mixing(c.m2, c.r, cond, derive_seed({inst_seed, 22}));
          const Tensor3 clean = cpd_reconstruct({a, b, cc});
          data = DlraData::from_tensor(add_noise_snr(clean, c.snr_db.front(), derive_seed({inst_seed, 4})));
        } else {
          const Matrix b = gen_mixing(c.m, c.r, cond, derive_seed({inst_seed, 2}));
          data = DlraData::from_matrix(add_noise_snr(Matrix(a * b.transpose()), c.snr_db.front(),
                                                     derive_seed({inst_seed, 4})));
        }
        DlraModel model;
        model.kind = tensor ? DlraKind::cpd : DlraKind::matrix_factorization;
        model.rank = c.r;
        model.mode0 = {dict, c.k};
        TunerConfig tuner;
        tuner.alpha0 = Vector::Constant(1, c.dlra_alpha);
        tuner.tau = c.tau;
        DlraOptions opts;
        opts.l_max = c.l_max;
        opts.fista = c.stop;

        const std::uint64_t init_seed = derive_seed({inst_seed, 5});
        const std::string& solver = c.solvers[s];
        ResultRow row = base_row(c, 0, tensor ? "dcpd" : "dmf", solver, s, i, 0, inst_seed, init_seed);
        row.alpha = c.dlra_alpha;
        const auto start = Clock::now();
        const bool lra_init = solver == "ao_dlra_lra_init" || solver == "ipalm_lra_init" || solver == "lra_sc";
        const DlraFactors init = lra_init ? init_by_lra(data, model, init_seed) : random_init(data, model, init_seed);
        if (solver == "ao_dlra" || solver == "ao_dlra_lra_init") {
          const DlraReport rep = ao_dlra(data, model, tuner, init, opts);
          fill_dlra_row(row, data, model, rep.best, truth.support, rep.iterations, seconds_since(start));
        } else if (solver == "ipalm" || solver == "ipalm_lra_init") {
          row.alpha = kNaN;
          const DlraReport rep = ipalm(data, model, c.ipalm_iters, c.mu, init);
          fill_dlra_row(row, data, model, rep.last, truth.support, rep.iterations, seconds_since(start));
        } else if (solver == "ao_dlra_ipalm_init") {
          const DlraReport pre = ipalm(data, model, c.ipalm_iters, c.mu, init);
          const DlraReport rep = ao_dlra(data, model, tuner, pre.last, opts);
          fill_dlra_row(row, data, model, rep.best, truth.support, pre.iterations + rep.iterations,
                        seconds_since(start));
        } else if (solver == "lra_sc") {
          row.alpha = kNaN;
          fill_dlra_row(row, data, model, init, truth.support, 0, seconds_since(start));
        } else {
          throw std::invalid_argument("unknown DLRA method '" + solver + "'");
        }
        return std::vector<ResultRow>{row};
      });
  return cells;
}

// Smooth synthetic hyperspectral-like data: k-sparse abundance codes in
// the low-frequency part of a 2D DCT basis times smooth positive spectra.
struct CompletionInstance {
  Matrix y;
  Matrix dictionary;
  SparseCodes truth;
  std::vector<Index> missing;
};

CompletionInstance make_completion_instance(const ExperimentConfig& c, std::uint64_t seed) {
  CompletionInstance inst;
  const Dictionary dct = build_dct2_dictionary(c.patch_h, c.patch_w);
  inst.dictionary = dct.matrix();
  const Index n = dct.signal_size();
  const Index d = dct.atoms();
  // low-frequency atoms first: order by p + q, then by index
  std::vector<Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return a / c.patch_w + a % c.patch_w < b / c.patch_w + b % c.patch_w;
  });
  const Index pool = std::min(d, std::max<Index>(2 * c.k, d / 4));
  const SparseCodes local = gen_codes(pool, c.r, c.k, derive_seed({seed, 3}));
  Matrix x = Matrix::Zero(d, c.r);
  for (Index j = 0; j < pool; ++j) x.row(order[static_cast<std::size_t>(j)]) = local.values.row(j);
  inst.truth = SparseCodes(x);

  std::mt19937_64 rng(derive_seed({seed, 2}));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Matrix spectra(c.bands, c.r);
  for (Index l = 0; l < c.r; ++l) {
    const double c1 = uniform(rng), c2 = uniform(rng);
    const double w1 = 0.05 + 0.2 * uniform(rng), w2 = 0.05 + 0.2 * uniform(rng);
    const double h2 = uniform(rng);
    for (Index b = 0; b < c.bands; ++b) {
      const double t = c.bands > 1 ? static_cast<double>(b) / static_cast<double>(c.bands - 1) : 0.0;
      spectra(b, l) = 0.1 + std::exp(-0.5 * std::pow((t - c1) / w1, 2)) + h2 * std::exp(-0.5 * std::pow((t - c2) / w2, 2));
    }
  }
  const Matrix clean = inst.dictionary * x * spectra.transpose();
  inst.y = add_noise_snr(clean, c.snr_db.front(), derive_seed({seed, 4}));

  const Index missing = std::clamp<Index>(static_cast<Index>(std::llround(c.missing_fraction * static_cast<double>(n))),
                                          0, n - 1);
  std::vector<Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Index{0});
  std::mt19937_64 pick(derive_seed({seed, 7}));
  for (Index s = 0; s < missing; ++s) {
    std::uniform_int_distribution<Index> u(s, n - 1);
    std::swap(rows[static_cast<std::size_t>(s)], rows[static_cast<std::size_t>(u(pick))]);
  }
  inst.missing.assign(rows.begin(), rows.begin() + missing);
  std::sort(inst.missing.begin(), inst.missing.end());
  return inst;
}

// Per-column OMP on the observed rows, predicting the missing ones.
Matrix omp_inpaint(const Matrix& y, const Matrix& dictionary, const std::vector<Index>& missing, Index k) {
  std::vector<bool> gone(static_cast<std::size_t>(y.rows()), false);
  for (Index i : missing) gone[static_cast<std::size_t>(i)] = true;
  std::vector<Index> observed;
  for (Index i = 0; i < y.rows(); ++i)
    if (!gone[static_cast<std::size_t>(i)]) observed.push_back(i);
  std::vector<Index> kept;
  for (Index j = 0; j < dictionary.cols(); ++j)
    if (dictionary(observed, j).norm() > std::numeric_limits<double>::min()) kept.push_back(j);
  auto [dict, norms] = normalize_columns(dictionary(observed, kept));
  const Matrix x = sparse_code_columns(y(observed, Eigen::all), dict, k, false);
  return dictionary(missing, kept) * (norms.cwiseInverse().asDiagonal() * x);
}

std::vector<Cell> completion_cells(const ExperimentConfig& c) {
  std::vector<Cell> cells;
  std::vector<long long> ks;
  for (long long k : c.k_grid)
    if (k <= c.patch_h * c.patch_w) ks.push_back(k);
  for (std::size_t p = 0; p < ks.size(); ++p)
    for (int i = 0; i < c.n_instances; ++i)
      for (std::size_t s = 0; s < c.solvers.size(); ++s) {
        const std::string& solver = c.solvers[s];
        const int inits = solver == "dmf" ? c.n_inits : 1;
        for (int init = 0; init < inits; ++init)
          cells.push_back([&c, ks, p, i, s, init]() {
            const std::uint64_t inst_seed = derive_seed({c.seed, static_cast<std::uint64_t>(i)});
            const CompletionInstance inst = make_completion_instance(c, inst_seed);
            const std::string& solver = c.solvers[s];
            const Index k = ks[p];
            const std::uint64_t init_seed = derive_seed({inst_seed, static_cast<std::uint64_t>(init), 0x1417ULL});
            ResultRow row = base_row(c, p, "k=" + std::to_string(k), solver, s, i, init, inst_seed,
                                     solver == "dmf" ? init_seed : 0);
            const Matrix y_missing = inst.y(inst.missing, Eigen::all);
            const auto start = Clock::now();
            Matrix y_hat;
            if (solver == "dmf") {
              CompletionConfig cc;
              cc.rank = c.r;
              cc.k = k;
              cc.tuner.alpha0 = Vector::Constant(1, c.dlra_alpha);
              cc.tuner.tau = c.tau;
              cc.options.l_max = c.l_max;
              cc.options.fista = c.stop;
              cc.seed = init_seed;
              const CompletionResult res = complete_missing_rows(inst.y, inst.dictionary, inst.missing, cc);
              y_hat = res.missing_rows;
              row.alpha = c.dlra_alpha;
              row.iterations = res.report.iterations;
              Matrix x = Matrix::Zero(inst.dictionary.cols(), c.r);
              std::vector<bool> dropped(static_cast<std::size_t>(x.rows()), false);
              for (Index j : res.dropped_atoms) dropped[static_cast<std::size_t>(j)] = true;
              for (Index j = 0, kept = 0; j < x.rows(); ++j)
                if (!dropped[static_cast<std::size_t>(j)]) x.row(j) = res.report.best.x.row(kept++);
              row.support_recovery = support_recovery(Support::from_values(x), inst.truth.support, true);
            } else if (solver == "omp") {
              y_hat = omp_inpaint(inst.y, inst.dictionary, inst.missing, k);
              row.support_recovery = kNaN;
              row.iterations = static_cast<int>(k);
            } else {
              throw std::invalid_argument("unknown completion method '" + solver + "'");
            }
            row.wall_time = seconds_since(start);
            if (inst.missing.empty()) {
              row.rel_error = 0.0;
              row.sam = 0.0;
            } else {
              row.rel_error = rel_error(y_missing, y_hat);
              std::vector<Index> all(static_cast<std::size_t>(y_missing.rows()));
              std::iota(all.begin(), all.end(), Index{0});
              row.sam = sam(y_missing, y_hat, all).value;
            }
            return std::vector<ResultRow>{row};
          });
      }
  return cells;
}

std::vector<Cell> denoise_cells(const ExperimentConfig& c) {
  std::vector<Cell> cells;
  for (int i = 0; i < c.n_instances; ++i)
    for (std::size_t s = 0; s < c.solvers.size(); ++s)
      cells.push_back([&c, i, s]() {
        const std::uint64_t inst_seed = derive_seed({c.seed, static_cast<std::uint64_t>(i)});
        const Dictionary da = build_bspline_dictionary(c.n, c.d);
        const Dictionary db = build_bspline_dictionary(c.m1, c.d2);
        const SparseCodes xa = gen_codes(c.d, c.r, c.k, derive_seed({inst_seed, 3}), true);
        const SparseCodes xb = gen_codes(c.d2, c.r, c.k2, derive_seed({inst_seed, 33}), true);
        std::mt19937_64 rng(derive_seed({inst_seed, 2}));
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        Matrix conc(c.m2, c.r);
        for (Index j = 0; j < c.r; ++j)
          for (Index t = 0; t < c.m2; ++t) conc(t, j) = uniform(rng);
        const Tensor3 clean = cpd_reconstruct({da.matrix() * xa.values, db.matrix() * xb.values, conc});
        const DlraData data = DlraData::from_tensor(add_noise_snr(clean, c.snr_db.front(), derive_seed({inst_seed, 4})));

        const std::string& solver = c.solvers[s];
        const std::uint64_t init_seed = derive_seed({inst_seed, 5});
        ResultRow row = base_row(c, 0, "snr=" + short_fmt(c.snr_db.front()), solver, s, i, 0, inst_seed, init_seed);
        const auto start = Clock::now();
        const CpdResult hals = cpd_als(data.tensor, c.r, 500, true, init_seed);
        const bool two_modes = solver == "hals_sc2" || solver == "ao_dcpd2" || solver == "ao_nndcpd2";
        DlraModel model;
        model.kind = solver == "ao_nndcpd2" ? DlraKind::nonneg_cpd : DlraKind::cpd;
        model.rank = c.r;
        model.mode0 = {da, c.k};
        if (two_modes) model.mode1 = ModeConstraint{db, c.k2};
        DlraFactors f;
        f.x = sparse_code_columns(hals.factors.a, da, c.k, true);
        f.c = hals.factors.c;
        if (two_modes) {
          f.x2 = sparse_code_columns(hals.factors.b, db, c.k2, true);
          f.b = db.matrix() * f.x2;
        } else {
          f.b = hals.factors.b;
        }
        int iterations = hals.iterations;
        if (solver.rfind("ao_", 0) == 0) {
          TunerConfig tuner;
          tuner.alpha0 = Vector::Constant(1, c.dlra_alpha);
          tuner.tau = c.tau;
          DlraOptions opts;
          opts.l_max = c.l_max;
          opts.fista = c.stop;
          const DlraReport rep = ao_dlra(data, model, tuner, f, opts);
          f = rep.best;
          iterations += rep.iterations;
          row.alpha = c.dlra_alpha;
        } else if (solver != "hals_sc1" && solver != "hals_sc2") {
          throw std::invalid_argument("unknown denoising method '" + solver + "'");
        }
        row.wall_time = seconds_since(start);
        const Tensor3 fit = cpd_reconstruct({da.matrix() * f.x, f.b, f.c});
        row.rel_error = (clean.values() - fit.values()).norm() / clean.values().norm();
        row.support_recovery = support_of(f.x, xa.support);
        row.iterations = iterations;
        return std::vector<ResultRow>{row};
      });
  return cells;
}

}  // namespace

// ---------------------------------------------------------------- public API

const std::vector<std::string>& known_tests() {
  static const std::vector<std::string> tests{"noise_sweep", "kd_sweep",   "runtime_sweep", "cond_sweep",
                                              "init_study",  "alpha_sensitivity", "nn_compare", "dmf_synth",
                                              "dcpd_synth",  "completion", "denoise"};
  return tests;
}

const std::vector<std::string>& msc_solver_names() {
  static const std::vector<std::string> names{"trick_omp", "homp", "iht", "block_fista", "mixed_fista",
                                              "nn_block_fista"};
  return names;
}

ExperimentConfig ExperimentConfig::defaults(const std::string& test_name) {
  const auto& tests = known_tests();
  if (std::find(tests.begin(), tests.end(), test_name) == tests.end())
    throw std::invalid_argument("unknown test '" + test_name + "'");
  ExperimentConfig c;
  c.test_name = test_name;
  c.solvers = {"trick_omp", "homp", "iht", "block_fista", "mixed_fista"};
  const std::vector<double> test1_snr{1000, 100, 50, 40, 30, 20, 15, 10, 5, 2, 0};
  if (test_name == "noise_sweep") {
    c.snr_db = test1_snr;
  } else if (test_name == "kd_sweep") {
    c.k_grid = {1, 2, 5, 10, 20};
    c.d_grid = {20, 50, 100, 200, 400};
  } else if (test_name == "runtime_sweep") {
    c.n_instances = 10;
    c.n_grid = {10, 50, 1000};
    c.m_grid = {10, 50, 1000};
    c.d_grid = {50, 100, 1000};
    c.k_grid = {5, 10, 30};
  } else if (test_name == "cond_sweep") {
    c.cond_b = {1, 10, 50, 100, 500, 1e3, 5e3, 1e4, 5e4, 1e5};
  } else if (test_name == "init_study") {
    c.n_instances = 10;
    c.n_inits = 10;
  } else if (test_name == "alpha_sensitivity") {
    c.n_instances = 200;
    c.solvers = {"block_fista", "mixed_fista"};
    c.alpha_grid = {0, 1e-4, 2e-4, 5e-4, 1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2, 1e-1};
    c.relative_grid = {-90, -50, -20, 0, 100, 400, 900};
  } else if (test_name == "nn_compare") {
    c.snr_db = test1_snr;
    c.solvers = {"block_fista", "nn_block_fista"};
  } else if (test_name == "dmf_synth") {
    c.n = 50;
    c.m = 50;
    c.d = 60;
    c.r = 6;
    c.k = 8;
    c.snr_db = {100};
    c.dlra_alpha = 1e-2;
    c.mu = 0.5;
    c.n_instances = 100;
    c.solvers = {"ao_dlra", "ipalm", "ao_dlra_ipalm_init"};
  } else if (test_name == "dcpd_synth") {
    c.n = 20;
    c.m1 = 21;
    c.m2 = 22;
    c.d = 30;
    c.r = 6;
    c.k = 8;
    c.snr_db = {30};
    c.dlra_alpha = 1e-4;
    c.mu = 1.0;
    c.n_instances = 100;
    c.solvers = {"ao_dlra", "ipalm", "ao_dlra_ipalm_init", "ao_dlra_lra_init", "ipalm_lra_init", "lra_sc"};
  } else if (test_name == "completion") {
    c.r = 4;
    c.k = 10;
    c.k_grid = {10, 30, 50, 70, 100, 120, 150, 200, 250};
    c.snr_db = {std::numeric_limits<double>::infinity()};
    c.dlra_alpha = 5e-3;
    c.n_instances = 1;
    c.n_inits = 20;
    c.solvers = {"dmf", "omp"};
  } else if (test_name == "denoise") {
    c.n = 201;
    c.m1 = 61;
    c.m2 = 5;
    c.d = 180;
    c.d2 = 81;
    c.k = 6;
    c.k2 = 6;
    c.r = 3;
    c.snr_db = {-8.7};
    c.dlra_alpha = 1e-3;
    c.tau = 5;
    c.n_instances = 5;
    c.solvers = {"hals_sc1", "hals_sc2", "ao_dcpd1", "ao_dcpd2", "ao_nndcpd2"};
  }
  return c;
}

void ExperimentConfig::apply(const KeyValueConfig& cfg) {
  static const std::set<std::string> known{
      "test_name", "seed",         "n",          "m",           "m1",           "m2",          "d",
      "k",         "r",            "d2",         "k2",          "snr_db",       "cond_b",      "k_grid",
      "d_grid",    "n_grid",       "m_grid",     "alpha_grid",  "relative_grid", "auto_grid",  "n_instances",
      "n_inits",   "solvers",      "alpha",      "tuning_snr_db", "rel_tol",    "max_iter",    "dlra_alpha",
      "tau",       "l_max",        "ipalm_iters", "mu",         "patch_h",      "patch_w",     "bands",
      "missing_fraction"};
  for (const auto& [key, value] : cfg.entries()) {
    if (key.rfind("alpha.", 0) == 0) {
      alpha[key.substr(6)] = parse_real(value);
      continue;
    }
    if (!known.count(key)) throw std::invalid_argument("unknown config key '" + key + "'");
  }
  if (cfg.has("test_name") && cfg.get_string("test_name", "") != test_name)
    throw std::invalid_argument("config is for test '" + cfg.get_string("test_name", "") + "', not '" + test_name + "'");
  seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<long long>(seed)));
  n = cfg.get_int("n", n);
  m = cfg.get_int("m", m);
  m1 = cfg.get_int("m1", m1);
  m2 = cfg.get_int("m2", m2);
  d = cfg.get_int("d", d);
  k = cfg.get_int("k", k);
  r = cfg.get_int("r", r);
  d2 = cfg.get_int("d2", d2);
  k2 = cfg.get_int("k2", k2);
  snr_db = cfg.get_doubles("snr_db", snr_db);
  cond_b = cfg.get_doubles("cond_b", cond_b);
  k_grid = cfg.get_ints("k_grid", k_grid);
  d_grid = cfg.get_ints("d_grid", d_grid);
  n_grid = cfg.get_ints("n_grid", n_grid);
  m_grid = cfg.get_ints("m_grid", m_grid);
  alpha_grid = cfg.get_doubles("alpha_grid", alpha_grid);
  relative_grid = cfg.get_doubles("relative_grid", relative_grid);
  auto_grid = cfg.get_doubles("auto_grid", auto_grid);
  n_instances = static_cast<int>(cfg.get_int("n_instances", n_instances));
  n_inits = static_cast<int>(cfg.get_int("n_inits", n_inits));
  solvers = cfg.get_strings("solvers", solvers);
  if (auto a = cfg.raw("alpha")) {
    if (*a == "auto") {
      alpha.clear();
    } else {
      const double v = parse_real(*a);
      for (const auto& s : msc_solver_names())
        if (is_convex(s)) alpha[s] = v;
    }
  }
  tuning_snr_db = cfg.get_double("tuning_snr_db", tuning_snr_db);
  stop.rel_tol = cfg.get_double("rel_tol", stop.rel_tol);
  stop.max_iter = static_cast<int>(cfg.get_int("max_iter", stop.max_iter));
  dlra_alpha = cfg.get_double("dlra_alpha", dlra_alpha);
  tau = cfg.get_int("tau", tau);
  l_max = static_cast<int>(cfg.get_int("l_max", l_max));
  ipalm_iters = static_cast<int>(cfg.get_int("ipalm_iters", ipalm_iters));
  mu = cfg.get_double("mu", mu);
  patch_h = cfg.get_int("patch_h", patch_h);
  patch_w = cfg.get_int("patch_w", patch_w);
  bands = cfg.get_int("bands", bands);
  missing_fraction = cfg.get_double("missing_fraction", missing_fraction);
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream out;
  out << "test_name = " << test_name << '\n'
      << "seed = " << seed << '\n'
      << "n = " << n << '\n'
      << "m = " << m << '\n'
      << "m1 = " << m1 << '\n'
      << "m2 = " << m2 << '\n'
      << "d = " << d << '\n'
      << "k = " << k << '\n'
      << "r = " << r << '\n'
      << "d2 = " << d2 << '\n'
      << "k2 = " << k2 << '\n'
      << "snr_db = " << join(snr_db) << '\n'
      << "cond_b = " << join(cond_b) << '\n'
      << "k_grid = " << join(k_grid) << '\n'
      << "d_grid = " << join(d_grid) << '\n'
      << "n_grid = " << join(n_grid) << '\n'
      << "m_grid = " << join(m_grid) << '\n'
      << "alpha_grid = " << join(alpha_grid) << '\n'
      << "relative_grid = " << join(relative_grid) << '\n'
      << "auto_grid = " << join(auto_grid) << '\n'
      << "n_instances = " << n_instances << '\n'
      << "n_inits = " << n_inits << '\n'
      << "solvers = " << join(solvers) << '\n';
  for (const auto& [s, a] : alpha) out << "alpha." << s << " = " << fmt(a) << '\n';
  out << "tuning_snr_db = " << fmt(tuning_snr_db) << '\n'
      << "rel_tol = " << fmt(stop.rel_tol) << '\n'
      << "max_iter = " << stop.max_iter << '\n'
      << "dlra_alpha = " << fmt(dlra_alpha) << '\n'
      << "tau = " << tau << '\n'
      << "l_max = " << l_max << '\n'
      << "ipalm_iters = " << ipalm_iters << '\n'
      << "mu = " << fmt(mu) << '\n'
      << "patch_h = " << patch_h << '\n'
      << "patch_w = " << patch_w << '\n'
      << "bands = " << bands << '\n'
      << "missing_fraction = " << fmt(missing_fraction) << '\n';
  return out.str();
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("invalid config: " + what); };
  if (n_instances < 1) fail("n_instances must be at least 1");
  if (n_inits < 0) fail("n_inits must be nonnegative");
  if (snr_db.empty()) fail("snr_db grid is empty");
  if (cond_b.empty()) fail("cond_b grid is empty");
  if (solvers.empty()) fail("solver list is empty");
  if (auto_grid.empty()) fail("auto_grid is empty");
  for (double cnd : cond_b)
    if (!(cnd >= 1.0)) fail("cond_b entries must be >= 1");
  if (n < 1 || m < 1 || d < 1 || r < 1 || k < 1) fail("dimensions must be positive");
  stop.validate();
  const bool msc_test = test_name == "noise_sweep" || test_name == "kd_sweep" || test_name == "runtime_sweep" ||
                        test_name == "cond_sweep" || test_name == "init_study" || test_name == "alpha_sensitivity" ||
                        test_name == "nn_compare";
  if (msc_test) {
    for (const auto& s : solvers)
      if (std::find(msc_solver_names().begin(), msc_solver_names().end(), s) == msc_solver_names().end())
        fail("unknown solver '" + s + "'");
    if (k > d || k > n) fail("need k <= min(n, d)");
    if (m < r) fail("need m >= r");
  }
  if ((test_name == "kd_sweep" || test_name == "runtime_sweep") && (k_grid.empty() || d_grid.empty()))
    fail("k_grid and d_grid must be nonempty");
  if (test_name == "runtime_sweep" && (n_grid.empty() || m_grid.empty())) fail("n_grid and m_grid must be nonempty");
  if (test_name == "alpha_sensitivity" && (alpha_grid.empty() || relative_grid.empty()))
    fail("alpha_grid and relative_grid must be nonempty");
  if (test_name == "completion" && k_grid.empty()) fail("k_grid must be nonempty");
  if (test_name == "dmf_synth" && m < r) fail("need m >= r");
  if (test_name == "dcpd_synth" && (m1 < r || m2 < r)) fail("need m1, m2 >= r");
  if (!(mu > 0 && mu <= 1)) fail("mu must lie in (0, 1]");
}

MscInstance make_msc_instance(const MscFamily& family, std::uint64_t seed, std::uint64_t noise_key) {
  MscInstance inst;
  inst.dictionary = gen_dictionary(family.n, family.d, derive_seed({seed, 1}));
  inst.b = gen_mixing(family.m, family.r, family.cond, derive_seed({seed, 2}));
  inst.truth = gen_codes(family.d, family.r, family.k, derive_seed({seed, 3}), family.nonneg);
  const Matrix clean = inst.dictionary.matrix() * inst.truth.values * inst.b.transpose();
  inst.y = add_noise_snr(clean, family.snr_db, derive_seed({seed, 4, noise_key}));
  return inst;
}

SolverReport run_msc_solver(const std::string& name, const MscProblem& problem, Index k, double alpha,
                            const Matrix& x0, const StoppingRule& stop) {
  if (name == "trick_omp") return trick_omp(problem, k);
  if (name == "homp") return homp(problem, k, x0, stop);
  if (name == "iht") return iht(problem, k, x0, stop);
  FistaOptions opts;
  opts.stop = stop;
  if (name == "block_fista") return block_fista(problem, Vector::Constant(problem.rank(), alpha), k, x0, opts);
  if (name == "mixed_fista") return mixed_fista(problem, alpha, k, x0, opts);
  if (name == "nn_block_fista") {
    opts.nonneg = true;
    return block_fista(problem, Vector::Constant(problem.rank(), alpha), k, x0, opts);
  }
  throw std::invalid_argument("unknown solver '" + name + "'");
}

double auto_alpha(const MscFamily& family, const std::string& solver, std::uint64_t seed,
                  const std::vector<double>& grid, const StoppingRule& stop) {
  if (!is_convex(solver)) throw std::invalid_argument("auto_alpha: solver '" + solver + "' has no regularization");
  if (grid.empty()) throw std::invalid_argument("auto_alpha: empty grid");
  double sum = 0.0;
  for (std::uint64_t t = 0; t < 3; ++t) {
    const MscInstance inst = make_msc_instance(family, derive_seed({seed, t}));
    const MixingOperator mix = MixingOperator::dense(inst.b);
    const MscProblem problem(inst.y, inst.dictionary, mix);
    const Matrix x0 = Matrix::Zero(family.d, family.r);
    double best = grid.front();
    double best_rec = -1.0;
    for (double a : grid) {
      const SolverReport rep = run_msc_solver(solver, problem, family.k, a, x0, stop);
      const double rec = support_recovery(rep.codes.support, inst.truth.support, false);
      if (rec > best_rec || (rec == best_rec && a < best)) {
        best = a;
        best_rec = rec;
      }
    }
    sum += best;
  }
  return sum / 3.0;
}

ResultTable run_experiment(const ExperimentConfig& config, int jobs) {
  config.validate();
  if (jobs < 1) throw std::invalid_argument("jobs must be at least 1");
  const ExperimentConfig& c = config;
  ResultTable table;
  std::map<std::string, double> alpha;
  std::vector<Cell> cells;
  const std::string& t = c.test_name;

  auto request_base = [&](bool nonneg) {
    std::vector<AlphaRequest> reqs;
    for (const auto& s : c.solvers)
      if (is_convex(s)) {
        MscFamily fam = base_family(c);
        fam.nonneg = nonneg;
        // nn_compare tunes once on block_fista and shares it
        const std::string tuned_with = t == "nn_compare" ? "block_fista" : s;
        reqs.push_back({s, fam, tuned_with});
      }
    return reqs;
  };

  if (t == "noise_sweep" || t == "cond_sweep" || t == "init_study" || t == "nn_compare") {
    const bool nonneg = t == "nn_compare";
    std::vector<AlphaRequest> reqs = request_base(nonneg);
    if (nonneg) {
      // one tuning run shared by both variants
      std::vector<AlphaRequest> shared;
      if (!reqs.empty()) shared.push_back({"shared", reqs.front().family, "block_fista"});
      auto resolved = resolve_alphas(c, shared, jobs);
      for (const auto& r : reqs) alpha[r.key] = c.alpha.count(r.key) ? c.alpha.at(r.key) : resolved.at("shared");
    } else {
      alpha = resolve_alphas(c, reqs, jobs);
    }
    cells = msc_grid_cells(c, alpha, nonneg);
  } else if (t == "kd_sweep") {
    const auto pts = kd_points(c);
    std::vector<AlphaRequest> reqs;
    for (const auto& pt : pts)
      for (const auto& s : c.solvers)
        if (is_convex(s)) {
          MscFamily fam = base_family(c);
          fam.d = pt.d;
          fam.k = pt.k;
          reqs.push_back({s + "@" + pt.label, fam, s});
        }
    alpha = resolve_alphas(c, reqs, jobs);
    cells = dim_cells(c, pts, alpha, true);
  } else if (t == "runtime_sweep") {
    alpha = resolve_alphas(c, request_base(false), jobs);
    cells = dim_cells(c, runtime_points(c), alpha, false);
  } else if (t == "alpha_sensitivity") {
    cells = alpha_sensitivity_cells(c);
  } else if (t == "dmf_synth" || t == "dcpd_synth") {
    cells = dlra_synth_cells(c);
  } else if (t == "completion") {
    cells = completion_cells(c);
  } else if (t == "denoise") {
    cells = denoise_cells(c);
  } else {
    throw std::invalid_argument("unknown test '" + t + "'");
  }

  for (const auto& [key, value] : alpha) table.meta.push_back("alpha." + key + " = " + fmt(value));
  for (auto& rows : run_parallel(cells, jobs))
    for (auto& row : rows) table.rows.push_back(std::move(row));
  table.sort();
  return table;
}

ResultTable run_and_write(const ExperimentConfig& config, const std::string& out_dir, int jobs) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw std::runtime_error("cannot create output directory '" + out_dir + "'");
  // fail on an unwritable directory before doing the work
  const fs::path results = fs::path(out_dir) / "results.csv";
  {
    std::ofstream probe(results);
    if (!probe) throw std::runtime_error("cannot write to '" + results.string() + "'");
  }

  const auto start = Clock::now();
  ResultTable table = run_experiment(config, jobs);
  const double total = seconds_since(start);

  auto write = [](const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
    if (!out) throw std::runtime_error("write to '" + p.string() + "' failed");
  };
  write(results, table.to_csv());
  write(fs::path(out_dir) / "timings.csv", table.timings_csv());
  std::ostringstream meta;
  meta << "# resolved configuration\n" << config.to_text();
  meta << "# run\n"
       << "version = " << kVersion << '\n'
       << "eigen = " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << '\n'
       << "jobs = " << jobs << '\n'
       << "rows = " << table.rows.size() << '\n'
       << "total_seconds = " << fmt(total) << '\n';
  if (!table.meta.empty()) meta << "# tuned regularization\n";
  for (const auto& line : table.meta) meta << line << '\n';
  write(fs::path(out_dir) / "run_meta.txt", meta.str());
  return table;
}

// ---------------------------------------------------------------- ResultTable

void ResultTable::sort() {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.point_index, a.instance, a.init, a.solver_index) <
           std::tie(b.point_index, b.instance, b.init, b.solver_index);
  });
}

std::string ResultTable::to_csv() const {
  std::ostringstream out;
  out << "test,point,solver,instance,init,instance_seed,init_seed,alpha,support_recovery,rel_error,iterations,sam\n";
  for (const auto& r : rows)
    out << r.test << ',' << r.point << ',' << r.solver << ',' << r.instance << ',' << r.init << ',' << r.instance_seed
        << ',' << r.init_seed << ',' << fmt(r.alpha) << ',' << fmt(r.support_recovery) << ',' << fmt(r.rel_error) << ','
        << r.iterations << ',' << fmt(r.sam) << '\n';
  return out.str();
}

std::string ResultTable::timings_csv() const {
  std::ostringstream out;
  out << "test,point,solver,instance,init,wall_time\n";
  for (const auto& r : rows)
    out << r.test << ',' << r.point << ',' << r.solver << ',' << r.instance << ',' << r.init << ',' << fmt(r.wall_time)
        << '\n';
  return out.str();
}

std::vector<const ResultRow*> ResultTable::select(const std::string& solver, const std::string& point) const {
  std::vector<const ResultRow*> out;
  for (const auto& r : rows)
    if (r.solver == solver && (point.empty() || r.point == point)) out.push_back(&r);
  return out;
}

namespace {

template <class F>
double mean_of(const std::vector<const ResultRow*>& rows, F field) {
  double sum = 0.0;
  int count = 0;
  for (const ResultRow* r : rows) {
    const double v = field(*r);
    if (std::isnan(v)) continue;
    sum += v;
    ++count;
  }
  return count > 0 ? sum / count : kNaN;
}

}  // namespace

double ResultTable::mean_recovery(const std::string& solver, const std::string& point) const {
  return mean_of(select(solver, point), [](const ResultRow& r) { return r.support_recovery; });
}

double ResultTable::mean_rel_error(const std::string& solver, const std::string& point) const {
  return mean_of(select(solver, point), [](const ResultRow& r) { return r.rel_error; });
}

double ResultTable::mean_wall_time(const std::string& solver, const std::string& point) const {
  return mean_of(select(solver, point), [](const ResultRow& r) { return r.wall_time; });
}

}  // namespace msc
