#include "msc/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace msc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Relative-decrease rule |next - prev| / prev < tol. Costs at the rounding
// floor of the expanded cost formula count as converged.
bool has_converged(double prev, double next, double rel_tol, double floor) {
  if (prev <= floor) return true;
  return std::abs(next - prev) / prev < rel_tol;
}

double cost_floor(const MscProblem& problem) { return 1e-14 * problem.y_norm_sq(); }

void check_x0(const MscProblem& problem, const Matrix& x0) {
  if (x0.rows() != problem.atoms() || x0.cols() != problem.rank())
    throw DimensionError("initial codes have shape " + std::to_string(x0.rows()) + "x" +
                         std::to_string(x0.cols()) + ", expected " + std::to_string(problem.atoms()) +
                         "x" + std::to_string(problem.rank()));
}

void check_sparsity(const MscProblem& problem, Index k) {
  if (k < 1 || k > problem.atoms())
    throw std::invalid_argument("sparsity level k=" + std::to_string(k) + " outside [1, d]");
}

// Least squares of h on the atoms in `support` given the Gram matrix.
Vector gram_least_squares(const Matrix& gram, const Vector& h, const std::vector<Index>& support) {
  Vector x = Vector::Zero(h.size());
  if (support.empty()) return x;
  const Matrix gss = gram(support, support);
  const Vector hs = h(support);
  Eigen::LLT<Matrix> llt(gss);
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-10) {
    Matrix reg = gss;
    reg.diagonal().array() += 1e-10 * gss.trace() / static_cast<double>(support.size());
    llt.compute(reg);
    if (llt.info() != Eigen::Success) throw NumericalError("least squares on support: singular system");
  }
  const Vector xs = llt.solve(hs);
  for (std::size_t a = 0; a < support.size(); ++a) x(support[a]) = xs(static_cast<Index>(a));
  return x;
}

std::vector<Index> column_support(const Matrix& x, Index col) {
  std::vector<Index> s;
  for (Index i = 0; i < x.rows(); ++i)
    if (std::abs(x(i, col)) > kSupportTolerance) s.push_back(i);
  return s;
}

void finish_report(SolverReport& report, const MscProblem& problem, Clock::time_point start) {
  report.final_cost = problem.cost(report.codes.values);
  report.wall_time = seconds_since(start);
}

void check_alpha(double a) {
  if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("regularization ratio alpha must lie in [0, 1]");
}

}  // namespace

std::string to_string(Termination t) {
  switch (t) {
    case Termination::tolerance: return "tolerance";
    case Termination::max_iter: return "max_iter";
    case Termination::restart_all_columns: return "restart_all_columns";
  }
  return "unknown";
}

void StoppingRule::validate() const {
  if (!(rel_tol > 0)) throw std::invalid_argument("StoppingRule: rel_tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("StoppingRule: max_iter must be at least 1");
}

// ---------------------------------------------------------------- MscProblem

MscProblem::MscProblem(const Matrix& y, const Dictionary& d, const MixingOperator& mixing)
    : dict_(&d), mixing_(&mixing) {
  if (y.rows() != d.signal_size() || y.cols() != mixing.rows())
    throw DimensionError("MSC data is " + std::to_string(y.rows()) + "x" + std::to_string(y.cols()) +
                         ", expected " + std::to_string(d.signal_size()) + "x" +
                         std::to_string(mixing.rows()));
  dtym_ = d.matrix().transpose() * mixing.right_apply(y);
  y_norm_sq_ = y.squaredNorm();
  lipschitz_ = d.spectral_norm_sq() * mixing.spectral_norm_sq();
}

MscProblem::MscProblem(const Dictionary& d, const MixingOperator& mixing, Matrix dtym, double y_norm_sq)
    : dict_(&d), mixing_(&mixing), dtym_(std::move(dtym)), y_norm_sq_(y_norm_sq) {
  if (dtym_.rows() != d.atoms() || dtym_.cols() != mixing.rank())
    throw DimensionError("MscProblem: D^T Y M has the wrong shape");
  lipschitz_ = d.spectral_norm_sq() * mixing.spectral_norm_sq();
}

double MscProblem::cost(const Matrix& x) const {
  const double quad = (dtd() * x).cwiseProduct(x * mtm()).sum();
  return std::max(0.0, y_norm_sq_ - 2.0 * x.cwiseProduct(dtym_).sum() + quad);
}

Matrix MscProblem::gradient(const Matrix& x) const { return dtd() * x * mtm() - dtym_; }

// ---------------------------------------------------------------- OMP

OmpResult omp_gram(const Vector& h, const Matrix& gram, Index k) {
  const Index d = h.size();
  if (gram.rows() != d || gram.cols() != d) throw DimensionError("omp: Gram matrix shape mismatch");
  if (k < 1 || k > d) throw std::invalid_argument("omp: k must lie in [1, d]");
  std::vector<Index> selected;
  std::vector<bool> used(static_cast<std::size_t>(d), false);
  Vector x = Vector::Zero(d);
  Vector corr = h;
  for (Index step = 0; step < k; ++step) {
    Index best = -1;
    double best_val = -1.0;
    for (Index j = 0; j < d; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double v = std::abs(corr(j));
      if (v > best_val) {
        best_val = v;
        best = j;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    selected.push_back(best);
    std::vector<Index> sorted = selected;
    std::sort(sorted.begin(), sorted.end());
    x = gram_least_squares(gram, h, sorted);
    corr = h - gram(Eigen::all, sorted) * x(sorted);
  }
  std::sort(selected.begin(), selected.end());
  return {std::move(x), std::move(selected)};
}

OmpResult omp(const Vector& y, const Dictionary& d, Index k) {
  if (y.size() != d.signal_size()) throw DimensionError("omp: signal length does not match dictionary");
  if (k < 1 || k > std::min(d.signal_size(), d.atoms()))
    throw std::invalid_argument("omp: k must lie in [1, min(n, d)]");
  return omp_gram(d.matrix().transpose() * y, d.gram(), k);
}

// ---------------------------------------------------------------- TrickOMP

SolverReport trick_omp(const MscProblem& problem, Index k) {
  const auto start = Clock::now();
  check_sparsity(problem, k);
  if (k > problem.dictionary().signal_size()) throw std::invalid_argument("trick_omp: k exceeds n");
  const double smin = problem.mixing().smallest_singular_value();
  if (!(smin > 1e-12))
    throw NumericalError("trick_omp: mixing matrix is rank deficient (smallest singular value " +
                         std::to_string(smin) + ")");
  // D^T (Y M (M^T M)^{-1}) = (D^T Y M) (M^T M)^{-1}
  const Matrix corr = problem.mtm().ldlt().solve(problem.dtym().transpose()).transpose();

  SolverReport report;
  report.raw_codes = Matrix::Zero(problem.atoms(), problem.rank());
  Support support(static_cast<std::size_t>(problem.rank()));
  for (Index i = 0; i < problem.rank(); ++i) {
    OmpResult res = omp_gram(corr.col(i), problem.dtd(), k);
    report.raw_codes.col(i) = res.x;
    support.columns[static_cast<std::size_t>(i)] = std::move(res.support);
  }
  report.codes = SparseCodes(fixed_support_ls_gram(problem.dtd(), problem.dtym(), problem.mtm(), support));
  report.cost_trace = {problem.y_norm_sq(), problem.cost(report.codes.values)};
  report.iterations = static_cast<int>(k);
  report.termination = Termination::tolerance;
  finish_report(report, problem, start);
  return report;
}

SolverReport trick_omp(const Matrix& y, const Dictionary& d, const MixingOperator& mixing, Index k) {
  return trick_omp(MscProblem(y, d, mixing), k);
}

// ---------------------------------------------------------------- reduction bound

double min_subset_singular_value(const Matrix& d, Index subset_size) {
  const Index cols = d.cols();
  if (subset_size < 1 || subset_size > cols)
    throw std::invalid_argument("subset size must lie in [1, number of atoms]");
  double combos = 1.0;
  for (Index i = 0; i < subset_size; ++i)
    combos = combos * static_cast<double>(cols - i) / static_cast<double>(i + 1);
  if (combos > 1e6)
    throw std::invalid_argument("reduction bound infeasible at this size: C(" + std::to_string(cols) + ", " +
                                std::to_string(subset_size) + ") exceeds 1e6 submatrices");

  std::vector<Index> idx(static_cast<std::size_t>(subset_size));
  for (Index i = 0; i < subset_size; ++i) idx[static_cast<std::size_t>(i)] = i;
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    Eigen::JacobiSVD<Matrix> svd(d(Eigen::all, idx));
    const Vector& sv = svd.singularValues();
    const double cutoff = static_cast<double>(std::max(d.rows(), subset_size)) *
                          std::numeric_limits<double>::epsilon() * sv(0);
    for (Index i = sv.size() - 1; i >= 0; --i)
      if (sv(i) > cutoff) {
        best = std::min(best, sv(i));
        break;
      }
    // next combination in lexicographic order
    Index pos = subset_size - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == cols - subset_size + pos) --pos;
    if (pos < 0) break;
    ++idx[static_cast<std::size_t>(pos)];
    for (Index j = pos + 1; j < subset_size; ++j)
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  return best;
}

double check_reduction_bound(const Matrix& d, const Matrix& b, Index k, double delta, double eps) {
  if (delta < 0 || eps < 0) throw std::invalid_argument("check_reduction_bound: negative delta or eps");
  if (k < 1 || 2 * k > d.cols()) throw std::invalid_argument("check_reduction_bound: need 1 <= 2k <= d");
  // evaluated first so the enumeration guard fires regardless of delta/eps
  const double s2k = min_subset_singular_value(d, 2 * k);
  if (delta == 0.0 && eps == 0.0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(b);
  const Vector& sv = svd.singularValues();
  double sb = 0.0;
  const double cutoff = static_cast<double>(std::max(b.rows(), b.cols())) *
                        std::numeric_limits<double>::epsilon() * sv(0);
  for (Index i = sv.size() - 1; i >= 0; --i)
    if (sv(i) > cutoff) {
      sb = sv(i);
      break;
    }
  if (sb == 0.0) throw NumericalError("check_reduction_bound: mixing matrix is zero");
  return std::sqrt(delta + eps / (sb * sb)) / s2k;
}

// ---------------------------------------------------------------- IHT

SolverReport iht(const MscProblem& problem, Index k, const Matrix& x0, const StoppingRule& stop) {
  const auto start = Clock::now();
  stop.validate();
  check_sparsity(problem, k);
  check_x0(problem, x0);
  const double eta = 1.0 / problem.lipschitz();
  const double floor = cost_floor(problem);

  SolverReport report;
  Matrix x = x0;
  Matrix z = x;
  double beta = 1.0;
  double cost = problem.cost(x);
  report.cost_trace.push_back(cost);
  report.termination = Termination::max_iter;
  for (int it = 1; it <= stop.max_iter; ++it) {
    const Matrix x_old = x;
    x = prox::hard_threshold_columns(z - eta * problem.gradient(z), k);
    const double beta_old = beta;
    beta = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * beta * beta));
    z = x + ((beta_old - 1.0) / beta) * (x - x_old);
    const double next = problem.cost(x);
    report.cost_trace.push_back(next);
    report.iterations = it;
    if (has_converged(cost, next, stop.rel_tol, floor)) {
      report.termination = Termination::tolerance;
      break;
    }
    cost = next;
  }
  report.raw_codes = x;
  report.codes = debias(problem, x, k, false);
  finish_report(report, problem, start);
  return report;
}

SolverReport iht(const Matrix& y, const Dictionary& d, const MixingOperator& mixing, Index k,
                 const Matrix& x0, const StoppingRule& stop) {
  return iht(MscProblem(y, d, mixing), k, x0, stop);
}

// ---------------------------------------------------------------- HOMP

SolverReport homp(const MscProblem& problem, Index k, const Matrix& x0, const StoppingRule& stop) {
  const auto start = Clock::now();
  stop.validate();
  check_sparsity(problem, k);
  check_x0(problem, x0);
  const Matrix& v = problem.mtm();
  const Matrix& gram = problem.dtd();
  const Index r = problem.rank();
  for (Index p = 0; p < r; ++p)
    if (!(v(p, p) > 0)) throw NumericalError("homp: mixing matrix has a zero column");
  const double floor = cost_floor(problem);

  SolverReport report;
  Matrix x = x0;
  double cost = problem.cost(x);
  report.cost_trace.push_back(cost);
  report.termination = Termination::max_iter;
  for (int sweep = 1; sweep <= stop.max_iter; ++sweep) {
    const double sweep_start_cost = cost;
    int rejected = 0;
    for (Index p = 0; p < r; ++p) {
      // D^T V_b with V_b = (Y - D X_{-p} M_{-p}^T) M_p / ||M_p||^2
      const Vector others = x * v.col(p) - x.col(p) * v(p, p);
      const Vector h = (problem.dtym().col(p) - gram * others) / v(p, p);

      Matrix candidate = x;
      candidate.col(p) = omp_gram(h, gram, k).x;
      double candidate_cost = problem.cost(candidate);
      if (candidate_cost <= cost) {
        x = std::move(candidate);
        cost = candidate_cost;
        continue;
      }
      ++rejected;
      const std::vector<Index> previous = column_support(x, p);
      if (previous.empty()) continue;
      candidate.col(p) = gram_least_squares(gram, h, previous);
      candidate_cost = problem.cost(candidate);
      if (candidate_cost <= cost) {
        x = std::move(candidate);
        cost = candidate_cost;
      }
    }
    report.cost_trace.push_back(cost);
    report.iterations = sweep;
    if (rejected == r) {
      report.termination = Termination::restart_all_columns;
      break;
    }
    if (has_converged(sweep_start_cost, cost, stop.rel_tol, floor)) {
      report.termination = Termination::tolerance;
      break;
    }
  }
  report.raw_codes = x;
  report.codes = debias(problem, x, k, false);
  finish_report(report, problem, start);
  return report;
}

SolverReport homp(const Matrix& y, const Dictionary& d, const MixingOperator& mixing, Index k,
                  const Matrix& x0, const StoppingRule& stop) {
  return homp(MscProblem(y, d, mixing), k, x0, stop);
}

// ---------------------------------------------------------------- lambda max

prox::RegularizationVector lambda_max_block(const MscProblem& problem) {
  return problem.dtym().cwiseAbs().colwise().maxCoeff().transpose();
}

prox::RegularizationVector lambda_max_block(const Matrix& y, const Dictionary& d, const MixingOperator& mixing) {
  return lambda_max_block(MscProblem(y, d, mixing));
}

double lambda_max_mixed(const MscProblem& problem) { return lambda_max_block(problem).sum(); }

double lambda_max_mixed(const Matrix& y, const Dictionary& d, const MixingOperator& mixing) {
  return lambda_max_mixed(MscProblem(y, d, mixing));
}

// ---------------------------------------------------------------- FISTA

namespace {

template <class Prox, class Penalty>
SolverReport run_fista(const MscProblem& problem, Index k, const Matrix& x0, const FistaOptions& options,
                       Prox&& prox_step, Penalty&& penalty) {
  const auto start = Clock::now();
  options.stop.validate();
  check_sparsity(problem, k);
  check_x0(problem, x0);
  const double eta = options.stepsize > 0 ? options.stepsize : 1.0 / problem.lipschitz();
  const double floor = cost_floor(problem);

  // One application of X -> D^T D X M^T M per iteration: the gradient at the
  // extrapolated point is the same combination of A(x) and A(x_old).
  auto apply = [&](const Matrix& x, Matrix& out, Matrix& tmp) {
    tmp.noalias() = x * problem.mtm();
    out.noalias() = problem.dtd() * tmp;
  };
  auto objective = [&](const Matrix& x, const Matrix& ax) {
    const double fit = std::max(0.0, problem.y_norm_sq() - 2.0 * x.cwiseProduct(problem.dtym()).sum() +
                                         x.cwiseProduct(ax).sum());
    return 0.5 * fit + penalty(x);
  };

  SolverReport report;
  Matrix x = x0, x_old(x0.rows(), x0.cols());
  Matrix ax(x0.rows(), x0.cols()), ax_old(x0.rows(), x0.cols()), tmp(x0.rows(), x0.cols());
  apply(x, ax, tmp);
  Matrix z = x, az = ax, step(x0.rows(), x0.cols());
  double beta = 1.0;
  double value = objective(x, ax);
  report.cost_trace.push_back(value);
  report.termination = Termination::max_iter;
  for (int it = 1; it <= options.stop.max_iter; ++it) {
    x.swap(x_old);
    ax.swap(ax_old);
    step.noalias() = z - eta * (az - problem.dtym());
    x = prox_step(step, eta);
    apply(x, ax, tmp);
    const double beta_old = beta;
    beta = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * beta * beta));
    const double momentum = (beta_old - 1.0) / beta;
    z.noalias() = x + momentum * (x - x_old);
    az.noalias() = ax + momentum * (ax - ax_old);
    const double next = objective(x, ax);
    report.cost_trace.push_back(next);
    report.iterations = it;
    if (has_converged(value, next, options.stop.rel_tol, 0.5 * floor)) {
      report.termination = Termination::tolerance;
      break;
    }
    value = next;
  }
  report.raw_codes = x;
  report.codes = options.skip_debias ? SparseCodes(x)
                                     : debias(problem, x, k, options.nonneg, options.debias_ridge);
  finish_report(report, problem, start);
  return report;
}

}  // namespace

SolverReport block_fista(const MscProblem& problem, const Vector& alpha, Index k, const Matrix& x0,
                         const FistaOptions& options) {
  if (alpha.size() != problem.rank())
    throw DimensionError("block_fista: alpha has " + std::to_string(alpha.size()) + " entries, expected " +
                         std::to_string(problem.rank()));
  for (Index i = 0; i < alpha.size(); ++i) check_alpha(alpha(i));
  const Vector lambdas = alpha.cwiseProduct(lambda_max_block(problem));
  auto prox_step = [&](const Matrix& g, double eta) {
    return options.nonneg ? prox::nonneg_soft_threshold_columns(g, eta * lambdas)
                          : prox::soft_threshold_columns(g, eta * lambdas);
  };
  auto penalty = [&](const Matrix& x) {
    return (x.cwiseAbs().colwise().sum().transpose().array() * lambdas.array()).sum();
  };
  return run_fista(problem, k, x0, options, prox_step, penalty);
}

SolverReport block_fista(const Matrix& y, const Dictionary& d, const MixingOperator& mixing,
                         const Vector& alpha, Index k, const Matrix& x0, const FistaOptions& options) {
  return block_fista(MscProblem(y, d, mixing), alpha, k, x0, options);
}

SolverReport mixed_fista(const MscProblem& problem, double alpha, Index k, const Matrix& x0,
                         const FistaOptions& options) {
  check_alpha(alpha);
  if (options.nonneg) throw std::invalid_argument("mixed_fista: nonnegative variant not supported");
  const double lambda = alpha * lambda_max_mixed(problem);
  auto prox_step = [&](const Matrix& g, double eta) { return prox::prox_l11(g, eta * lambda); };
  auto penalty = [&](const Matrix& x) {
    return x.size() == 0 ? 0.0 : lambda * x.cwiseAbs().colwise().sum().maxCoeff();
  };
  return run_fista(problem, k, x0, options, prox_step, penalty);
}

SolverReport mixed_fista(const Matrix& y, const Dictionary& d, const MixingOperator& mixing, double alpha,
                         Index k, const Matrix& x0, const FistaOptions& options) {
  return mixed_fista(MscProblem(y, d, mixing), alpha, k, x0, options);
}

// ---------------------------------------------------------------- debias

SparseCodes debias(const MscProblem& problem, const Matrix& x, Index k, bool nonneg, double ridge) {
  check_x0(problem, x);
  if (k < 0) throw std::invalid_argument("debias: negative k");
  const Matrix truncated = prox::hard_threshold_columns(x, std::min(k, x.rows()));
  const Support support = Support::from_values(truncated);
  if (nonneg)
    return SparseCodes(fixed_support_nnls_gram(problem.dtd(), problem.dtym(), problem.mtm(), support, ridge));
  FixedSupportOptions opts;
  opts.ridge = ridge;
  return SparseCodes(fixed_support_ls_gram(problem.dtd(), problem.dtym(), problem.mtm(), support, opts));
}

SparseCodes debias(const Matrix& y, const Dictionary& d, const MixingOperator& mixing, const Matrix& x,
                   Index k, bool nonneg) {
  return debias(MscProblem(y, d, mixing), x, k, nonneg);
}

}  // namespace msc
