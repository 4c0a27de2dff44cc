#pragma once

// Mixed Sparse Coding solvers: min ||Y - D X M^T||_F^2 over columnwise
// k-sparse X, for a known dictionary D and mixing operator M.
//
// Every solver works on an MscProblem, which caches D^T D, D^T Y M, M^T M
// and ||Y||_F^2; the convenience overloads build one from (Y, D, M).

#include "msc/linalg.hpp"
#include "msc/prox.hpp"

#include <string>
#include <vector>

namespace msc {

enum class Termination { tolerance, max_iter, restart_all_columns };

std::string to_string(Termination t);

struct StoppingRule {
  double rel_tol = 1e-6;
  int max_iter = 1000;

  void validate() const;
};

struct SolverReport {
  SparseCodes codes;
  /// Iterate before the final fixed-support debiasing step.
  Matrix raw_codes;
  /// Objective per iteration, first entry at the initial point. Includes
  /// the penalty for the convex methods.
  std::vector<double> cost_trace;
  int iterations = 0;
  Termination termination = Termination::tolerance;
  double wall_time = 0.0;
  /// ||Y - D X M^T||_F^2 at the returned codes.
  double final_cost = 0.0;
};

/// Cached products for one MSC instance. Read-only after construction.
class MscProblem {
 public:
  MscProblem(const Matrix& y, const Dictionary& d, const MixingOperator& mixing);

  /// From precomputed pieces: D^T Y M (d x r) and ||Y||_F^2.
  MscProblem(const Dictionary& d, const MixingOperator& mixing, Matrix dtym, double y_norm_sq);

  // The problem keeps references to d and mixing; temporaries would dangle.
  MscProblem(const Matrix&, Dictionary&&, const MixingOperator&) = delete;
  MscProblem(const Matrix&, const Dictionary&, MixingOperator&&) = delete;
  MscProblem(const Matrix&, Dictionary&&, MixingOperator&&) = delete;
  MscProblem(Dictionary&&, const MixingOperator&, Matrix, double) = delete;
  MscProblem(const Dictionary&, MixingOperator&&, Matrix, double) = delete;

  const Dictionary& dictionary() const { return *dict_; }
  const MixingOperator& mixing() const { return *mixing_; }
  const Matrix& dtd() const { return dict_->gram(); }
  const Matrix& dtym() const { return dtym_; }
  const Matrix& mtm() const { return mixing_->gram(); }
  double y_norm_sq() const { return y_norm_sq_; }
  Index atoms() const { return dtym_.rows(); }
  Index rank() const { return dtym_.cols(); }

  /// sigma(D)^2 sigma(M)^2, the Lipschitz constant of the smooth part.
  double lipschitz() const { return lipschitz_; }

  /// ||Y - D X M^T||_F^2 expanded through the cached products (clamped at 0).
  double cost(const Matrix& x) const;
  /// D^T D X M^T M - D^T Y M.
  Matrix gradient(const Matrix& x) const;

 private:
  const Dictionary* dict_;
  const MixingOperator* mixing_;
  Matrix dtym_;
  double y_norm_sq_ = 0.0;
  double lipschitz_ = 0.0;
};

// ----------------------------------------------------------------- OMP

struct OmpResult {
  Vector x;
  std::vector<Index> support;  // sorted
};

/// Orthogonal Matching Pursuit, exactly k selections. Each step picks
/// argmax_j |D_j^T r| (smallest index on ties, selected atoms excluded) and
/// refits all selected coefficients by least squares.
OmpResult omp(const Vector& y, const Dictionary& d, Index k);

/// OMP on correlations h = D^T y and Gram G = D^T D only.
OmpResult omp_gram(const Vector& h, const Matrix& gram, Index k);

// ----------------------------------------------------------------- heuristics

/// Columnwise OMP on Y M (M^T M)^{-1}, then fixed-support least squares.
/// Throws NumericalError when M is rank deficient.
SolverReport trick_omp(const MscProblem& problem, Index k);
SolverReport trick_omp(const Matrix& y, const Dictionary& d, const MixingOperator& mixing, Index k);

/// (1 / sigma_min^{(2k)}(D)) * sqrt(delta + eps / sigma_min(B)^2), with
/// sigma_min^{(2k)} the smallest nonzero singular value over all 2k-column
/// submatrices. Throws std::invalid_argument when C(d, 2k) > 1e6.
double check_reduction_bound(const Matrix& d, const Matrix& b, Index k, double delta, double eps);

/// Smallest nonzero singular value over all column subsets of the given size.
double min_subset_singular_value(const Matrix& d, Index subset_size);

/// Accelerated iterative hard thresholding with stepsize 1 / lipschitz,
/// stopped on the raw residual, debiased on the final support.
SolverReport iht(const MscProblem& problem, Index k, const Matrix& x0, const StoppingRule& stop = {});
SolverReport iht(const Matrix& y, const Dictionary& d, const MixingOperator& mixing, Index k,
                 const Matrix& x0, const StoppingRule& stop = {});

/// Hierarchical OMP: block-coordinate sweeps, each column re-coded by OMP on
/// the deflated data; updates that raise the cost are replaced by least
/// squares on the previous support. Stops on the rule (evaluated per sweep)
/// or when every column is rejected in one sweep. Cost trace is
/// nonincreasing.
SolverReport homp(const MscProblem& problem, Index k, const Matrix& x0, const StoppingRule& stop = {});
SolverReport homp(const Matrix& y, const Dictionary& d, const MixingOperator& mixing, Index k,
                  const Matrix& x0, const StoppingRule& stop = {});

// ----------------------------------------------------------------- convex relaxations

/// lambda_{i,max} = ||(D^T Y M)_i||_inf.
prox::RegularizationVector lambda_max_block(const MscProblem& problem);
prox::RegularizationVector lambda_max_block(const Matrix& y, const Dictionary& d,
                                            const MixingOperator& mixing);
/// sum_i lambda_{i,max}.
double lambda_max_mixed(const MscProblem& problem);
double lambda_max_mixed(const Matrix& y, const Dictionary& d, const MixingOperator& mixing);

struct FistaOptions {
  StoppingRule stop;
  bool nonneg = false;
  /// Skip the HT_k truncation + debias (AO-DLRA runs it separately).
  bool skip_debias = false;
  /// Overrides 1 / lipschitz when positive.
  double stepsize = 0.0;
  double debias_ridge = 0.0;
};

/// FISTA on 1/2 ||Y - D X M^T||^2 + sum_i lambda_i ||X_i||_1 with
/// lambda_i = alpha_i * lambda_{i,max}; then HT_k support and debias.
/// The nonneg flag swaps the prox for max(X - eta lambda, 0) and debiases by
/// nonnegative least squares. alpha entries must lie in [0, 1].
SolverReport block_fista(const MscProblem& problem, const Vector& alpha, Index k, const Matrix& x0,
                         const FistaOptions& options = {});
SolverReport block_fista(const Matrix& y, const Dictionary& d, const MixingOperator& mixing,
                         const Vector& alpha, Index k, const Matrix& x0, const FistaOptions& options = {});

/// FISTA on 1/2 ||Y - D X M^T||^2 + lambda max_i ||X_i||_1 with
/// lambda = alpha * lambda_max_mixed; then HT_k support and debias.
SolverReport mixed_fista(const MscProblem& problem, double alpha, Index k, const Matrix& x0,
                         const FistaOptions& options = {});
SolverReport mixed_fista(const Matrix& y, const Dictionary& d, const MixingOperator& mixing,
                         double alpha, Index k, const Matrix& x0, const FistaOptions& options = {});

/// Least squares (or NNLS) restricted to the support of x, after truncating
/// each column to its k largest entries.
SparseCodes debias(const MscProblem& problem, const Matrix& x, Index k, bool nonneg, double ridge = 0.0);
SparseCodes debias(const Matrix& y, const Dictionary& d, const MixingOperator& mixing, const Matrix& x,
                   Index k, bool nonneg);

}  // namespace msc
