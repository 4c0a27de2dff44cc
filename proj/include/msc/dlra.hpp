#pragma once

// Dictionary-based low-rank approximation: Y ~ D X B^T (matrix kinds) or
// Y_(1) ~ D X (B (.) C)^T (CPD kinds), with columnwise k-sparse X.
//
// Two engines share the same model and report types: ao_dlra (alternating
// optimization, Block-FISTA code updates with regularization tuning) and
// ipalm (inertial proximal alternating linearized minimization).

#include "msc/linalg.hpp"
#include "msc/solvers.hpp"
#include "msc/tensor.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace msc {

enum class DlraKind { matrix_factorization, nonneg_matrix_factorization, cpd, nonneg_cpd };

bool is_nonneg(DlraKind kind);
bool is_cpd(DlraKind kind);
std::string to_string(DlraKind kind);
/// Accepts dmf, dnmf, dcpd, nndcpd.
DlraKind parse_kind(const std::string& name);

struct ModeConstraint {
  Dictionary dictionary;
  Index k = 1;
};

struct DlraModel {
  DlraKind kind = DlraKind::matrix_factorization;
  Index rank = 1;
  /// Dictionary on the first mode (always present).
  ModeConstraint mode0;
  /// Optional dictionary on the second mode, CPD kinds only.
  std::optional<ModeConstraint> mode1;

  void validate() const;
};

/// Factors of a DLRA model. A = D x; for two-mode models b = D2 x2 is kept
/// in sync. c is empty for the matrix kinds.
struct DlraFactors {
  Matrix x;
  Matrix b;
  Matrix c;
  Matrix x2;
};

struct TunerConfig {
  /// Initial ratios alpha_i in [0, 1]; a single entry is broadcast to all
  /// columns.
  Vector alpha0 = Vector::Constant(1, 1e-2);
  Index tau = 20;
  double decrease_factor = 1.3;
  double increase_factor = 1.01;
  int max_tuner_rounds = 50;

  void validate() const;
};

struct DlraOptions {
  int l_max = 100;
  /// Inner Block-FISTA stopping rule.
  StoppingRule fista;
  /// Projected gradient iterations for nonnegative B updates.
  int nonneg_inner_iters = 50;
  /// Ridge added to every inner least squares solve.
  double ridge = 1e-12;
};

struct DlraReport {
  /// Iterate with the smallest cost seen after a full outer iteration.
  DlraFactors best;
  double best_cost = 0.0;
  /// Last iterate.
  DlraFactors last;
  /// ||Y - model||^2 after each outer iteration (ipalm: first entry at the
  /// initial point).
  std::vector<double> cost_trace;
  /// Best cost so far after each outer iteration.
  std::vector<double> best_cost_trace;
  /// Mode-0 regularization ratios after each outer iteration.
  std::vector<Vector> alpha_trace;
  /// Largest column nonzero count of the mode-0 codes before debiasing, per
  /// outer iteration.
  std::vector<Index> pre_debias_max_nnz;
  int iterations = 0;
  int tuner_failures = 0;
  std::vector<std::string> warnings;
};

/// Model data: a matrix for the matrix kinds, a tensor for the CPD kinds.
struct DlraData {
  Matrix matrix;
  Tensor3 tensor;
  bool is_tensor = false;

  static DlraData from_matrix(Matrix y) { return {std::move(y), {}, false}; }
  static DlraData from_tensor(Tensor3 t) { return {{}, std::move(t), true}; }
  double squared_norm() const { return is_tensor ? tensor.squared_norm() : matrix.squaredNorm(); }
};

/// Data-fit ||Y - model(f)||_F^2.
double dlra_cost(const DlraData& data, const DlraModel& model, const DlraFactors& f);

/// Entrywise standard normal factors (absolute values for nonneg kinds).
DlraFactors random_init(const DlraData& data, const DlraModel& model, std::uint64_t seed);

/// Alternating optimization. Per outer iteration: update the unconstrained
/// blocks (least squares, projected gradient for nonneg, ALS / HALS for
/// CPD), then the codes by Block-FISTA warm started at the previous codes
/// with the regularization tuned until every column has between k and
/// k + tau nonzeros, then least squares on that support, then best-iterate
/// bookkeeping. Two-mode models run the same code update on mode 1 in place
/// of the B update.
DlraReport ao_dlra(const DlraData& data, const DlraModel& model, const TunerConfig& tuner,
                   const DlraFactors& init, const DlraOptions& options = {});

/// iPALM with stepsize safeguard mu in (0, 1]. Stops after l_max iterations
/// or when the relative cost change drops below 1e-8.
DlraReport ipalm(const DlraData& data, const DlraModel& model, int l_max, double mu, const DlraFactors& init);

/// Unconstrained (or nonnegative) low-rank approximation followed by
/// columnwise OMP of its first factor (and second factor for two-mode
/// models). Codes are clipped at zero for nonneg kinds.
DlraFactors init_by_lra(const DlraData& data, const DlraModel& model, std::uint64_t seed, int lra_iters = 500);

/// Nonnegative matrix factorization Y ~ W H^T by HALS from a uniform random
/// start; stops after iters sweeps or at relative decrease below 1e-8.
std::pair<Matrix, Matrix> nmf_hals(const Matrix& y, Index r, int iters, std::uint64_t seed);

struct CompletionResult {
  /// Reconstructed missing rows, in the order given.
  Matrix missing_rows;
  /// ||Y_obs - D_obs X B^T||_F / ||Y_obs||_F on the observed rows.
  double observed_rel_residual = 0.0;
  /// Atoms dropped because they vanish on the observed rows.
  std::vector<Index> dropped_atoms;
  DlraReport report;
  std::vector<std::string> warnings;
};

struct CompletionConfig {
  Index rank = 1;
  Index k = 1;
  TunerConfig tuner;
  DlraOptions options;
  std::uint64_t seed = 0;
  int n_inits = 1;
};

/// Fits a DMF model on the observed rows of y (rows listed in `missing` are
/// ignored) with the row-restricted, renormalized dictionary, and predicts
/// the missing rows from the full dictionary rows.
CompletionResult complete_missing_rows(const Matrix& y, const Matrix& dictionary, const std::vector<Index>& missing,
                                       const CompletionConfig& config);

}  // namespace msc
