#pragma once

// Dense primitives shared by every solver: dictionaries, supports, the mixing
// operator (dense B or Khatri-Rao B (.) C) and the fixed-support least squares
// kernel.
//
// Matrices are Eigen column-major in memory, but every vectorization,
// unfolding and Khatri-Rao index in this library is row-first: entry (j, k)
// of an m1 x m2 block maps to position j * m2 + k.

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace msc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Raised on malformed shapes or arguments.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical routine cannot produce a meaningful answer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical zero used to read a support off a code matrix.
inline constexpr double kSupportTolerance = 1e-14;

/// Dictionary with unit-norm columns.
///
/// Built through normalize_columns(). Holds D, the column norms of the
/// original matrix (for de-normalizing codes), the Gram matrix D^T D and
/// sigma_max(D)^2. Immutable once constructed.
class Dictionary {
 public:
  Dictionary() = default;

  const Matrix& matrix() const { return atoms_; }
  const Vector& column_norms() const { return norms_; }
  const Matrix& gram() const { return gram_; }
  double spectral_norm_sq() const { return spectral_sq_; }

  Index signal_size() const { return atoms_.rows(); }
  Index atoms() const { return atoms_.cols(); }

 private:
  friend std::pair<Dictionary, Vector> normalize_columns(const Matrix& m);

  Matrix atoms_;
  Vector norms_;
  Matrix gram_;
  double spectral_sq_ = 0.0;
};

/// Per-column index sets of nonzero codes; indices strictly increasing.
struct Support {
  std::vector<std::vector<Index>> columns;

  Support() = default;
  explicit Support(std::size_t r) : columns(r) {}

  std::size_t rank() const { return columns.size(); }
  std::size_t total_size() const;
  bool contains(std::size_t column, Index atom) const;

  /// Entries with |x| > tol are nonzero.
  static Support from_values(const Matrix& x, double tol = kSupportTolerance);

  /// Throws DimensionError if a set is unsorted, repeated or out of [0, d).
  void validate(Index d) const;

  bool operator==(const Support&) const = default;
};

/// d x r code matrix together with its support.
struct SparseCodes {
  Matrix values;
  Support support;

  SparseCodes() = default;
  explicit SparseCodes(Matrix x)
      : values(std::move(x)), support(Support::from_values(values)) {}

  static SparseCodes zeros(Index d, Index r) { return SparseCodes(Matrix::Zero(d, r)); }
};

/// The known right factor of the model Y ~ D X M^T.
///
/// Either a dense m x r matrix B, or the Khatri-Rao product B (.) C of an
/// m1 x r and an m2 x r matrix, which is never materialized by the products
/// below.
class MixingOperator {
 public:
  enum class Kind { dense, khatri_rao };

  static MixingOperator dense(Matrix b);
  static MixingOperator khatri_rao(Matrix b, Matrix c);

  Kind kind() const { return kind_; }
  Index rank() const { return first_.cols(); }
  /// Row count of the effective matrix (m, or m1 * m2).
  Index rows() const;

  const Matrix& first() const { return first_; }
  const Matrix& second() const { return second_; }

  /// M^T M. For Khatri-Rao this is (B^T B) .* (C^T C).
  const Matrix& gram() const { return gram_; }

  /// Y * M for Y with rows() columns.
  Matrix right_apply(const Matrix& y) const;

  /// A * M^T for A with rank() columns; result has rows() columns.
  Matrix apply_transpose(const Matrix& a) const;

  /// Explicit effective matrix (tests and small problems only).
  Matrix materialize() const;

  /// Smallest singular value of the effective matrix.
  double smallest_singular_value() const;
  /// False when the smallest singular value is <= 1e-12.
  bool full_column_rank() const { return smallest_singular_value() > 1e-12; }

  /// sigma_max(M)^2, by power iteration on the Gram matrix.
  double spectral_norm_sq() const;

 private:
  Kind kind_ = Kind::dense;
  Matrix first_;
  Matrix second_;
  Matrix gram_;
};

/// Normalizes columns to unit l2 norm. Returns the dictionary and the
/// original norms. Throws DimensionError naming the first zero (or
/// underflowing) column.
std::pair<Dictionary, Vector> normalize_columns(const Matrix& m);

struct PowerIterationResult {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// sigma_max(M)^2 via power iteration on M^T M. Stops when the relative
/// change of the estimate falls below tol; after max_iter the current
/// estimate is returned with converged = false.
PowerIterationResult spectral_norm_sq(const Matrix& m, double tol = 1e-6, int max_iter = 500);

/// Largest eigenvalue of a symmetric positive semidefinite matrix, same
/// stopping rule as spectral_norm_sq.
PowerIterationResult largest_eigenvalue_psd(const Matrix& g, double tol = 1e-6, int max_iter = 500);

/// Columnwise Kronecker product; column l is B_l (x) C_l with entry (j, k)
/// at row j * m2 + k.
Matrix khatri_rao(const Matrix& b, const Matrix& c);

struct FixedSupportOptions {
  double ridge = 0.0;
  /// When set, a system with (estimated) condition number above 1e10 gets
  /// ridge = max(ridge, 1e-10 * trace / size).
  bool ridge_fallback = true;
};

/// Minimizer of ||Y - D X M^T||_F^2 over X with Supp(X) inside S.
///
/// The kr x kr normal system is assembled blockwise as v_ij * U[S_i, S_j]
/// with U = D^T D and V = M^T M, and right-hand side blocks D_{S_i}^T (Y M)_i.
SparseCodes fixed_support_ls(const Matrix& y, const Dictionary& d, const MixingOperator& mixing,
                             const Support& s, const FixedSupportOptions& options = {});

/// Same kernel on precomputed D^T D (d x d), D^T Y M (d x r) and M^T M.
Matrix fixed_support_ls_gram(const Matrix& dtd, const Matrix& dtym, const Matrix& mtm,
                             const Support& s, const FixedSupportOptions& options = {});

/// Nonnegative variant on precomputed products. A ridge of at least
/// 1e-10 * trace / size is always applied. Entries may end up zero, so the
/// returned support can be smaller than S.
Matrix fixed_support_nnls_gram(const Matrix& dtd, const Matrix& dtym, const Matrix& mtm,
                               const Support& s, double ridge = 0.0);

/// ||Y - D X M^T||_F^2 computed from the residual itself.
double residual_cost(const Matrix& y, const Matrix& d, const Matrix& x, const MixingOperator& mixing);
double residual_cost(const Matrix& y, const Dictionary& d, const Matrix& x,
                     const MixingOperator& mixing);

}  // namespace msc
