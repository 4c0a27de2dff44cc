#pragma once

// Order-3 tensors, their unfoldings and a CPD baseline (ALS / HALS).
//
// Entry (i, j, k) of an n x m1 x m2 tensor is stored at i * m1 * m2 + j * m2 + k.

#include "msc/linalg.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace msc {

class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(Index n, Index m1, Index m2);
  /// Throws DimensionError when values.size() != n * m1 * m2.
  Tensor3(Index n, Index m1, Index m2, Vector values);

  std::array<Index, 3> dims() const { return {n_, m1_, m2_}; }
  Index dim(int mode) const;
  const Vector& values() const { return values_; }

  double& operator()(Index i, Index j, Index k) { return values_(offset(i, j, k)); }
  double operator()(Index i, Index j, Index k) const { return values_(offset(i, j, k)); }

  double squared_norm() const { return values_.squaredNorm(); }

 private:
  Index offset(Index i, Index j, Index k) const { return (i * m1_ + j) * m2_ + k; }

  Index n_ = 0;
  Index m1_ = 0;
  Index m2_ = 0;
  Vector values_;
};

/// n x (m1 m2), column j * m2 + k. A rank-one a o b o c unfolds to a (b kron c)^T.
Matrix unfold1(const Tensor3& t);
/// m1 x (n m2), column i * m2 + k. Satisfies T_(2) = B (A (.) C)^T.
Matrix unfold2(const Tensor3& t);
/// m2 x (n m1), column i * m1 + j. Satisfies T_(3) = C (A (.) B)^T.
Matrix unfold3(const Tensor3& t);

Tensor3 refold1(const Matrix& m, Index n, Index m1, Index m2);
Tensor3 refold2(const Matrix& m, Index n, Index m1, Index m2);
Tensor3 refold3(const Matrix& m, Index n, Index m1, Index m2);

struct CpdFactors {
  Matrix a;  // n x r
  Matrix b;  // m1 x r
  Matrix c;  // m2 x r

  Index rank() const { return a.cols(); }
  void validate() const;
};

/// Tensor with mode-1 unfolding A (B (.) C)^T.
Tensor3 cpd_reconstruct(const CpdFactors& f);

/// T_(1) (B (.) C), without forming B (.) C.
Matrix mttkrp(const Tensor3& t, const Matrix& b, const Matrix& c);

/// Matricized-tensor times Khatri-Rao product for the given mode (0, 1, 2),
/// using the other two factors of f.
Matrix mttkrp(const Tensor3& t, const CpdFactors& f, int mode);

/// ||T - [[A, B, C]]||_F^2.
double cpd_cost(const Tensor3& t, const CpdFactors& f);

struct CpdResult {
  CpdFactors factors;
  /// Cost after each sweep, first entry at the random start.
  std::vector<double> cost_trace;
  int iterations = 0;
};

/// Alternating least squares on A, B, C in that order (exact block updates),
/// or columnwise HALS with max(., 0) when nonneg is set. After each sweep
/// the columns of B and C are normalized and the scales moved into A. Stops
/// after `iters` sweeps or when the relative decrease drops below 1e-8.
CpdResult cpd_als(const Tensor3& t, Index r, int iters, bool nonneg, std::uint64_t seed);

/// One HALS pass over the columns of `factor` for the problem
/// min ||target - factor * other^T|| with factor >= 0, given
/// mtk = target * other and gram = other^T other. Columns that collapse to
/// zero are reset to 1e-16.
void hals_update(Matrix& factor, const Matrix& mtk, const Matrix& gram);

}  // namespace msc
