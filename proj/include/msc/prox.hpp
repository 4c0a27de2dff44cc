#pragma once

// Thresholding, projection and proximal operators used by the iterative
// solvers. All functions are pure.

#include "msc/linalg.hpp"

namespace msc::prox {

/// Per-column regularization weights lambda_i >= 0.
using RegularizationVector = Vector;

/// Keeps the k entries of largest magnitude. Ties keep the smaller index,
/// so the result is single-valued.
Vector hard_threshold_k(const Vector& x, Index k);

/// hard_threshold_k applied to every column.
Matrix hard_threshold_columns(const Matrix& x, Index k);

/// sign(x) * max(|x| - lambda, 0), elementwise.
Vector soft_threshold(const Vector& x, double lambda);

/// Column i shrunk by lambdas(i).
Matrix soft_threshold_columns(const Matrix& x, const RegularizationVector& lambdas);

/// argmin_Z 1/2 ||Z - X||_F^2 + lambda * max_i ||Z_i||_1.
///
/// The optimal Z clips every column onto an l1 ball of a common radius t;
/// t is found by bisection on [0, max_i ||X_i||_1] until the bracket is below
/// tol (relative to the largest column l1 norm).
Matrix prox_l11(const Matrix& x, double lambda, double tol = 1e-10);

/// max(x, 0).
Matrix project_nonneg(const Matrix& x);

/// max(x - lambda, 0).
Matrix nonneg_soft_threshold(const Matrix& x, double lambda);
Matrix nonneg_soft_threshold_columns(const Matrix& x, const RegularizationVector& lambdas);

/// Euclidean projection onto nonnegative k-sparse columns: the k largest
/// positive entries are kept.
Matrix nonneg_hard_threshold_columns(const Matrix& x, Index k);

}  // namespace msc::prox
