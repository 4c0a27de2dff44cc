#pragma once

#include "msc/linalg.hpp"

#include <vector>

namespace msc {

/// 100 * |S_est intersect S_true| / |S_true|, column by column. With
/// match_columns the estimated columns are first assigned to the true ones
/// by a maximum-overlap matching. Two empty supports score 100.
double support_recovery(const Support& estimated, const Support& truth, bool match_columns = false);

/// Maximum-weight perfect assignment on a square matrix: result[i] is the
/// column assigned to row i.
std::vector<Index> max_weight_assignment(const Matrix& weights);

struct SamResult {
  /// Mean angle in radians over the rows that could be compared.
  double value = 0.0;
  /// Rows skipped because one of the two vectors is zero.
  int skipped = 0;
};

/// Spectral angle between rows of y and y_hat, averaged over `rows`.
SamResult sam(const Matrix& y, const Matrix& y_hat, const std::vector<Index>& rows);

/// ||Y - Y_hat||_F / ||Y||_F.
double rel_error(const Matrix& y, const Matrix& y_hat);

}  // namespace msc
