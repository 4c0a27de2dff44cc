#include "msc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace msc {

std::vector<Index> max_weight_assignment(const Matrix& weights) {
  const Index n = weights.rows();
  if (weights.cols() != n) throw DimensionError("max_weight_assignment: matrix must be square");
  if (n == 0) return {};
  // Hungarian algorithm (potentials form) on cost = max - weight, 1-based.
  const double top = weights.maxCoeff();
  auto cost = [&](Index i, Index j) { return top - weights(i - 1, j - 1); };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<Index> p(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
    std::vector<bool> used(static_cast<std::size_t>(n + 1), false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const Index i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0, j) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const Index j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Index> assignment(static_cast<std::size_t>(n), 0);
  for (Index j = 1; j <= n; ++j) assignment[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return assignment;
}

double support_recovery(const Support& estimated, const Support& truth, bool match_columns) {
  if (estimated.rank() != truth.rank()) throw DimensionError("support_recovery: different column counts");
  const std::size_t r = truth.rank();
  auto overlap = [&](std::size_t est, std::size_t tru) {
    const auto& a = estimated.columns[est];
    const auto& b = truth.columns[tru];
    std::size_t count = 0;
    for (Index idx : b)
      if (std::find(a.begin(), a.end(), idx) != a.end()) ++count;
    return count;
  };
  const std::size_t total = truth.total_size();
  if (total == 0) return estimated.total_size() == 0 ? 100.0 : 0.0;

  std::size_t found = 0;
  if (!match_columns) {
    for (std::size_t i = 0; i < r; ++i) found += overlap(i, i);
  } else {
    Matrix w(static_cast<Index>(r), static_cast<Index>(r));
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j)
        w(static_cast<Index>(i), static_cast<Index>(j)) = static_cast<double>(overlap(j, i));
    const std::vector<Index> assign = max_weight_assignment(w);
    for (std::size_t i = 0; i < r; ++i) found += overlap(static_cast<std::size_t>(assign[i]), i);
  }
  return 100.0 * static_cast<double>(found) / static_cast<double>(total);
}

SamResult sam(const Matrix& y, const Matrix& y_hat, const std::vector<Index>& rows) {
  if (y.rows() != y_hat.rows() || y.cols() != y_hat.cols()) throw DimensionError("sam: shape mismatch");
  SamResult out;
  double sum = 0.0;
  int used = 0;
  for (Index i : rows) {
    if (i < 0 || i >= y.rows()) throw DimensionError("sam: row index out of range");
    const double na = y.row(i).norm();
    const double nb = y_hat.row(i).norm();
    if (!(na > 0) || !(nb > 0)) {
      ++out.skipped;
      continue;
    }
    const double c = std::clamp(y.row(i).dot(y_hat.row(i)) / (na * nb), -1.0, 1.0);
    sum += std::acos(c);
    ++used;
  }
  out.value = used > 0 ? sum / used : 0.0;
  return out;
}

double rel_error(const Matrix& y, const Matrix& y_hat) {
  if (y.rows() != y_hat.rows() || y.cols() != y_hat.cols()) throw DimensionError("rel_error: shape mismatch");
  const double ny = y.norm();
  if (!(ny > 0)) throw std::invalid_argument("rel_error: reference is zero");
  return (y - y_hat).norm() / ny;
}

}  // namespace msc
