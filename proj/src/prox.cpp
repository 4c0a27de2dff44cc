#include "msc/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace msc::prox {

namespace {

// Shrinkage level theta >= 0 with sum_j max(|x_j| - theta, 0) = radius, i.e.
// the soft threshold that projects x onto the l1 ball of that radius.
// Returns 0 when x is already inside the ball.
double l1_ball_threshold(const std::vector<double>& sorted_abs_desc, double l1, double radius) {
  if (l1 <= radius) return 0.0;
  if (radius <= 0.0) return sorted_abs_desc.empty() ? 0.0 : sorted_abs_desc.front();
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < sorted_abs_desc.size(); ++j) {
    cumulative += sorted_abs_desc[j];
    const double candidate = (cumulative - radius) / static_cast<double>(j + 1);
    if (j + 1 == sorted_abs_desc.size() || sorted_abs_desc[j + 1] <= candidate) {
      theta = candidate;
      break;
    }
  }
  return std::max(theta, 0.0);
}

}  // namespace

Vector hard_threshold_k(const Vector& x, Index k) {
  const Index n = x.size();
  if (k < 0 || k > n) throw std::invalid_argument("hard_threshold_k: k out of range");
  if (k == n) return x;
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Index a, Index b) {
    const double fa = std::abs(x(a));
    const double fb = std::abs(x(b));
    return fa > fb || (fa == fb && a < b);
  });
  Vector out = Vector::Zero(n);
  for (Index i = 0; i < k; ++i) out(order[static_cast<std::size_t>(i)]) = x(order[static_cast<std::size_t>(i)]);
  return out;
}

Matrix hard_threshold_columns(const Matrix& x, Index k) {
  Matrix out(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) out.col(j) = hard_threshold_k(x.col(j), k);
  return out;
}

Vector soft_threshold(const Vector& x, double lambda) {
  if (lambda < 0) throw std::invalid_argument("soft_threshold: negative lambda");
  return x.unaryExpr([lambda](double v) {
    const double mag = std::abs(v) - lambda;
    return mag > 0.0 ? std::copysign(mag, v) : 0.0;
  });
}

Matrix soft_threshold_columns(const Matrix& x, const RegularizationVector& lambdas) {
  if (lambdas.size() != x.cols()) throw DimensionError("soft_threshold_columns: lambda length mismatch");
  Matrix out(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) out.col(j) = soft_threshold(x.col(j), lambdas(j));
  return out;
}

Matrix prox_l11(const Matrix& x, double lambda, double tol) {
  if (lambda < 0) throw std::invalid_argument("prox_l11: negative lambda");
  if (!(tol > 0)) throw std::invalid_argument("prox_l11: tol must be positive");
  const Index r = x.cols();
  if (lambda == 0.0 || x.size() == 0) return x;

  std::vector<std::vector<double>> sorted(static_cast<std::size_t>(r));
  std::vector<double> l1(static_cast<std::size_t>(r));
  double sum_inf = 0.0;
  double max_l1 = 0.0;
  for (Index j = 0; j < r; ++j) {
    auto& s = sorted[static_cast<std::size_t>(j)];
    s.resize(static_cast<std::size_t>(x.rows()));
    for (Index i = 0; i < x.rows(); ++i) s[static_cast<std::size_t>(i)] = std::abs(x(i, j));
    std::sort(s.begin(), s.end(), std::greater<>());
    l1[static_cast<std::size_t>(j)] = std::accumulate(s.begin(), s.end(), 0.0);
    sum_inf += s.empty() ? 0.0 : s.front();
    max_l1 = std::max(max_l1, l1[static_cast<std::size_t>(j)]);
  }
  // Dual certificate: zero is optimal iff lambda >= sum_i ||X_i||_inf, up to
  // the rounding error of the sum (a scaled lambda_max lands within an ulp).
  const double sum_slack = 2.0 * static_cast<double>(r) * std::numeric_limits<double>::epsilon();
  if (lambda >= sum_inf * (1.0 - sum_slack)) return Matrix::Zero(x.rows(), r);

  // Total shrinkage spent at radius t; nonincreasing in t.
  auto total_shrink = [&](double t) {
    double total = 0.0;
    for (Index j = 0; j < r; ++j)
      total += l1_ball_threshold(sorted[static_cast<std::size_t>(j)], l1[static_cast<std::size_t>(j)], t);
    return total;
  };

  double lo = 0.0;
  double hi = max_l1;
  const double width = tol * std::max(1.0, max_l1);
  while (hi - lo > width) {
    const double mid = 0.5 * (lo + hi);
    if (total_shrink(mid) > lambda)
      lo = mid;
    else
      hi = mid;
  }
  const double radius = 0.5 * (lo + hi);

  Matrix out(x.rows(), r);
  for (Index j = 0; j < r; ++j) {
    const double theta =
        l1_ball_threshold(sorted[static_cast<std::size_t>(j)], l1[static_cast<std::size_t>(j)], radius);
    out.col(j) = soft_threshold(x.col(j), theta);
  }
  return out;
}

Matrix project_nonneg(const Matrix& x) { return x.cwiseMax(0.0); }

Matrix nonneg_soft_threshold(const Matrix& x, double lambda) {
  if (lambda < 0) throw std::invalid_argument("nonneg_soft_threshold: negative lambda");
  return (x.array() - lambda).cwiseMax(0.0).matrix();
}

Matrix nonneg_soft_threshold_columns(const Matrix& x, const RegularizationVector& lambdas) {
  if (lambdas.size() != x.cols())
    throw DimensionError("nonneg_soft_threshold_columns: lambda length mismatch");
  Matrix out(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) out.col(j) = (x.col(j).array() - lambdas(j)).cwiseMax(0.0).matrix();
  return out;
}

Matrix nonneg_hard_threshold_columns(const Matrix& x, Index k) {
  return hard_threshold_columns(project_nonneg(x), k);
}

}  // namespace msc::prox
