#include "msc/tensor.hpp"

#include <cmath>
#include <random>

namespace msc {

Tensor3::Tensor3(Index n, Index m1, Index m2) : Tensor3(n, m1, m2, Vector::Zero(n * m1 * m2)) {}

Tensor3::Tensor3(Index n, Index m1, Index m2, Vector values)
    : n_(n), m1_(m1), m2_(m2), values_(std::move(values)) {
  if (n < 0 || m1 < 0 || m2 < 0) throw DimensionError("Tensor3: negative dimension");
  if (values_.size() != n * m1 * m2)
    throw DimensionError("Tensor3: " + std::to_string(values_.size()) + " values for dims " +
                         std::to_string(n) + "x" + std::to_string(m1) + "x" + std::to_string(m2));
}

Index Tensor3::dim(int mode) const {
  switch (mode) {
    case 0: return n_;
    case 1: return m1_;
    case 2: return m2_;
  }
  throw std::invalid_argument("Tensor3::dim: mode must be 0, 1 or 2");
}

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Matrix unfold1(const Tensor3& t) {
  const auto [n, m1, m2] = t.dims();
  return Eigen::Map<const RowMajor>(t.values().data(), n, m1 * m2);
}

Matrix unfold2(const Tensor3& t) {
  const auto [n, m1, m2] = t.dims();
  Matrix out(m1, n * m2);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m1; ++j)
      for (Index k = 0; k < m2; ++k) out(j, i * m2 + k) = t(i, j, k);
  return out;
}

Matrix unfold3(const Tensor3& t) {
  const auto [n, m1, m2] = t.dims();
  Matrix out(m2, n * m1);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m1; ++j)
      for (Index k = 0; k < m2; ++k) out(k, i * m1 + j) = t(i, j, k);
  return out;
}

Tensor3 refold1(const Matrix& m, Index n, Index m1, Index m2) {
  if (m.rows() != n || m.cols() != m1 * m2) throw DimensionError("refold1: shape mismatch");
  Tensor3 t(n, m1, m2);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m1; ++j)
      for (Index k = 0; k < m2; ++k) t(i, j, k) = m(i, j * m2 + k);
  return t;
}

Tensor3 refold2(const Matrix& m, Index n, Index m1, Index m2) {
  if (m.rows() != m1 || m.cols() != n * m2) throw DimensionError("refold2: shape mismatch");
  Tensor3 t(n, m1, m2);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m1; ++j)
      for (Index k = 0; k < m2; ++k) t(i, j, k) = m(j, i * m2 + k);
  return t;
}

Tensor3 refold3(const Matrix& m, Index n, Index m1, Index m2) {
  if (m.rows() != m2 || m.cols() != n * m1) throw DimensionError("refold3: shape mismatch");
  Tensor3 t(n, m1, m2);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m1; ++j)
      for (Index k = 0; k < m2; ++k) t(i, j, k) = m(k, i * m1 + j);
  return t;
}

void CpdFactors::validate() const {
  if (b.cols() != a.cols() || c.cols() != a.cols())
    throw DimensionError("CPD factors have different column counts");
}

Tensor3 cpd_reconstruct(const CpdFactors& f) {
  f.validate();
  const Matrix unfolded = MixingOperator::khatri_rao(f.b, f.c).apply_transpose(f.a);
  return refold1(unfolded, f.a.rows(), f.b.rows(), f.c.rows());
}

Matrix mttkrp(const Tensor3& t, const Matrix& b, const Matrix& c) {
  if (b.rows() != t.dim(1) || c.rows() != t.dim(2) || b.cols() != c.cols())
    throw DimensionError("mttkrp: factor shapes do not match the tensor");
  return MixingOperator::khatri_rao(b, c).right_apply(unfold1(t));
}

Matrix mttkrp(const Tensor3& t, const CpdFactors& f, int mode) {
  f.validate();
  switch (mode) {
    case 0: return mttkrp(t, f.b, f.c);
    case 1:
      if (f.a.rows() != t.dim(0) || f.c.rows() != t.dim(2)) throw DimensionError("mttkrp: shape mismatch");
      return MixingOperator::khatri_rao(f.a, f.c).right_apply(unfold2(t));
    case 2:
      if (f.a.rows() != t.dim(0) || f.b.rows() != t.dim(1)) throw DimensionError("mttkrp: shape mismatch");
      return MixingOperator::khatri_rao(f.a, f.b).right_apply(unfold3(t));
  }
  throw std::invalid_argument("mttkrp: mode must be 0, 1 or 2");
}

double cpd_cost(const Tensor3& t, const CpdFactors& f) {
  f.validate();
  const Matrix fit = MixingOperator::khatri_rao(f.b, f.c).apply_transpose(f.a);
  return (unfold1(t) - fit).squaredNorm();
}

void hals_update(Matrix& factor, const Matrix& mtk, const Matrix& gram) {
  for (Index l = 0; l < factor.cols(); ++l) {
    if (!(gram(l, l) > 0)) continue;
    const Vector step = (mtk.col(l) - factor * gram.col(l)) / gram(l, l);
    factor.col(l) = (factor.col(l) + step).cwiseMax(0.0);
    if (factor.col(l).maxCoeff() <= 0.0) factor.col(l).setConstant(1e-16);
  }
}

namespace {

// factor = mtk * gram^{-1}, gram symmetric positive semidefinite.
void als_update(Matrix& factor, const Matrix& mtk, const Matrix& gram) {
  Eigen::LDLT<Matrix> ldlt(gram);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-12) {
    Matrix reg = gram;
    reg.diagonal().array() += 1e-12 * std::max(gram.trace(), 1e-300) / static_cast<double>(gram.rows());
    ldlt.compute(reg);
  }
  factor = ldlt.solve(mtk.transpose()).transpose();
}

void normalize_into_a(CpdFactors& f) {
  for (Index l = 0; l < f.rank(); ++l) {
    const double nb = f.b.col(l).norm();
    const double nc = f.c.col(l).norm();
    if (nb > 0) {
      f.b.col(l) /= nb;
      f.a.col(l) *= nb;
    }
    if (nc > 0) {
      f.c.col(l) /= nc;
      f.a.col(l) *= nc;
    }
  }
}

}  // namespace

CpdResult cpd_als(const Tensor3& t, Index r, int iters, bool nonneg, std::uint64_t seed) {
  if (r < 1) throw std::invalid_argument("cpd_als: rank must be at least 1");
  if (iters < 0) throw std::invalid_argument("cpd_als: negative iteration count");
  const auto [n, m1, m2] = t.dims();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&](Index rows) {
    Matrix m(rows, r);
    for (Index j = 0; j < r; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = nonneg ? uniform(rng) : normal(rng);
    return m;
  };

  CpdResult result;
  CpdFactors& f = result.factors;
  f.a = draw(n);
  f.b = draw(m1);
  f.c = draw(m2);
  double cost = cpd_cost(t, f);
  result.cost_trace.push_back(cost);

  for (int sweep = 1; sweep <= iters; ++sweep) {
    for (int mode = 0; mode < 3; ++mode) {
      Matrix& target = mode == 0 ? f.a : (mode == 1 ? f.b : f.c);
      const Matrix& p = mode == 0 ? f.b : f.a;
      const Matrix& q = mode == 2 ? f.b : f.c;
      const Matrix gram = (p.transpose() * p).cwiseProduct(q.transpose() * q);
      const Matrix mtk = mttkrp(t, f, mode);
      if (nonneg)
        hals_update(target, mtk, gram);
      else
        als_update(target, mtk, gram);
    }
    normalize_into_a(f);
    const double next = cpd_cost(t, f);
    result.cost_trace.push_back(next);
    result.iterations = sweep;
    const bool done = cost <= 0.0 || (cost - next) / cost < 1e-8;
    cost = next;
    if (done) break;
  }
  return result;
}

}  // namespace msc
