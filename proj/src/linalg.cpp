#include "msc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace msc {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using StridedSlice = Eigen::Map<const RowMajorMatrix, 0, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;
using MutableStridedSlice = Eigen::Map<RowMajorMatrix, 0, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;

// Row i of an n x (m1*m2) matrix viewed as a row-first m1 x m2 slice.
StridedSlice row_slice(const Matrix& y, Index i, Index m1, Index m2) {
  const Index n = y.rows();
  return StridedSlice(y.data() + i, m1, m2, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(m2 * n, n));
}

MutableStridedSlice row_slice(Matrix& y, Index i, Index m1, Index m2) {
  const Index n = y.rows();
  return MutableStridedSlice(y.data() + i, m1, m2,
                             Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(m2 * n, n));
}

Vector power_start(Index size) {
  Vector v(size);
  for (Index i = 0; i < size; ++i) v(i) = 1.0 + 0.01 * static_cast<double>(i % 97);
  return v.normalized();
}

struct NormalSystem {
  Matrix h;
  Vector g;
  std::vector<Index> offsets;
};

NormalSystem assemble(const Matrix& dtd, const Matrix& dtym, const Matrix& mtm, const Support& s) {
  const std::size_t r = s.rank();
  NormalSystem sys;
  sys.offsets.resize(r + 1, 0);
  for (std::size_t i = 0; i < r; ++i)
    sys.offsets[i + 1] = sys.offsets[i] + static_cast<Index>(s.columns[i].size());
  const Index total = sys.offsets[r];
  sys.h.resize(total, total);
  sys.g.resize(total);
  for (std::size_t i = 0; i < r; ++i) {
    const auto& si = s.columns[i];
    if (si.empty()) continue;
    const Index oi = sys.offsets[i];
    for (std::size_t j = 0; j < r; ++j) {
      const auto& sj = s.columns[j];
      if (sj.empty()) continue;
      sys.h.block(oi, sys.offsets[j], static_cast<Index>(si.size()), static_cast<Index>(sj.size())) =
          mtm(static_cast<Index>(i), static_cast<Index>(j)) * dtd(si, sj);
    }
    for (std::size_t a = 0; a < si.size(); ++a)
      sys.g(oi + static_cast<Index>(a)) = dtym(si[a], static_cast<Index>(i));
  }
  return sys;
}

Matrix scatter(const Vector& z, const Support& s, const std::vector<Index>& offsets, Index d) {
  Matrix x = Matrix::Zero(d, static_cast<Index>(s.rank()));
  for (std::size_t i = 0; i < s.rank(); ++i)
    for (std::size_t a = 0; a < s.columns[i].size(); ++a)
      x(s.columns[i][a], static_cast<Index>(i)) = z(offsets[i] + static_cast<Index>(a));
  return x;
}

void check_support_shapes(const Matrix& dtd, const Matrix& dtym, const Matrix& mtm, const Support& s) {
  if (dtd.rows() != dtd.cols() || dtym.rows() != dtd.rows() || mtm.rows() != mtm.cols() ||
      dtym.cols() != mtm.rows() || static_cast<Index>(s.rank()) != mtm.rows())
    throw DimensionError("fixed-support system: inconsistent shapes");
  s.validate(dtd.rows());
}

// Active-set solver for min 1/2 z'Hz - g'z subject to z >= 0 (Lawson-Hanson
// on the normal equations).
Vector nnls_normal(const Matrix& h, const Vector& g) {
  const Index k = g.size();
  Vector z = Vector::Zero(k);
  if (k == 0) return z;
  std::vector<bool> passive(static_cast<std::size_t>(k), false);
  const double tol = 1e-12 * std::max(1.0, g.cwiseAbs().maxCoeff());

  auto solve_passive = [&](Vector& s) {
    std::vector<Index> p;
    for (Index i = 0; i < k; ++i)
      if (passive[static_cast<std::size_t>(i)]) p.push_back(i);
    s.setZero(k);
    if (p.empty()) return;
    Matrix hp = h(p, p);
    Vector gp = g(p);
    Vector sp = hp.ldlt().solve(gp);
    for (std::size_t a = 0; a < p.size(); ++a) s(p[a]) = sp(static_cast<Index>(a));
  };

  Vector w = g - h * z;
  Vector s(k);
  for (Index outer = 0; outer < 3 * k + 10; ++outer) {
    Index best = -1;
    double best_w = tol;
    for (Index i = 0; i < k; ++i)
      if (!passive[static_cast<std::size_t>(i)] && w(i) > best_w) {
        best_w = w(i);
        best = i;
      }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;
    solve_passive(s);
    for (Index inner = 0; inner < 3 * k + 10; ++inner) {
      double step = 1.0;
      bool infeasible = false;
      for (Index i = 0; i < k; ++i)
        if (passive[static_cast<std::size_t>(i)] && s(i) <= 0.0) {
          infeasible = true;
          const double denom = z(i) - s(i);
          if (denom > 0.0) step = std::min(step, z(i) / denom);
        }
      if (!infeasible) break;
      z += step * (s - z);
      for (Index i = 0; i < k; ++i)
        if (passive[static_cast<std::size_t>(i)] && z(i) <= tol) {
          passive[static_cast<std::size_t>(i)] = false;
          z(i) = 0.0;
        }
      solve_passive(s);
    }
    z = s;
    w = g - h * z;
  }
  return z.cwiseMax(0.0);
}

}  // namespace

// ---------------------------------------------------------------- Support

std::size_t Support::total_size() const {
  std::size_t total = 0;
  for (const auto& c : columns) total += c.size();
  return total;
}

bool Support::contains(std::size_t column, Index atom) const {
  const auto& c = columns.at(column);
  return std::binary_search(c.begin(), c.end(), atom);
}

Support Support::from_values(const Matrix& x, double tol) {
  Support s(static_cast<std::size_t>(x.cols()));
  for (Index j = 0; j < x.cols(); ++j)
    for (Index i = 0; i < x.rows(); ++i)
      if (std::abs(x(i, j)) > tol) s.columns[static_cast<std::size_t>(j)].push_back(i);
  return s;
}

void Support::validate(Index d) const {
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const auto& c = columns[j];
    if (static_cast<Index>(c.size()) > d)
      throw DimensionError("support column " + std::to_string(j) + " larger than the dictionary");
    for (std::size_t a = 0; a < c.size(); ++a) {
      if (c[a] < 0 || c[a] >= d)
        throw DimensionError("support column " + std::to_string(j) + " has index out of range");
      if (a > 0 && c[a] <= c[a - 1])
        throw DimensionError("support column " + std::to_string(j) + " is not strictly increasing");
    }
  }
}

// ---------------------------------------------------------------- Dictionary

std::pair<Dictionary, Vector> normalize_columns(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) throw DimensionError("normalize_columns: empty matrix");
  if (!m.allFinite()) throw DimensionError("normalize_columns: non-finite entries");
  Dictionary dict;
  dict.atoms_ = m;
  dict.norms_.resize(m.cols());
  for (Index j = 0; j < m.cols(); ++j) {
    // Plain (non-rescaled) norm: a column whose squared norm underflows is
    // treated as zero.
    const double norm = m.col(j).norm();
    if (!(norm > std::numeric_limits<double>::min()))
      throw DimensionError("normalize_columns: column " + std::to_string(j) + " has zero norm");
    dict.norms_(j) = norm;
    dict.atoms_.col(j) /= norm;
  }
  dict.gram_ = dict.atoms_.transpose() * dict.atoms_;
  dict.spectral_sq_ = largest_eigenvalue_psd(dict.gram_).value;
  Vector norms = dict.norms_;
  return {std::move(dict), std::move(norms)};
}

// ---------------------------------------------------------------- spectra

PowerIterationResult largest_eigenvalue_psd(const Matrix& g, double tol, int max_iter) {
  if (g.rows() != g.cols()) throw DimensionError("largest_eigenvalue_psd: matrix not square");
  if (!(tol > 0)) throw std::invalid_argument("largest_eigenvalue_psd: tol must be positive");
  PowerIterationResult out;
  if (g.rows() == 0) return out;
  Vector v = power_start(g.rows());
  double estimate = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    Vector w = g * v;
    const double next = v.dot(w);
    const double wn = w.norm();
    out.iterations = it;
    if (wn == 0.0) {
      out.value = 0.0;
      out.converged = true;
      return out;
    }
    v = w / wn;
    if (it > 1 && std::abs(next - estimate) <= tol * std::abs(next)) {
      out.value = next;
      out.converged = true;
      return out;
    }
    estimate = next;
  }
  out.value = estimate;
  return out;
}

PowerIterationResult spectral_norm_sq(const Matrix& m, double tol, int max_iter) {
  if (m.size() == 0) throw DimensionError("spectral_norm_sq: empty matrix");
  if (!(tol > 0)) throw std::invalid_argument("spectral_norm_sq: tol must be positive");
  PowerIterationResult out;
  Vector v = power_start(m.cols());
  double estimate = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    Vector w = m.transpose() * (m * v);
    const double next = v.dot(w);
    const double wn = w.norm();
    out.iterations = it;
    if (wn == 0.0) {
      out.value = 0.0;
      out.converged = true;
      return out;
    }
    v = w / wn;
    if (it > 1 && std::abs(next - estimate) <= tol * std::abs(next)) {
      out.value = next;
      out.converged = true;
      return out;
    }
    estimate = next;
  }
  out.value = estimate;
  return out;
}

// ---------------------------------------------------------------- Khatri-Rao

Matrix khatri_rao(const Matrix& b, const Matrix& c) {
  if (b.cols() != c.cols())
    throw DimensionError("khatri_rao: column counts differ (" + std::to_string(b.cols()) + " vs " +
                         std::to_string(c.cols()) + ")");
  const Index m1 = b.rows();
  const Index m2 = c.rows();
  Matrix out(m1 * m2, b.cols());
  for (Index l = 0; l < b.cols(); ++l)
    for (Index j = 0; j < m1; ++j) out.col(l).segment(j * m2, m2) = b(j, l) * c.col(l);
  return out;
}

// ---------------------------------------------------------------- MixingOperator

MixingOperator MixingOperator::dense(Matrix b) {
  MixingOperator op;
  op.kind_ = Kind::dense;
  op.first_ = std::move(b);
  op.gram_ = op.first_.transpose() * op.first_;
  return op;
}

MixingOperator MixingOperator::khatri_rao(Matrix b, Matrix c) {
  if (b.cols() != c.cols()) throw DimensionError("khatri_rao operator: column counts differ");
  MixingOperator op;
  op.kind_ = Kind::khatri_rao;
  op.first_ = std::move(b);
  op.second_ = std::move(c);
  op.gram_ = (op.first_.transpose() * op.first_).cwiseProduct(op.second_.transpose() * op.second_);
  return op;
}

Index MixingOperator::rows() const {
  return kind_ == Kind::dense ? first_.rows() : first_.rows() * second_.rows();
}

Matrix MixingOperator::right_apply(const Matrix& y) const {
  if (y.cols() != rows()) throw DimensionError("MixingOperator::right_apply: shape mismatch");
  if (kind_ == Kind::dense) return y * first_;
  const Index m1 = first_.rows();
  const Index m2 = second_.rows();
  Matrix out(y.rows(), rank());
  for (Index i = 0; i < y.rows(); ++i) {
    const Matrix tc = row_slice(y, i, m1, m2) * second_;  // m1 x r
    out.row(i) = first_.cwiseProduct(tc).colwise().sum();
  }
  return out;
}

Matrix MixingOperator::apply_transpose(const Matrix& a) const {
  if (a.cols() != rank()) throw DimensionError("MixingOperator::apply_transpose: shape mismatch");
  if (kind_ == Kind::dense) return a * first_.transpose();
  const Index m1 = first_.rows();
  const Index m2 = second_.rows();
  Matrix out(a.rows(), m1 * m2);
  for (Index i = 0; i < a.rows(); ++i)
    row_slice(out, i, m1, m2) = first_ * a.row(i).asDiagonal() * second_.transpose();
  return out;
}

Matrix MixingOperator::materialize() const {
  return kind_ == Kind::dense ? first_ : msc::khatri_rao(first_, second_);
}

double MixingOperator::smallest_singular_value() const {
  if (rows() < rank()) return 0.0;
  if (kind_ == Kind::dense || rows() * rank() <= 1'000'000) {
    Eigen::JacobiSVD<Matrix> svd(materialize());
    return svd.singularValues().minCoeff();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram_, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, eig.eigenvalues().minCoeff()));
}

double MixingOperator::spectral_norm_sq() const { return largest_eigenvalue_psd(gram_).value; }

// ---------------------------------------------------------------- fixed support

Matrix fixed_support_ls_gram(const Matrix& dtd, const Matrix& dtym, const Matrix& mtm,
                             const Support& s, const FixedSupportOptions& options) {
  check_support_shapes(dtd, dtym, mtm, s);
  if (options.ridge < 0) throw std::invalid_argument("fixed_support_ls: negative ridge");
  NormalSystem sys = assemble(dtd, dtym, mtm, s);
  const Index total = sys.g.size();
  if (total == 0) return Matrix::Zero(dtd.rows(), mtm.rows());

  Matrix h = sys.h;
  h.diagonal().array() += options.ridge;
  Eigen::LLT<Matrix> llt(h);
  const bool factored = llt.info() == Eigen::Success;
  const bool well_conditioned = factored && llt.rcond() >= 1e-10;
  if (!well_conditioned) {
    if (options.ridge_fallback) {
      const double ridge =
          std::max(options.ridge, 1e-10 * sys.h.trace() / static_cast<double>(total));
      h = sys.h;
      h.diagonal().array() += ridge;
      llt.compute(h);
      if (llt.info() != Eigen::Success)
        throw NumericalError("fixed_support_ls: system singular even after ridge fallback");
    } else if (!factored) {
      throw NumericalError("fixed_support_ls: singular normal system and ridge fallback disabled");
    }
  }
  return scatter(llt.solve(sys.g), s, sys.offsets, dtd.rows());
}

Matrix fixed_support_nnls_gram(const Matrix& dtd, const Matrix& dtym, const Matrix& mtm,
                               const Support& s, double ridge) {
  check_support_shapes(dtd, dtym, mtm, s);
  NormalSystem sys = assemble(dtd, dtym, mtm, s);
  const Index total = sys.g.size();
  if (total == 0) return Matrix::Zero(dtd.rows(), mtm.rows());
  const double applied = std::max(ridge, 1e-10 * sys.h.trace() / static_cast<double>(total));
  sys.h.diagonal().array() += applied;
  return scatter(nnls_normal(sys.h, sys.g), s, sys.offsets, dtd.rows());
}

SparseCodes fixed_support_ls(const Matrix& y, const Dictionary& d, const MixingOperator& mixing,
                             const Support& s, const FixedSupportOptions& options) {
  if (y.rows() != d.signal_size() || y.cols() != mixing.rows())
    throw DimensionError("fixed_support_ls: data shape does not match dictionary and mixing");
  const Matrix dtym = d.matrix().transpose() * mixing.right_apply(y);
  return SparseCodes(fixed_support_ls_gram(d.gram(), dtym, mixing.gram(), s, options));
}

// ---------------------------------------------------------------- residual

double residual_cost(const Matrix& y, const Matrix& d, const Matrix& x, const MixingOperator& mixing) {
  if (d.cols() != x.rows() || x.cols() != mixing.rank() || y.rows() != d.rows() ||
      y.cols() != mixing.rows())
    throw DimensionError("residual_cost: shape mismatch");
  const Matrix a = d * x;
  return (y - mixing.apply_transpose(a)).squaredNorm();
}

double residual_cost(const Matrix& y, const Dictionary& d, const Matrix& x,
                     const MixingOperator& mixing) {
  return residual_cost(y, d.matrix(), x, mixing);
}

}  // namespace msc
