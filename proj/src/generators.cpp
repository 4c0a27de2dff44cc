#include "msc/generators.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace msc {

namespace {

Matrix uniform_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = uniform(rng);
  return m;
}

Vector gaussian_noise(Index size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector e(size);
  for (Index i = 0; i < size; ++i) e(i) = normal(rng);
  return e;
}

// Noise vector for a signal of squared norm `power`.
Vector scaled_noise(Index size, double power, double snr_db, std::uint64_t seed) {
  if (!(power > 0)) throw std::invalid_argument("add_noise_snr: signal is zero");
  Vector e = gaussian_noise(size, seed);
  const double target = power / std::pow(10.0, snr_db / 10.0);
  const double current = e.squaredNorm();
  if (!(current > 0)) throw NumericalError("add_noise_snr: degenerate noise draw");
  return e * std::sqrt(target / current);
}

}  // namespace

Matrix gen_dictionary_raw(Index n, Index d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw std::invalid_argument("gen_dictionary: dimensions must be positive");
  std::mt19937_64 rng(seed);
  return uniform_matrix(n, d, rng);
}

Dictionary gen_dictionary(Index n, Index d, std::uint64_t seed) {
  return normalize_columns(gen_dictionary_raw(n, d, seed)).first;
}

Matrix gen_mixing(Index m, Index r, double cond, std::uint64_t seed) {
  if (!(cond >= 1.0)) throw std::invalid_argument("gen_mixing: cond must be at least 1");
  if (r < 1 || m < r) throw std::invalid_argument("gen_mixing: need 1 <= r <= m");
  std::mt19937_64 rng(seed);
  const Matrix raw = uniform_matrix(m, r, rng);
  Eigen::JacobiSVD<Matrix> svd(raw, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector sv(r);
  if (r == 1)
    sv(0) = 1.0;
  else
    sv = Vector::LinSpaced(r, 1.0, 1.0 / cond);
  return svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
}

SparseCodes gen_codes(Index d, Index r, Index k, std::uint64_t seed, bool nonneg) {
  if (k < 0 || k > d) throw std::invalid_argument("gen_codes: need 0 <= k <= d");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Matrix x = Matrix::Zero(d, r);
  std::vector<Index> pool(static_cast<std::size_t>(d));
  for (Index i = 0; i < r; ++i) {
    std::iota(pool.begin(), pool.end(), Index{0});
    // partial Fisher-Yates: the first k slots are a uniform k-subset
    for (Index s = 0; s < k; ++s) {
      std::uniform_int_distribution<Index> pick(s, d - 1);
      std::swap(pool[static_cast<std::size_t>(s)], pool[static_cast<std::size_t>(pick(rng))]);
    }
    for (Index s = 0; s < k; ++s) {
      double v = nonneg ? uniform(rng) : normal(rng);
      // keep the drawn support exact
      while (std::abs(v) <= kSupportTolerance) v = nonneg ? uniform(rng) : normal(rng);
      x(pool[static_cast<std::size_t>(s)], i) = v;
    }
  }
  return SparseCodes(std::move(x));
}

Matrix add_noise_snr(const Matrix& y, double snr_db, std::uint64_t seed) {
  if (std::isinf(snr_db) && snr_db > 0) return y;
  if (std::isnan(snr_db)) throw std::invalid_argument("add_noise_snr: snr is NaN");
  const Vector e = scaled_noise(y.size(), y.squaredNorm(), snr_db, seed);
  return y + Eigen::Map<const Matrix>(e.data(), y.rows(), y.cols());
}

Tensor3 add_noise_snr(const Tensor3& t, double snr_db, std::uint64_t seed) {
  if (std::isinf(snr_db) && snr_db > 0) return t;
  if (std::isnan(snr_db)) throw std::invalid_argument("add_noise_snr: snr is NaN");
  const Vector e = scaled_noise(t.values().size(), t.squared_norm(), snr_db, seed);
  const auto [n, m1, m2] = t.dims();
  return Tensor3(n, m1, m2, t.values() + e);
}

}  // namespace msc
