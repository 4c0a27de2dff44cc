#include "msc/dictionaries.hpp"

#include <cmath>
#include <numbers>

namespace msc {

Dictionary build_dct2_dictionary(Index h, Index w) {
  if (h < 1 || w < 1) throw std::invalid_argument("build_dct2_dictionary: patch size must be positive");
  auto basis = [](Index size) {
    Matrix c(size, size);  // c(x, p)
    for (Index p = 0; p < size; ++p) {
      const double scale = p == 0 ? std::sqrt(1.0 / static_cast<double>(size)) : std::sqrt(2.0 / static_cast<double>(size));
      for (Index x = 0; x < size; ++x)
        c(x, p) = scale * std::cos(std::numbers::pi * (2.0 * static_cast<double>(x) + 1.0) * static_cast<double>(p) /
                                   (2.0 * static_cast<double>(size)));
    }
    return c;
  };
  const Matrix ch = basis(h);
  const Matrix cw = basis(w);
  Matrix d(h * w, h * w);
  for (Index p = 0; p < h; ++p)
    for (Index q = 0; q < w; ++q)
      for (Index x = 0; x < h; ++x)
        for (Index y = 0; y < w; ++y) d(x * w + y, p * w + q) = ch(x, p) * cw(y, q);
  return normalize_columns(d).first;
}

namespace {

// Uniform cubic B-spline on [0, 4).
double cubic_bspline(double u) {
  if (u < 0.0 || u >= 4.0) return 0.0;
  if (u < 1.0) return u * u * u / 6.0;
  if (u < 2.0) return (-3.0 * u * u * u + 12.0 * u * u - 12.0 * u + 4.0) / 6.0;
  if (u < 3.0) return (3.0 * u * u * u - 24.0 * u * u + 60.0 * u - 44.0) / 6.0;
  const double v = 4.0 - u;
  return v * v * v / 6.0;
}

}  // namespace

Dictionary build_bspline_dictionary(Index n, Index d) {
  if (d < 4) throw std::invalid_argument("build_bspline_dictionary: need d >= 4");
  if (n < 2) throw std::invalid_argument("build_bspline_dictionary: need at least 2 samples");
  Matrix atoms(n, d);
  Index filled = 0;
  for (Index knots = 4; filled < d; ++knots) {
    if (knots > n)
      throw std::invalid_argument("build_bspline_dictionary: " + std::to_string(d) + " atoms need more knots than the " +
                                  std::to_string(n) + " samples");
    const double step = 1.0 / static_cast<double>(knots - 1);
    for (Index j = 0; j < knots + 2 && filled < d; ++j, ++filled) {
      const double start = static_cast<double>(j - 3) * step;
      for (Index i = 0; i < n; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(n - 1);
        atoms(i, filled) = cubic_bspline((s - start) / step);
      }
    }
  }
  return normalize_columns(atoms).first;
}

}  // namespace msc
