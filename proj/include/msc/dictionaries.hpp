#pragma once

#include "msc/linalg.hpp"

namespace msc {

/// Orthonormal 2D DCT-II basis of h x w patches. Pixel (x, y) is row
/// x * w + y; atom (p, q) is column p * w + q.
Dictionary build_dct2_dictionary(Index h, Index w);

/// Cubic B-splines sampled on n uniform points of [0, 1].
///
/// Atoms come in families: family K (K = 4, 5, ...) has K uniform knots
/// spanning [0, 1] and contributes its K + 2 cubic B-splines. Families are
/// added until d atoms are collected (the last one truncated). Atoms are
/// nonnegative and unit-norm. Throws std::invalid_argument when d < 4 or
/// when a family would need more knots than there are samples.
Dictionary build_bspline_dictionary(Index n, Index d);

}  // namespace msc
