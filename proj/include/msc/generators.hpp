#pragma once

// Synthetic MSC / DLRA instances. Every generator is a pure function of its
// seed.

#include "msc/linalg.hpp"
#include "msc/tensor.hpp"

#include <cstdint>

namespace msc {

/// n x d matrix with i.i.d. Uniform[0, 1] entries (before normalization).
Matrix gen_dictionary_raw(Index n, Index d, std::uint64_t seed);
/// gen_dictionary_raw with unit-norm columns.
Dictionary gen_dictionary(Index n, Index d, std::uint64_t seed);

/// m x r matrix U diag(linspace(1, 1/cond, r)) V^T, where U, V are the
/// singular vectors of a Uniform[0, 1] draw. Requires m >= r and cond >= 1.
Matrix gen_mixing(Index m, Index r, double cond, std::uint64_t seed);

/// d x r codes; each column gets k atoms drawn uniformly without
/// replacement, with N(0, 1) values (Uniform[0, 1] when nonneg).
SparseCodes gen_codes(Index d, Index r, Index k, std::uint64_t seed, bool nonneg = false);

/// Y + E with Gaussian E rescaled so that 10 log10(||Y||^2 / ||E||^2) equals
/// snr_db exactly. snr_db = +inf returns Y.
Matrix add_noise_snr(const Matrix& y, double snr_db, std::uint64_t seed);
Tensor3 add_noise_snr(const Tensor3& t, double snr_db, std::uint64_t seed);

}  // namespace msc
