#pragma once

// File formats.
//   matrix: CSV, comma separated, no header, one row per line.
//   tensor: first line "dims: n m1 m2", then n*m1*m2 whitespace-separated
//           values, entry (i, j, k) at position i*m1*m2 + j*m2 + k.
//   index list: whitespace-separated nonnegative integers, '#' starts a
//           comment.

#include "msc/linalg.hpp"
#include "msc/tensor.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace msc {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Matrix read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Matrix& m);

Tensor3 read_tensor(const std::string& path);
void write_tensor(const std::string& path, const Tensor3& t);

std::vector<Index> read_index_list(const std::string& path);

/// True when the file starts with a "dims:" header.
bool looks_like_tensor(const std::string& path);

}  // namespace msc
