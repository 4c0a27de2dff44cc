#include "msc/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace msc {

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

double parse_double(const std::string& token, const std::string& path, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  // trailing spaces are allowed, anything else is not
  if (used == 0 || token.find_first_not_of(" \t\r", used) != std::string::npos)
    throw IoError(path + ":" + std::to_string(line) + ": not a number: '" + token + "'");
  return v;
}

std::string format(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(parse_double(cell, path, lineno));
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(rows.front().size()) +
                    " columns, got " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(path + ": empty matrix file");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out = open_out(path);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

Tensor3 read_tensor(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string header;
  if (!std::getline(in, header)) throw IoError(path + ": empty tensor file");
  std::stringstream hs(header);
  std::string tag;
  long long n = -1, m1 = -1, m2 = -1;
  hs >> tag >> n >> m1 >> m2;
  if (tag != "dims:" || !hs || n < 0 || m1 < 0 || m2 < 0)
    throw IoError(path + ":1: expected header 'dims: n m1 m2'");
  Vector values(n * m1 * m2);
  std::string token;
  Index count = 0;
  while (in >> token) {
    if (count == values.size()) throw IoError(path + ": more values than dims allow");
    values(count++) = parse_double(token, path, 0);
  }
  if (count != values.size())
    throw IoError(path + ": expected " + std::to_string(values.size()) + " values, found " + std::to_string(count));
  return Tensor3(n, m1, m2, std::move(values));
}

void write_tensor(const std::string& path, const Tensor3& t) {
  std::ofstream out = open_out(path);
  const auto [n, m1, m2] = t.dims();
  out << "dims: " << n << ' ' << m1 << ' ' << m2 << '\n';
  const Vector& v = t.values();
  for (Index i = 0; i < v.size(); ++i) out << format(v(i)) << ((i + 1) % m2 == 0 ? '\n' : ' ');
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::vector<Index> read_index_list(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<Index> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::stringstream ss(line);
    std::string token;
    while (ss >> token) {
      long long v = 0;
      auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc() || ptr != token.data() + token.size() || v < 0)
        throw IoError(path + ":" + std::to_string(lineno) + ": not a row index: '" + token + "'");
      out.push_back(static_cast<Index>(v));
    }
  }
  return out;
}

bool looks_like_tensor(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string head;
  in >> head;
  return head == "dims:";
}

}  // namespace msc
