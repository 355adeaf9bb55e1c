#include "erpf/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "erpf/errors.hpp"

namespace erpf {

namespace {

struct Banner {
  std::string object;
  std::string format;
  std::string field;
  std::string symmetry;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

Banner read_banner(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty file");
  std::istringstream ss(line);
  std::string tag;
  Banner b;
  ss >> tag >> b.object >> b.format >> b.field >> b.symmetry;
  if (tag != "%%MatrixMarket") throw InputError(path.string() + ": missing %%MatrixMarket banner");
  b.object = lower(b.object);
  b.format = lower(b.format);
  b.field = lower(b.field);
  b.symmetry = lower(b.symmetry);
  if (b.object != "matrix") throw InputError(path.string() + ": unsupported object " + b.object);
  if (b.field != "real" && b.field != "integer") {
    throw InputError(path.string() + ": unsupported field " + b.field);
  }
  if (b.symmetry != "general" && b.symmetry != "symmetric") {
    throw InputError(path.string() + ": unsupported symmetry " + b.symmetry);
  }
  return b;
}

// Skips comment and blank lines, returns the next data line.
bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto p = line.find_first_not_of(" \t\r");
    if (p == std::string::npos || line[p] == '%') continue;
    return true;
  }
  return false;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

CsrMatrix read_matrix_market(const std::filesystem::path& path) {
  auto in = open_in(path);
  const Banner banner = read_banner(in, path);
  if (banner.format != "coordinate") {
    throw InputError(path.string() + ": expected coordinate format, got " + banner.format);
  }
  std::string line;
  if (!next_data_line(in, line)) throw InputError(path.string() + ": missing size line");
  Index rows = 0, cols = 0, entries = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> rows >> cols >> entries) || rows < 0 || cols < 0 || entries < 0) {
      throw InputError(path.string() + ": malformed size line");
    }
  }
  const bool symmetric = banner.symmetry == "symmetric";
  if (symmetric && rows != cols) throw InputError(path.string() + ": symmetric matrix must be square");
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(symmetric ? 2 * entries : entries));
  for (Index k = 0; k < entries; ++k) {
    if (!next_data_line(in, line)) {
      throw InputError(path.string() + ": expected " + std::to_string(entries) + " entries, found " +
                       std::to_string(k));
    }
    std::istringstream ss(line);
    Index i = 0, j = 0;
    double v = 0.0;
    if (!(ss >> i >> j >> v)) throw InputError(path.string() + ": malformed entry line " + line);
    if (i < 1 || i > rows || j < 1 || j > cols) {
      throw InputError(path.string() + ": entry index out of range: " + line);
    }
    triplets.push_back({i - 1, j - 1, v});
    if (symmetric && i != j) triplets.push_back({j - 1, i - 1, v});
  }
  return CsrMatrix::from_triplets(rows, cols, std::move(triplets));
}

void write_matrix_market(const std::filesystem::path& path, const CsrMatrix& m) {
  auto out = open_out(path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
  const auto o = m.row_offsets();
  const auto c = m.col_indices();
  const auto v = m.values();
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index k = o[static_cast<std::size_t>(i)]; k < o[static_cast<std::size_t>(i + 1)]; ++k) {
      out << (i + 1) << ' ' << (c[static_cast<std::size_t>(k)] + 1) << ' '
          << format_real(v[static_cast<std::size_t>(k)]) << '\n';
    }
  }
  if (!out) throw InputError("write failed: " + path.string());
}

Vector read_matrix_market_vector(const std::filesystem::path& path) {
  auto in = open_in(path);
  const Banner banner = read_banner(in, path);
  std::string line;
  if (!next_data_line(in, line)) throw InputError(path.string() + ": missing size line");
  std::istringstream ss(line);
  Index rows = 0, cols = 0;
  if (!(ss >> rows >> cols) || rows < 0 || cols != 1) {
    throw InputError(path.string() + ": vector files must be n x 1");
  }
  Vector v(static_cast<std::size_t>(rows), 0.0);
  if (banner.format == "array") {
    for (Index i = 0; i < rows; ++i) {
      if (!next_data_line(in, line)) throw InputError(path.string() + ": truncated vector");
      v[static_cast<std::size_t>(i)] = std::stod(line);
    }
  } else {
    Index entries = 0;
    if (!(ss >> entries)) throw InputError(path.string() + ": malformed size line");
    for (Index k = 0; k < entries; ++k) {
      if (!next_data_line(in, line)) throw InputError(path.string() + ": truncated vector");
      std::istringstream es(line);
      Index i = 0, j = 0;
      double x = 0.0;
      if (!(es >> i >> j >> x) || i < 1 || i > rows) throw InputError(path.string() + ": bad entry");
      v[static_cast<std::size_t>(i - 1)] += x;
    }
  }
  return v;
}

void write_matrix_market_vector(const std::filesystem::path& path, std::span<const double> v) {
  auto out = open_out(path);
  out << "%%MatrixMarket matrix array real general\n";
  out << v.size() << " 1\n";
  for (double x : v) out << format_real(x) << '\n';
  if (!out) throw InputError("write failed: " + path.string());
}

}  // namespace erpf
