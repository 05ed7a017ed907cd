#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "arpqn/problems.hpp"

namespace arpqn {

void write_matrix_csv(std::ostream& out, const Matrix& m, std::uint64_t seed) {
  out << "# " << m.rows() << ' ' << m.cols() << ' ' << seed << '\n';
  out << std::setprecision(17);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
}

void write_matrix_csv(const std::string& path, const Matrix& m, std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_matrix_csv(out, m, seed);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

MatrixFile read_matrix_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.empty() || line[0] != '#')
    throw std::runtime_error("matrix csv: missing '# rows cols seed' header");
  std::istringstream hdr(line.substr(1));
  long long rows = -1;
  long long cols = -1;
  std::uint64_t seed = 0;
  if (!(hdr >> rows >> cols >> seed) || rows < 0 || cols < 0)
    throw std::runtime_error("matrix csv: malformed header '" + line + "'");

  MatrixFile out{Matrix(rows, cols), seed};
  for (long long i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("matrix csv: too few rows");
    std::istringstream row(line);
    std::string cell;
    long long j = 0;
    while (std::getline(row, cell, ',')) {
      if (j >= cols) throw std::runtime_error("matrix csv: too many columns in row " +
                                              std::to_string(i));
      std::size_t used = 0;
      out.data(i, j) = std::stod(cell, &used);
      ++j;
    }
    if (j != cols) throw std::runtime_error("matrix csv: too few columns in row " +
                                            std::to_string(i));
  }
  return out;
}

MatrixFile read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_matrix_csv(in);
}

}  // namespace arpqn
