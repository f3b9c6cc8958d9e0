#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "mck/matrix.hpp"

namespace mck {

namespace {

bool next_content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

}  // namespace

MatrixXd read_matrix(std::istream& in) {
  std::string line;
  if (!next_content_line(in, line)) throw std::runtime_error("matrix: missing order line");
  std::istringstream header(line);
  long long n = 0;
  std::string extra;
  if (!(header >> n) || (header >> extra)) throw std::runtime_error("matrix: bad order line");
  if (n < 1) throw std::runtime_error("matrix: order must be at least 1");

  MatrixXd m(n, n);
  for (long long i = 0; i < n; ++i) {
    if (!next_content_line(in, line))
      throw std::runtime_error("matrix: expected " + std::to_string(n) + " rows");
    std::istringstream row(line);
    long long j = 0;
    double v = 0;
    while (row >> v) {
      if (j == n) throw std::runtime_error("matrix: ragged row " + std::to_string(i));
      m(i, j++) = v;
    }
    if (!row.eof() || j != n) throw std::runtime_error("matrix: ragged row " + std::to_string(i));
  }
  return m;
}

void write_matrix(std::ostream& out, const MatrixXd& m) {
  require_square(m);
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << m.rows() << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << m(i, j);
    }
    out << '\n';
  }
  out.precision(old);
}

MatrixXd load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_matrix(in);
}

void save_matrix(const std::string& path, const MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  write_matrix(out, m);
}

}  // namespace mck
