#include "optlab/matrix_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace optlab {

std::string matrix_to_string(const CMat& m) {
  std::ostringstream out;
  out.precision(17);
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ' ';
      out << m(r, c).real() << ',' << m(r, c).imag();
    }
    out << '\n';
  }
  return out.str();
}

CMat matrix_from_string(const std::string& text) {
  std::istringstream in(text);
  Eigen::Index rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0)
    throw std::runtime_error("matrix_from_string: bad dimension line");
  CMat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      std::string tok;
      if (!(in >> tok)) throw std::runtime_error("matrix_from_string: truncated data");
      const auto comma = tok.find(',');
      if (comma == std::string::npos)
        throw std::runtime_error("matrix_from_string: entry missing comma: " + tok);
      try {
        m(r, c) = cplx(std::stod(tok.substr(0, comma)), std::stod(tok.substr(comma + 1)));
      } catch (const std::exception&) {
        throw std::runtime_error("matrix_from_string: bad entry: " + tok);
      }
    }
  return m;
}

void save_matrix(const CMat& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_matrix: cannot open " + path);
  out << matrix_to_string(m);
  if (!out) throw std::runtime_error("save_matrix: write failed for " + path);
}

CMat load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_matrix: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return matrix_from_string(buf.str());
}

}  // namespace optlab
