#include "sfpca/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace sfpca::io {

namespace {

std::vector<double> parse_row(const std::string& line, const std::string& path,
                              std::size_t lineno) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t comma = line.find(',', pos);
    if (comma == std::string::npos) comma = line.size();
    std::string tok = line.substr(pos, comma - pos);
    // trim
    std::size_t b = tok.find_first_not_of(" \t\r");
    std::size_t e = tok.find_last_not_of(" \t\r");
    if (b == std::string::npos) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": empty field");
    }
    tok = tok.substr(b, e - b + 1);
    try {
      std::size_t used = 0;
      double val = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(val);
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": not a number: '" + tok + "'");
    }
    pos = comma + 1;
    if (comma == line.size()) break;
  }
  return out;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

Eigen::MatrixXd read_csv_matrix(const std::string& path, bool skip_header) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  bool skipped = !skip_header;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    if (!skipped) {
      skipped = true;
      continue;
    }
    rows.push_back(parse_row(line, path, lineno));
    if (rows.size() > 1 && rows.back().size() != rows.front().size()) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": ragged row (expected " +
                       std::to_string(rows.front().size()) + " fields)");
    }
  }
  if (rows.empty()) throw ParseError(path + ": no data rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
  return m;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void write_csv_vector(const std::string& path, const Eigen::VectorXd& v) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out << format_double(v(i)) << '\n';
}

std::uint64_t file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::uint64_t h = 1469598103934665603ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace sfpca::io
