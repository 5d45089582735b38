#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace sfpca::io {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Comma-separated numeric matrix, row-major, no header unless skip_header.
Eigen::MatrixXd read_csv_matrix(const std::string& path,
                                bool skip_header = false);

/// Writes with 17 significant digits so a round trip is exact.
void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& m);
void write_csv_vector(const std::string& path, const Eigen::VectorXd& v);

std::string format_double(double x);

/// FNV-1a over the file bytes; used for run-manifest input digests.
std::uint64_t file_digest(const std::string& path);

}  // namespace sfpca::io
