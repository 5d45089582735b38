#include "sfpca/structmat.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sfpca/io.hpp"
#include "sfpca/rng.hpp"

namespace sfpca {

namespace {

Eigen::SparseMatrix<double> difference_gram(int p, int order) {
  // Stencil rows of D are the binomial coefficients of (1-z)^order.
  std::vector<double> stencil;
  if (order == 2) {
    stencil = {1.0, -2.0, 1.0};
  } else {
    stencil = {1.0, -4.0, 6.0, -4.0, 1.0};
  }
  const int rows = p - order;
  Eigen::SparseMatrix<double> d(rows, p);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(rows) * stencil.size());
  for (int r = 0; r < rows; ++r)
    for (int k = 0; k <= order; ++k)
      trips.emplace_back(r, r + k, stencil[static_cast<std::size_t>(k)]);
  d.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseMatrix<double> omega = d.transpose() * d;
  omega.makeCompressed();
  return omega;
}

}  // namespace

std::string to_string(StructureKind kind) {
  switch (kind) {
    case StructureKind::ChainDiff2:
      return "chain-diff2";
    case StructureKind::ChainDiff4:
      return "chain-diff4";
    case StructureKind::GridDiff2:
      return "grid-diff2";
    case StructureKind::UserSupplied:
      return "user-supplied";
  }
  return "unknown";
}

StructureMatrix::StructureMatrix(int dim, StructureKind kind)
    : dim_(dim), kind_(kind) {}

StructureMatrix StructureMatrix::chain_diff(int p, int order) {
  if (order != 2 && order != 4)
    throw std::invalid_argument("chain_diff: order must be 2 or 4");
  if (p <= order)
    throw std::invalid_argument("chain_diff: dimension " + std::to_string(p) +
                                " too small for order " +
                                std::to_string(order));
  StructureMatrix m(p, order == 2 ? StructureKind::ChainDiff2
                                  : StructureKind::ChainDiff4);
  m.sparse_ = difference_gram(p, order);
  return m;
}

StructureMatrix StructureMatrix::grid_diff(int rows, int cols) {
  if (rows < 3 || cols < 3)
    throw std::invalid_argument("grid_diff: grid must be at least 3x3");
  // Row-major vectorization: entry (r,c) at index r*cols + c.
  const Eigen::SparseMatrix<double> row_omega = difference_gram(cols, 2);
  const Eigen::SparseMatrix<double> col_omega = difference_gram(rows, 2);
  const int dim = rows * cols;
  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < row_omega.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(row_omega, k); it; ++it)
      for (int r = 0; r < rows; ++r)
        trips.emplace_back(r * cols + static_cast<int>(it.row()),
                           r * cols + static_cast<int>(it.col()), it.value());
  for (int k = 0; k < col_omega.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(col_omega, k); it; ++it)
      for (int c = 0; c < cols; ++c)
        trips.emplace_back(static_cast<int>(it.row()) * cols + c,
                           static_cast<int>(it.col()) * cols + c, it.value());
  StructureMatrix m(dim, StructureKind::GridDiff2);
  m.sparse_.resize(dim, dim);
  m.sparse_.setFromTriplets(trips.begin(), trips.end());
  m.sparse_.makeCompressed();
  return m;
}

StructureMatrix StructureMatrix::zero(int dim) {
  if (dim < 1) throw std::invalid_argument("zero: dim must be positive");
  StructureMatrix m(dim, StructureKind::UserSupplied);
  m.sparse_.resize(dim, dim);
  return m;
}

StructureMatrix StructureMatrix::from_dense(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("structure matrix must be square");
  const double scale = m.cwiseAbs().maxCoeff();
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (scale > 0 && asym > 1e-8 * scale)
    throw std::invalid_argument("structure matrix asymmetric beyond 1e-8 relative");
  StructureMatrix out(static_cast<int>(m.rows()), StructureKind::UserSupplied);
  out.use_dense_ = true;
  out.dense_ = 0.5 * (m + m.transpose());

  const double lam_max = largest_eigenvalue(out.dense_).value;
  // Smallest eigenvalue via the shifted operator lam_max*I - Omega.
  const Eigen::MatrixXd& dm = out.dense_;
  EigEstimate shifted = largest_eigenvalue(
      [&](const Eigen::VectorXd& x) {
        return (lam_max * x - dm * x).eval();
      },
      out.dim_);
  const double lam_min = lam_max - shifted.value;
  if (lam_min < -1e-8 * std::max(lam_max, 1.0))
    throw std::invalid_argument(
        "structure matrix is indefinite (smallest eigenvalue ~ " +
        std::to_string(lam_min) + ")");
  // Probe vectors as a direct check of the quadratic form.
  CounterRng rng(0x5eed5eedULL);
  for (int probe = 0; probe < 32; ++probe) {
    Eigen::VectorXd z(out.dim_);
    for (int i = 0; i < out.dim_; ++i) z(i) = rng.next_normal();
    if (out.quad_form(z) < -1e-10 * z.squaredNorm())
      throw std::invalid_argument("structure matrix fails PSD probe");
  }
  return out;
}

StructureMatrix StructureMatrix::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io::ParseError("cannot open " + path);
  std::string first;
  std::getline(in, first);
  if (first.rfind("# coo", 0) == 0) {
    std::istringstream hdr(first.substr(5));
    int dim = 0;
    if (!(hdr >> dim) || dim < 1)
      throw io::ParseError(path + ": bad coo header");
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      for (char& c : line)
        if (c == ',') c = ' ';
      std::istringstream row(line);
      int i = 0, j = 0;
      double val = 0;
      if (!(row >> i >> j >> val) || i < 0 || j < 0 || i >= dim || j >= dim)
        throw io::ParseError(path + ":" + std::to_string(lineno) +
                             ": bad coo entry");
      m(i, j) += val;
    }
    return from_dense(m);
  }
  return from_dense(io::read_csv_matrix(path));
}

Eigen::VectorXd StructureMatrix::multiply(const Eigen::VectorXd& x) const {
  if (x.size() != dim_)
    throw std::invalid_argument("structure matrix dimension mismatch");
  return use_dense_ ? (dense_ * x).eval() : (sparse_ * x).eval();
}

double StructureMatrix::quad_form(const Eigen::VectorXd& x) const {
  return x.dot(multiply(x));
}

double StructureMatrix::coeff(int i, int j) const {
  return use_dense_ ? dense_(i, j) : sparse_.coeff(i, j);
}

Eigen::MatrixXd StructureMatrix::dense() const {
  return use_dense_ ? dense_ : Eigen::MatrixXd(sparse_);
}

Eigen::MatrixXd StructureMatrix::submatrix(
    const std::vector<int>& indices) const {
  const auto k = static_cast<Eigen::Index>(indices.size());
  Eigen::MatrixXd out(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b)
      out(a, b) = coeff(indices[static_cast<std::size_t>(a)],
                        indices[static_cast<std::size_t>(b)]);
  return out;
}

double StructureMatrix::diag_sum(const std::vector<int>& indices) const {
  double s = 0.0;
  for (int i : indices) s += coeff(i, i);
  return s;
}

EigEstimate largest_eigenvalue(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply,
    int dim, int max_iter) {
  if (dim < 1) throw std::invalid_argument("largest_eigenvalue: empty matrix");
  // Deterministic pseudo-random start; the all-ones vector can lie in the
  // null space of difference matrices.
  CounterRng rng(0x9e15e3d1ULL);
  Eigen::VectorXd x(dim);
  for (int i = 0; i < dim; ++i) x(i) = rng.next_normal();
  x.normalize();

  double rayleigh = 0.0;
  EigEstimate est;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd y = apply(x);
    const double r = x.dot(y);
    est.iterations = it;
    const double norm = y.norm();
    if (norm <= 1e-300) {
      // Operator annihilates the iterate: lambda_max is (numerically) 0.
      est.value = std::max(r, 0.0);
      est.converged = true;
      return est;
    }
    if (it > 1 && std::abs(r - rayleigh) <= 1e-10 * std::max(std::abs(r), 1e-300)) {
      est.value = r;
      est.converged = true;
      return est;
    }
    rayleigh = r;
    x = y / norm;
  }
  est.value = rayleigh;
  est.converged = false;
  return est;
}

EigEstimate largest_eigenvalue(const Eigen::MatrixXd& m, int max_iter) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("largest_eigenvalue: matrix not square");
  return largest_eigenvalue(
      [&](const Eigen::VectorXd& x) { return (m * x).eval(); },
      static_cast<int>(m.rows()), max_iter);
}

EigEstimate largest_eigenvalue(const StructureMatrix& m, int max_iter) {
  return largest_eigenvalue(
      [&](const Eigen::VectorXd& x) { return m.multiply(x); }, m.dim(),
      max_iter);
}

SmoothOperator::SmoothOperator(double alpha, StructureMatrix omega)
    : alpha_(alpha), omega_(std::move(omega)) {
  if (alpha < 0.0)
    throw std::invalid_argument("smoothing level must be non-negative");
  if (alpha_ == 0.0) {
    lipschitz_ = 1.0;
    return;
  }
  EigEstimate est = largest_eigenvalue(
      [this](const Eigen::VectorXd& x) { return apply(x); }, omega_.dim());
  // Safety factor: the majorization in the proximal gradient step needs
  // L >= lambda_max(S), and the power iteration only estimates it.
  lipschitz_ = std::max(1.0, 1.01 * est.value);
  degraded_ = !est.converged;
}

SmoothOperator SmoothOperator::none(int dim) {
  return SmoothOperator(0.0, StructureMatrix::zero(dim));
}

Eigen::VectorXd SmoothOperator::apply(const Eigen::VectorXd& x) const {
  if (alpha_ == 0.0) return x;
  return x + alpha_ * omega_.multiply(x);
}

double SmoothOperator::quad_form(const Eigen::VectorXd& x) const {
  if (alpha_ == 0.0) return x.squaredNorm();
  return x.squaredNorm() + alpha_ * omega_.quad_form(x);
}

double SmoothOperator::s_norm(const Eigen::VectorXd& x) const {
  return std::sqrt(std::max(quad_form(x), 0.0));
}

}  // namespace sfpca
