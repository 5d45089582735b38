#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <string>
#include <vector>

namespace sfpca {

enum class StructureKind { ChainDiff2, ChainDiff4, GridDiff2, UserSupplied };

std::string to_string(StructureKind kind);

/// Symmetric PSD roughness matrix. Built-in difference kinds are kept in
/// banded (sparse) storage; user-supplied matrices are kept dense.
class StructureMatrix {
 public:
  /// D^T D for the forward difference operator of the given order (2 or 4)
  /// with free boundaries. Requires p >= order + 1.
  static StructureMatrix chain_diff(int p, int order);

  /// Sum of row-wise and column-wise second-difference quadratic forms on
  /// the vectorized (row-major) rows x cols grid. Requires rows, cols >= 3.
  static StructureMatrix grid_diff(int rows, int cols);

  /// Symmetrizes as (M + M^T)/2 and validates. Rejects matrices whose
  /// asymmetry exceeds 1e-8 relative or whose smallest eigenvalue estimate
  /// falls below -1e-8 * lambda_max.
  static StructureMatrix from_dense(const Eigen::MatrixXd& m);

  /// Reads a dense CSV matrix or a `# coo <dim>` triplet file, then
  /// validates as in from_dense.
  static StructureMatrix load(const std::string& path);

  /// All-zero matrix; used when a side carries no smoothness structure.
  static StructureMatrix zero(int dim);

  int dim() const { return dim_; }
  StructureKind kind() const { return kind_; }
  bool is_sparse() const { return !use_dense_; }

  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
  double quad_form(const Eigen::VectorXd& x) const;
  double coeff(int i, int j) const;
  Eigen::MatrixXd dense() const;

  /// Principal submatrix on the given index set.
  Eigen::MatrixXd submatrix(const std::vector<int>& indices) const;
  double diag_sum(const std::vector<int>& indices) const;

 private:
  StructureMatrix(int dim, StructureKind kind);

  int dim_;
  StructureKind kind_;
  bool use_dense_ = false;
  Eigen::SparseMatrix<double> sparse_;
  Eigen::MatrixXd dense_;
};

struct EigEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Power-iteration estimate of the largest eigenvalue of a symmetric PSD
/// operator, stopping when the relative Rayleigh-quotient change drops
/// below 1e-10. A hit iteration cap reports the estimate with
/// converged = false.
EigEstimate largest_eigenvalue(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply,
    int dim, int max_iter = 100000);
EigEstimate largest_eigenvalue(const Eigen::MatrixXd& m, int max_iter = 100000);
EigEstimate largest_eigenvalue(const StructureMatrix& m, int max_iter = 100000);

/// S = I + alpha * Omega together with its cached gradient Lipschitz
/// constant. The power-iteration estimate of lambda_max(S) is inflated by
/// 1.01 so L >= lambda_max(S) holds despite estimation error; alpha = 0
/// yields L = 1 exactly.
class SmoothOperator {
 public:
  SmoothOperator(double alpha, StructureMatrix omega);

  /// alpha = 0 with a zero structure matrix: S = I.
  static SmoothOperator none(int dim);

  int dim() const { return omega_.dim(); }
  double alpha() const { return alpha_; }
  double lipschitz() const { return lipschitz_; }
  bool lipschitz_degraded() const { return degraded_; }
  const StructureMatrix& omega() const { return omega_; }

  /// S x = x + alpha * Omega x.
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  double quad_form(const Eigen::VectorXd& x) const;  // x^T S x
  double s_norm(const Eigen::VectorXd& x) const;

 private:
  double alpha_;
  StructureMatrix omega_;
  double lipschitz_;
  bool degraded_ = false;
};

}  // namespace sfpca
