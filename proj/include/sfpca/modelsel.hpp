#pragma once

#include <string>
#include <vector>

#include "sfpca/core.hpp"

namespace sfpca {

struct ParamGrid {
  std::vector<double> lambdas;  // strictly increasing, contains 0
  std::vector<double> alphas;   // strictly increasing, contains 0

  void validate() const;

  static ParamGrid single(double lambda, double alpha);

  /// 10 log-spaced lambdas on [1e-3, 1] * lambda_max plus 0, and 9
  /// log-spaced alphas on [1e-2, 1e2] plus 0.
  static ParamGrid defaults(double lambda_max);
};

struct DfEstimate {
  double value = 0.0;  // clamped at 0
  double raw = 0.0;    // tr[I_|A| - alpha Omega(A,A)], may be negative
  bool clamped = false;
};

/// Degrees of freedom of the l1 + elliptical-l2 inner problem at solution
/// u_hat: tr[I_|A| - alpha Omega(A,A)] over the support A. Negative values
/// are clamped at 0.
DfEstimate df_l1(const Eigen::VectorXd& u_hat, double alpha,
                 const StructureMatrix& omega);

/// Ridge-projection variant tr[(I + alpha Omega(A,A))^-1], selectable for
/// comparison.
DfEstimate df_l1_inverse(const Eigen::VectorXd& u_hat, double alpha,
                         const StructureMatrix& omega);

/// log[ ||residual_target - u_hat||^2 / (2 dim) ] + log(dim) df / dim with
/// the residual floored at 1e-300 before the logarithm.
double bic_score(const Eigen::VectorXd& residual_target,
                 const Eigen::VectorXd& u_hat, double df, Eigen::Index dim);

struct BicEntry {
  char side = 'u';
  double lambda = 0.0;
  double alpha = 0.0;
  double df = 0.0;
  double residual = 0.0;
  double bic = 0.0;
};

struct ChosenParams {
  double lambda_u = 0.0, alpha_u = 0.0;
  double lambda_v = 0.0, alpha_v = 0.0;
  bool operator==(const ChosenParams&) const = default;
};

struct SelectionResult {
  ChosenParams chosen;
  std::vector<BicEntry> bic_table;
  RankOneFactor refit;
  bool stabilized = false;
};

struct SelectOptions {
  int max_nested = 5;
  bool warm_starts = true;
  bool inverse_df = false;  // use df_l1_inverse in the BIC
};

/// BIC model selection nested inside the alternating steps: each half-step
/// sweeps its side's (lambda, alpha) grid with warm starts, adopts the BIC
/// argmin (ties toward more regularization), and after the sweeps reruns
/// fit_rank_one at the frozen parameters.
SelectionResult nested_select(const DataMatrix& x, const ParamGrid& u_grid,
                              const ParamGrid& v_grid,
                              const SFPCAConfig& config_base,
                              const SelectOptions& options = {});

void write_bic_table_csv(const std::string& path,
                         const std::vector<BicEntry>& table);

}  // namespace sfpca
