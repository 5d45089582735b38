#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "sfpca/prox.hpp"
#include "sfpca/structmat.hpp"

namespace sfpca {

struct DataMatrix {
  Eigen::MatrixXd values;
  bool centered = false;

  Eigen::Index n() const { return values.rows(); }
  Eigen::Index p() const { return values.cols(); }

  void validate() const;

  /// Column-centered copy.
  static DataMatrix centered_from(const Eigen::MatrixXd& raw);
};

enum class InitKind { PowerSvd, Supplied };

struct SFPCAConfig {
  PenaltySpec u_penalty;
  PenaltySpec v_penalty;
  SmoothOperator u_smooth;
  SmoothOperator v_smooth;
  double outer_tol = 1e-7;
  double inner_tol = 1e-8;
  int max_outer = 500;
  int max_inner = 5000;
  bool accelerate = false;  // momentum extrapolation in the inner loops
  InitKind init = InitKind::PowerSvd;
  Eigen::VectorXd u0, v0;  // used when init == Supplied

  SFPCAConfig(SmoothOperator u_s, SmoothOperator v_s)
      : u_smooth(std::move(u_s)), v_smooth(std::move(v_s)) {}

  /// No smoothing structure on either side.
  static SFPCAConfig plain(Eigen::Index n, Eigen::Index p) {
    return SFPCAConfig(SmoothOperator::none(static_cast<int>(n)),
                       SmoothOperator::none(static_cast<int>(p)));
  }

  void validate(const DataMatrix& x) const;
};

struct RankOneFactor {
  double d = 0.0;
  Eigen::VectorXd u, v;               // unit l2 unless zero_solution
  std::vector<double> objective_trace;
  bool converged = false;
  bool zero_solution = false;
  // S-norms squared of the solution before the final l2 renormalization;
  // 1 at any nonzero stationary point (the constraints are tight).
  double u_s_norm_sq = 0.0;
  double v_s_norm_sq = 0.0;
};

struct ModelFit {
  std::vector<RankOneFactor> factors;
  DataMatrix residual;
  bool truncated = false;  // a rank returned the zero solution early
};

struct InitPair {
  Eigen::VectorXd u, v;
  double d_estimate = 0.0;
  bool degraded = false;  // power iteration stagnated (tied singular values)
};

struct InnerResult {
  Eigen::VectorXd x;
  bool converged = false;
  int iterations = 0;
};

/// Leading singular-vector pair via power iteration on X^T X, relative
/// Rayleigh tolerance 1e-10. Throws on an all-zero matrix.
InitPair init_rank1(const DataMatrix& x);

/// Proximal gradient for
///   min_u 1/2 ||target - u||^2 + lambda P(u) + alpha/2 u^T Omega u,
/// iterating u <- prox(u + (target - S u)/L, lambda/L) until the relative
/// iterate change drops below tol.
InnerResult inner_ascent(const Eigen::VectorXd& target,
                         const SmoothOperator& smooth,
                         const PenaltySpec& penalty,
                         const Eigen::VectorXd& start, double tol, int cap,
                         bool accelerate = false);

/// u / ||u||_S, or zero when ||u||_S <= 1e-12.
Eigen::VectorXd rescale(const Eigen::VectorXd& u_hat,
                        const SmoothOperator& smooth);

/// u^T X v - P_u(u) - P_v(v) with the penalty levels folded into
/// penalty_value.
double objective(const DataMatrix& x, const Eigen::VectorXd& u,
                 const Eigen::VectorXd& v, const SFPCAConfig& config);

RankOneFactor fit_rank_one(const DataMatrix& x, const SFPCAConfig& config,
                           bool warn_uncentered = true);

/// X - d u v^T; a zero_solution factor leaves X unchanged.
DataMatrix deflate(const DataMatrix& x, const RankOneFactor& f);

/// Greedy multi-rank fit with Hotelling deflation. `configs` must have
/// either K entries or a single entry reused for every rank.
ModelFit fit(const DataMatrix& x, int rank,
             const std::vector<SFPCAConfig>& configs);

}  // namespace sfpca
