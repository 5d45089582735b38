#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>

namespace sfpca {

enum class PenaltyKind { None, L1, Scad };

std::string to_string(PenaltyKind kind);
PenaltyKind penalty_kind_from_string(const std::string& name);

struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::None;
  double lambda = 0.0;
  bool nonneg = false;
  double scad_a = 3.7;  // must stay > 2

  static PenaltySpec none() { return {}; }
  static PenaltySpec l1(double lambda, bool nonneg = false) {
    return {PenaltyKind::L1, lambda, nonneg, 3.7};
  }
  static PenaltySpec scad(double lambda, double a = 3.7, bool nonneg = false) {
    return {PenaltyKind::Scad, lambda, nonneg, a};
  }

  void validate() const;
};

/// Coordinatewise argmin_x { 1/2 (x - y)^2 + threshold * P(x) } where P has
/// unit level; the caller folds lambda and the step size into `threshold`
/// (lambda/L in the ascent step). kind = none returns y unchanged. With
/// spec.nonneg the minimization is restricted to x >= 0.
Eigen::VectorXd prox(const PenaltySpec& spec, const Eigen::VectorXd& y,
                     double threshold);

/// Non-negatively constrained variant, regardless of spec.nonneg.
Eigen::VectorXd prox_nonneg(const PenaltySpec& spec, const Eigen::VectorXd& y,
                            double threshold);

/// lambda * ||x||_1 for l1, summed SCAD value for scad, 0 for none.
double penalty_value(const PenaltySpec& spec, const Eigen::VectorXd& x);

/// Smallest sparsity level forcing the inner-problem solution to zero:
/// ||target||_inf for l1 (and scad, whose subgradient at zero matches l1's
/// on [-lambda, lambda]); +infinity for kind none.
double sparsity_threshold(const Eigen::VectorXd& target,
                          const PenaltySpec& spec);

}  // namespace sfpca
