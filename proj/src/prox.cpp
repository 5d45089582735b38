#include "sfpca/prox.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sfpca {

std::string to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::None:
      return "none";
    case PenaltyKind::L1:
      return "l1";
    case PenaltyKind::Scad:
      return "scad";
  }
  return "unknown";
}

PenaltyKind penalty_kind_from_string(const std::string& name) {
  if (name == "none") return PenaltyKind::None;
  if (name == "l1") return PenaltyKind::L1;
  if (name == "scad") return PenaltyKind::Scad;
  throw std::invalid_argument("unknown penalty kind: " + name);
}

void PenaltySpec::validate() const {
  if (lambda < 0.0)
    throw std::invalid_argument("penalty level must be non-negative");
  if (kind == PenaltyKind::Scad && scad_a <= 2.0)
    throw std::invalid_argument("scad parameter a must exceed 2");
}

namespace {

double soft_threshold(double y, double t) {
  const double mag = std::abs(y) - t;
  return mag > 0.0 ? std::copysign(mag, y) : 0.0;
}

// Three-region SCAD proximal map (step size folded into t). Region
// boundaries resolve ties toward the smaller-magnitude solution.
double scad_prox_scalar(double y, double t, double a) {
  const double ay = std::abs(y);
  if (ay <= 2.0 * t) return soft_threshold(y, t);
  if (ay <= a * t) return ((a - 1.0) * y - std::copysign(a * t, y)) / (a - 2.0);
  return y;
}

double scad_value_scalar(double x, double lambda, double a) {
  const double ax = std::abs(x);
  if (ax <= lambda) return lambda * ax;
  if (ax <= a * lambda)
    return (2.0 * a * lambda * ax - ax * ax - lambda * lambda) /
           (2.0 * (a - 1.0));
  return lambda * lambda * (a + 1.0) / 2.0;
}

void check_args(const PenaltySpec& spec, const Eigen::VectorXd& y, double t) {
  spec.validate();
  if (t < 0.0) throw std::invalid_argument("prox: negative threshold");
  if (!y.allFinite()) throw std::invalid_argument("prox: non-finite input");
}

}  // namespace

Eigen::VectorXd prox(const PenaltySpec& spec, const Eigen::VectorXd& y,
                     double threshold) {
  check_args(spec, y, threshold);
  if (spec.nonneg) return prox_nonneg(spec, y, threshold);
  switch (spec.kind) {
    case PenaltyKind::None:
      return y;
    case PenaltyKind::L1:
      return y.unaryExpr(
          [threshold](double v) { return soft_threshold(v, threshold); });
    case PenaltyKind::Scad:
      return y.unaryExpr([threshold, a = spec.scad_a](double v) {
        return scad_prox_scalar(v, threshold, a);
      });
  }
  throw std::logic_error("unreachable penalty kind");
}

Eigen::VectorXd prox_nonneg(const PenaltySpec& spec, const Eigen::VectorXd& y,
                            double threshold) {
  check_args(spec, y, threshold);
  // For y <= 0 the objective is increasing on x >= 0, so the constrained
  // argmin is 0; for y > 0 the unconstrained argmin is already >= 0.
  switch (spec.kind) {
    case PenaltyKind::None:
      return y.cwiseMax(0.0);
    case PenaltyKind::L1:
      return (y.array() - threshold).max(0.0).matrix();
    case PenaltyKind::Scad:
      return y.unaryExpr([threshold, a = spec.scad_a](double v) {
        return v > 0.0 ? scad_prox_scalar(v, threshold, a) : 0.0;
      });
  }
  throw std::logic_error("unreachable penalty kind");
}

double penalty_value(const PenaltySpec& spec, const Eigen::VectorXd& x) {
  spec.validate();
  if (!x.allFinite())
    throw std::invalid_argument("penalty_value: non-finite input");
  switch (spec.kind) {
    case PenaltyKind::None:
      return 0.0;
    case PenaltyKind::L1:
      return spec.lambda * x.lpNorm<1>();
    case PenaltyKind::Scad: {
      double total = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i)
        total += scad_value_scalar(x(i), spec.lambda, spec.scad_a);
      return total;
    }
  }
  throw std::logic_error("unreachable penalty kind");
}

double sparsity_threshold(const Eigen::VectorXd& target,
                          const PenaltySpec& spec) {
  if (spec.kind == PenaltyKind::None)
    return std::numeric_limits<double>::infinity();
  if (target.size() == 0) return 0.0;
  return target.cwiseAbs().maxCoeff();
}

}  // namespace sfpca
