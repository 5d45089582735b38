#include "sfpca/core.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "sfpca/rng.hpp"

namespace sfpca {

namespace {

constexpr double kZeroNorm = 1e-12;

// Largest-magnitude entry of v must be non-negative; d stays non-negative
// by flipping u alone first. Flipping both u and v leaves d unchanged.
void apply_sign_convention(Eigen::VectorXd& u, Eigen::VectorXd& v, double& d) {
  if (d < 0.0) {
    u = -u;
    d = -d;
  }
  if (v.size() == 0) return;
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v(imax) < 0.0) {
    u = -u;
    v = -v;
  }
}

}  // namespace

void DataMatrix::validate() const {
  if (values.size() == 0) throw std::invalid_argument("empty data matrix");
  if (!values.allFinite())
    throw std::invalid_argument("data matrix has non-finite entries");
  if (centered) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      const auto col = values.col(j);
      const double mean = col.mean();
      const double sd =
          std::sqrt((col.array() - mean).square().sum() /
                    std::max<double>(1.0, static_cast<double>(col.size() - 1)));
      if (std::abs(mean) > 1e-8 * (sd + 1.0))
        throw std::invalid_argument("matrix marked centered but column " +
                                    std::to_string(j) + " has mean " +
                                    std::to_string(mean));
    }
  }
}

DataMatrix DataMatrix::centered_from(const Eigen::MatrixXd& raw) {
  DataMatrix out;
  out.values = raw.rowwise() - raw.colwise().mean();
  out.centered = true;
  return out;
}

void SFPCAConfig::validate(const DataMatrix& x) const {
  u_penalty.validate();
  v_penalty.validate();
  if (u_smooth.dim() != x.n() || v_smooth.dim() != x.p())
    throw std::invalid_argument("smoothing structure dimensions do not match data");
  if (outer_tol <= 0.0 || inner_tol <= 0.0)
    throw std::invalid_argument("tolerances must be positive");
  if (max_outer < 1 || max_inner < 1)
    throw std::invalid_argument("iteration caps must be at least 1");
  if (init == InitKind::Supplied && (u0.size() != x.n() || v0.size() != x.p()))
    throw std::invalid_argument("supplied initialization has wrong dimensions");
}

InitPair init_rank1(const DataMatrix& x) {
  const Eigen::MatrixXd& m = x.values;
  if (m.cwiseAbs().maxCoeff() == 0.0)
    throw std::invalid_argument("init_rank1: zero matrix");

  CounterRng rng(0x1d1a7eULL);
  Eigen::VectorXd v(m.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.next_normal();
  v.normalize();

  InitPair out;
  double rayleigh = 0.0;
  out.degraded = true;
  constexpr int kCap = 20000;
  for (int it = 1; it <= kCap; ++it) {
    Eigen::VectorXd y = m.transpose() * (m * v);
    const double r = v.dot(y);  // sigma_1^2 estimate
    const double norm = y.norm();
    if (norm <= 1e-300) break;  // iterate fell in the null space
    if (it > 1 && std::abs(r - rayleigh) <= 1e-10 * std::max(r, 1e-300)) {
      out.degraded = false;
      rayleigh = r;
      break;
    }
    rayleigh = r;
    v = y / norm;
  }
  Eigen::VectorXd xv = m * v;
  const double xv_norm = xv.norm();
  if (xv_norm <= 1e-300)
    throw std::invalid_argument("init_rank1: degenerate leading direction");
  out.u = xv / xv_norm;
  out.v = v;
  out.d_estimate = out.u.dot(m * v);
  apply_sign_convention(out.u, out.v, out.d_estimate);
  return out;
}

InnerResult inner_ascent(const Eigen::VectorXd& target,
                         const SmoothOperator& smooth,
                         const PenaltySpec& penalty,
                         const Eigen::VectorXd& start, double tol, int cap,
                         bool accelerate) {
  if (target.size() != smooth.dim() || start.size() != target.size())
    throw std::invalid_argument("inner_ascent: dimension mismatch");
  const double lip = smooth.lipschitz();
  const double threshold = penalty.lambda / lip;

  InnerResult res;
  Eigen::VectorXd x = start;
  Eigen::VectorXd extrap = x;  // momentum point; equals x when not accelerating
  double momentum = 1.0;
  for (int it = 1; it <= cap; ++it) {
    const Eigen::VectorXd& base = accelerate ? extrap : x;
    Eigen::VectorXd next =
        prox(penalty, base + (target - smooth.apply(base)) / lip, threshold);
    res.iterations = it;
    const double change = (next - x).norm();
    const double scale = std::max(x.norm(), kZeroNorm);
    if (accelerate) {
      const double next_momentum =
          0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
      extrap = next + ((momentum - 1.0) / next_momentum) * (next - x);
      momentum = next_momentum;
    }
    x = std::move(next);
    if (change <= tol * scale) {
      res.converged = true;
      break;
    }
  }
  res.x = std::move(x);
  return res;
}

Eigen::VectorXd rescale(const Eigen::VectorXd& u_hat,
                        const SmoothOperator& smooth) {
  const double norm = smooth.s_norm(u_hat);
  if (norm <= kZeroNorm)
    return Eigen::VectorXd::Zero(u_hat.size());
  return u_hat / norm;
}

double objective(const DataMatrix& x, const Eigen::VectorXd& u,
                 const Eigen::VectorXd& v, const SFPCAConfig& config) {
  if (u.size() != x.n() || v.size() != x.p())
    throw std::invalid_argument("objective: dimension mismatch");
  return u.dot(x.values * v) - penalty_value(config.u_penalty, u) -
         penalty_value(config.v_penalty, v);
}

RankOneFactor fit_rank_one(const DataMatrix& x, const SFPCAConfig& config,
                           bool warn_uncentered) {
  x.validate();
  config.validate(x);
  if (!x.centered && warn_uncentered)
    std::cerr << "sfpca: warning: fitting an uncentered data matrix\n";

  RankOneFactor out;
  const auto n = x.n();
  const auto p = x.p();
  auto zero_factor = [&] {
    RankOneFactor f;
    f.zero_solution = true;
    f.converged = true;
    f.u = Eigen::VectorXd::Zero(n);
    f.v = Eigen::VectorXd::Zero(p);
    return f;
  };
  if (x.values.cwiseAbs().maxCoeff() == 0.0) return zero_factor();

  Eigen::VectorXd u, v;
  if (config.init == InitKind::Supplied) {
    const double un = config.u0.norm(), vn = config.v0.norm();
    if (un <= kZeroNorm || vn <= kZeroNorm)
      throw std::invalid_argument("supplied initialization is zero");
    u = config.u0 / un;
    v = config.v0 / vn;
  } else {
    InitPair init = init_rank1(x);
    u = std::move(init.u);
    v = std::move(init.v);
  }
  // Keep the start feasible: non-negative modes get the elementwise
  // magnitude of the initialization (a signed start lies outside the
  // constraint set and would break the ascent guarantee at step one).
  if (config.u_penalty.nonneg) u = u.cwiseAbs();
  if (config.v_penalty.nonneg) v = v.cwiseAbs();
  Eigen::VectorXd u_star = rescale(u, config.u_smooth);
  Eigen::VectorXd v_star = rescale(v, config.v_smooth);
  if (u_star.isZero(0.0) || v_star.isZero(0.0)) return zero_factor();

  Eigen::VectorXd u_hat = u_star;  // inner warm starts
  Eigen::VectorXd v_hat = v_star;
  bool outer_converged = false;
  double cur_obj = objective(x, u_star, v_star, config);
  double prev_obj = 0.0;
  bool have_prev = false;
  out.objective_trace.clear();

  // For convex penalties each rescaled half-step solution maximizes its
  // side's constrained problem, so accepting it can only ascend. For
  // non-convex penalties (SCAD) the rescaling equivalence needs order-one
  // homogeneity and can slip; a candidate that would lower the objective
  // is rejected, which keeps the trace monotone and stalls the outer loop
  // at the incumbent (a local solution).
  for (int outer = 0; outer < config.max_outer; ++outer) {
    InnerResult ur =
        inner_ascent(x.values * v_star, config.u_smooth, config.u_penalty,
                     u_hat, config.inner_tol, config.max_inner,
                     config.accelerate);
    u_hat = ur.x;
    Eigen::VectorXd u_cand = rescale(u_hat, config.u_smooth);
    if (u_cand.isZero(0.0)) return zero_factor();
    const double u_obj = objective(x, u_cand, v_star, config);
    if (u_obj >= cur_obj) {
      u_star = std::move(u_cand);
      cur_obj = u_obj;
    }
    out.objective_trace.push_back(cur_obj);

    InnerResult vr =
        inner_ascent(x.values.transpose() * u_star, config.v_smooth,
                     config.v_penalty, v_hat, config.inner_tol,
                     config.max_inner, config.accelerate);
    v_hat = vr.x;
    Eigen::VectorXd v_cand = rescale(v_hat, config.v_smooth);
    if (v_cand.isZero(0.0)) return zero_factor();
    const double v_obj = objective(x, u_star, v_cand, config);
    if (v_obj >= cur_obj) {
      v_star = std::move(v_cand);
      cur_obj = v_obj;
    }
    out.objective_trace.push_back(cur_obj);
    if (!std::isfinite(cur_obj))
      throw std::runtime_error(
          "fit_rank_one: non-finite objective at outer iteration " +
          std::to_string(outer) + " (lambda_u=" +
          std::to_string(config.u_penalty.lambda) + ", lambda_v=" +
          std::to_string(config.v_penalty.lambda) + ")");

    if (have_prev &&
        std::abs(cur_obj - prev_obj) <=
            config.outer_tol * std::max(std::abs(prev_obj), 1e-12)) {
      outer_converged = true;
      break;
    }
    prev_obj = cur_obj;
    have_prev = true;
  }

  out.u_s_norm_sq = config.u_smooth.quad_form(u_star);
  out.v_s_norm_sq = config.v_smooth.quad_form(v_star);
  out.u = u_star / u_star.norm();
  out.v = v_star / v_star.norm();
  out.d = out.u.dot(x.values * out.v);
  apply_sign_convention(out.u, out.v, out.d);
  out.converged = outer_converged;
  return out;
}

DataMatrix deflate(const DataMatrix& x, const RankOneFactor& f) {
  if (f.zero_solution) return x;
  if (f.u.size() != x.n() || f.v.size() != x.p())
    throw std::invalid_argument("deflate: dimension mismatch");
  DataMatrix out = x;
  out.values.noalias() -= f.d * f.u * f.v.transpose();
  // Subtracting d u v^T shifts the column means.
  out.centered = false;
  return out;
}

ModelFit fit(const DataMatrix& x, int rank,
             const std::vector<SFPCAConfig>& configs) {
  if (rank < 1) throw std::invalid_argument("fit: rank must be at least 1");
  if (rank > std::min(x.n(), x.p()))
    throw std::invalid_argument("fit: rank exceeds min(n, p)");
  if (configs.size() != 1 && configs.size() != static_cast<std::size_t>(rank))
    throw std::invalid_argument("fit: need one config or one per rank");

  if (!x.centered)
    std::cerr << "sfpca: warning: fitting an uncentered data matrix\n";
  ModelFit out;
  out.residual = x;
  for (int k = 0; k < rank; ++k) {
    const SFPCAConfig& cfg = configs.size() == 1
                                 ? configs.front()
                                 : configs[static_cast<std::size_t>(k)];
    RankOneFactor f = fit_rank_one(out.residual, cfg, /*warn_uncentered=*/false);
    const bool zero = f.zero_solution;
    out.residual = deflate(out.residual, f);
    out.factors.push_back(std::move(f));
    if (zero) {
      std::cerr << "sfpca: warning: rank " << (k + 1)
                << " collapsed to the zero solution; stopping early\n";
      out.truncated = true;
      break;
    }
  }
  return out;
}

}  // namespace sfpca
