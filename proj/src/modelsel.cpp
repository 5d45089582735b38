#include "sfpca/modelsel.hpp"

#include <Eigen/LU>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "sfpca/io.hpp"

namespace sfpca {

namespace {

std::vector<int> support(const Eigen::VectorXd& u_hat) {
  std::vector<int> idx;
  for (Eigen::Index i = 0; i < u_hat.size(); ++i)
    if (u_hat(i) != 0.0) idx.push_back(static_cast<int>(i));
  return idx;
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < count; ++i)
    out.push_back(std::exp(llo + (lhi - llo) * i / (count - 1)));
  return out;
}

}  // namespace

void ParamGrid::validate() const {
  auto check = [](const std::vector<double>& vals, const char* name) {
    if (vals.empty())
      throw std::invalid_argument(std::string("empty ") + name + " grid");
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (vals[i] < 0.0)
        throw std::invalid_argument(std::string(name) + " grid has negative entry");
      if (i > 0 && vals[i] <= vals[i - 1])
        throw std::invalid_argument(std::string(name) +
                                    " grid not strictly increasing");
    }
  };
  check(lambdas, "lambda");
  check(alphas, "alpha");
}

ParamGrid ParamGrid::single(double lambda, double alpha) {
  ParamGrid g;
  g.lambdas = {lambda};
  g.alphas = {alpha};
  g.validate();
  return g;
}

ParamGrid ParamGrid::defaults(double lambda_max) {
  ParamGrid g;
  g.lambdas = {0.0};
  if (lambda_max > 0.0) {
    auto path = log_spaced(1e-3 * lambda_max, lambda_max, 10);
    g.lambdas.insert(g.lambdas.end(), path.begin(), path.end());
  }
  g.alphas = {0.0};
  auto apath = log_spaced(1e-2, 1e2, 9);
  g.alphas.insert(g.alphas.end(), apath.begin(), apath.end());
  g.validate();
  return g;
}

DfEstimate df_l1(const Eigen::VectorXd& u_hat, double alpha,
                 const StructureMatrix& omega) {
  const auto idx = support(u_hat);
  DfEstimate out;
  out.raw = static_cast<double>(idx.size()) - alpha * omega.diag_sum(idx);
  out.value = out.raw;
  if (out.value < 0.0) {
    out.value = 0.0;
    out.clamped = true;
  }
  return out;
}

DfEstimate df_l1_inverse(const Eigen::VectorXd& u_hat, double alpha,
                         const StructureMatrix& omega) {
  const auto idx = support(u_hat);
  DfEstimate out;
  if (idx.empty()) return out;
  Eigen::MatrixXd sub =
      Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(idx.size()),
                                static_cast<Eigen::Index>(idx.size())) +
      alpha * omega.submatrix(idx);
  out.raw = sub.inverse().trace();
  out.value = std::max(out.raw, 0.0);
  out.clamped = out.raw < 0.0;
  return out;
}

double bic_score(const Eigen::VectorXd& residual_target,
                 const Eigen::VectorXd& u_hat, double df, Eigen::Index dim) {
  if (residual_target.size() != u_hat.size())
    throw std::invalid_argument("bic_score: dimension mismatch");
  const double nd = static_cast<double>(dim);
  const double mse =
      std::max((residual_target - u_hat).squaredNorm() / (2.0 * nd), 1e-300);
  return std::log(mse) + std::log(nd) / nd * df;
}

namespace {

struct SideSweep {
  Eigen::VectorXd best_solution;
  double best_lambda = 0.0;
  double best_alpha = 0.0;
};

// One half-step sweep: solve the side's inner problem at every (lambda,
// alpha) candidate and adopt the BIC argmin. Candidates run from most to
// least sparse within each alpha so warm starts track the lambda path.
SideSweep sweep_side(char side, const Eigen::VectorXd& target,
                     const ParamGrid& grid,
                     const std::map<double, SmoothOperator>& smooths,
                     const PenaltySpec& penalty_base,
                     const Eigen::VectorXd& start, const SFPCAConfig& cfg,
                     const SelectOptions& opts,
                     std::vector<BicEntry>& table) {
  SideSweep best;
  double best_bic = std::numeric_limits<double>::infinity();
  bool have_best = false;
  for (double alpha : grid.alphas) {
    const SmoothOperator& smooth = smooths.at(alpha);
    Eigen::VectorXd warm = start;
    for (auto it = grid.lambdas.rbegin(); it != grid.lambdas.rend(); ++it) {
      const double lambda = *it;
      PenaltySpec pen = penalty_base;
      pen.lambda = lambda;
      InnerResult res =
          inner_ascent(target, smooth, pen, opts.warm_starts ? warm : start,
                       cfg.inner_tol, cfg.max_inner, cfg.accelerate);
      if (opts.warm_starts) warm = res.x;
      DfEstimate df = opts.inverse_df
                          ? df_l1_inverse(res.x, alpha, smooth.omega())
                          : df_l1(res.x, alpha, smooth.omega());
      // Caveat: at vanishing regularization the identity-design regression
      // saturates (residual -> 0) and its BIC diverges downward, so useful
      // candidate paths keep lambda above the noise floor.
      const double resid = (target - res.x).squaredNorm();
      const double bic = bic_score(target, res.x, df.value, target.size());
      table.push_back({side, lambda, alpha, df.value, resid, bic});
      // Ties resolve toward larger lambda and larger alpha.
      const bool better =
          !have_best || bic < best_bic ||
          (bic == best_bic && (lambda > best.best_lambda ||
                               (lambda == best.best_lambda &&
                                alpha > best.best_alpha)));
      if (better) {
        best_bic = bic;
        best.best_solution = res.x;
        best.best_lambda = lambda;
        best.best_alpha = alpha;
        have_best = true;
      }
    }
  }
  return best;
}

}  // namespace

SelectionResult nested_select(const DataMatrix& x, const ParamGrid& u_grid,
                              const ParamGrid& v_grid,
                              const SFPCAConfig& config_base,
                              const SelectOptions& options) {
  u_grid.validate();
  v_grid.validate();
  x.validate();
  if (options.max_nested < 1)
    throw std::invalid_argument("max_nested must be at least 1");

  // Smoothing operators (and their Lipschitz constants) per candidate alpha.
  std::map<double, SmoothOperator> u_smooths, v_smooths;
  for (double a : u_grid.alphas)
    u_smooths.emplace(a, SmoothOperator(a, config_base.u_smooth.omega()));
  for (double a : v_grid.alphas)
    v_smooths.emplace(a, SmoothOperator(a, config_base.v_smooth.omega()));

  Eigen::VectorXd u_star, v_star;
  if (config_base.init == InitKind::Supplied) {
    u_star = config_base.u0.normalized();
    v_star = config_base.v0.normalized();
  } else {
    InitPair init = init_rank1(x);
    u_star = std::move(init.u);
    v_star = std::move(init.v);
  }

  SelectionResult out;
  ChosenParams prev{-1.0, -1.0, -1.0, -1.0};
  for (int sweep = 0; sweep < options.max_nested; ++sweep) {
    SideSweep us = sweep_side('u', x.values * v_star, u_grid, u_smooths,
                              config_base.u_penalty, u_star, config_base,
                              options, out.bic_table);
    out.chosen.lambda_u = us.best_lambda;
    out.chosen.alpha_u = us.best_alpha;
    Eigen::VectorXd u_next =
        rescale(us.best_solution, u_smooths.at(us.best_alpha));
    if (!u_next.isZero(0.0)) u_star = std::move(u_next);

    SideSweep vs = sweep_side('v', x.values.transpose() * u_star, v_grid,
                              v_smooths, config_base.v_penalty, v_star,
                              config_base, options, out.bic_table);
    out.chosen.lambda_v = vs.best_lambda;
    out.chosen.alpha_v = vs.best_alpha;
    Eigen::VectorXd v_next =
        rescale(vs.best_solution, v_smooths.at(vs.best_alpha));
    if (!v_next.isZero(0.0)) v_star = std::move(v_next);

    if (out.chosen == prev) {
      out.stabilized = true;
      break;
    }
    prev = out.chosen;
  }

  // Confirm-run at the frozen parameters.
  SFPCAConfig refit_cfg = config_base;
  refit_cfg.u_penalty.lambda = out.chosen.lambda_u;
  refit_cfg.v_penalty.lambda = out.chosen.lambda_v;
  refit_cfg.u_smooth =
      SmoothOperator(out.chosen.alpha_u, config_base.u_smooth.omega());
  refit_cfg.v_smooth =
      SmoothOperator(out.chosen.alpha_v, config_base.v_smooth.omega());
  out.refit = fit_rank_one(x, refit_cfg, /*warn_uncentered=*/false);
  return out;
}

void write_bic_table_csv(const std::string& path,
                         const std::vector<BicEntry>& table) {
  std::ofstream out(path);
  if (!out) throw io::ParseError("cannot write " + path);
  out << "side,lambda,alpha,df,residual,bic\n";
  for (const auto& e : table) {
    out << e.side << ',' << io::format_double(e.lambda) << ','
        << io::format_double(e.alpha) << ',' << io::format_double(e.df) << ','
        << io::format_double(e.residual) << ',' << io::format_double(e.bic)
        << '\n';
  }
}

}  // namespace sfpca
