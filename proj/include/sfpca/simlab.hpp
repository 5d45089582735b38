#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "sfpca/core.hpp"

namespace sfpca {

enum class SignalKind { Sine60, GaussPulse7, Sine30, GridSmooth, GridEdged };

std::string to_string(SignalKind kind);
SignalKind signal_kind_from_string(const std::string& name);

struct SimScenario {
  int n = 100;
  int p = 200;
  std::vector<SignalKind> signals;
  std::vector<double> scales;  // d_k, positive and decreasing
  std::uint64_t seed = 0;

  /// Rank-3 time-series scenario: sine-60, gauss-pulse-7, sine-30 with
  /// d = (n/4, n/5, n/6).
  static SimScenario rank3(int n, std::uint64_t seed);

  void validate() const;
};

/// Deterministic unit-norm signal of the named shape. Sparsity fractions at
/// p = 200: 31% for the sine kinds (138 nonzeros), 25% for the pulse (150
/// nonzeros); other p scale the support proportionally.
Eigen::VectorXd gen_signal(SignalKind kind, int p = 200);

struct GridSignals {
  Eigen::VectorXd smooth;  // two Gaussian bumps, all entries >= 0
  Eigen::VectorXd edged;   // rectangular indicator block
};

GridSignals gen_grid_signals(int rows = 25, int cols = 25);

struct SimTruth {
  std::vector<double> d;
  std::vector<Eigen::VectorXd> u;
  std::vector<Eigen::VectorXd> v;
  std::vector<std::vector<int>> v_support;
  Eigen::MatrixXd signal;  // sum_k d_k u_k v_k^T, noiseless
};

struct SimData {
  DataMatrix x;
  SimTruth truth;
};

/// X = sum_k d_k u_k v_k^T + N(0,1) noise, left factors the left singular
/// vectors of a seeded Gaussian matrix. Bit-reproducible from the scenario.
SimData gen_data(const SimScenario& scenario);

struct FactorScore {
  double tp = 0.0;
  double fp = 0.0;
  std::optional<double> rel_angle;
};

struct EvalReport {
  std::vector<FactorScore> per_factor;
  double tp = 0.0;  // means over factors
  double fp = 0.0;
  std::optional<double> rel_angle;
  std::optional<double> rse;
  bool baseline_missing = false;
};

/// Support detection threshold for TP/FP counting.
inline constexpr double kSupportThreshold = 1e-10;

/// Scores fitted factors against the truth, factor k against truth k. The
/// baseline is the plain SVD fit of the same realization; without it the
/// relative metrics are omitted.
EvalReport score(const std::vector<RankOneFactor>& estimate,
                 const SimTruth& truth, const DataMatrix& x,
                 const std::vector<RankOneFactor>* svd_baseline);

/// Unregularized rank-K fit used as the scoring baseline.
std::vector<RankOneFactor> svd_baseline_fit(const DataMatrix& x, int rank);

struct RocPoint {
  double alpha = 0.0;
  double lambda = 0.0;
  double tp = 0.0;  // replicate means
  double fp = 0.0;
};

struct RocTable {
  std::vector<RocPoint> points;            // averaged over replicates
  std::vector<std::tuple<double, double, int, double, double>>
      long_rows;                           // alpha, lambda, replicate, tp, fp
  std::vector<std::pair<double, double>> auc;  // alpha -> trapezoidal AUC
  int excluded_replicates = 0;
};

/// Rank-1 ROC study: for each alpha, fits along the lambda path (descending,
/// warm-started) on `replicates` seeded realizations with d = n/2, recording
/// support-recovery TP/FP per lambda. Endpoints (0,0) and (1,1) are added
/// before the trapezoidal AUC when the path does not reach them.
RocTable roc_sweep(const SimScenario& scenario,
                   const std::vector<double>& alphas,
                   const std::vector<double>& lambda_path, int replicates);

void write_eval_report_csv(const std::string& path, const EvalReport& report);
void write_eval_report_json(const std::string& path, const EvalReport& report);
void write_roc_csv(const std::string& path, const RocTable& table);
void write_auc_csv(const std::string& path, const RocTable& table);

}  // namespace sfpca
