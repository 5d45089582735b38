#include "sfpca/simlab.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <stdexcept>

#include "json.hpp"
#include "sfpca/io.hpp"
#include "sfpca/rng.hpp"

namespace sfpca {

namespace {

using std::numbers::pi;

std::vector<int> nonzero_support(const Eigen::VectorXd& v, double thresh) {
  std::vector<int> idx;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > thresh) idx.push_back(static_cast<int>(i));
  return idx;
}

}  // namespace

std::string to_string(SignalKind kind) {
  switch (kind) {
    case SignalKind::Sine60:
      return "sine-60";
    case SignalKind::GaussPulse7:
      return "gauss-pulse-7";
    case SignalKind::Sine30:
      return "sine-30";
    case SignalKind::GridSmooth:
      return "grid-smooth";
    case SignalKind::GridEdged:
      return "grid-edged";
  }
  return "unknown";
}

SignalKind signal_kind_from_string(const std::string& name) {
  if (name == "sine-60") return SignalKind::Sine60;
  if (name == "gauss-pulse-7") return SignalKind::GaussPulse7;
  if (name == "sine-30") return SignalKind::Sine30;
  if (name == "grid-smooth") return SignalKind::GridSmooth;
  if (name == "grid-edged") return SignalKind::GridEdged;
  throw std::invalid_argument("unknown signal kind: " + name);
}

SimScenario SimScenario::rank3(int n, std::uint64_t seed) {
  SimScenario s;
  s.n = n;
  s.p = 200;
  s.signals = {SignalKind::Sine60, SignalKind::GaussPulse7, SignalKind::Sine30};
  s.scales = {n / 4.0, n / 5.0, n / 6.0};
  s.seed = seed;
  return s;
}

void SimScenario::validate() const {
  if (n < 2 || p < 10) throw std::invalid_argument("scenario too small");
  if (signals.empty() || signals.size() != scales.size())
    throw std::invalid_argument("signals and scales must match and be non-empty");
  for (std::size_t k = 0; k < scales.size(); ++k) {
    if (scales[k] <= 0.0)
      throw std::invalid_argument("scales must be positive");
    if (k > 0 && scales[k] >= scales[k - 1])
      throw std::invalid_argument("scales must be decreasing");
  }
}

Eigen::VectorXd gen_signal(SignalKind kind, int p) {
  if (p < 10) throw std::invalid_argument("gen_signal: p must be at least 10");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(p);
  // The half-sample phase keeps every in-support entry away from the sine
  // zeros, so the support size is exact.
  switch (kind) {
    case SignalKind::Sine60: {
      const int s = static_cast<int>(std::lround(0.69 * p));
      for (int i = 0; i < s; ++i) v(i) = std::sin(2.0 * pi * (i + 0.5) / 60.0);
      break;
    }
    case SignalKind::GaussPulse7: {
      const int s = static_cast<int>(std::lround(0.75 * p));
      const int start = (p - s) / 2;
      const double mid = (s - 1) / 2.0;
      const double width = s / 6.0;
      for (int j = 0; j < s; ++j) {
        const double t = j - mid;
        v(start + j) = std::exp(-0.5 * (t / width) * (t / width)) *
                       std::sin(2.0 * pi * (t + 0.25) / 7.0);
      }
      break;
    }
    case SignalKind::Sine30: {
      const int s = static_cast<int>(std::lround(0.69 * p));
      const int start = p - s;
      for (int j = 0; j < s; ++j)
        v(start + j) = std::sin(2.0 * pi * (j + 0.5) / 30.0);
      break;
    }
    case SignalKind::GridSmooth:
      return gen_grid_signals().smooth;
    case SignalKind::GridEdged:
      return gen_grid_signals().edged;
  }
  v.normalize();
  return v;
}

GridSignals gen_grid_signals(int rows, int cols) {
  if (rows < 5 || cols < 5)
    throw std::invalid_argument("gen_grid_signals: grid must be at least 5x5");
  GridSignals out;
  out.smooth = Eigen::VectorXd::Zero(rows * cols);
  out.edged = Eigen::VectorXd::Zero(rows * cols);
  // Frozen constants: bumps at 30% and 70% of each axis, width 10% of the
  // short side; indicator block spanning [32%, 68%) of each axis.
  const double r1 = 0.3 * (rows - 1), c1 = 0.3 * (cols - 1);
  const double r2 = 0.7 * (rows - 1), c2 = 0.7 * (cols - 1);
  const double sigma = std::max(1.5, 0.1 * std::min(rows, cols));
  const int rb0 = static_cast<int>(0.32 * rows), rb1 = static_cast<int>(0.68 * rows);
  const int cb0 = static_cast<int>(0.32 * cols), cb1 = static_cast<int>(0.68 * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int idx = r * cols + c;
      const double d1 = (r - r1) * (r - r1) + (c - c1) * (c - c1);
      const double d2 = (r - r2) * (r - r2) + (c - c2) * (c - c2);
      out.smooth(idx) = std::exp(-0.5 * d1 / (sigma * sigma)) +
                        std::exp(-0.5 * d2 / (sigma * sigma));
      if (r >= rb0 && r < rb1 && c >= cb0 && c < cb1) out.edged(idx) = 1.0;
    }
  }
  out.smooth.normalize();
  out.edged.normalize();
  return out;
}

SimData gen_data(const SimScenario& scenario) {
  scenario.validate();
  const int n = scenario.n, p = scenario.p;
  const int rank = static_cast<int>(scenario.signals.size());
  CounterRng rng(scenario.seed);

  // Left factors: left singular vectors of a seeded Gaussian draw.
  Eigen::MatrixXd gauss(n, rank);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < rank; ++k) gauss(i, k) = rng.next_normal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(gauss, Eigen::ComputeThinU);
  const Eigen::MatrixXd left = svd.matrixU();

  SimData out;
  out.truth.signal = Eigen::MatrixXd::Zero(n, p);
  for (int k = 0; k < rank; ++k) {
    Eigen::VectorXd v =
        gen_signal(scenario.signals[static_cast<std::size_t>(k)], p);
    if (v.size() != p)
      throw std::invalid_argument("signal dimension does not match p");
    Eigen::VectorXd u = left.col(k);
    const double d = scenario.scales[static_cast<std::size_t>(k)];
    out.truth.signal.noalias() += d * u * v.transpose();
    out.truth.d.push_back(d);
    out.truth.u.push_back(std::move(u));
    out.truth.v_support.push_back(nonzero_support(v, 0.0));
    out.truth.v.push_back(std::move(v));
  }

  out.x.values = out.truth.signal;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) out.x.values(i, j) += rng.next_normal();
  out.x.centered = false;
  return out;
}

std::vector<RankOneFactor> svd_baseline_fit(const DataMatrix& x, int rank) {
  std::vector<SFPCAConfig> cfg{SFPCAConfig::plain(x.n(), x.p())};
  ModelFit mf = fit(x, rank, cfg);
  return mf.factors;
}

EvalReport score(const std::vector<RankOneFactor>& estimate,
                 const SimTruth& truth, const DataMatrix& x,
                 const std::vector<RankOneFactor>* svd_baseline) {
  (void)x;
  const std::size_t rank = truth.v.size();
  EvalReport report;
  report.baseline_missing = svd_baseline == nullptr;

  const auto p = truth.v.empty() ? 0 : truth.v.front().size();
  double angle_sum = 0.0;
  int angle_count = 0;
  for (std::size_t k = 0; k < rank; ++k) {
    FactorScore fs;
    const auto& supp_true = truth.v_support[k];
    std::vector<bool> is_true(static_cast<std::size_t>(p), false);
    for (int i : supp_true) is_true[static_cast<std::size_t>(i)] = true;

    Eigen::VectorXd v_hat = Eigen::VectorXd::Zero(p);
    if (k < estimate.size() && !estimate[k].zero_solution)
      v_hat = estimate[k].v;
    int tp = 0, fp = 0;
    for (Eigen::Index i = 0; i < p; ++i) {
      if (std::abs(v_hat(i)) > kSupportThreshold) {
        if (is_true[static_cast<std::size_t>(i)])
          ++tp;
        else
          ++fp;
      }
    }
    fs.tp = supp_true.empty() ? 0.0 : static_cast<double>(tp) / supp_true.size();
    const auto neg = p - static_cast<Eigen::Index>(supp_true.size());
    fs.fp = neg > 0 ? static_cast<double>(fp) / static_cast<double>(neg) : 0.0;

    if (svd_baseline && k < svd_baseline->size()) {
      const double est_gap = 1.0 - std::abs(v_hat.dot(truth.v[k]));
      const double svd_gap =
          1.0 - std::abs((*svd_baseline)[k].v.dot(truth.v[k]));
      if (svd_gap > 1e-15) {
        fs.rel_angle = est_gap / svd_gap;
        angle_sum += *fs.rel_angle;
        ++angle_count;
      }
    }
    report.per_factor.push_back(fs);
    report.tp += fs.tp;
    report.fp += fs.fp;
  }
  if (rank > 0) {
    report.tp /= static_cast<double>(rank);
    report.fp /= static_cast<double>(rank);
  }
  if (angle_count > 0) report.rel_angle = angle_sum / angle_count;

  if (svd_baseline) {
    Eigen::MatrixXd x_hat = Eigen::MatrixXd::Zero(truth.signal.rows(),
                                                  truth.signal.cols());
    for (const auto& f : estimate)
      if (!f.zero_solution) x_hat.noalias() += f.d * f.u * f.v.transpose();
    Eigen::MatrixXd x_svd = Eigen::MatrixXd::Zero(truth.signal.rows(),
                                                  truth.signal.cols());
    for (const auto& f : *svd_baseline)
      if (!f.zero_solution) x_svd.noalias() += f.d * f.u * f.v.transpose();
    const double denom = (truth.signal - x_svd).squaredNorm();
    if (denom > 0.0)
      report.rse = (truth.signal - x_hat).squaredNorm() / denom;
  }
  return report;
}

RocTable roc_sweep(const SimScenario& scenario,
                   const std::vector<double>& alphas,
                   const std::vector<double>& lambda_path, int replicates) {
  if (scenario.signals.size() != 1)
    throw std::invalid_argument("roc_sweep: rank-1 scenario required");
  if (alphas.empty() || lambda_path.empty() || replicates < 1)
    throw std::invalid_argument("roc_sweep: empty sweep");

  SimScenario sc = scenario;
  sc.scales = {sc.n / 2.0};  // SNR pinned to d = n/2 for the ROC study

  std::vector<double> path = lambda_path;
  std::sort(path.begin(), path.end(), std::greater<>());

  const StructureMatrix omega = StructureMatrix::chain_diff(sc.p, 2);
  RocTable table;
  std::map<std::pair<double, double>, std::pair<double, double>> sums;

  for (int rep = 0; rep < replicates; ++rep) {
    SimData data;
    try {
      data = gen_data(SimScenario{sc.n, sc.p, sc.signals, sc.scales,
                                  sc.seed + static_cast<std::uint64_t>(rep)});
    } catch (const std::exception& e) {
      std::cerr << "roc_sweep: replicate " << rep << " excluded: " << e.what()
                << "\n";
      ++table.excluded_replicates;
      continue;
    }
    const auto& supp_true = data.truth.v_support.front();
    std::vector<bool> is_true(static_cast<std::size_t>(sc.p), false);
    for (int i : supp_true) is_true[static_cast<std::size_t>(i)] = true;
    const double neg = static_cast<double>(sc.p) -
                       static_cast<double>(supp_true.size());

    bool replicate_failed = false;
    std::vector<std::tuple<double, double, int, double, double>> rep_rows;
    for (double alpha : alphas) {
      SFPCAConfig cfg(SmoothOperator::none(sc.n), SmoothOperator(alpha, omega));
      cfg.v_penalty = PenaltySpec::l1(0.0);
      Eigen::VectorXd warm_u, warm_v;
      bool have_warm = false;
      for (double lambda : path) {
        cfg.v_penalty.lambda = lambda;
        if (have_warm) {
          cfg.init = InitKind::Supplied;
          cfg.u0 = warm_u;
          cfg.v0 = warm_v;
        } else {
          cfg.init = InitKind::PowerSvd;
        }
        RankOneFactor f;
        try {
          f = fit_rank_one(data.x, cfg, /*warn_uncentered=*/false);
        } catch (const std::exception& e) {
          std::cerr << "roc_sweep: replicate " << rep << " excluded: "
                    << e.what() << "\n";
          replicate_failed = true;
          break;
        }
        double tp = 0.0, fp = 0.0;
        if (!f.zero_solution) {
          int tpc = 0, fpc = 0;
          for (Eigen::Index i = 0; i < sc.p; ++i) {
            if (std::abs(f.v(i)) > kSupportThreshold) {
              if (is_true[static_cast<std::size_t>(i)])
                ++tpc;
              else
                ++fpc;
            }
          }
          tp = supp_true.empty() ? 0.0
                                 : static_cast<double>(tpc) / supp_true.size();
          fp = neg > 0 ? fpc / neg : 0.0;
          warm_u = f.u;
          warm_v = f.v;
          have_warm = true;
        } else {
          have_warm = false;
        }
        rep_rows.emplace_back(alpha, lambda, rep, tp, fp);
      }
      if (replicate_failed) break;
    }
    if (replicate_failed) {
      ++table.excluded_replicates;
      continue;
    }
    for (const auto& row : rep_rows) {
      table.long_rows.push_back(row);
      auto& acc = sums[{std::get<0>(row), std::get<1>(row)}];
      acc.first += std::get<3>(row);
      acc.second += std::get<4>(row);
    }
  }

  const int used = replicates - table.excluded_replicates;
  if (used < 1) throw std::runtime_error("roc_sweep: all replicates excluded");
  for (const auto& [key, acc] : sums)
    table.points.push_back(
        {key.first, key.second, acc.first / used, acc.second / used});

  for (double alpha : alphas) {
    std::vector<std::pair<double, double>> pts;  // (fp, tp)
    for (const auto& pt : table.points)
      if (pt.alpha == alpha) pts.emplace_back(pt.fp, pt.tp);
    std::sort(pts.begin(), pts.end());
    if (pts.empty() || pts.front().first > 0.0)
      pts.insert(pts.begin(), {0.0, 0.0});
    if (pts.back().first < 1.0) pts.emplace_back(1.0, 1.0);
    double auc = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
      auc += 0.5 * (pts[i].second + pts[i - 1].second) *
             (pts[i].first - pts[i - 1].first);
    table.auc.emplace_back(alpha, auc);
  }
  return table;
}

void write_eval_report_csv(const std::string& path, const EvalReport& report) {
  std::ofstream out(path);
  if (!out) throw io::ParseError("cannot write " + path);
  out << "factor,tp,fp,rel_angle,rse\n";
  for (std::size_t k = 0; k < report.per_factor.size(); ++k) {
    const auto& fs = report.per_factor[k];
    out << (k + 1) << ',' << io::format_double(fs.tp) << ','
        << io::format_double(fs.fp) << ','
        << (fs.rel_angle ? io::format_double(*fs.rel_angle) : "") << ",\n";
  }
  out << "mean," << io::format_double(report.tp) << ','
      << io::format_double(report.fp) << ','
      << (report.rel_angle ? io::format_double(*report.rel_angle) : "") << ','
      << (report.rse ? io::format_double(*report.rse) : "") << '\n';
}

void write_eval_report_json(const std::string& path, const EvalReport& report) {
  nlohmann::json j;
  j["tp"] = report.tp;
  j["fp"] = report.fp;
  if (report.rel_angle) j["rel_angle"] = *report.rel_angle;
  if (report.rse) j["rse"] = *report.rse;
  j["baseline_missing"] = report.baseline_missing;
  j["per_factor"] = nlohmann::json::array();
  for (const auto& fs : report.per_factor) {
    nlohmann::json f;
    f["tp"] = fs.tp;
    f["fp"] = fs.fp;
    if (fs.rel_angle) f["rel_angle"] = *fs.rel_angle;
    j["per_factor"].push_back(f);
  }
  std::ofstream out(path);
  if (!out) throw io::ParseError("cannot write " + path);
  out << j.dump(2) << '\n';
}

void write_roc_csv(const std::string& path, const RocTable& table) {
  std::ofstream out(path);
  if (!out) throw io::ParseError("cannot write " + path);
  out << "alpha,lambda,replicate,tp,fp\n";
  for (const auto& [alpha, lambda, rep, tp, fp] : table.long_rows)
    out << io::format_double(alpha) << ',' << io::format_double(lambda) << ','
        << rep << ',' << io::format_double(tp) << ',' << io::format_double(fp)
        << '\n';
}

void write_auc_csv(const std::string& path, const RocTable& table) {
  std::ofstream out(path);
  if (!out) throw io::ParseError("cannot write " + path);
  out << "alpha,auc\n";
  for (const auto& [alpha, auc] : table.auc)
    out << io::format_double(alpha) << ',' << io::format_double(auc) << '\n';
}

}  // namespace sfpca
