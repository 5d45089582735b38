#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "sfpca/simlab.hpp"

using namespace sfpca;

namespace {

int support_size(const Eigen::VectorXd& v) {
  int nnz = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v(i) != 0.0) ++nnz;
  return nnz;
}

std::vector<RankOneFactor> truth_factors(const SimTruth& truth) {
  std::vector<RankOneFactor> out;
  for (std::size_t k = 0; k < truth.d.size(); ++k) {
    RankOneFactor f;
    f.d = truth.d[k];
    f.u = truth.u[k];
    f.v = truth.v[k];
    f.converged = true;
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace

TEST_CASE("signal kind names round-trip") {
  for (auto kind : {SignalKind::Sine60, SignalKind::GaussPulse7,
                    SignalKind::Sine30, SignalKind::GridSmooth,
                    SignalKind::GridEdged})
    CHECK(signal_kind_from_string(to_string(kind)) == kind);
  CHECK_THROWS(signal_kind_from_string("sine-59"));
}

TEST_CASE("gen_signal support sizes and placement at p=200") {
  auto s60 = gen_signal(SignalKind::Sine60, 200);
  auto pulse = gen_signal(SignalKind::GaussPulse7, 200);
  auto s30 = gen_signal(SignalKind::Sine30, 200);
  CHECK(s60.size() == 200);

  CHECK(support_size(s60) == 138);
  CHECK(support_size(s30) == 138);
  CHECK(support_size(pulse) == 150);

  // sine-60 occupies the head, sine-30 the tail, the pulse the middle;
  // entries outside the support are exact zeros.
  for (int i = 138; i < 200; ++i) CHECK(s60(i) == 0.0);
  for (int i = 0; i < 62; ++i) CHECK(s30(i) == 0.0);
  for (int i = 0; i < 25; ++i) CHECK(pulse(i) == 0.0);
  for (int i = 175; i < 200; ++i) CHECK(pulse(i) == 0.0);

  CHECK(s60.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pulse.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s30.norm() == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS(gen_signal(SignalKind::Sine60, 5));
}

TEST_CASE("gen_signal is deterministic") {
  auto a = gen_signal(SignalKind::GaussPulse7, 200);
  auto b = gen_signal(SignalKind::GaussPulse7, 200);
  CHECK((a - b).isZero(0.0));
}

TEST_CASE("grid signals: dimensions, sign, and shape") {
  GridSignals g = gen_grid_signals();
  CHECK(g.smooth.size() == 625);
  CHECK(g.edged.size() == 625);
  CHECK(g.smooth.minCoeff() >= 0.0);
  CHECK(g.smooth.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g.edged.norm() == doctest::Approx(1.0).epsilon(1e-12));

  // The smooth field has exactly two strict local maxima (the two bumps).
  int maxima = 0;
  auto at = [&](int r, int c) { return g.smooth(r * 25 + c); };
  for (int r = 1; r < 24; ++r) {
    for (int c = 1; c < 24; ++c) {
      bool peak = true;
      for (int dr = -1; dr <= 1 && peak; ++dr)
        for (int dc = -1; dc <= 1 && peak; ++dc)
          if (dr || dc) peak = at(r, c) > at(r + dr, c + dc);
      if (peak) ++maxima;
    }
  }
  CHECK(maxima == 2);

  // The edged field takes exactly two values, zero and one positive level.
  double level = g.edged.maxCoeff();
  CHECK(level > 0.0);
  int on = 0;
  for (Eigen::Index i = 0; i < g.edged.size(); ++i) {
    CHECK((g.edged(i) == 0.0 || g.edged(i) == level));
    if (g.edged(i) == level) ++on;
  }
  CHECK(on == 81);  // 9x9 block on the 25x25 grid

  CHECK_THROWS(gen_grid_signals(3, 25));
}

TEST_CASE("scenario validation") {
  SimScenario sc = SimScenario::rank3(100, 1);
  CHECK(sc.p == 200);
  CHECK(sc.scales == std::vector<double>{25.0, 20.0, 100.0 / 6.0});
  CHECK_NOTHROW(sc.validate());

  sc.scales = {25.0, 25.0, 20.0};  // must be strictly decreasing
  CHECK_THROWS(sc.validate());
  sc.scales = {25.0, -1.0, 20.0};
  CHECK_THROWS(sc.validate());
  sc.scales = {25.0};  // length mismatch with three signals
  CHECK_THROWS(sc.validate());
  sc = SimScenario::rank3(100, 1);
  sc.n = 1;
  CHECK_THROWS(sc.validate());
}

TEST_CASE("gen_data: orthonormal left factors and exact low-rank truth") {
  SimData data = gen_data(SimScenario::rank3(100, 42));
  CHECK(data.x.n() == 100);
  CHECK(data.x.p() == 200);
  CHECK(!data.x.centered);
  CHECK(data.truth.u.size() == 3);

  for (int k = 0; k < 3; ++k) {
    CHECK(data.truth.u[k].norm() == doctest::Approx(1.0).epsilon(1e-10));
    for (int l = k + 1; l < 3; ++l)
      CHECK(std::abs(data.truth.u[k].dot(data.truth.u[l])) < 1e-10);
  }

  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(100, 200);
  for (int k = 0; k < 3; ++k)
    expect += data.truth.d[k] * data.truth.u[k] * data.truth.v[k].transpose();
  CHECK((data.truth.signal - expect).cwiseAbs().maxCoeff() < 1e-12);

  // Recorded supports match the stored right factors.
  for (int k = 0; k < 3; ++k)
    CHECK(static_cast<int>(data.truth.v_support[k].size()) ==
          support_size(data.truth.v[k]));
}

TEST_CASE("gen_data is bit-reproducible per seed") {
  SimData a = gen_data(SimScenario::rank3(60, 7));
  SimData b = gen_data(SimScenario::rank3(60, 7));
  SimData c = gen_data(SimScenario::rank3(60, 8));
  CHECK((a.x.values - b.x.values).isZero(0.0));
  CHECK((a.x.values - c.x.values).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("score: truth estimate is perfect, baseline scores itself at one") {
  SimData data = gen_data(SimScenario::rank3(80, 11));
  auto baseline = svd_baseline_fit(data.x, 3);
  REQUIRE(baseline.size() == 3);
  for (int k = 1; k < 3; ++k) CHECK(baseline[k].d <= baseline[k - 1].d);

  EvalReport perfect = score(truth_factors(data.truth), data.truth, data.x,
                             &baseline);
  CHECK(perfect.tp == 1.0);
  CHECK(perfect.fp == 0.0);
  REQUIRE(perfect.rel_angle.has_value());
  CHECK(*perfect.rel_angle == doctest::Approx(0.0).epsilon(1e-10));
  REQUIRE(perfect.rse.has_value());
  CHECK(*perfect.rse == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(!perfect.baseline_missing);

  EvalReport self = score(baseline, data.truth, data.x, &baseline);
  REQUIRE(self.rel_angle.has_value());
  CHECK(*self.rel_angle == doctest::Approx(1.0).epsilon(1e-12));
  REQUIRE(self.rse.has_value());
  CHECK(*self.rse == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("score: zero and missing estimates") {
  SimData data = gen_data(SimScenario::rank3(60, 12));

  std::vector<RankOneFactor> zeros(3);
  for (auto& f : zeros) {
    f.zero_solution = true;
    f.u = Eigen::VectorXd::Zero(60);
    f.v = Eigen::VectorXd::Zero(200);
  }
  EvalReport z = score(zeros, data.truth, data.x, nullptr);
  CHECK(z.tp == 0.0);
  CHECK(z.fp == 0.0);
  CHECK(z.baseline_missing);
  CHECK(!z.rel_angle.has_value());
  CHECK(!z.rse.has_value());

  // A short estimate list counts the missing ranks as zero fits.
  EvalReport empty = score({}, data.truth, data.x, nullptr);
  CHECK(empty.tp == 0.0);
  CHECK(empty.per_factor.size() == 3);
}

TEST_CASE("roc_sweep: endpoints, monotone averages, AUC range") {
  SimScenario sc;
  sc.n = 40;
  sc.p = 80;
  sc.signals = {SignalKind::Sine60};
  sc.scales = {1.0};  // overridden to n/2 inside the sweep
  sc.seed = 300;

  std::vector<double> path{0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 1e6};
  RocTable table = roc_sweep(sc, {0.0, 1.0}, path, 2);
  CHECK(table.excluded_replicates == 0);
  CHECK(table.long_rows.size() == 2 * 2 * path.size());

  for (double alpha : {0.0, 1.0}) {
    std::vector<RocPoint> pts;  // ascending lambda within alpha
    for (const auto& pt : table.points)
      if (pt.alpha == alpha) pts.push_back(pt);
    REQUIRE(pts.size() == path.size());

    // lambda = 0 keeps everything; lambda past the threshold kills everything.
    CHECK(pts.front().tp == 1.0);
    CHECK(pts.front().fp == 1.0);
    CHECK(pts.back().tp == 0.0);
    CHECK(pts.back().fp == 0.0);

    for (const auto& pt : pts) {
      CHECK(pt.tp >= 0.0);
      CHECK(pt.tp <= 1.0);
      CHECK(pt.fp >= 0.0);
      CHECK(pt.fp <= 1.0);
    }
    // TP and FP grow (up to replicate-average wiggle) as lambda shrinks.
    for (std::size_t i = 1; i < pts.size(); ++i) {
      CHECK(pts[i - 1].tp >= pts[i].tp - 0.02);
      CHECK(pts[i - 1].fp >= pts[i].fp - 0.02);
    }
  }

  REQUIRE(table.auc.size() == 2);
  for (const auto& [alpha, auc] : table.auc) {
    CHECK(auc >= 0.0);
    CHECK(auc <= 1.0);
  }

  SimScenario bad = SimScenario::rank3(40, 1);
  CHECK_THROWS(roc_sweep(bad, {0.0}, path, 1));  // rank-1 only
  CHECK_THROWS(roc_sweep(sc, {}, path, 1));
  CHECK_THROWS(roc_sweep(sc, {0.0}, path, 0));
}

TEST_CASE("csv and json writers") {
  SimData data = gen_data(SimScenario::rank3(40, 5));
  auto baseline = svd_baseline_fit(data.x, 3);
  EvalReport rep = score(baseline, data.truth, data.x, &baseline);

  const std::string csv = "eval_report_test.csv";
  write_eval_report_csv(csv, rep);
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "factor,tp,fp,rel_angle,rse");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 4);  // three factors plus the mean row
  std::remove(csv.c_str());

  const std::string json = "eval_report_test.json";
  write_eval_report_json(json, rep);
  std::ifstream jin(json);
  std::string all((std::istreambuf_iterator<char>(jin)),
                  std::istreambuf_iterator<char>());
  CHECK(all.find("\"tp\"") != std::string::npos);
  CHECK(all.find("\"per_factor\"") != std::string::npos);
  std::remove(json.c_str());
}
