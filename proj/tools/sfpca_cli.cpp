// Command-line front end: fit, select, simulate, roc.

#include <CLI11.hpp>
#include <Eigen/Core>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "sfpca/core.hpp"
#include "sfpca/io.hpp"
#include "sfpca/modelsel.hpp"
#include "sfpca/simlab.hpp"
#include "sfpca/structmat.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNotConverged = 3;

struct RunConfig {
  std::string input;
  std::string out_dir = ".";
  int rank = 1;
  double lambda_u = 0.0, lambda_v = 0.0;
  double alpha_u = 0.0, alpha_v = 0.0;
  std::string omega_u_file, omega_v_file;
  std::string penalty = "l1";
  double scad_a = 3.7;
  bool nonneg = false;
  bool no_center = false;
  bool header = false;
  bool accelerate = false;
  std::uint64_t seed = 0;
  int threads = 1;
  // select
  std::vector<double> lambda_grid, alpha_grid;
  int max_nested = 5;
  bool inverse_df = false;
  // simulate / roc
  int n = 100, p = 200;
  std::vector<std::string> signals;
  std::vector<double> scales;
  std::vector<double> alphas;
  std::vector<double> lambdas;
  int replicates = 10;
  std::string signal = "sine-60";
};

sfpca::DataMatrix load_input(const RunConfig& rc) {
  Eigen::MatrixXd raw = sfpca::io::read_csv_matrix(rc.input, rc.header);
  if (rc.no_center) {
    sfpca::DataMatrix x;
    x.values = std::move(raw);
    x.centered = false;
    return x;
  }
  return sfpca::DataMatrix::centered_from(raw);
}

sfpca::SmoothOperator make_smooth(double alpha, const std::string& omega_file,
                                  Eigen::Index dim) {
  if (omega_file.empty()) {
    if (alpha != 0.0)
      throw std::invalid_argument(
          "a nonzero smoothing level needs a structure matrix file; built-in "
          "chains can be written with `simulate` or passed via --omega-*");
    return sfpca::SmoothOperator::none(static_cast<int>(dim));
  }
  sfpca::StructureMatrix omega = sfpca::StructureMatrix::load(omega_file);
  if (omega.dim() != dim)
    throw std::invalid_argument("structure matrix dimension " +
                                std::to_string(omega.dim()) +
                                " does not match data dimension " +
                                std::to_string(dim));
  return {alpha, std::move(omega)};
}

sfpca::PenaltySpec make_penalty(const RunConfig& rc, double lambda) {
  sfpca::PenaltySpec spec;
  spec.kind = sfpca::penalty_kind_from_string(rc.penalty);
  spec.lambda = lambda;
  spec.nonneg = rc.nonneg;
  spec.scad_a = rc.scad_a;
  spec.validate();
  return spec;
}

json base_manifest(const RunConfig& rc, const std::string& command) {
  json m;
  m["command"] = command;
  m["seed"] = rc.seed;
  m["threads"] = rc.threads;
  m["rank"] = rc.rank;
  m["penalty"] = rc.penalty;
  m["nonneg"] = rc.nonneg;
  m["scad_a"] = rc.scad_a;
  m["center"] = !rc.no_center;
  m["lambda_u"] = rc.lambda_u;
  m["lambda_v"] = rc.lambda_v;
  m["alpha_u"] = rc.alpha_u;
  m["alpha_v"] = rc.alpha_v;
  if (!rc.input.empty()) {
    m["input"] = rc.input;
    m["input_digest"] = sfpca::io::file_digest(rc.input);
  }
  if (!rc.omega_u_file.empty()) {
    m["omega_u"] = rc.omega_u_file;
    m["omega_u_digest"] = sfpca::io::file_digest(rc.omega_u_file);
  }
  if (!rc.omega_v_file.empty()) {
    m["omega_v"] = rc.omega_v_file;
    m["omega_v_digest"] = sfpca::io::file_digest(rc.omega_v_file);
  }
  return m;
}

void write_manifest(const RunConfig& rc, const json& m) {
  std::ofstream out(fs::path(rc.out_dir) / "manifest.json");
  out << m.dump(2) << '\n';
}

void write_factors(const RunConfig& rc, const std::vector<sfpca::RankOneFactor>& factors) {
  {
    std::ofstream out(fs::path(rc.out_dir) / "factors.csv");
    out << "rank,side,index,value\n";
    for (std::size_t k = 0; k < factors.size(); ++k) {
      for (Eigen::Index i = 0; i < factors[k].u.size(); ++i)
        out << (k + 1) << ",u," << i << ','
            << sfpca::io::format_double(factors[k].u(i)) << '\n';
      for (Eigen::Index i = 0; i < factors[k].v.size(); ++i)
        out << (k + 1) << ",v," << i << ','
            << sfpca::io::format_double(factors[k].v(i)) << '\n';
    }
  }
  {
    std::ofstream out(fs::path(rc.out_dir) / "dvalues.csv");
    out << "rank,d\n";
    for (std::size_t k = 0; k < factors.size(); ++k)
      out << (k + 1) << ',' << sfpca::io::format_double(factors[k].d) << '\n';
  }
  {
    json traces = json::array();
    for (const auto& f : factors) traces.push_back(f.objective_trace);
    std::ofstream out(fs::path(rc.out_dir) / "traces.json");
    out << traces.dump() << '\n';
  }
}

int cmd_fit(const RunConfig& rc) {
  sfpca::DataMatrix x = load_input(rc);
  sfpca::SFPCAConfig cfg(make_smooth(rc.alpha_u, rc.omega_u_file, x.n()),
                         make_smooth(rc.alpha_v, rc.omega_v_file, x.p()));
  cfg.u_penalty = make_penalty(rc, rc.lambda_u);
  cfg.v_penalty = make_penalty(rc, rc.lambda_v);
  cfg.accelerate = rc.accelerate;
  sfpca::ModelFit mf = sfpca::fit(x, rc.rank, {cfg});
  fs::create_directories(rc.out_dir);
  write_factors(rc, mf.factors);

  json m = base_manifest(rc, "fit");
  m["n"] = x.n();
  m["p"] = x.p();
  bool all_converged = true;
  json per_rank = json::array();
  for (const auto& f : mf.factors) {
    per_rank.push_back({{"d", f.d},
                        {"converged", f.converged},
                        {"zero_solution", f.zero_solution}});
    all_converged = all_converged && f.converged;
  }
  m["factors"] = per_rank;
  m["truncated"] = mf.truncated;
  m["all_converged"] = all_converged;
  write_manifest(rc, m);
  if (!all_converged) {
    std::cerr << "sfpca: solver did not converge; results written and flagged\n";
    return kExitNotConverged;
  }
  return 0;
}

int cmd_select(const RunConfig& rc) {
  sfpca::DataMatrix x = load_input(rc);
  sfpca::SFPCAConfig base(make_smooth(0.0, rc.omega_u_file, x.n()),
                          make_smooth(0.0, rc.omega_v_file, x.p()));
  base.u_penalty = make_penalty(rc, 0.0);
  base.v_penalty = make_penalty(rc, 0.0);
  base.accelerate = rc.accelerate;

  sfpca::SelectOptions opts;
  opts.max_nested = rc.max_nested;
  opts.inverse_df = rc.inverse_df;

  auto make_grid = [&](const Eigen::VectorXd& target) {
    if (!rc.lambda_grid.empty() || !rc.alpha_grid.empty()) {
      sfpca::ParamGrid g;
      g.lambdas = rc.lambda_grid;
      g.alphas = rc.alpha_grid.empty() ? std::vector<double>{0.0}
                                       : rc.alpha_grid;
      g.validate();
      return g;
    }
    return sfpca::ParamGrid::defaults(target.cwiseAbs().maxCoeff());
  };

  fs::create_directories(rc.out_dir);
  std::vector<sfpca::RankOneFactor> factors;
  std::vector<sfpca::BicEntry> table;
  json chosen = json::array();
  bool all_converged = true;
  bool stabilized_all = true;
  sfpca::DataMatrix residual = x;
  for (int k = 0; k < rc.rank; ++k) {
    sfpca::InitPair init = sfpca::init_rank1(residual);
    sfpca::ParamGrid u_grid = make_grid(residual.values * init.v);
    sfpca::ParamGrid v_grid = make_grid(residual.values.transpose() * init.u);
    sfpca::SelectionResult sel =
        sfpca::nested_select(residual, u_grid, v_grid, base, opts);
    table.insert(table.end(), sel.bic_table.begin(), sel.bic_table.end());
    chosen.push_back({{"rank", k + 1},
                      {"lambda_u", sel.chosen.lambda_u},
                      {"alpha_u", sel.chosen.alpha_u},
                      {"lambda_v", sel.chosen.lambda_v},
                      {"alpha_v", sel.chosen.alpha_v},
                      {"stabilized", sel.stabilized},
                      {"converged", sel.refit.converged},
                      {"zero_solution", sel.refit.zero_solution}});
    all_converged = all_converged && sel.refit.converged;
    stabilized_all = stabilized_all && sel.stabilized;
    residual = sfpca::deflate(residual, sel.refit);
    const bool zero = sel.refit.zero_solution;
    factors.push_back(std::move(sel.refit));
    if (zero) break;
  }
  write_factors(rc, factors);
  sfpca::write_bic_table_csv((fs::path(rc.out_dir) / "bic_table.csv").string(),
                             table);
  json m = base_manifest(rc, "select");
  m["n"] = x.n();
  m["p"] = x.p();
  m["chosen"] = chosen;
  m["stabilized"] = stabilized_all;
  m["max_nested"] = rc.max_nested;
  m["inverse_df"] = rc.inverse_df;
  m["all_converged"] = all_converged;
  write_manifest(rc, m);
  if (!all_converged) {
    std::cerr << "sfpca: solver did not converge; results written and flagged\n";
    return kExitNotConverged;
  }
  return 0;
}

int cmd_simulate(const RunConfig& rc) {
  sfpca::SimScenario sc;
  sc.n = rc.n;
  sc.p = rc.p;
  sc.seed = rc.seed;
  if (rc.signals.empty()) {
    sc = sfpca::SimScenario::rank3(rc.n, rc.seed);
    sc.p = rc.p;
  } else {
    for (const auto& name : rc.signals)
      sc.signals.push_back(sfpca::signal_kind_from_string(name));
    if (!rc.scales.empty()) {
      sc.scales = rc.scales;
    } else {
      for (std::size_t k = 0; k < sc.signals.size(); ++k)
        sc.scales.push_back(rc.n / (4.0 + static_cast<double>(k)));
    }
  }
  sfpca::SimData data = sfpca::gen_data(sc);

  fs::create_directories(rc.out_dir);
  sfpca::io::write_csv_matrix((fs::path(rc.out_dir) / "X.csv").string(),
                              data.x.values);
  Eigen::MatrixXd truth_v(sc.p, static_cast<Eigen::Index>(data.truth.v.size()));
  Eigen::MatrixXd truth_u(sc.n, static_cast<Eigen::Index>(data.truth.u.size()));
  for (std::size_t k = 0; k < data.truth.v.size(); ++k) {
    truth_v.col(static_cast<Eigen::Index>(k)) = data.truth.v[k];
    truth_u.col(static_cast<Eigen::Index>(k)) = data.truth.u[k];
  }
  sfpca::io::write_csv_matrix((fs::path(rc.out_dir) / "truth_v.csv").string(),
                              truth_v);
  sfpca::io::write_csv_matrix((fs::path(rc.out_dir) / "truth_u.csv").string(),
                              truth_u);
  {
    std::ofstream out(fs::path(rc.out_dir) / "truth_d.csv");
    out << "rank,d\n";
    for (std::size_t k = 0; k < data.truth.d.size(); ++k)
      out << (k + 1) << ',' << sfpca::io::format_double(data.truth.d[k])
          << '\n';
  }
  json m = base_manifest(rc, "simulate");
  m["n"] = sc.n;
  m["p"] = sc.p;
  json sigs = json::array();
  for (auto kind : sc.signals) sigs.push_back(sfpca::to_string(kind));
  m["signals"] = sigs;
  m["scales"] = sc.scales;
  write_manifest(rc, m);
  return 0;
}

int cmd_roc(const RunConfig& rc) {
  sfpca::SimScenario sc;
  sc.n = rc.n;
  sc.p = rc.p;
  sc.seed = rc.seed;
  sc.signals = {sfpca::signal_kind_from_string(rc.signal)};
  sc.scales = {rc.n / 2.0};

  std::vector<double> alphas = rc.alphas.empty()
                                   ? std::vector<double>{0.0, 1.0, 10.0}
                                   : rc.alphas;
  std::vector<double> path = rc.lambdas;
  if (path.empty()) {
    // Default path: fractions of the initialization's sparsity threshold on
    // the first replicate, spanning both ROC endpoints.
    sfpca::SimData probe = sfpca::gen_data(sc);
    sfpca::InitPair init = sfpca::init_rank1(probe.x);
    const double lmax =
        (probe.x.values.transpose() * init.u).cwiseAbs().maxCoeff();
    path.push_back(0.0);
    for (int i = 0; i < 15; ++i) path.push_back(lmax * 1.2 * (i + 1) / 15.0);
  }
  sfpca::RocTable table = sfpca::roc_sweep(sc, alphas, path, rc.replicates);

  fs::create_directories(rc.out_dir);
  sfpca::write_roc_csv((fs::path(rc.out_dir) / "roc.csv").string(), table);
  sfpca::write_auc_csv((fs::path(rc.out_dir) / "auc.csv").string(), table);

  std::ostringstream summary;
  summary << "auc:";
  for (const auto& [alpha, auc] : table.auc)
    summary << " alpha=" << alpha << " -> " << auc;
  std::cout << summary.str() << '\n';

  json m = base_manifest(rc, "roc");
  m["n"] = sc.n;
  m["p"] = sc.p;
  m["signal"] = rc.signal;
  m["alphas"] = alphas;
  m["lambda_path"] = path;
  m["replicates"] = rc.replicates;
  m["excluded_replicates"] = table.excluded_replicates;
  m["summary"] = summary.str();
  write_manifest(rc, m);
  return 0;
}

void add_common(CLI::App* app, RunConfig& rc) {
  app->add_option("--out", rc.out_dir, "output directory");
  app->add_option("--seed", rc.seed, "seed for all randomness");
  app->add_option("--threads", rc.threads, "internal thread count");
  app->set_config("--config", "", "TOML config file (flags take precedence)");
}

void add_fit_flags(CLI::App* app, RunConfig& rc, bool required_input) {
  auto* in = app->add_option("--input", rc.input, "input data CSV");
  if (required_input) in->required();
  app->add_flag("--header", rc.header, "skip one header line in the input");
  app->add_flag("--no-center", rc.no_center, "do not center columns");
  app->add_option("--rank,-K", rc.rank, "number of factors");
  app->add_option("--penalty", rc.penalty, "sparsity penalty: l1, scad, none");
  app->add_option("--scad-a", rc.scad_a, "SCAD shape parameter (a > 2)");
  app->add_flag("--nonneg", rc.nonneg, "non-negative factors");
  app->add_flag("--accelerate", rc.accelerate, "momentum in the inner loops");
  app->add_option("--omega-u", rc.omega_u_file, "structure matrix file for u");
  app->add_option("--omega-v", rc.omega_v_file, "structure matrix file for v");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse and functional PCA"};
  app.require_subcommand(1);
  RunConfig rc;

  auto* fit_cmd = app.add_subcommand("fit", "fit SFPCA factors");
  add_common(fit_cmd, rc);
  add_fit_flags(fit_cmd, rc, true);
  fit_cmd->add_option("--lambda-u", rc.lambda_u, "sparsity level for u");
  fit_cmd->add_option("--lambda-v", rc.lambda_v, "sparsity level for v");
  fit_cmd->add_option("--alpha-u", rc.alpha_u, "smoothness level for u");
  fit_cmd->add_option("--alpha-v", rc.alpha_v, "smoothness level for v");

  auto* select_cmd =
      app.add_subcommand("select", "nested BIC parameter selection + fit");
  add_common(select_cmd, rc);
  add_fit_flags(select_cmd, rc, true);
  select_cmd->add_option("--lambda-grid", rc.lambda_grid,
                         "candidate sparsity levels")
      ->delimiter(',');
  select_cmd->add_option("--alpha-grid", rc.alpha_grid,
                         "candidate smoothness levels")
      ->delimiter(',');
  select_cmd->add_option("--max-nested", rc.max_nested,
                         "nested selection sweeps");
  select_cmd->add_flag("--inverse-df", rc.inverse_df,
                       "ridge-projection degrees of freedom");

  auto* sim_cmd = app.add_subcommand("simulate", "generate synthetic data");
  add_common(sim_cmd, rc);
  sim_cmd->add_option("--n", rc.n, "samples");
  sim_cmd->add_option("--p", rc.p, "features");
  sim_cmd->add_option("--signals", rc.signals, "signal kinds")->delimiter(',');
  sim_cmd->add_option("--scales", rc.scales, "signal scales d_k")
      ->delimiter(',');

  auto* roc_cmd = app.add_subcommand("roc", "ROC sweep over sparsity levels");
  add_common(roc_cmd, rc);
  roc_cmd->add_option("--n", rc.n, "samples");
  roc_cmd->add_option("--p", rc.p, "features");
  roc_cmd->add_option("--signal", rc.signal, "rank-1 signal kind");
  roc_cmd->add_option("--alphas", rc.alphas, "smoothness levels")
      ->delimiter(',');
  roc_cmd->add_option("--lambdas", rc.lambdas, "sparsity path")
      ->delimiter(',');
  roc_cmd->add_option("--replicates", rc.replicates, "replicates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  Eigen::setNbThreads(rc.threads);
  try {
    if (fit_cmd->parsed()) return cmd_fit(rc);
    if (select_cmd->parsed()) return cmd_select(rc);
    if (sim_cmd->parsed()) return cmd_simulate(rc);
    if (roc_cmd->parsed()) return cmd_roc(rc);
  } catch (const std::exception& e) {
    std::cerr << "sfpca: error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
