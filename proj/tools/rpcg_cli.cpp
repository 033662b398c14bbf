// rpcg: command-line driver for the solvers, calibration runs and the
// inverse problem.
//
// Exit codes: 0 success, 1 selftest failure, 2 invalid input or config,
// 3 solver did not converge, 4 I/O error, 5 numerical failure.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "config_json.hpp"
#include "rpcg/calibration/sbc.hpp"
#include "rpcg/calibration/sweep.hpp"
#include "rpcg/core/generators.hpp"
#include "rpcg/core/io.hpp"
#include "rpcg/inverse/experiment.hpp"
#include "rpcg/selftest.hpp"
#include "rpcg/solvers/krylov.hpp"
#include "rpcg/solvers/serialize.hpp"
#include "rpcg/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kSelftestFailed = 1, kInvalid = 2, kNotConverged = 3, kIo = 4, kNumerical = 5 };

constexpr int kCsvFormatVersion = 1;

struct Common {
  std::uint64_t seed = 0;
  std::string out = "out";
  int threads = 1;
};

/// Files written by a subcommand, with the CSV header where there is one.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

  fs::path add(const std::string& name, std::string csv_header = {}) {
    files_.push_back({name, std::move(csv_header)});
    return dir_ / name;
  }

  json to_json() const {
    json list = json::array();
    for (const auto& f : files_) {
      json entry{{"path", f.name}};
      if (!f.header.empty()) entry["csv_header"] = f.header;
      list.push_back(entry);
    }
    return list;
  }

  const fs::path& dir() const { return dir_; }

 private:
  struct File {
    std::string name;
    std::string header;
  };
  fs::path dir_;
  std::vector<File> files_;
};

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw rpcg::IoError("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw rpcg::IoError("write failed for " + path.string());
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

/// Written last, through a rename, so its presence marks a finished run.
void write_manifest(const Outputs& outputs, const std::string& subcommand, const json& config, const Common& common,
                    double wall_seconds, const std::string& status) {
  json manifest{{"subcommand", subcommand},
                {"status", status},
                {"config", config},
                {"seed", common.seed},
                {"threads", common.threads},
                {"version", rpcg::version},
                {"csv_format_version", kCsvFormatVersion},
                {"outputs", outputs.to_json()},
                {"wall_seconds", wall_seconds},
                {"finished_at", utc_timestamp()}};
  const fs::path final_path = outputs.dir() / "manifest.json";
  const fs::path tmp = outputs.dir() / "manifest.json.tmp";
  write_json(tmp, manifest);
  fs::rename(tmp, final_path);
}

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void add_common(CLI::App* sub, Common& common) {
  sub->add_option("--seed", common.seed, "Master seed")->capture_default_str();
  sub->add_option("--out", common.out, "Output directory")->capture_default_str();
  sub->add_option("--threads", common.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
}

std::vector<rpcg::SolverMethod> parse_methods(const std::vector<std::string>& names) {
  std::vector<rpcg::SolverMethod> out;
  for (const auto& n : names) out.push_back(rpcg::parse_method(n));
  return out;
}

rpcg::MatrixPolicy parse_policy(const std::string& name) {
  if (name == "fixed") return rpcg::MatrixPolicy::FixedPerRun;
  if (name == "redrawn") return rpcg::MatrixPolicy::RedrawnPerReplicate;
  throw rpcg::InvalidArgument("unknown matrix policy '" + name + "' (expected fixed or redrawn)");
}

// ---------------------------------------------------------------- solve

struct SolveArgs {
  std::string matrix;
  std::string gen;
  rpcg::Index d = 0;
  std::string rhs;
  std::string rhs_gen = "normal";
  std::string x0;
  std::string method = "cg";
  double eps1 = 1e-1;
  double eps2 = 1e-2;
  rpcg::Index max_iter = 0;
  bool reorth = false;
  std::optional<rpcg::Index> mean_iterations;
  bool full_post = false;
};

json to_json(const SolveArgs& a) {
  json j{{"matrix", a.matrix}, {"gen", a.gen},         {"d", a.d},       {"rhs", a.rhs},
         {"rhs_gen", a.rhs_gen}, {"x0", a.x0},         {"method", a.method}, {"eps1", a.eps1},
         {"eps2", a.eps2},     {"max_iter", a.max_iter}, {"reorth", a.reorth}, {"full_post", a.full_post}};
  j["mean_iterations"] = a.mean_iterations ? json(*a.mean_iterations) : json(nullptr);
  return j;
}

rpcg::SpdMatrix<double> resolve_matrix(const SolveArgs& a, std::uint64_t seed) {
  if (!a.matrix.empty()) return rpcg::load_matrix(a.matrix);
  if (a.d < 1) throw rpcg::InvalidArgument("--gen needs --d >= 1");
  if (a.gen == "identity") return rpcg::SpdMatrix<double>::identity(a.d);
  if (a.gen == "spd-exp") {
    rpcg::RngStream rng(seed, 0);
    return rpcg::sample_spd_exp(a.d, rng);
  }
  throw rpcg::InvalidArgument("unknown generator '" + a.gen + "' (expected identity or spd-exp)");
}

rpcg::VectorXd resolve_rhs(const SolveArgs& a, const rpcg::SpdMatrix<double>& m, std::uint64_t seed) {
  if (!a.rhs.empty()) return rpcg::load_vector(a.rhs);
  const rpcg::Index d = m.dim();
  rpcg::RngStream rng(seed, 1);
  if (a.rhs_gen == "ones") return rpcg::VectorXd::Ones(d);
  if (a.rhs_gen == "normal") return rng.normal_vector(d);
  if (a.rhs_gen == "prior") return rpcg::matvec(m, rpcg::Cholesky<double>(m).sample_inverse_covariance(rng));
  throw rpcg::InvalidArgument("unknown --rhs-gen '" + a.rhs_gen + "' (expected ones, normal or prior)");
}

int run_solve(const SolveArgs& a, const Common& common) {
  Stopwatch clock;
  if (a.matrix.empty() == a.gen.empty()) throw rpcg::InvalidArgument("give exactly one of --matrix and --gen");
  const rpcg::SolverMethod method = rpcg::parse_method(a.method);
  rpcg::SolverConfig cfg;
  cfg.eps1 = a.eps1;
  cfg.eps2 = method == rpcg::SolverMethod::Cg ? a.eps1 : a.eps2;
  cfg.max_iter = a.max_iter;
  cfg.reorthogonalise = a.reorth || a.full_post;
  cfg.mean_iterations = a.mean_iterations;
  if (a.full_post) {
    if (method == rpcg::SolverMethod::Cg || method == rpcg::SolverMethod::Exact) {
      throw rpcg::InvalidArgument("--full-post applies to pi and rpi only");
    }
    cfg.eps2 = 1e-300;
    cfg.eps1 = std::max(cfg.eps1, cfg.eps2);
  }
  cfg.validate();

  const auto m = resolve_matrix(a, common.seed);
  const rpcg::VectorXd b = resolve_rhs(a, m, common.seed);
  const rpcg::VectorXd x0 = a.x0.empty() ? rpcg::VectorXd::Zero(m.dim()) : rpcg::load_vector(a.x0);
  rpcg::require_same_dim(m.dim(), b.size(), "right-hand side");
  rpcg::require_same_dim(m.dim(), x0.size(), "initial guess");

  rpcg::SolveOutcome<double> outcome;
  switch (method) {
    case rpcg::SolverMethod::Exact: {
      outcome.mean = rpcg::direct_solve(m, b);
      outcome.cg_mean = outcome.final_iterate = outcome.mean;
      outcome.factor.resize(m.dim(), 0);
      outcome.converged = true;
      outcome.residual_history = {(b - rpcg::matvec(m, outcome.mean)).norm()};
      break;
    }
    case rpcg::SolverMethod::Cg:
    case rpcg::SolverMethod::Pi:
      outcome = rpcg::pi_solve(m, b, x0, cfg);
      break;
    case rpcg::SolverMethod::Rpi: {
      rpcg::RngStream rng(common.seed, 2);
      outcome = rpcg::rpi_solve(m, b, x0, cfg, rng);
      break;
    }
  }

  fs::create_directories(common.out);
  Outputs outputs(common.out);
  json doc = rpcg::to_json(outcome);
  doc["method"] = a.method;
  doc["dim"] = m.dim();
  write_json(outputs.add("solve.json"), doc);
  const std::string status = outcome.converged ? "ok" : "not_converged";
  write_manifest(outputs, "solve", to_json(a), common, clock.seconds(), status);
  std::cout << a.method << ": d=" << m.dim() << " m=" << outcome.m << " t=" << outcome.t
            << (outcome.converged ? " converged" : " NOT converged") << '\n';
  return outcome.converged ? kOk : kNotConverged;
}

// ---------------------------------------------------------------- sbc

struct SbcArgs {
  rpcg::SbcConfig cfg;
  std::string method = "rpi";
  std::string matrix;
  std::string test_vector;
};

int run_sbc(SbcArgs a, const Common& common) {
  Stopwatch clock;
  a.cfg.method = rpcg::parse_method(a.method);
  a.cfg.seed = common.seed;
  a.cfg.threads = common.threads;
  if (!a.test_vector.empty()) a.cfg.test_vector = rpcg::load_vector(a.test_vector);
  a.cfg.validate();

  rpcg::CalibrationReport report;
  if (!a.matrix.empty()) {
    const auto m = rpcg::load_matrix(a.matrix);
    a.cfg.dim = m.dim();
    report = rpcg::sbc_run(a.cfg, m);
  } else {
    report = rpcg::sbc_run(a.cfg);
  }

  fs::create_directories(common.out);
  Outputs outputs(common.out);
  rpcg::write_ranks_csv(outputs.add("ranks.csv", "index,rank"), report);
  rpcg::write_histogram_csv(outputs.add("histogram.csv", "bin_left,bin_right,count"), report.histogram);
  write_json(outputs.add("report.json"), rpcg::to_json(report));
  json config = rpcg::to_json(a.cfg);
  config["matrix"] = a.matrix;
  write_manifest(outputs, "sbc", config, common, clock.seconds(), "ok");
  std::cout << "KS = " << report.ks_statistic << " (1% critical value " << report.critical_value << ", "
            << (report.consistent_with_uniform ? "consistent with uniform" : "rejects uniform") << ")\n";
  return kOk;
}

// ---------------------------------------------------------------- ks-sweep

struct SweepArgs {
  rpcg::SweepConfig cfg;
  std::vector<std::string> methods{"pi", "rpi"};
  std::string policy = "redrawn";
};

int run_sweep(SweepArgs a, const Common& common) {
  Stopwatch clock;
  a.cfg.methods = parse_methods(a.methods);
  a.cfg.matrix_policy = parse_policy(a.policy);
  a.cfg.seed = common.seed;
  a.cfg.threads = common.threads;
  a.cfg.validate();

  const rpcg::SweepTable table = rpcg::ks_sweep(a.cfg);

  fs::create_directories(common.out);
  Outputs outputs(common.out);
  for (const rpcg::Index d : a.cfg.dims) {
    const auto path =
        outputs.add("sweep_d" + std::to_string(d) + ".csv", "method,eps1,eps2,ks_median,ks_q1,ks_q3,n_replicates");
    rpcg::write_sweep_csv(path, table, d);
  }
  json rows = json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"method", rpcg::to_string(r.method)},
                    {"dim", r.dim},
                    {"eps1", r.eps1},
                    {"eps2", r.eps2},
                    {"ks_median", r.ks_median},
                    {"ks_q1", r.ks_q1},
                    {"ks_q3", r.ks_q3},
                    {"n_replicates", r.n_replicates},
                    {"failed_replicates", r.failed_replicates},
                    {"degenerate_simulations", r.degenerate_simulations},
                    {"ks_values", r.ks_values}});
  }
  const json doc{{"rows", rows},
                 {"uniform_baseline",
                  {{"median", table.uniform_baseline.median},
                   {"q1", table.uniform_baseline.q1},
                   {"q3", table.uniform_baseline.q3},
                   {"mean", table.uniform_baseline.mean},
                   {"values", table.uniform_values}}}};
  write_json(outputs.add("sweep.json"), doc);
  write_manifest(outputs, "ks-sweep", rpcg::to_json(a.cfg), common, clock.seconds(), "ok");
  for (const auto& r : table.rows) {
    std::cout << rpcg::to_string(r.method) << " d=" << r.dim << " eps1=" << r.eps1 << " eps2=" << r.eps2
              << " median KS=" << r.ks_median << '\n';
  }
  std::cout << "uniform baseline median KS=" << table.uniform_baseline.median << '\n';
  return kOk;
}

// ---------------------------------------------------------------- inverse

struct InverseArgs {
  rpcg::inverse::InverseConfig cfg;
  std::vector<std::string> methods{"exact", "cg", "pi", "rpi"};
};

int run_inverse(InverseArgs a, const Common& common) {
  Stopwatch clock;
  a.cfg.methods = parse_methods(a.methods);
  a.cfg.seed = common.seed;
  a.cfg.threads = common.threads;
  a.cfg.validate();

  const auto result = rpcg::inverse::run_inverse_experiment(a.cfg);

  fs::create_directories(common.out);
  Outputs outputs(common.out);
  bool any_failed = false;
  for (const auto& r : result.methods) {
    const std::string name(rpcg::to_string(r.method));
    if (r.error) {
      any_failed = true;
      std::cerr << name << ": chain failed: " << *r.error << '\n';
      continue;
    }
    rpcg::inverse::write_chain_csv(outputs.add("chain_" + name + ".csv", "iter,theta,log_post,accepted"), r.chain);
    rpcg::inverse::write_kde_csv(outputs.add("kde_" + name + ".csv", "theta,density"), r.density);
    std::cout << name << ": mean=" << r.summary.mean << " sd=" << r.summary.sd << " 95% [" << r.summary.q025
              << ", " << r.summary.q975 << "] acceptance=" << r.summary.acceptance_rate << '\n';
  }
  write_json(outputs.add("summary.json"), rpcg::inverse::summary_json(result));
  write_manifest(outputs, "inverse", rpcg::inverse::to_json(a.cfg), common, clock.seconds(),
                 any_failed ? "partial" : "ok");
  return any_failed ? kNumerical : kOk;
}

// ---------------------------------------------------------------- selftest

int run_selftest_cmd(const Common& common) {
  Stopwatch clock;
  const auto results = rpcg::run_selftest(common.seed);
  bool all = true;
  json list = json::array();
  for (const auto& r : results) {
    all = all && r.passed;
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << "  (observed " << r.observed << ", bound " << r.bound
              << ")" << (r.detail.empty() ? "" : "  " + r.detail) << '\n';
    list.push_back({{"name", r.name}, {"passed", r.passed}, {"observed", r.observed}, {"bound", r.bound}});
  }
  fs::create_directories(common.out);
  Outputs outputs(common.out);
  write_json(outputs.add("selftest.json"), list);
  write_manifest(outputs, "selftest", json::object(), common, clock.seconds(), all ? "ok" : "failed");
  return all ? kOk : kSelftestFailed;
}

}  // namespace

// CLI11 reads config files on the root app only, so `--config FILE` is moved
// in front of the subcommand wherever it was given.
std::vector<std::string> hoist_config(int argc, char** argv, const std::vector<std::string>& subcommands,
                                      std::string& section) {
  std::vector<std::string> config;
  std::vector<std::string> rest;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) {
      config = {arg, argv[++i]};
    } else if (arg.rfind("--config=", 0) == 0) {
      config = {arg};
    } else {
      if (section.empty() && std::find(subcommands.begin(), subcommands.end(), arg) != subcommands.end()) {
        section = arg;
      }
      rest.push_back(arg);
    }
  }
  config.insert(config.end(), rest.begin(), rest.end());
  return config;
}

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic conjugate gradients with randomised postiterations"};
  app.name("rpcg");
  app.set_version_flag("--version", std::string(rpcg::version));
  app.require_subcommand(1);
  app.set_config("--config", "", "JSON or TOML file with option values for the subcommand (flags override it)");

  Common common;

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Solve one linear system with exact, cg, pi or rpi");
  add_common(s, common);
  s->add_option("--matrix", solve.matrix, "Matrix file (header 'd nnz', then 'i j value')");
  s->add_option("--gen", solve.gen, "Matrix generator: identity or spd-exp");
  s->add_option("--d", solve.d, "Dimension for --gen");
  s->add_option("--rhs", solve.rhs, "Right-hand side file (one value per line)");
  s->add_option("--rhs-gen", solve.rhs_gen, "Generated right-hand side: ones, normal or prior")->capture_default_str();
  s->add_option("--x0", solve.x0, "Initial guess file (default zero)");
  s->add_option("--method", solve.method, "exact, cg, pi or rpi")->capture_default_str();
  s->add_option("--eps1", solve.eps1, "Mean-phase tolerance (cg stops here)")->capture_default_str();
  s->add_option("--eps2", solve.eps2, "Postiteration tolerance")->capture_default_str();
  s->add_option("--max-iter", solve.max_iter, "Iteration cap (0 = 10 d)")->capture_default_str();
  s->add_flag("--reorth", solve.reorth, "Reorthogonalise directions and residuals");
  s->add_option("--mean-iterations", solve.mean_iterations, "Fix the number of mean-phase iterations");
  s->add_flag("--full-post", solve.full_post, "Postiterate until the Krylov space is exhausted");

  SbcArgs sbc;
  auto* c = app.add_subcommand("sbc", "Simulation-based calibration with the prior N(0, A^-1)");
  add_common(c, common);
  c->add_option("--d", sbc.cfg.dim, "Dimension")->capture_default_str();
  c->add_option("--n-sim", sbc.cfg.n_sim, "Simulations")->capture_default_str();
  c->add_option("--eps1", sbc.cfg.eps1)->capture_default_str();
  c->add_option("--eps2", sbc.cfg.eps2)->capture_default_str();
  c->add_option("--method", sbc.method, "cg, pi or rpi")->capture_default_str();
  c->add_option("--bins", sbc.cfg.bins, "Histogram bins")->capture_default_str();
  c->add_option("--matrix", sbc.matrix, "Use this matrix instead of drawing one");
  c->add_option("--test-vector", sbc.test_vector, "Test vector file (default random unit vector)");
  c->add_flag("--record-z", sbc.cfg.record_z, "Also record Z-statistics");
  c->add_flag("--reorth", sbc.cfg.reorthogonalise, "Reorthogonalise");

  SweepArgs sweep;
  auto* k = app.add_subcommand("ks-sweep", "KS statistics of SBC ranks over a tolerance grid");
  add_common(k, common);
  k->add_option("--dims", sweep.cfg.dims, "Dimensions")->delimiter(',')->capture_default_str();
  k->add_option("--eps1", sweep.cfg.eps1_grid, "eps1 grid")->delimiter(',')->capture_default_str();
  k->add_option("--eps2", sweep.cfg.eps2_grid, "eps2 grid")->delimiter(',')->capture_default_str();
  k->add_option("--replicates", sweep.cfg.replicates)->capture_default_str();
  k->add_option("--sims", sweep.cfg.sims_per_replicate, "Simulations per replicate")->capture_default_str();
  k->add_option("--methods", sweep.methods)->delimiter(',')->capture_default_str();
  k->add_option("--policy", sweep.policy, "Matrix policy: fixed or redrawn")->capture_default_str();
  k->add_flag("--reorth", sweep.cfg.reorthogonalise, "Reorthogonalise");

  InverseArgs inv;
  auto* i = app.add_subcommand("inverse", "Random-walk Metropolis for the inclusion conductivity");
  add_common(i, common);
  i->add_option("--mesh-n", inv.cfg.mesh_n, "Inference mesh cells per side")->capture_default_str();
  i->add_option("--data-mesh-n", inv.cfg.data_mesh_n, "Data mesh cells per side")->capture_default_str();
  i->add_option("--theta-true", inv.cfg.theta_true)->capture_default_str();
  i->add_option("--sigma", inv.cfg.sigma, "Observation noise sd")->capture_default_str();
  i->add_option("--eps", inv.cfg.eps, "Solver tolerance (pi/rpi: eps2 = eps, eps1 = 10 eps)")->capture_default_str();
  i->add_option("--n-iter", inv.cfg.n_iter, "Chain length")->capture_default_str();
  i->add_option("--eta-exact", inv.cfg.eta_exact, "Proposal variance")->capture_default_str();
  i->add_option("--eta-cg", inv.cfg.eta_cg)->capture_default_str();
  i->add_option("--eta-pi", inv.cfg.eta_pi)->capture_default_str();
  i->add_option("--eta-rpi", inv.cfg.eta_rpi)->capture_default_str();
  i->add_option("--burn-in", inv.cfg.burn_in, "Fraction dropped")->capture_default_str();
  i->add_option("--methods", inv.methods)->delimiter(',')->capture_default_str();

  auto* t = app.add_subcommand("selftest", "Run the solver property suites");
  add_common(t, common);

  std::string section;
  std::vector<std::string> args = hoist_config(argc, argv, {"solve", "sbc", "ks-sweep", "inverse", "selftest"}, section);
  app.config_formatter(std::make_shared<ConfigJsonOrToml>(section));
  std::reverse(args.begin(), args.end());

  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::FileError& e) {
    app.exit(e);
    return kIo;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    if (s->parsed()) return run_solve(solve, common);
    if (c->parsed()) return run_sbc(sbc, common);
    if (k->parsed()) return run_sweep(sweep, common);
    if (i->parsed()) return run_inverse(inv, common);
    if (t->parsed()) return run_selftest_cmd(common);
  } catch (const rpcg::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const rpcg::InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kInvalid;
  } catch (const rpcg::Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
  return kInvalid;
}
