#include "rpcg/inverse/experiment.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "rpcg/calibration/sweep.hpp"
#include "rpcg/core/format.hpp"
#include "rpcg/core/parallel.hpp"

namespace rpcg::inverse {

namespace {

constexpr std::uint64_t data_stream = 0;

std::uint64_t chain_seed(std::uint64_t seed, SolverMethod method) {
  return derive_seed(seed, 1 + static_cast<std::uint64_t>(method));
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string());
  return out;
}

}  // namespace

double InverseConfig::eta_for(SolverMethod method) const {
  switch (method) {
    case SolverMethod::Exact: return eta_exact;
    case SolverMethod::Cg: return eta_cg;
    case SolverMethod::Pi: return eta_pi;
    case SolverMethod::Rpi: return eta_rpi;
  }
  return eta_exact;
}

void InverseConfig::validate() const {
  Mesh check(mesh_n);
  if (data_mesh_n < 2 * mesh_n) throw InvalidArgument("InverseConfig: data mesh must be at least twice as fine as the inference mesh");
  Mesh check_data(data_mesh_n);
  if (!(sigma > 0.0)) throw InvalidArgument("InverseConfig: sigma must be positive");
  if (!(eps > 0.0)) throw InvalidArgument("InverseConfig: eps must be positive");
  if (n_iter < 1) throw InvalidArgument("InverseConfig: n_iter must be >= 1");
  if (!(burn_in >= 0.0 && burn_in < 1.0)) throw InvalidArgument("InverseConfig: burn_in must lie in [0, 1)");
  if (methods.empty()) throw InvalidArgument("InverseConfig: no methods selected");
  for (auto m : methods) {
    if (!(eta_for(m) > 0.0)) throw InvalidArgument("InverseConfig: proposal variances must be positive");
  }
}

ChainSummary summarise(const McmcChain& chain, double burn_in) {
  const auto skip = static_cast<std::size_t>(std::floor(burn_in * static_cast<double>(chain.theta.size())));
  std::vector<double> kept(chain.theta.begin() + static_cast<std::ptrdiff_t>(skip), chain.theta.end());
  ChainSummary s;
  s.kept = static_cast<Index>(kept.size());
  s.acceptance_rate = chain.acceptance_rate();
  if (kept.empty()) return s;
  const double n = static_cast<double>(kept.size());
  s.mean = std::accumulate(kept.begin(), kept.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : kept) ss += (x - s.mean) * (x - s.mean);
  s.sd = kept.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  s.q025 = quantile(kept, 0.025);
  s.q975 = quantile(kept, 0.975);
  return s;
}

const MethodResult& InverseResult::at(SolverMethod method) const {
  for (const auto& m : methods) {
    if (m.method == method) return m;
  }
  throw InvalidArgument("InverseResult: method " + std::string(to_string(method)) + " was not run");
}

InverseResult run_inverse_experiment(const InverseConfig& cfg) {
  cfg.validate();
  InverseResult result;
  RngStream data_rng(cfg.seed, data_stream);
  result.data = generate_data(cfg.data_mesh_n, cfg.theta_true, cfg.sigma, data_rng);
  const ForwardModel model = ForwardModel::make(cfg.mesh_n, cfg.sigma, result.data);

  result.methods.resize(cfg.methods.size());
  parallel_for(static_cast<Index>(cfg.methods.size()), cfg.threads, [&](Index i) {
    MethodResult& out = result.methods[static_cast<std::size_t>(i)];
    out.method = cfg.methods[static_cast<std::size_t>(i)];
    ChainConfig chain;
    chain.solver = out.method;
    chain.eps = cfg.eps;
    chain.eta = cfg.eta_for(out.method);
    chain.n_iter = cfg.n_iter;
    chain.seed = chain_seed(cfg.seed, out.method);
    try {
      out.chain = rwm_sample(model, chain);
      out.summary = summarise(out.chain, cfg.burn_in);
      const auto skip = static_cast<std::ptrdiff_t>(out.chain.theta.size()) - out.summary.kept;
      const std::span<const double> kept(out.chain.theta.data() + skip, static_cast<std::size_t>(out.summary.kept));
      out.density = kde(kept);
    } catch (const Error& e) {
      out.error = e.what();
    }
  });
  return result;
}

nlohmann::json to_json(const InverseConfig& cfg) {
  nlohmann::json j;
  j["mesh_n"] = cfg.mesh_n;
  j["data_mesh_n"] = cfg.data_mesh_n;
  j["theta_true"] = cfg.theta_true;
  j["sigma"] = cfg.sigma;
  j["eps"] = cfg.eps;
  j["n_iter"] = cfg.n_iter;
  j["eta"] = {{"exact", cfg.eta_exact}, {"cg", cfg.eta_cg}, {"pi", cfg.eta_pi}, {"rpi", cfg.eta_rpi}};
  j["burn_in"] = cfg.burn_in;
  std::vector<std::string> methods;
  for (auto m : cfg.methods) methods.emplace_back(to_string(m));
  j["methods"] = methods;
  j["seed"] = cfg.seed;
  return j;
}

nlohmann::json summary_json(const InverseResult& result) {
  nlohmann::json j;
  j["data"] = std::vector<double>(result.data.data(), result.data.data() + result.data.size());
  for (const auto& m : result.methods) {
    nlohmann::json entry;
    if (m.error) {
      entry["error"] = *m.error;
    } else {
      entry["mean"] = m.summary.mean;
      entry["sd"] = m.summary.sd;
      entry["interval_95"] = {m.summary.q025, m.summary.q975};
      entry["acceptance_rate"] = m.summary.acceptance_rate;
      entry["kept_samples"] = m.summary.kept;
      entry["rejected_nonconverged"] = m.chain.rejected_nonconverged;
      entry["eta"] = m.chain.eta;
      entry["kde_bandwidth"] = m.density.bandwidth;
      entry["seed"] = m.chain.seed;
    }
    j["methods"][std::string(to_string(m.method))] = entry;
  }
  return j;
}

void write_chain_csv(const std::filesystem::path& path, const McmcChain& chain) {
  auto out = open_csv(path);
  out << "iter,theta,log_post,accepted\n";
  for (std::size_t i = 0; i < chain.theta.size(); ++i) {
    out << i << ',' << shortest(chain.theta[i]) << ',' << shortest(chain.log_posterior[i]) << ',' << (chain.accepted[i] ? 1 : 0) << '\n';
  }
}

void write_kde_csv(const std::filesystem::path& path, const DensityCurve& curve) {
  auto out = open_csv(path);
  out << "theta,density\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i) out << shortest(curve.grid[i]) << ',' << shortest(curve.density[i]) << '\n';
}

}  // namespace rpcg::inverse
