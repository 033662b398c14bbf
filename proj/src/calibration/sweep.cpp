#include "rpcg/calibration/sweep.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "rpcg/calibration/ks.hpp"
#include "rpcg/core/format.hpp"
#include "rpcg/core/generators.hpp"
#include "rpcg/core/parallel.hpp"

namespace rpcg {

namespace {

constexpr std::uint64_t baseline_salt = 0xB45E11E5ULL;

struct GridPoint {
  SolverMethod method;
  Index dim;
  double eps1;
  double eps2;
};

std::vector<GridPoint> expand_grid(const SweepConfig& cfg) {
  std::vector<GridPoint> grid;
  for (Index dim : cfg.dims) {
    for (SolverMethod method : cfg.methods) {
      for (double eps1 : cfg.eps1_grid) {
        if (method == SolverMethod::Cg) {
          grid.push_back({method, dim, eps1, eps1});
          continue;
        }
        for (double eps2 : cfg.eps2_grid) {
          if (eps2 <= eps1) grid.push_back({method, dim, eps1, eps2});
        }
      }
    }
  }
  return grid;
}

struct ReplicateCell {
  double ks = std::numeric_limits<double>::quiet_NaN();
  Index degenerate = 0;
};

}  // namespace

void SweepConfig::validate() const {
  if (dims.empty() || eps1_grid.empty() || eps2_grid.empty() || methods.empty()) {
    throw InvalidArgument("SweepConfig: dims, eps1 grid, eps2 grid and methods must be non-empty");
  }
  if (replicates < 1 || sims_per_replicate < 1) {
    throw InvalidArgument("SweepConfig: replicates and sims_per_replicate must be >= 1");
  }
  for (Index d : dims) {
    if (d < 1) throw InvalidArgument("SweepConfig: dimensions must be positive");
  }
  for (double e : eps1_grid) {
    if (!(e > 0.0)) throw InvalidArgument("SweepConfig: tolerances must be positive");
  }
  for (double e : eps2_grid) {
    if (!(e > 0.0)) throw InvalidArgument("SweepConfig: tolerances must be positive");
  }
  for (SolverMethod m : methods) {
    if (m == SolverMethod::Exact) throw InvalidArgument("SweepConfig: the exact solver has no posterior to test");
  }
  if (expand_grid(*this).empty()) throw InvalidArgument("SweepConfig: no grid point has eps2 <= eps1");
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

SweepTable ks_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const std::vector<GridPoint> grid = expand_grid(cfg);
  const auto n_rep = static_cast<std::size_t>(cfg.replicates);

  // cells[r][g]: KS of replicate r at grid point g.
  std::vector<std::vector<ReplicateCell>> cells(n_rep, std::vector<ReplicateCell>(grid.size()));
  std::vector<double> uniform(n_rep);

  parallel_for(cfg.replicates, cfg.threads, [&](Index r) {
    const std::uint64_t replicate_seed =
        derive_seed(cfg.seed, cfg.matrix_policy == MatrixPolicy::RedrawnPerReplicate ? static_cast<std::uint64_t>(r) : 0);
    const std::uint64_t simulation_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
    auto& row = cells[static_cast<std::size_t>(r)];

    std::optional<SpdMatrix<double>> matrix;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const GridPoint& point = grid[g];
      if (!matrix || matrix->dim() != point.dim) {
        RngStream rng(replicate_seed, 0);
        matrix = sample_spd_exp(point.dim, rng);
      }
      SbcConfig sbc;
      sbc.dim = point.dim;
      sbc.n_sim = cfg.sims_per_replicate;
      sbc.eps1 = point.eps1;
      sbc.eps2 = point.eps2;
      sbc.method = point.method;
      sbc.seed = simulation_seed;
      sbc.reorthogonalise = cfg.reorthogonalise;
      sbc.matrix_policy = cfg.matrix_policy;
      const CalibrationReport report = sbc_run(sbc, *matrix);
      row[g].ks = report.ks_statistic;
      row[g].degenerate = report.degenerate;
    }

    RngStream rng(derive_seed(simulation_seed, baseline_salt), 0);
    std::vector<double> u(static_cast<std::size_t>(cfg.sims_per_replicate));
    for (double& v : u) v = rng.uniform();
    uniform[static_cast<std::size_t>(r)] = ks_statistic(u);
  });

  SweepTable table;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    SweepRow row;
    row.method = grid[g].method;
    row.dim = grid[g].dim;
    row.eps1 = grid[g].eps1;
    row.eps2 = grid[g].eps2;
    for (std::size_t r = 0; r < n_rep; ++r) {
      const ReplicateCell& cell = cells[r][g];
      row.degenerate_simulations += cell.degenerate;
      if (std::isnan(cell.ks)) {
        ++row.failed_replicates;
      } else {
        row.ks_values.push_back(cell.ks);
      }
    }
    row.n_replicates = static_cast<Index>(row.ks_values.size());
    row.ks_median = quantile(row.ks_values, 0.5);
    row.ks_q1 = quantile(row.ks_values, 0.25);
    row.ks_q3 = quantile(row.ks_values, 0.75);
    table.rows.push_back(std::move(row));
  }
  table.uniform_values = uniform;
  table.uniform_baseline.median = quantile(uniform, 0.5);
  table.uniform_baseline.q1 = quantile(uniform, 0.25);
  table.uniform_baseline.q3 = quantile(uniform, 0.75);
  table.uniform_baseline.mean = std::accumulate(uniform.begin(), uniform.end(), 0.0) / static_cast<double>(n_rep);
  return table;
}

nlohmann::json to_json(const SweepConfig& cfg) {
  nlohmann::json j;
  j["dims"] = cfg.dims;
  j["eps1_grid"] = cfg.eps1_grid;
  j["eps2_grid"] = cfg.eps2_grid;
  j["replicates"] = cfg.replicates;
  j["sims_per_replicate"] = cfg.sims_per_replicate;
  std::vector<std::string> methods;
  for (auto m : cfg.methods) methods.emplace_back(to_string(m));
  j["methods"] = methods;
  j["seed"] = cfg.seed;
  j["matrix_policy"] =
      cfg.matrix_policy == MatrixPolicy::FixedPerRun ? "fixed-per-run" : "redrawn-per-replicate";
  j["reorthogonalise"] = cfg.reorthogonalise;
  return j;
}

void write_sweep_csv(const std::filesystem::path& path, const SweepTable& table, Index dim) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string());
  out << "method,eps1,eps2,ks_median,ks_q1,ks_q3,n_replicates\n";
  for (const SweepRow& row : table.rows) {
    if (row.dim != dim) continue;
    out << to_string(row.method) << ',' << shortest(row.eps1) << ',' << shortest(row.eps2) << ',';
    if (row.n_replicates > 0) {
      out << shortest(row.ks_median) << ',' << shortest(row.ks_q1) << ',' << shortest(row.ks_q3);
    } else {
      out << ",,";
    }
    out << ',' << row.n_replicates << '\n';
  }
  const auto& u = table.uniform_baseline;
  out << "uniform,,," << shortest(u.median) << ',' << shortest(u.q1) << ',' << shortest(u.q3) << ',' << table.uniform_values.size() << '\n';
}

}  // namespace rpcg
