// runner.hpp — scenario execution: sweeps, ensembles, output files.
//
// Execution model: a run is a list of sweep points (possibly one) times
// an ensemble of disorder realizations.  Member m always uses seed
// split_seed(base_seed, m) regardless of the sweep point, so a sweep
// moves through parameter space with the disorder shape held fixed —
// coupling draws are width-scaled unit draws (see model.hpp).
//
// (point, member) tasks may run concurrently; every task writes into
// its own slot and files are emitted afterwards in index order, so the
// output bytes do not depend on the thread count.
#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "spinbath/analysis.hpp"
#include "spinbath/config.hpp"
#include "spinbath/csv.hpp"
#include "spinbath/dynamics.hpp"
#include "spinbath/errors.hpp"
#include "spinbath/format.hpp"
#include "spinbath/model.hpp"
#include "spinbath/spectral.hpp"
#include "spinbath/version.hpp"

namespace spinbath {

// ------------------------------------------------------------ parallelism

// Run body(0..count-1) on up to `threads` workers.  The first exception
// wins and is rethrown on the caller's thread after all workers finish.
template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& body) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> guard(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t n = std::min<std::size_t>(threads, count);
  pool.reserve(n);
  for (std::size_t k = 0; k < n; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// --------------------------------------------------------------- plumbing

namespace detail {

inline std::string tag3(std::size_t k) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03zu", k);
  return buf;
}

inline ModelParams apply_axis(ModelParams p, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::none: break;
    case SweepAxis::n_spins: p.n_spins = static_cast<int>(value); break;
    case SweepAxis::kappa: p.kappa = value; break;
    case SweepAxis::delta: p.delta = value; break;
    case SweepAxis::omega: p.omega = value; break;
    case SweepAxis::gamma: p.gamma = value; break;
    case SweepAxis::eps_sb: p.eps_sb = value; break;
    case SweepAxis::h_ext: p.h_ext = value; break;
    case SweepAxis::temperature: break;  // handled by the thermal scenario
  }
  return p;
}

// Model parameters per sweep point (temperature sweeps keep one point).
inline std::vector<ModelParams> sweep_points(const ScenarioConfig& cfg) {
  if (cfg.sweep_axis == SweepAxis::none ||
      cfg.sweep_axis == SweepAxis::temperature)
    return {cfg.model};
  std::vector<ModelParams> points;
  points.reserve(cfg.sweep_grid.size());
  for (double v : cfg.sweep_grid)
    points.push_back(apply_axis(cfg.model, cfg.sweep_axis, v));
  return points;
}

inline std::vector<std::string> model_columns() {
  return {"N", "kappa", "delta", "omega", "gamma", "eps_sb", "h_ext"};
}

inline std::vector<std::string> model_cells(const ModelParams& p) {
  return {std::to_string(p.n_spins), fmt17(p.kappa),  fmt17(p.delta),
          fmt17(p.omega),            fmt17(p.gamma),  fmt17(p.eps_sb),
          fmt17(p.h_ext)};
}

}  // namespace detail

// ------------------------------------------------------------ run summary

// Formatted per-record table plus provenance; becomes summary.csv and
// the manifest.
struct RunSummary {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::string config_echo;
  std::uint64_t config_hash = 0;
  std::string version = kVersion;
  double wall_seconds = 0.0;
  std::vector<std::pair<std::string, std::uint64_t>> seeds;
};

// Write summary.csv and the manifest into `dir` (created if needed).
// Data files are byte-identical across reruns; the manifest additionally
// carries the wall time, which is not part of the determinism contract.
inline void write_outputs(const RunSummary& summary,
                          const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output dir " + dir.string());

  std::ofstream out = open_for_write(dir / "summary.csv");
  out << join_csv(summary.columns);
  for (const auto& row : summary.rows) out << join_csv(row);
  if (!out) throw IoError("short write: summary.csv");

  std::ofstream mf = open_for_write(dir / "manifest");
  char hash[24];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(summary.config_hash));
  mf << "# spinbath run manifest\n";
  mf << "version = " << summary.version << '\n';
  mf << "config_hash = " << hash << '\n';
  mf << "wall_time_seconds = " << fmt17(summary.wall_seconds) << '\n';
  mf << "[config]\n" << summary.config_echo;
  mf << "[seeds]\n";
  for (const auto& [label, seed] : summary.seeds)
    mf << label << " = " << seed << '\n';
  if (!mf) throw IoError("short write: manifest");
}

// -------------------------------------------------------- typed scenarios

// evolve: per (point, member) a full coherence trace plus its metrics.
struct EvolveRecord {
  std::size_t point = 0, member = 0;
  std::uint64_t seed = 0;
  ModelParams params;
  double largest = 0.0, cluster_largest = 0.0, efficiency = 0.0;
  std::optional<GaussianDecayFit> decay;
  CoherenceTrace trace;
};

inline std::vector<EvolveRecord> compute_evolve(const ScenarioConfig& cfg,
                                                unsigned threads) {
  const auto points = detail::sweep_points(cfg);
  const std::size_t members = static_cast<std::size_t>(cfg.ensemble);
  const Eigen::VectorXd times = uniform_time_grid(cfg.dt_sample, cfg.t_max);
  std::vector<EvolveRecord> records(points.size() * members);
  parallel_for(records.size(), threads, [&](std::size_t i) {
    EvolveRecord& rec = records[i];
    rec.point = i / members;
    rec.member = i % members;
    rec.params = points[rec.point];
    rec.params.seed = split_seed(cfg.model.seed, rec.member);
    rec.seed = rec.params.seed;

    const CouplingRealization real = draw_couplings(rec.params);
    const SpectralDecomposition env =
        eigendecompose(build_environment_hamiltonian(rec.params, real));
    const SpectralDecomposition coupled = eigendecompose(
        build_conditional_hamiltonian(rec.params, real, Branch::coupled()));
    const StateVector psi0 = env.eigenvectors.col(0);

    rec.trace = coherence_trace(env, coupled, psi0, times);
    const OverlapReport report = overlap_spectrum(coupled, psi0);
    rec.largest = report.largest;
    rec.cluster_largest = report.cluster_largest;
    rec.efficiency =
        efficiency_of_decoherence(rec.trace, cfg.window_start, cfg.window_end);
    rec.decay = initial_decay_time(rec.trace);
  });
  return records;
}

// overlap-vs-kappa / overlap-vs-delta / field-sweep: ground-state
// overlap spectrum summary per (point, member).
struct OverlapRecord {
  std::size_t point = 0, member = 0;
  std::uint64_t seed = 0;
  ModelParams params;
  double largest = 0.0, cluster_largest = 0.0;
};

inline std::vector<OverlapRecord> compute_overlap_sweep(
    const ScenarioConfig& cfg, unsigned threads) {
  const auto points = detail::sweep_points(cfg);
  const std::size_t members = static_cast<std::size_t>(cfg.ensemble);
  std::vector<OverlapRecord> records(points.size() * members);
  parallel_for(records.size(), threads, [&](std::size_t i) {
    OverlapRecord& rec = records[i];
    rec.point = i / members;
    rec.member = i % members;
    rec.params = points[rec.point];
    rec.params.seed = split_seed(cfg.model.seed, rec.member);
    rec.seed = rec.params.seed;

    const CouplingRealization real = draw_couplings(rec.params);
    const SpectralDecomposition env =
        eigendecompose(build_environment_hamiltonian(rec.params, real));
    const SpectralDecomposition coupled = eigendecompose(
        build_conditional_hamiltonian(rec.params, real, Branch::coupled()));
    const OverlapReport report =
        overlap_spectrum(coupled, env.eigenvectors.col(0));
    rec.largest = report.largest;
    rec.cluster_largest = report.cluster_largest;
  });
  return records;
}

// correlation-scan: random (omega, delta) pairs; how strongly the
// largest overlap predicts the decoherence efficiency.
struct CorrelationRecord {
  std::size_t sample = 0;
  std::uint64_t seed = 0;
  ModelParams params;  // with the drawn omega and delta filled in
  double largest = 0.0, cluster_largest = 0.0, efficiency = 0.0;
};

inline std::vector<CorrelationRecord> compute_correlation_scan(
    const ScenarioConfig& cfg, unsigned threads) {
  const Eigen::VectorXd times = uniform_time_grid(cfg.dt_sample, cfg.t_max);
  std::vector<CorrelationRecord> records(static_cast<std::size_t>(cfg.samples));
  parallel_for(records.size(), threads, [&](std::size_t i) {
    CorrelationRecord& rec = records[i];
    rec.sample = i;
    rec.seed = split_seed(cfg.model.seed, i);
    // sub-seed 0 draws the widths, sub-seed 1 the couplings
    Rng widths(split_seed(rec.seed, 0));
    rec.params = cfg.model;
    rec.params.omega = widths.range(cfg.scan_omega_min, cfg.scan_omega_max);
    rec.params.delta = widths.range(cfg.scan_delta_min, cfg.scan_delta_max);
    rec.params.seed = split_seed(rec.seed, 1);

    const CouplingRealization real = draw_couplings(rec.params);
    const SpectralDecomposition env =
        eigendecompose(build_environment_hamiltonian(rec.params, real));
    const SpectralDecomposition coupled = eigendecompose(
        build_conditional_hamiltonian(rec.params, real, Branch::coupled()));
    const StateVector psi0 = env.eigenvectors.col(0);
    const OverlapReport report = overlap_spectrum(coupled, psi0);
    rec.largest = report.largest;
    rec.cluster_largest = report.cluster_largest;
    const CoherenceTrace trace = coherence_trace(env, coupled, psi0, times);
    rec.efficiency =
        efficiency_of_decoherence(trace, cfg.window_start, cfg.window_end);
  });
  return records;
}

// eigenflow: one flow table per ensemble member.
struct EigenflowMemberResult {
  std::size_t member = 0;
  std::uint64_t seed = 0;
  std::vector<EigenvalueFlowPoint> flow;
};

inline std::vector<EigenflowMemberResult> compute_eigenflow(
    const ScenarioConfig& cfg, unsigned threads) {
  Eigen::VectorXd grid(static_cast<Eigen::Index>(cfg.sweep_grid.size()));
  for (Eigen::Index g = 0; g < grid.size(); ++g) grid[g] = cfg.sweep_grid[g];
  std::vector<EigenflowMemberResult> members(
      static_cast<std::size_t>(cfg.ensemble));
  parallel_for(members.size(), threads, [&](std::size_t m) {
    EigenflowMemberResult& res = members[m];
    res.member = m;
    res.seed = split_seed(cfg.model.seed, m);
    ModelParams unit = cfg.model;
    unit.seed = res.seed;
    unit.delta = 1.0;  // unit draw; the grid rescales it
    const CouplingRealization real = draw_couplings(unit);
    res.flow = eigenvalue_flow(unit, real, grid, cfg.k_lowest);
  });
  return members;
}

// spacing: per-member unfolded spacings plus a pooled histogram per point.
struct SpacingRecord {
  std::size_t point = 0, member = 0;
  std::uint64_t seed = 0;
  ModelParams params;
  std::size_t n_levels = 0;
  std::vector<double> spacings;  // unfolded, this member only
  double ks_wigner = 0.0, ks_poisson = 0.0;
};

struct SpacingScenarioResult {
  std::vector<SpacingRecord> records;
  std::vector<SpacingHistogram> pooled;  // one per sweep point
};

inline SpacingScenarioResult compute_spacing(const ScenarioConfig& cfg,
                                             unsigned threads) {
  const auto points = detail::sweep_points(cfg);
  const std::size_t members = static_cast<std::size_t>(cfg.ensemble);
  SpacingScenarioResult result;
  result.records.resize(points.size() * members);
  parallel_for(result.records.size(), threads, [&](std::size_t i) {
    SpacingRecord& rec = result.records[i];
    rec.point = i / members;
    rec.member = i % members;
    rec.params = points[rec.point];
    rec.params.seed = split_seed(cfg.model.seed, rec.member);
    rec.seed = rec.params.seed;

    const CouplingRealization real = draw_couplings(rec.params);
    const SpectralDecomposition env =
        eigendecompose(build_environment_hamiltonian(rec.params, real));
    rec.n_levels = static_cast<std::size_t>(env.dim());
    rec.spacings = symmetry_resolved_spacings(
        env, rec.params.n_spins, cfg.sectored, cfg.window_fraction);
    rec.ks_wigner = ks_distance(rec.spacings, wigner_dyson_cdf);
    rec.ks_poisson = ks_distance(rec.spacings, poisson_cdf);
  });

  result.pooled.reserve(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    std::vector<double> all;
    for (std::size_t m = 0; m < members; ++m) {
      const auto& rec = result.records[p * members + m];
      all.insert(all.end(), rec.spacings.begin(), rec.spacings.end());
    }
    result.pooled.push_back(spacing_histogram_from_unfolded(
        std::move(all), cfg.bins, 4.0, cfg.sectored));
  }
  return result;
}

// thermal: largest expansion term per temperature, per (point, member).
struct ThermalRecord {
  std::size_t point = 0, member = 0;
  std::uint64_t seed = 0;
  ModelParams params;
  double largest = 0.0, cluster_largest = 0.0;  // ground-state reference
  std::vector<double> largest_term;             // one per temperature
};

inline std::vector<ThermalRecord> compute_thermal(const ScenarioConfig& cfg,
                                                  unsigned threads) {
  const auto points = detail::sweep_points(cfg);
  const std::vector<double>& temps = cfg.sweep_axis == SweepAxis::temperature
                                         ? cfg.sweep_grid
                                         : cfg.temperatures;
  const std::size_t members = static_cast<std::size_t>(cfg.ensemble);
  std::vector<ThermalRecord> records(points.size() * members);
  parallel_for(records.size(), threads, [&](std::size_t i) {
    ThermalRecord& rec = records[i];
    rec.point = i / members;
    rec.member = i % members;
    rec.params = points[rec.point];
    rec.params.seed = split_seed(cfg.model.seed, rec.member);
    rec.seed = rec.params.seed;

    const CouplingRealization real = draw_couplings(rec.params);
    const SpectralDecomposition env =
        eigendecompose(build_environment_hamiltonian(rec.params, real));
    const SpectralDecomposition coupled = eigendecompose(
        build_conditional_hamiltonian(rec.params, real, Branch::coupled()));
    const OverlapReport report =
        overlap_spectrum(coupled, env.eigenvectors.col(0));
    rec.largest = report.largest;
    rec.cluster_largest = report.cluster_largest;
    rec.largest_term.reserve(temps.size());
    for (std::size_t ti = 0; ti < temps.size(); ++ti) {
      const ThermalState state =
          thermal_initial_state(env, temps[ti], split_seed(rec.seed, ti));
      rec.largest_term.push_back(thermal_largest_term(state, coupled, env));
    }
  });
  return records;
}

// --------------------------------------------------------------- assembly

namespace detail {

inline RunSummary make_summary(const ScenarioConfig& cfg) {
  RunSummary summary;
  summary.config_echo = canonical_echo(cfg);
  summary.config_hash = fnv1a64(summary.config_echo);
  return summary;
}

inline void add_member_seeds(RunSummary& summary, const ScenarioConfig& cfg,
                             const char* label) {
  const std::size_t count = cfg.scenario == Scenario::correlation_scan
                                ? static_cast<std::size_t>(cfg.samples)
                                : static_cast<std::size_t>(cfg.ensemble);
  for (std::size_t k = 0; k < count; ++k)
    summary.seeds.emplace_back(std::string(label) + "_" + tag3(k),
                               split_seed(cfg.model.seed, k));
}

}  // namespace detail

// Execute a scenario: compute all records, write the scenario's data
// files plus summary.csv and manifest into `dir`, return the summary.
inline RunSummary run_scenario(const ScenarioConfig& cfg,
                               const std::filesystem::path& dir,
                               unsigned threads = 1) {
  validate_config(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  RunSummary summary = detail::make_summary(cfg);
  detail::add_member_seeds(
      summary, cfg,
      cfg.scenario == Scenario::correlation_scan ? "sample" : "member");

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output dir " + dir.string());

  auto base_columns = [&](std::vector<std::string> extra) {
    std::vector<std::string> cols = {"point", "member", "seed"};
    const auto model = detail::model_columns();
    cols.insert(cols.end(), model.begin(), model.end());
    cols.insert(cols.end(), extra.begin(), extra.end());
    return cols;
  };
  auto base_cells = [&](std::size_t point, std::size_t member,
                        std::uint64_t seed, const ModelParams& params) {
    std::vector<std::string> cells = {std::to_string(point),
                                      std::to_string(member),
                                      std::to_string(seed)};
    const auto model = detail::model_cells(params);
    cells.insert(cells.end(), model.begin(), model.end());
    return cells;
  };

  switch (cfg.scenario) {
    case Scenario::evolve: {
      const auto records = compute_evolve(cfg, threads);
      summary.columns = base_columns({"largest_overlap", "cluster_largest",
                                      "efficiency", "t_star",
                                      "t_star_residual"});
      for (const auto& rec : records) {
        auto row = base_cells(rec.point, rec.member, rec.seed, rec.params);
        row.push_back(fmt17(rec.largest));
        row.push_back(fmt17(rec.cluster_largest));
        row.push_back(fmt17(rec.efficiency));
        row.push_back(rec.decay ? fmt17(rec.decay->t_star) : "");
        row.push_back(rec.decay ? fmt17(rec.decay->residual) : "");
        summary.rows.push_back(std::move(row));
        write_trace_csv(rec.trace,
                        dir / ("trace_" + detail::tag3(rec.point) + "_" +
                               detail::tag3(rec.member) + ".csv"));
      }
      break;
    }
    case Scenario::overlap_vs_kappa:
    case Scenario::overlap_vs_delta:
    case Scenario::field_sweep: {
      const auto records = compute_overlap_sweep(cfg, threads);
      summary.columns = base_columns({"largest_overlap", "cluster_largest"});
      for (const auto& rec : records) {
        auto row = base_cells(rec.point, rec.member, rec.seed, rec.params);
        row.push_back(fmt17(rec.largest));
        row.push_back(fmt17(rec.cluster_largest));
        summary.rows.push_back(std::move(row));
      }
      break;
    }
    case Scenario::correlation_scan: {
      const auto records = compute_correlation_scan(cfg, threads);
      summary.columns = {"sample", "seed"};
      {
        const auto model = detail::model_columns();
        summary.columns.insert(summary.columns.end(), model.begin(),
                               model.end());
        summary.columns.insert(
            summary.columns.end(),
            {"largest_overlap", "cluster_largest", "efficiency"});
      }
      for (const auto& rec : records) {
        std::vector<std::string> row = {std::to_string(rec.sample),
                                        std::to_string(rec.seed)};
        const auto model = detail::model_cells(rec.params);
        row.insert(row.end(), model.begin(), model.end());
        row.push_back(fmt17(rec.largest));
        row.push_back(fmt17(rec.cluster_largest));
        row.push_back(fmt17(rec.efficiency));
        summary.rows.push_back(std::move(row));
      }
      break;
    }
    case Scenario::eigenflow: {
      const auto members = compute_eigenflow(cfg, threads);
      summary.columns = base_columns({"largest_overlap", "cluster_largest"});
      for (const auto& res : members) {
        std::ofstream out =
            open_for_write(dir / ("eigenflow_" + detail::tag3(res.member) + ".csv"));
        out << "delta,level,energy,overlap\n";
        for (const auto& point : res.flow)
          for (Eigen::Index n = 0; n < point.energies.size(); ++n)
            out << fmt17(point.delta) << ',' << n << ','
                << fmt17(point.energies[n]) << ',' << fmt17(point.overlaps[n])
                << '\n';
        if (!out) throw IoError("short write: eigenflow csv");
      }
      for (std::size_t p = 0; p < cfg.sweep_grid.size(); ++p)
        for (const auto& res : members) {
          ModelParams at = cfg.model;
          at.seed = res.seed;
          at.delta = cfg.sweep_grid[p];
          auto row = base_cells(p, res.member, res.seed, at);
          row.push_back(fmt17(res.flow[p].largest));
          row.push_back(fmt17(res.flow[p].cluster_largest));
          summary.rows.push_back(std::move(row));
        }
      break;
    }
    case Scenario::spacing: {
      const auto result = compute_spacing(cfg, threads);
      summary.columns = base_columns(
          {"n_levels", "n_spacings", "ks_wigner", "ks_poisson"});
      for (const auto& rec : result.records) {
        auto row = base_cells(rec.point, rec.member, rec.seed, rec.params);
        row.push_back(std::to_string(rec.n_levels));
        row.push_back(std::to_string(rec.spacings.size()));
        row.push_back(fmt17(rec.ks_wigner));
        row.push_back(fmt17(rec.ks_poisson));
        summary.rows.push_back(std::move(row));
      }
      const auto points = detail::sweep_points(cfg);
      for (std::size_t p = 0; p < result.pooled.size(); ++p) {
        std::vector<std::pair<std::string, std::string>> meta;
        meta.emplace_back("scenario", scenario_name(cfg.scenario));
        meta.emplace_back("kappa", fmt17(points[p].kappa));
        meta.emplace_back("N", std::to_string(points[p].n_spins));
        meta.emplace_back("base_seed", std::to_string(cfg.model.seed));
        meta.emplace_back("ensemble", std::to_string(cfg.ensemble));
        meta.emplace_back("window_fraction", fmt17(cfg.window_fraction));
        meta.emplace_back("unfolding", "global-mean");
        meta.emplace_back("symmetry_resolution",
                          "magnetization-parity+global-flip");
        write_spacing_csv(result.pooled[p], meta,
                          dir / ("spacing_" + detail::tag3(p) + ".csv"));
      }
      break;
    }
    case Scenario::thermal: {
      const auto records = compute_thermal(cfg, threads);
      const std::vector<double>& temps =
          cfg.sweep_axis == SweepAxis::temperature ? cfg.sweep_grid
                                                   : cfg.temperatures;
      std::vector<std::string> extra = {"largest_overlap", "cluster_largest"};
      for (double t : temps) {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "largest_term_T%g", t);
        extra.emplace_back(buf);
      }
      summary.columns = base_columns(extra);
      for (const auto& rec : records) {
        auto row = base_cells(rec.point, rec.member, rec.seed, rec.params);
        row.push_back(fmt17(rec.largest));
        row.push_back(fmt17(rec.cluster_largest));
        for (double v : rec.largest_term) row.push_back(fmt17(v));
        summary.rows.push_back(std::move(row));
      }
      break;
    }
  }

  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  write_outputs(summary, dir);
  return summary;
}

}  // namespace spinbath
