// analysis.hpp — why coherence survives or dies: overlap spectra,
// thermal initial states, the ordered/glassy crossover, eigenvalue
// flow, and level-spacing statistics.
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "spinbath/dynamics.hpp"
#include "spinbath/errors.hpp"
#include "spinbath/model.hpp"
#include "spinbath/rng.hpp"
#include "spinbath/spectral.hpp"

namespace spinbath {

// ---------------------------------------------------------------- overlaps

// Distribution of an initial state over the coupled-branch eigenbasis.
// p_n = |<n|psi0>|^2; `cluster_largest` merges degenerate levels first
// (their phases evolve together, so they act as one term).
struct OverlapReport {
  Eigen::VectorXd overlaps;          // p_n, ascending-energy order
  double largest = 0.0;
  Eigen::Index largest_index = 0;
  double cluster_largest = 0.0;
};

inline OverlapReport overlap_spectrum(const SpectralDecomposition& coupled,
                                      const StateVector& psi0,
                                      double cluster_tol_rel = 1e-8) {
  if (psi0.size() != coupled.dim())
    throw ArgumentError("overlap_spectrum: dimension mismatch");
  OverlapReport report;
  const Eigen::VectorXcd amps = coupled.eigenvectors.adjoint() * psi0;
  report.overlaps = amps.cwiseAbs2();
  report.largest = report.overlaps.maxCoeff(&report.largest_index);

  const Eigen::Index dim = coupled.dim();
  const double range = coupled.eigenvalues[dim - 1] - coupled.eigenvalues[0];
  const double tol = cluster_tol_rel * std::max(range, 0.0);
  double best = 0.0, run = report.overlaps[0];
  for (Eigen::Index n = 1; n < dim; ++n) {
    if (coupled.eigenvalues[n] - coupled.eigenvalues[n - 1] <= tol) {
      run += report.overlaps[n];
    } else {
      best = std::max(best, run);
      run = report.overlaps[n];
    }
  }
  report.cluster_largest = std::max(best, run);
  return report;
}

// Coherence from an overlap spectrum alone, valid when one branch is
// uncoupled and psi0 is the corresponding environment eigenstate with
// energy e0:  C(t) = sum_n p_n e^{i (E_n - e0) t}.
inline CoherenceTrace coherence_from_overlaps(const OverlapReport& report,
                                              const Eigen::VectorXd& energies,
                                              double e0,
                                              const Eigen::VectorXd& times) {
  if (report.overlaps.size() != energies.size())
    throw ArgumentError("coherence_from_overlaps: dimension mismatch");
  CoherenceTrace trace;
  trace.times = times;
  trace.values.resize(times.size());
  for (Eigen::Index k = 0; k < times.size(); ++k) {
    Complex c(0.0, 0.0);
    for (Eigen::Index n = 0; n < energies.size(); ++n)
      c += report.overlaps[n] * std::polar(1.0, (energies[n] - e0) * times[k]);
    trace.values[k] = c;
  }
  return trace;
}

// ---------------------------------------------------------------- thermal

// Pure-state stand-in for a thermal environment: Boltzmann magnitudes
// with seeded random phases,  c_i = sqrt(exp(-E_i/T)/Z) e^{i phi_i}.
struct ThermalState {
  Eigen::VectorXcd coefficients;  // over the environment eigenbasis
  double temperature = 0.0;
};

inline ThermalState thermal_initial_state(const SpectralDecomposition& env,
                                          double temperature,
                                          std::uint64_t phase_seed) {
  if (temperature <= 0.0)
    throw ArgumentError("thermal_initial_state: temperature must be > 0");
  const Eigen::Index dim = env.dim();
  Eigen::VectorXd weights(dim);
  const double e0 = env.eigenvalues[0];  // shift for overflow safety
  for (Eigen::Index i = 0; i < dim; ++i)
    weights[i] = std::exp(-(env.eigenvalues[i] - e0) / temperature);
  const double z = weights.sum();

  Rng rng(splitmix64(phase_seed));
  ThermalState state;
  state.temperature = temperature;
  state.coefficients.resize(dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    state.coefficients[i] =
        std::polar(std::sqrt(weights[i] / z), 2.0 * std::numbers::pi * rng.unit());
  return state;
}

// Weight of the single largest term when a thermal state is expanded in
// the coupled eigenbasis: max_{n,i} |c_i <n|i>|^2, where |i> are the
// environment eigenstates carrying the thermal coefficients.
inline double thermal_largest_term(const ThermalState& state,
                                   const SpectralDecomposition& coupled,
                                   const SpectralDecomposition& env) {
  if (coupled.dim() != env.dim() || state.coefficients.size() != env.dim())
    throw ArgumentError("thermal_largest_term: dimension mismatch");
  const Eigen::MatrixXcd mix = coupled.eigenvectors.adjoint() * env.eigenvectors;
  double best = 0.0;
  for (Eigen::Index i = 0; i < env.dim(); ++i) {
    const double ci2 = std::norm(state.coefficients[i]);
    if (ci2 * 1.0 <= best) {
      // |<n|i>|^2 <= 1, so this column cannot beat the current best
      continue;
    }
    const double col_max = mix.col(i).cwiseAbs2().maxCoeff();
    best = std::max(best, ci2 * col_max);
  }
  return best;
}

// ---------------------------------------------------------- critical point

// Coupling strength at which the perturbed ground state stops adapting
// adiabatically: delta_c = (1 - kappa) * omega * N - kappa * omega * sqrt(N).
// Plain double arithmetic in exactly this association, so results are
// reproducible bit for bit.
inline double critical_delta(double kappa, double omega, int n_spins) {
  if (n_spins < 1) throw ArgumentError("critical_delta: n_spins must be >= 1");
  const double n = static_cast<double>(n_spins);
  return (1.0 - kappa) * omega * n - kappa * omega * std::sqrt(n);
}

// ------------------------------------------------------------- eigenflow

// One row of an eigenvalue-flow scan: the k lowest levels at a given
// coupling width, with each level's overlap against the unperturbed
// ground state, plus the overall largest overlap across the spectrum.
struct EigenvalueFlowPoint {
  double delta = 0.0;
  Eigen::VectorXd energies;   // k lowest, ascending
  Eigen::VectorXd overlaps;   // |<n|ground of H_env>|^2 for those levels
  double largest = 0.0;          // max over the full spectrum
  double cluster_largest = 0.0;
};

// Track the low spectrum of the coupled Hamiltonian as the coupling
// width grows.  The disorder shape is held fixed: `unit_realization`
// must be drawn with delta = 1, and each grid value rescales delta_i
// proportionally, so levels move continuously with delta.
inline std::vector<EigenvalueFlowPoint> eigenvalue_flow(
    const ModelParams& params, const CouplingRealization& unit_realization,
    const Eigen::VectorXd& delta_grid, int k_lowest) {
  validate(params);
  if (k_lowest < 1)
    throw ArgumentError("eigenvalue_flow: k_lowest must be >= 1");
  const Eigen::Index dim = Eigen::Index(1) << params.n_spins;
  const Eigen::Index k = std::min<Eigen::Index>(k_lowest, dim);

  ModelParams base = params;
  base.delta = 0.0;  // widths live in the rescaled realizations below
  const SpectralDecomposition env =
      eigendecompose(build_environment_hamiltonian(base, unit_realization));
  const StateVector ground = env.eigenvectors.col(0);

  std::vector<EigenvalueFlowPoint> flow;
  flow.reserve(delta_grid.size());
  for (Eigen::Index g = 0; g < delta_grid.size(); ++g) {
    const double width = delta_grid[g];
    if (width < 0.0)
      throw ArgumentError("eigenvalue_flow: delta grid values must be >= 0");
    CouplingRealization scaled = unit_realization;
    for (double& d : scaled.delta_i) d *= width;
    ModelParams at = params;
    at.delta = width;
    const SpectralDecomposition coupled =
        eigendecompose(build_conditional_hamiltonian(at, scaled, Branch::coupled()));
    const OverlapReport report = overlap_spectrum(coupled, ground);

    EigenvalueFlowPoint point;
    point.delta = width;
    point.energies = coupled.eigenvalues.head(k);
    point.overlaps = report.overlaps.head(k);
    point.largest = report.largest;
    point.cluster_largest = report.cluster_largest;
    flow.push_back(std::move(point));
  }
  return flow;
}

// -------------------------------------------------------- level statistics

enum class SectorLabel { negative, neutral, positive };

// Label each eigenstate by the sign of its total magnetization
// expectation; |<M>| below `neutral_tol` counts as neutral.
inline std::vector<SectorLabel> magnetization_sectors(
    const SpectralDecomposition& decomp, int n_spins,
    double neutral_tol = 1e-6) {
  const Eigen::Index dim = decomp.dim();
  if (dim != (Eigen::Index(1) << n_spins))
    throw ArgumentError("magnetization_sectors: dimension does not match n_spins");
  Eigen::VectorXd m_basis(dim);
  for (Eigen::Index b = 0; b < dim; ++b)
    m_basis[b] = basis_magnetization(static_cast<BasisIndex>(b), n_spins);
  std::vector<SectorLabel> labels(dim);
  for (Eigen::Index n = 0; n < dim; ++n) {
    const double m = decomp.eigenvectors.col(n).cwiseAbs2().dot(m_basis);
    labels[n] = (std::abs(m) < neutral_tol)
                    ? SectorLabel::neutral
                    : (m > 0.0 ? SectorLabel::positive : SectorLabel::negative);
  }
  return labels;
}

// Two Z2 operations commute with every Hamiltonian this library builds.
// First, the parity of the number of up spins: each term is either
// diagonal in the z basis or flips exactly two spins, so this parity is
// conserved exactly, for any parameters.  Second, the global spin flip
// (pi rotation about x): all the two-spin couplings are invariant under
// it, and the linear z terms that break it are tiny by default, so
// eigenstates typically carry a near-definite flip sign.  Nearest-
// neighbour spacings taken across such decoupled (or effectively
// decoupled) sectors measure the superposition of independent level
// sequences, not level repulsion — so spacing extraction labels each
// eigenstate and unfolds within groups.
struct SymmetrySectorLabel {
  int magnetization_parity = +1;  // exact: +1 even up-spin count, -1 odd
  int flip_sign = 0;  // +1/-1 when the global-flip expectation exceeds the
                      // threshold in magnitude, 0 when unresolved
};

inline std::vector<SymmetrySectorLabel> symmetry_sector_labels(
    const SpectralDecomposition& decomp, double flip_threshold = 0.5) {
  const Eigen::Index dim = decomp.dim();
  std::vector<SymmetrySectorLabel> labels(static_cast<std::size_t>(dim));
  for (Eigen::Index k = 0; k < dim; ++k) {
    const auto v = decomp.eigenvectors.col(k);
    double parity = 0.0;
    Complex flip(0.0, 0.0);
    for (Eigen::Index b = 0; b < dim; ++b) {
      const double w = std::norm(v[b]);
      parity += (std::popcount(static_cast<std::uint64_t>(b)) & 1u) ? -w : w;
      flip += std::conj(v[dim - 1 - b]) * v[b];
    }
    labels[static_cast<std::size_t>(k)].magnetization_parity =
        parity >= 0.0 ? +1 : -1;
    const double f = flip.real();
    labels[static_cast<std::size_t>(k)].flip_sign =
        f > flip_threshold ? +1 : (f < -flip_threshold ? -1 : 0);
  }
  return labels;
}

// Unfolded spacings pooled over conserved-symmetry groups, optionally
// refined by magnetization-sign sector (the two-well regime, where the
// flip expectation is unresolved and the wells are the effective
// superselection sectors).  Groups whose trimmed window holds fewer
// than two levels contribute nothing.
inline std::vector<double> symmetry_resolved_spacings(
    const SpectralDecomposition& decomp, int n_spins,
    bool magnetization_sectored, double window_fraction = 0.8);

// Wigner-Dyson (GOE surmise) spacing density and CDF, and the Poisson
// references.
inline double wigner_dyson_pdf(double s) {
  return 0.5 * std::numbers::pi * s * std::exp(-0.25 * std::numbers::pi * s * s);
}
inline double wigner_dyson_cdf(double s) {
  return 1.0 - std::exp(-0.25 * std::numbers::pi * s * s);
}
inline double poisson_pdf(double s) { return std::exp(-s); }
inline double poisson_cdf(double s) { return 1.0 - std::exp(-s); }

// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
inline double ks_distance(std::vector<double> sample,
                          const std::function<double(double)>& cdf) {
  if (sample.empty()) throw InsufficientDataError("ks_distance: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < sample.size(); ++k) {
    const double f = cdf(sample[k]);
    worst = std::max(worst, std::abs((static_cast<double>(k) + 1.0) / n - f));
    worst = std::max(worst, std::abs(static_cast<double>(k) / n - f));
  }
  return worst;
}

struct SpacingOptions {
  double window_fraction = 0.8;  // central fraction of each spectrum kept
  int bins = 40;
  const std::vector<SectorLabel>* sector_labels = nullptr;
  double histogram_max = 4.0;    // top edge of the spacing histogram
};

// Mean-one unfolded spacings from one sorted spectrum (or one sector of
// it): keep the central window_fraction of the levels, take consecutive
// differences, divide by their mean.
inline std::vector<double> unfolded_spacings(const std::vector<double>& levels,
                                             double window_fraction) {
  if (!(window_fraction > 0.0 && window_fraction <= 1.0))
    throw ArgumentError("unfolded_spacings: window_fraction must be in (0, 1]");
  const std::size_t n = levels.size();
  const std::size_t keep = static_cast<std::size_t>(
      std::floor(window_fraction * static_cast<double>(n) + 1e-9));
  if (keep < 2) return {};
  const std::size_t lo = (n - keep) / 2;
  std::vector<double> gaps;
  gaps.reserve(keep - 1);
  for (std::size_t k = lo + 1; k < lo + keep; ++k)
    gaps.push_back(levels[k] - levels[k - 1]);
  const double mean = std::accumulate(gaps.begin(), gaps.end(), 0.0) /
                      static_cast<double>(gaps.size());
  if (mean <= 0.0)
    throw InsufficientDataError("unfolded_spacings: degenerate spectrum window");
  for (double& g : gaps) g /= mean;
  return gaps;
}

inline std::vector<double> symmetry_resolved_spacings(
    const SpectralDecomposition& decomp, int n_spins,
    bool magnetization_sectored, double window_fraction) {
  const auto labels = symmetry_sector_labels(decomp);
  std::vector<SectorLabel> mag;
  if (magnetization_sectored) mag = magnetization_sectors(decomp, n_spins);
  std::map<int, std::vector<double>> groups;
  for (Eigen::Index k = 0; k < decomp.dim(); ++k) {
    const auto& lab = labels[static_cast<std::size_t>(k)];
    int key = (lab.magnetization_parity > 0 ? 0 : 1) * 9 + (lab.flip_sign + 1) * 3;
    if (magnetization_sectored)
      key += static_cast<int>(mag[static_cast<std::size_t>(k)]);
    groups[key].push_back(decomp.eigenvalues[k]);  // ascending within group
  }
  std::vector<double> pooled;
  for (auto& [key, levels] : groups) {
    const auto gaps = unfolded_spacings(levels, window_fraction);
    pooled.insert(pooled.end(), gaps.begin(), gaps.end());
  }
  return pooled;
}

// Histogram + KS summary of a set of already-unfolded spacings.
struct SpacingHistogram {
  std::vector<double> spacings;   // unfolded, pooled
  std::vector<double> bin_edges;  // bins + 1 edges, uniform on [0, max]
  std::vector<double> densities;  // per-bin density; integrates to 1
  double ks_wigner = 0.0;
  double ks_poisson = 0.0;
  bool sectored = false;
};

inline SpacingHistogram spacing_histogram_from_unfolded(
    std::vector<double> spacings, int bins, double histogram_max,
    bool sectored) {
  if (spacings.size() < 50)
    throw InsufficientDataError(
        "spacing_histogram: need at least 50 spacings, have " +
        std::to_string(spacings.size()));
  if (bins < 1) throw ArgumentError("spacing_histogram: bins must be >= 1");
  SpacingHistogram h;
  h.sectored = sectored;
  h.ks_wigner = ks_distance(spacings, wigner_dyson_cdf);
  h.ks_poisson = ks_distance(spacings, poisson_cdf);
  // Widen the range if any spacing falls beyond the nominal top edge, so
  // the densities always integrate to 1; the last bin is right-closed.
  double top = histogram_max;
  for (double s : spacings) top = std::max(top, s);
  h.bin_edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b)
    h.bin_edges[b] = top * static_cast<double>(b) / bins;
  h.densities.assign(bins, 0.0);
  const double width = top / bins;
  for (double s : spacings) {
    int b = static_cast<int>(std::floor(s / width));
    b = std::clamp(b, 0, bins - 1);
    h.densities[b] += 1.0;
  }
  for (double& d : h.densities) d /= width * static_cast<double>(spacings.size());
  h.spacings = std::move(spacings);
  return h;
}

// Level-spacing statistics of one spectrum.  With sector labels the
// spacings are taken within each sector separately (each sector
// windowed and unfolded on its own) and pooled afterwards.
inline SpacingHistogram spacing_histogram(const Eigen::VectorXd& eigenvalues,
                                          const SpacingOptions& opts = {}) {
  std::vector<double> pooled;
  if (opts.sector_labels == nullptr) {
    std::vector<double> levels(eigenvalues.data(),
                               eigenvalues.data() + eigenvalues.size());
    pooled = unfolded_spacings(levels, opts.window_fraction);
  } else {
    if (static_cast<Eigen::Index>(opts.sector_labels->size()) !=
        eigenvalues.size())
      throw ArgumentError("spacing_histogram: sector label count mismatch");
    for (SectorLabel want :
         {SectorLabel::negative, SectorLabel::neutral, SectorLabel::positive}) {
      std::vector<double> levels;
      for (Eigen::Index n = 0; n < eigenvalues.size(); ++n)
        if ((*opts.sector_labels)[n] == want) levels.push_back(eigenvalues[n]);
      if (levels.size() < 2) continue;
      auto gaps = unfolded_spacings(levels, opts.window_fraction);
      pooled.insert(pooled.end(), gaps.begin(), gaps.end());
    }
  }
  return spacing_histogram_from_unfolded(std::move(pooled), opts.bins,
                                         opts.histogram_max,
                                         opts.sector_labels != nullptr);
}

// ------------------------------------------------------------- statistics

// Spearman rank correlation (average ranks on ties).
inline double spearman_rank_correlation(const std::vector<double>& x,
                                        const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ArgumentError("spearman_rank_correlation: need two samples of equal size >= 2");
  auto ranks = [](const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    std::size_t k = 0;
    while (k < n) {
      std::size_t j = k;
      while (j + 1 < n && v[order[j + 1]] == v[order[k]]) ++j;
      const double avg = 0.5 * (static_cast<double>(k) + static_cast<double>(j)) + 1.0;
      for (std::size_t m = k; m <= j; ++m) r[order[m]] = avg;
      k = j + 1;
    }
    return r;
  };
  const std::vector<double> rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (rx[k] - mx) * (ry[k] - my);
    sxx += (rx[k] - mx) * (rx[k] - mx);
    syy += (ry[k] - my) * (ry[k] - my);
  }
  if (sxx == 0.0 || syy == 0.0)
    throw ArgumentError("spearman_rank_correlation: constant input");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace spinbath
