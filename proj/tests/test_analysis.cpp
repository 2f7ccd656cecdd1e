// Overlap spectra, thermal states, level statistics and the glassiness
// threshold, each against an independent oracle or frozen value.
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "spinbath/analysis.hpp"
#include "spinbath/dynamics.hpp"
#include "spinbath/model.hpp"
#include "spinbath/spectral.hpp"

using namespace spinbath;
using Catch::Approx;

namespace {

ModelParams glassy(int n, double kappa, double delta, std::uint64_t seed) {
  ModelParams p;
  p.n_spins = n;
  p.kappa = kappa;
  p.delta = delta;
  p.seed = seed;
  return p;
}

struct Pair {
  SpectralDecomposition env, coupled;
  StateVector ground;
};

Pair decompose(const ModelParams& p) {
  const CouplingRealization r = draw_couplings(p);
  Pair out;
  out.env = eigendecompose(build_environment_hamiltonian(p, r));
  out.coupled =
      eigendecompose(build_conditional_hamiltonian(p, r, Branch::coupled()));
  out.ground = out.env.eigenvectors.col(0);
  return out;
}

}  // namespace

TEST_CASE("glassiness threshold reproduces the frozen table") {
  // Oracle: the defining expression evaluated by hand for nine spins at
  // unit coupling-width; the fit line crosses zero between 0.6 and 0.8.
  struct Row { double kappa, expect; };
  const Row rows[] = {{0.2, 6.6}, {0.4, 4.2}, {0.6, 1.8},
                      {0.8, -0.6}, {1.0, -3.0}};
  for (const Row& row : rows) {
    const double got = critical_delta(row.kappa, 1.0, 9);
    CHECK(got == Approx(row.expect).margin(1e-12));
    // Bit-for-bit the documented expression, no algebraic reshuffling.
    CHECK(got == (1.0 - row.kappa) * 1.0 * 9.0 -
                     row.kappa * 1.0 * std::sqrt(9.0));
  }
  // Exact zero: kappa = N / (N + sqrt(N)) = 0.75 for N = 9.
  CHECK(critical_delta(0.75, 1.0, 9) == 0.0);
  CHECK(critical_delta(0.5, 2.0, 4) == Approx(2.0 * critical_delta(0.5, 1.0, 4)));
  CHECK_THROWS_AS(critical_delta(0.5, 1.0, 0), ArgumentError);
}

TEST_CASE("overlap spectrum is a normalized distribution") {
  const Pair pair = decompose(glassy(5, 0.7, 2.0, 31));
  const OverlapReport report = overlap_spectrum(pair.coupled, pair.ground);
  CHECK(report.overlaps.sum() == Approx(1.0).margin(1e-12));
  CHECK(report.overlaps.minCoeff() >= 0.0);
  CHECK(report.largest == Approx(report.overlaps.maxCoeff()));
  CHECK(report.overlaps[report.largest_index] == report.largest);
  CHECK(report.cluster_largest >= report.largest - 1e-15);
}

TEST_CASE("an exact eigenstate has overlap one on its own level") {
  const Pair pair = decompose(glassy(4, 0.5, 1.5, 9));
  const StateVector psi = pair.coupled.eigenvectors.col(3);
  const OverlapReport report = overlap_spectrum(pair.coupled, psi);
  CHECK(report.largest == Approx(1.0).margin(1e-12));
  CHECK(report.largest_index == 3);
}

TEST_CASE("cluster weight pools degenerate levels") {
  SpectralDecomposition d;
  d.eigenvalues.resize(4);
  d.eigenvalues << 0.0, 1.0, 1.0, 2.0;
  d.eigenvectors = Eigen::MatrixXcd::Identity(4, 4);
  StateVector psi(4);
  psi << Complex(0.0, 0.0), Complex(std::sqrt(0.3), 0.0),
      Complex(0.0, std::sqrt(0.3)), Complex(std::sqrt(0.4), 0.0);
  const OverlapReport report = overlap_spectrum(d, psi);
  CHECK(report.largest == Approx(0.4).margin(1e-12));
  CHECK(report.cluster_largest == Approx(0.6).margin(1e-12));
}

TEST_CASE("overlap-sum coherence equals the direct trace") {
  // Dual route: the mod-squared-overlap sum against the two-branch inner
  // product, valid because one branch is the bare environment and the
  // initial state is its ground state.
  const ModelParams p = glassy(4, 0.6, 1.8, 12);
  const Pair pair = decompose(p);
  const Eigen::VectorXd times = uniform_time_grid(0.5, 40.0);
  const CoherenceTrace direct =
      coherence_trace(pair.env, pair.coupled, pair.ground, times);
  const OverlapReport report = overlap_spectrum(pair.coupled, pair.ground);
  const CoherenceTrace summed = coherence_from_overlaps(
      report, pair.coupled.eigenvalues, pair.env.eigenvalues[0], times);
  for (Eigen::Index k = 0; k < times.size(); ++k)
    CHECK(std::abs(direct.values[k] - summed.values[k]) < 1e-11);
}

TEST_CASE("thermal state is normalized and seed-stable") {
  const Pair pair = decompose(glassy(4, 0.8, 2.0, 5));
  const ThermalState a = thermal_initial_state(pair.env, 0.37, 101);
  const ThermalState b = thermal_initial_state(pair.env, 0.37, 101);
  CHECK(a.coefficients.norm() == Approx(1.0).margin(1e-12));
  CHECK((a.coefficients - b.coefficients).norm() == 0.0);
  const ThermalState c = thermal_initial_state(pair.env, 0.37, 102);
  CHECK((a.coefficients - c.coefficients).norm() > 1e-8);
  CHECK_THROWS_AS(thermal_initial_state(pair.env, 0.0, 1), ArgumentError);
  CHECK_THROWS_AS(thermal_initial_state(pair.env, -1.0, 1), ArgumentError);
}

TEST_CASE("thermal state approaches the ground state as T -> 0") {
  const Pair pair = decompose(glassy(4, 0.8, 2.0, 5));
  const ThermalState cold = thermal_initial_state(pair.env, 1e-4, 7);
  CHECK(std::abs(cold.coefficients[0]) == Approx(1.0).margin(1e-9));
  // and equipartition as T -> infinity
  const ThermalState hot = thermal_initial_state(pair.env, 1e8, 7);
  for (Eigen::Index i = 0; i < hot.coefficients.size(); ++i)
    CHECK(std::norm(hot.coefficients[i]) == Approx(1.0 / 16.0).margin(1e-6));
}

TEST_CASE("largest thermal term reduces to the ground overlap at T -> 0") {
  const Pair pair = decompose(glassy(4, 0.6, 2.2, 19));
  const ThermalState cold = thermal_initial_state(pair.env, 1e-5, 3);
  const OverlapReport report = overlap_spectrum(pair.coupled, pair.ground);
  CHECK(thermal_largest_term(cold, pair.coupled, pair.env) ==
        Approx(report.largest).margin(1e-6));
}

TEST_CASE("largest thermal term is one when the branches coincide") {
  // Zero coupling width: the coupled branch is the environment itself, so
  // the mixing matrix is the identity and the largest term is max |c_i|^2.
  ModelParams p = glassy(3, 0.5, 0.0, 23);
  const Pair pair = decompose(p);
  const ThermalState cold = thermal_initial_state(pair.env, 1e-5, 11);
  CHECK(thermal_largest_term(cold, pair.coupled, pair.env) ==
        Approx(1.0).margin(1e-8));
}

TEST_CASE("eigenvalue flow starts at the environment spectrum") {
  ModelParams p = glassy(3, 0.7, 1.0, 41);
  ModelParams unit = p;
  unit.delta = 1.0;
  const CouplingRealization r = draw_couplings(unit);
  Eigen::VectorXd grid(3);
  grid << 0.0, 0.5, 1.0;
  const auto flow = eigenvalue_flow(p, r, grid, 4);
  REQUIRE(flow.size() == 3);

  const SpectralDecomposition env =
      eigendecompose(build_environment_hamiltonian(p, r));
  CHECK(flow[0].delta == 0.0);
  for (int k = 0; k < 4; ++k)
    CHECK(flow[0].energies[k] == Approx(env.eigenvalues[k]).margin(1e-12));
  CHECK(flow[0].largest == Approx(1.0).margin(1e-10));

  // The last grid point must agree with a direct width-1 computation.
  ModelParams at1 = p;
  at1.delta = 1.0;
  const Pair direct = decompose(at1);
  const OverlapReport report =
      overlap_spectrum(direct.coupled, direct.ground);
  CHECK(flow[2].largest == Approx(report.largest).margin(1e-10));
  for (const auto& point : flow)
    for (Eigen::Index k = 0; k + 1 < point.energies.size(); ++k)
      CHECK(point.energies[k] <= point.energies[k + 1] + 1e-12);
}

TEST_CASE("ordered flow keeps its overlap carrier through a crossing") {
  // Frozen qualitative behavior: with weak frustration the unperturbed
  // ground state stays almost fully concentrated on a single coupled
  // eigenstate, and at an avoided crossing that carrier hops to the
  // adjacent level instead of spreading out.
  ModelParams p = glassy(6, 0.1, 1.0, 2);
  const CouplingRealization unit = draw_couplings(p);
  Eigen::VectorXd grid(26);
  for (int g = 0; g < 26; ++g) grid[g] = 0.2 * g;
  const auto flow = eigenvalue_flow(p, unit, grid, 8);

  std::vector<int> carrier;
  for (const auto& pt : flow) {
    CHECK(pt.largest >= 0.99);
    int arg = 0;
    for (Eigen::Index i = 1; i < pt.overlaps.size(); ++i)
      if (pt.overlaps[i] > pt.overlaps[arg]) arg = static_cast<int>(i);
    // With >= 0.99 of the weight in the low levels, the spectrum-wide
    // largest must be attained at that same level.
    CHECK(pt.overlaps[arg] == Approx(pt.largest).margin(1e-12));
    carrier.push_back(arg);
  }
  int swaps = 0;
  for (std::size_t g = 1; g < carrier.size(); ++g)
    if (carrier[g] != carrier[g - 1]) ++swaps;
  CHECK(swaps == 1);
  CHECK(carrier.front() == 0);
  CHECK(carrier.back() == 1);  // hops exactly one level up
}

TEST_CASE("glassy flow loses its overlap carrier without recovery") {
  // Frozen qualitative behavior: at full frustration the largest overlap
  // decays as the coupling width grows and never climbs back.
  ModelParams p = glassy(6, 1.0, 1.0, 1);
  const CouplingRealization unit = draw_couplings(p);
  Eigen::VectorXd grid(16);
  for (int g = 0; g < 16; ++g) grid[g] = 0.2 * g;
  const auto flow = eigenvalue_flow(p, unit, grid, 4);

  CHECK(flow.front().largest == Approx(1.0).margin(1e-10));
  for (std::size_t g = 1; g < flow.size(); ++g)
    CHECK(flow[g].largest <= flow[g - 1].largest + 1e-6);
  CHECK(flow.back().largest <= 0.3);
}

TEST_CASE("magnetization sectors label computational eigenstates") {
  ManyBodyOperator op;
  op.entries.resize(4, 4);
  std::vector<Triplet> trips;
  for (int k = 0; k < 4; ++k) trips.emplace_back(k, k, Complex(k, 0.0));
  op.entries.setFromTriplets(trips.begin(), trips.end());
  const SpectralDecomposition d = eigendecompose(op);
  const auto labels = magnetization_sectors(d, 2);
  REQUIRE(labels.size() == 4);
  CHECK(labels[0] == SectorLabel::negative);
  CHECK(labels[1] == SectorLabel::neutral);
  CHECK(labels[2] == SectorLabel::neutral);
  CHECK(labels[3] == SectorLabel::positive);
}

TEST_CASE("reference spacing distributions are normalized with unit mean") {
  // Simpson quadrature, fine enough for 1e-8; the exponential tail needs
  // a longer domain than the Gaussian one.
  auto integrate = [](auto f, double top) {
    const int n = 24000;  // even
    const double h = top / n;
    double acc = f(0.0) + f(top);
    for (int k = 1; k < n; ++k) acc += f(k * h) * (k % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
  };
  CHECK(integrate(wigner_dyson_pdf, 12.0) == Approx(1.0).margin(1e-8));
  CHECK(integrate([](double s) { return s * wigner_dyson_pdf(s); }, 12.0) ==
        Approx(1.0).margin(1e-8));
  CHECK(integrate(poisson_pdf, 40.0) == Approx(1.0).margin(1e-8));
  CHECK(integrate([](double s) { return s * poisson_pdf(s); }, 40.0) ==
        Approx(1.0).margin(1e-8));
  CHECK(wigner_dyson_pdf(1.0) ==
        Approx(0.5 * std::numbers::pi * std::exp(-0.25 * std::numbers::pi))
            .margin(1e-15));
  CHECK(wigner_dyson_cdf(0.0) == 0.0);
  CHECK(wigner_dyson_cdf(100.0) == Approx(1.0));
}

TEST_CASE("ks distance against a point mass is the frozen value") {
  const double d =
      ks_distance({0.25}, [](double s) { return std::min(1.0, std::max(0.0, s)); });
  CHECK(d == Approx(0.75).margin(1e-15));
  CHECK_THROWS_AS(ks_distance({}, poisson_cdf), InsufficientDataError);
}

TEST_CASE("ks distance recognizes its own distribution") {
  std::vector<double> wd, po;
  for (int k = 0; k < 4000; ++k) {
    const double u = (k + 0.5) / 4000.0;
    wd.push_back(std::sqrt(-4.0 * std::log1p(-u) / std::numbers::pi));
    po.push_back(-std::log1p(-u));
  }
  CHECK(ks_distance(wd, wigner_dyson_cdf) < 0.01);
  CHECK(ks_distance(wd, poisson_cdf) > 0.2);
  CHECK(ks_distance(po, poisson_cdf) < 0.01);
  CHECK(ks_distance(po, wigner_dyson_cdf) > 0.2);
}

TEST_CASE("picket-fence unfolding gives unit spacings") {
  std::vector<double> levels;
  for (int k = 0; k < 100; ++k) levels.push_back(0.3 * k - 7.0);
  const auto gaps = unfolded_spacings(levels, 0.8);
  REQUIRE(gaps.size() == 79);  // central 80 levels
  for (double g : gaps) CHECK(g == Approx(1.0).margin(1e-12));
}

TEST_CASE("unfolded spacings are affine invariant with unit mean") {
  ModelParams p = glassy(6, 1.0, 0.0, 2);
  const CouplingRealization r = draw_couplings(p);
  const SpectralDecomposition env =
      eigendecompose(build_environment_hamiltonian(p, r));
  std::vector<double> levels(env.eigenvalues.data(),
                             env.eigenvalues.data() + env.dim());
  const auto base = unfolded_spacings(levels, 0.8);
  double mean = 0.0;
  for (double g : base) mean += g;
  mean /= static_cast<double>(base.size());
  CHECK(mean == Approx(1.0).margin(1e-13));

  std::vector<double> scaled;
  for (double e : levels) scaled.push_back(-3.0 + 17.0 * e);
  const auto trans = unfolded_spacings(scaled, 0.8);
  REQUIRE(trans.size() == base.size());
  for (std::size_t k = 0; k < base.size(); ++k)
    CHECK(trans[k] == Approx(base[k]).margin(1e-10));
}

TEST_CASE("spacing histogram integrates to one, tail included") {
  std::vector<double> spacings(99, 0.5);
  spacings.push_back(7.0);  // beyond the nominal display range
  const SpacingHistogram h =
      spacing_histogram_from_unfolded(spacings, 40, 4.0, false);
  double integral = 0.0;
  for (std::size_t b = 0; b + 1 < h.bin_edges.size(); ++b)
    integral += h.densities[b] * (h.bin_edges[b + 1] - h.bin_edges[b]);
  CHECK(integral == Approx(1.0).margin(1e-9));
  CHECK(h.bin_edges.front() == 0.0);
  CHECK(h.bin_edges.back() >= 7.0);
  CHECK_THROWS_AS(spacing_histogram_from_unfolded({1.0, 2.0}, 10, 4.0, false),
                  InsufficientDataError);
}

TEST_CASE("symmetry labels split the spectrum into balanced exact sectors") {
  ModelParams p = glassy(6, 1.0, 0.0, 5);
  const CouplingRealization r = draw_couplings(p);
  const SpectralDecomposition env =
      eigendecompose(build_environment_hamiltonian(p, r));
  const auto labels = symmetry_sector_labels(env);
  REQUIRE(labels.size() == 64);
  int even = 0, resolved_flip = 0;
  for (const auto& lab : labels) {
    if (lab.magnetization_parity > 0) ++even;
    if (lab.flip_sign != 0) ++resolved_flip;
  }
  // Up-spin-count parity is exactly conserved: 32 states per sector.
  CHECK(even == 32);
  // The flip-breaking term is 1e-3, far below typical level spacings, so
  // eigenstates carry near-definite flip signs throughout the spectrum.
  CHECK(resolved_flip == 64);
}

TEST_CASE("glassy spectra lean toward level repulsion once sectors split") {
  // Statistical sanity at a small size: within conserved-symmetry
  // sectors the fully glassy model sits close to the repulsive
  // reference; pooled across sectors it drifts toward the uncorrelated
  // one (independent sequences superpose).
  ModelParams p = glassy(8, 1.0, 0.0, 3);
  const CouplingRealization r = draw_couplings(p);
  const SpectralDecomposition env =
      eigendecompose(build_environment_hamiltonian(p, r));

  const auto resolved = symmetry_resolved_spacings(env, 8, false, 0.8);
  CHECK(ks_distance(resolved, wigner_dyson_cdf) < 0.1);
  CHECK(ks_distance(resolved, wigner_dyson_cdf) <
        ks_distance(resolved, poisson_cdf));

  std::vector<double> levels(env.eigenvalues.data(),
                             env.eigenvalues.data() + env.dim());
  const auto mixed = unfolded_spacings(levels, 0.8);
  CHECK(ks_distance(mixed, wigner_dyson_cdf) >
        ks_distance(resolved, wigner_dyson_cdf));
}

TEST_CASE("magnetization sectoring changes the spacing sample measurably") {
  // Weakly frustrated two-well regime: pooling the wells against
  // resolving them shifts the spacing distribution by more than 0.05 in
  // two-sample KS distance (ensemble of four at N=10).
  auto two_sample_ks = [](std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
      if (a[i] <= b[j]) ++i;
      else ++j;
      d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                               static_cast<double>(j) / b.size()));
    }
    return d;
  };
  std::vector<double> sectored, unsectored;
  for (int m = 0; m < 4; ++m) {
    ModelParams p = glassy(10, 0.25, 0.0, split_seed(0xA11A5, m));
    const CouplingRealization r = draw_couplings(p);
    const SpectralDecomposition env =
        eigendecompose(build_environment_hamiltonian(p, r));
    const auto with = symmetry_resolved_spacings(env, 10, true, 0.8);
    const auto without = symmetry_resolved_spacings(env, 10, false, 0.8);
    sectored.insert(sectored.end(), with.begin(), with.end());
    unsectored.insert(unsectored.end(), without.begin(), without.end());
  }
  CHECK(two_sample_ks(sectored, unsectored) > 0.05);
}

TEST_CASE("rank correlation handles monotone, reversed and tied data") {
  CHECK(spearman_rank_correlation({1, 2, 3, 4}, {10, 20, 30, 40}) ==
        Approx(1.0).margin(1e-15));
  CHECK(spearman_rank_correlation({1, 2, 3, 4}, {9, 7, 5, 3}) ==
        Approx(-1.0).margin(1e-15));
  // Frozen textbook value: ranks differ by (0,1,-1,1,-1) -> rho = 0.8.
  CHECK(spearman_rank_correlation({1, 2, 3, 4, 5}, {1, 3, 2, 5, 4}) ==
        Approx(0.8).margin(1e-12));
  CHECK(spearman_rank_correlation({1, 2, 2, 3}, {10, 20, 20, 40}) ==
        Approx(1.0).margin(1e-12));
  CHECK_THROWS_AS(spearman_rank_correlation({1.0}, {2.0}), ArgumentError);
}
