// Coherence traces and derived metrics against closed-form oracles.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

#include "spinbath/dynamics.hpp"
#include "spinbath/model.hpp"
#include "spinbath/spectral.hpp"

using namespace spinbath;
using Catch::Approx;

namespace {

SpectralDecomposition diagonal_decomposition(std::initializer_list<double> es) {
  SpectralDecomposition d;
  const Eigen::Index n = static_cast<Eigen::Index>(es.size());
  d.eigenvalues.resize(n);
  Eigen::Index k = 0;
  for (double e : es) d.eigenvalues[k++] = e;
  d.eigenvectors = Eigen::MatrixXcd::Identity(n, n);
  d.residual_bound = 0.0;
  return d;
}

CoherenceTrace synthetic_trace(double dt, double t_max,
                               const std::function<Complex(double)>& f) {
  CoherenceTrace trace;
  trace.times = uniform_time_grid(dt, t_max);
  trace.values.resize(trace.times.size());
  for (Eigen::Index k = 0; k < trace.times.size(); ++k)
    trace.values[k] = f(trace.times[k]);
  return trace;
}

}  // namespace

TEST_CASE("uniform time grid covers [0, t_max] inclusively") {
  const Eigen::VectorXd t = uniform_time_grid(0.1, 300.0);
  REQUIRE(t.size() == 3001);
  CHECK(t[0] == 0.0);
  CHECK(t[3000] == Approx(300.0).margin(1e-9));
  CHECK(t[1] - t[0] == Approx(0.1).margin(1e-15));
  CHECK_THROWS_AS(uniform_time_grid(0.0, 10.0), ArgumentError);
}

TEST_CASE("two-level beat matches the closed form") {
  // Oracle first: identical branches except for two eigenvalues a and b;
  // an equal superposition gives C(t) = (e^{i a t} + e^{i b t}) / 2.
  const double a = 0.7, b = -1.3;
  const SpectralDecomposition up = diagonal_decomposition({0.0, 0.0});
  const SpectralDecomposition down = diagonal_decomposition({a, b});
  StateVector psi0(2);
  psi0 << Complex(std::numbers::sqrt2 / 2.0, 0.0),
      Complex(std::numbers::sqrt2 / 2.0, 0.0);
  const CoherenceTrace trace =
      coherence_trace(up, down, psi0, uniform_time_grid(0.05, 20.0));
  for (Eigen::Index k = 0; k < trace.times.size(); ++k) {
    const double t = trace.times[k];
    const Complex expect =
        0.5 * (std::exp(Complex(0.0, a * t)) + std::exp(Complex(0.0, b * t)));
    CHECK(std::abs(trace.values[k] - expect) < 1e-12);
  }
}

TEST_CASE("one environment spin decoheres as |cos(delta t / 4)|") {
  ModelParams p;
  p.n_spins = 1;
  p.kappa = 0.0;
  p.delta = 2.4;
  p.eps_sb = 0.15;  // must drop out of |C|
  p.seed = 77;
  const CouplingRealization r = draw_couplings(p);
  const SpectralDecomposition env =
      eigendecompose(build_environment_hamiltonian(p, r));
  const SpectralDecomposition down =
      eigendecompose(build_conditional_hamiltonian(p, r, Branch::coupled()));
  StateVector psi0(2);
  psi0 << Complex(std::numbers::sqrt2 / 2.0, 0.0),
      Complex(std::numbers::sqrt2 / 2.0, 0.0);
  const CoherenceTrace trace =
      coherence_trace(env, down, psi0, uniform_time_grid(0.25, 100.0));
  CHECK(std::abs(trace.values[0] - Complex(1.0, 0.0)) < 1e-12);
  for (Eigen::Index k = 0; k < trace.times.size(); ++k) {
    const double expect = std::cos(r.delta_i[0] * trace.times[k] / 4.0);
    CHECK(std::abs(trace.values[k]) == Approx(std::abs(expect)).margin(1e-11));
  }
}

TEST_CASE("trace normalization holds for generic models") {
  ModelParams p;
  p.n_spins = 4;
  p.kappa = 0.6;
  p.delta = 2.0;
  p.seed = 11;
  const CouplingRealization r = draw_couplings(p);
  const SpectralDecomposition env =
      eigendecompose(build_environment_hamiltonian(p, r));
  const SpectralDecomposition down =
      eigendecompose(build_conditional_hamiltonian(p, r, Branch::coupled()));
  const StateVector psi0 = env.eigenvectors.col(0);
  const CoherenceTrace trace =
      coherence_trace(env, down, psi0, uniform_time_grid(0.5, 10.0));
  CHECK(std::abs(trace.values[0] - Complex(1.0, 0.0)) < 1e-12);
  for (Eigen::Index k = 0; k < trace.values.size(); ++k)
    CHECK(std::abs(trace.values[k]) <= 1.0 + 1e-10);
}

TEST_CASE("reduced density matrix carries the coherence off-diagonal") {
  ModelParams p;
  p.n_spins = 3;
  p.kappa = 0.9;
  p.delta = 1.7;
  p.seed = 4;
  const CouplingRealization r = draw_couplings(p);
  const SpectralDecomposition env =
      eigendecompose(build_environment_hamiltonian(p, r));
  const SpectralDecomposition down =
      eigendecompose(build_conditional_hamiltonian(p, r, Branch::coupled()));
  const StateVector psi0 = env.eigenvectors.col(0);

  CompositeState state;
  state.up = evolve_state(env, psi0, 5.0);
  state.down = evolve_state(down, psi0, 5.0);
  const Eigen::Matrix2cd rho = reduced_density_matrix(state);

  CHECK(std::abs(rho.trace() - Complex(1.0, 0.0)) < 1e-12);
  CHECK(std::abs(rho(0, 1) - std::conj(rho(1, 0))) < 1e-15);
  // Populations are weight moduli; the off-diagonal is w_up w_down* <d|u>.
  CHECK(rho(0, 0).real() == Approx(0.5).margin(1e-12));
  CHECK(rho(1, 1).real() == Approx(0.5).margin(1e-12));
  const Complex c = state.down.dot(state.up);
  CHECK(std::abs(rho(0, 1) - 0.5 * c) < 1e-12);
  // Purity for equal weights: (1 + |C|^2) / 2.
  const double purity = (rho * rho).trace().real();
  CHECK(purity == Approx(0.5 * (1.0 + std::norm(c))).margin(1e-12));
  // Positive semidefinite.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(rho);
  CHECK(es.eigenvalues().minCoeff() > -1e-14);
}

TEST_CASE("efficiency is the plain window mean of |C|") {
  const CoherenceTrace flat = synthetic_trace(
      1.0, 300.0, [](double) { return Complex(0.25, 0.0); });
  CHECK(efficiency_of_decoherence(flat, 200.0, 300.0) == Approx(0.25));

  // |cos t| averaged over 30 half-periods is exactly 2/pi.
  const CoherenceTrace wave = synthetic_trace(
      0.001, 300.0, [](double t) { return Complex(std::cos(t), 0.0); });
  const double window_end = 200.0 + 30.0 * std::numbers::pi;
  CHECK(efficiency_of_decoherence(wave, 200.0, window_end) ==
        Approx(2.0 / std::numbers::pi).margin(1e-3));

  CHECK_THROWS_AS(efficiency_of_decoherence(flat, 200.0, 100.0),
                  ArgumentError);
  const CoherenceTrace coarse = synthetic_trace(
      10.0, 300.0, [](double) { return Complex(1.0, 0.0); });
  CHECK_THROWS_AS(efficiency_of_decoherence(coarse, 201.0, 209.0),
                  ArgumentError);
}

TEST_CASE("initial decay time recovers a pure Gaussian exactly") {
  const CoherenceTrace gauss = synthetic_trace(0.1, 50.0, [](double t) {
    return std::exp(-(t / 5.0) * (t / 5.0)) *
           std::exp(Complex(0.0, 0.3 * t));
  });
  const auto fit = initial_decay_time(gauss);
  REQUIRE(fit.has_value());
  CHECK(fit->t_star == Approx(5.0).margin(1e-9));
  CHECK(fit->residual < 1e-10);
}

TEST_CASE("traces that never cross 1/e report no decay time") {
  const CoherenceTrace high = synthetic_trace(
      0.5, 100.0, [](double t) { return Complex(0.9 - 1e-4 * t, 0.0); });
  CHECK_FALSE(initial_decay_time(high).has_value());
}

TEST_CASE("trace starting below threshold cannot be fitted") {
  const CoherenceTrace low = synthetic_trace(
      0.5, 10.0, [](double) { return Complex(0.1, 0.0); });
  CHECK_THROWS_AS(initial_decay_time(low), ArgumentError);
}
