// dynamics.hpp — conditional two-branch evolution and coherence metrics.
//
// The central spin starts in an equal superposition of its two s^z
// eigenstates while the environment starts in some |psi0>.  Each branch
// drags the environment with its own conditional Hamiltonian, and the
// off-diagonal element of the central spin's reduced density matrix is
// governed by the overlap of the two environment branches:
//
//   C(t) = <psi_down(t) | psi_up(t)>,   normalized so C(0) = 1.
//
// The physical matrix element is w_up * conj(w_down) * C(t), i.e. C/2
// for equal weights.
#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>

#include <Eigen/Dense>

#include "spinbath/errors.hpp"
#include "spinbath/spectral.hpp"

namespace spinbath {

// Sampled coherence trace on a uniform (or any ascending) time grid.
struct CoherenceTrace {
  Eigen::VectorXd times;
  Eigen::VectorXcd values;
};

// Uniform grid {0, dt, 2 dt, ...} up to and including the last sample
// not beyond t_max (within rounding).
inline Eigen::VectorXd uniform_time_grid(double dt_sample, double t_max) {
  if (dt_sample <= 0.0)
    throw ArgumentError("uniform_time_grid: dt_sample must be positive");
  if (t_max < 0.0) throw ArgumentError("uniform_time_grid: t_max must be >= 0");
  const Eigen::Index count =
      static_cast<Eigen::Index>(std::floor(t_max / dt_sample + 1e-9)) + 1;
  Eigen::VectorXd t(count);
  for (Eigen::Index k = 0; k < count; ++k) t[k] = dt_sample * static_cast<double>(k);
  return t;
}

// Evolve both branches and take their inner product at each sample.
// The eigenbasis projections of psi0 are hoisted out of the time loop;
// per sample this is two phase twists, two basis rotations and one dot.
inline CoherenceTrace coherence_trace(const SpectralDecomposition& up,
                                      const SpectralDecomposition& down,
                                      const StateVector& psi0,
                                      const Eigen::VectorXd& times) {
  if (up.dim() != down.dim() || psi0.size() != up.dim())
    throw ArgumentError("coherence_trace: dimension mismatch");
  const Eigen::VectorXcd a_up = up.eigenvectors.adjoint() * psi0;
  const Eigen::VectorXcd a_down = down.eigenvectors.adjoint() * psi0;
  const Eigen::Index dim = up.dim();

  CoherenceTrace trace;
  trace.times = times;
  trace.values.resize(times.size());
  Eigen::VectorXcd tw_up(dim), tw_down(dim);
  for (Eigen::Index k = 0; k < times.size(); ++k) {
    const double t = times[k];
    for (Eigen::Index n = 0; n < dim; ++n)
      tw_up[n] = a_up[n] * std::polar(1.0, -up.eigenvalues[n] * t);
    for (Eigen::Index n = 0; n < dim; ++n)
      tw_down[n] = a_down[n] * std::polar(1.0, -down.eigenvalues[n] * t);
    const StateVector psi_up = up.eigenvectors * tw_up;
    const StateVector psi_down = down.eigenvectors * tw_down;
    trace.values[k] = psi_down.dot(psi_up);  // <psi_down | psi_up>
  }
  return trace;
}

// Full system-plus-branches state at one instant.
struct CompositeState {
  StateVector up;        // environment branch tied to central s^z = +1/2
  StateVector down;      // environment branch tied to central s^z = -1/2
  Complex weight_up = Complex(1.0 / std::numbers::sqrt2, 0.0);
  Complex weight_down = Complex(1.0 / std::numbers::sqrt2, 0.0);
};

// Trace out the environment: 2x2 reduced density matrix of the central
// spin, ordered (up, down).
inline Eigen::Matrix2cd reduced_density_matrix(const CompositeState& s) {
  if (s.up.size() != s.down.size())
    throw ArgumentError("reduced_density_matrix: branch dimension mismatch");
  Eigen::Matrix2cd rho;
  const Complex overlap = s.down.dot(s.up);  // <down|up>
  rho(0, 0) = std::norm(s.weight_up) * s.up.squaredNorm();
  rho(1, 1) = std::norm(s.weight_down) * s.down.squaredNorm();
  rho(0, 1) = s.weight_up * std::conj(s.weight_down) * overlap;
  rho(1, 0) = std::conj(rho(0, 1));
  return rho;
}

// Mean |C| over a closing time window — how completely the environment
// has suppressed the off-diagonal element, on average, late in the run.
inline double efficiency_of_decoherence(const CoherenceTrace& trace,
                                        double window_start = 200.0,
                                        double window_end = 300.0) {
  if (!(window_end > window_start))
    throw ArgumentError("efficiency_of_decoherence: empty window");
  double sum = 0.0;
  Eigen::Index count = 0;
  for (Eigen::Index k = 0; k < trace.times.size(); ++k) {
    const double t = trace.times[k];
    if (t >= window_start - 1e-9 && t <= window_end + 1e-9) {
      sum += std::abs(trace.values[k]);
      ++count;
    }
  }
  if (count == 0)
    throw ArgumentError("efficiency_of_decoherence: no samples in window");
  return sum / static_cast<double>(count);
}

// Least-squares fit of the initial Gaussian decay ln|C| = -(t/t*)^2.
struct GaussianDecayFit {
  double t_star = 0.0;
  double residual = 0.0;  // RMS residual of ln|C| over the fitted samples
};

// Fits samples from t = 0 up to and including the first drop of |C|
// below 1/e.  Returns nothing when the trace never drops that far (a
// distinct outcome, not a failure); throws when a fit is impossible.
inline std::optional<GaussianDecayFit> initial_decay_time(
    const CoherenceTrace& trace) {
  constexpr double threshold = 0.36787944117144233;  // 1/e
  Eigen::Index last = -1;
  for (Eigen::Index k = 0; k < trace.values.size(); ++k)
    if (std::abs(trace.values[k]) < threshold) { last = k; break; }
  if (last < 0) return std::nullopt;
  if (last < 1)
    throw ArgumentError("initial_decay_time: trace starts below 1/e");

  double st2y = 0.0, st4 = 0.0;
  for (Eigen::Index k = 0; k <= last; ++k) {
    const double t2 = trace.times[k] * trace.times[k];
    const double y = -std::log(std::abs(trace.values[k]));
    st2y += t2 * y;
    st4 += t2 * t2;
  }
  if (st4 <= 0.0 || st2y <= 0.0)
    throw ArgumentError("initial_decay_time: degenerate fit data");
  const double a = st2y / st4;  // model y = a t^2, t* = 1/sqrt(a)

  double ss = 0.0;
  for (Eigen::Index k = 0; k <= last; ++k) {
    const double t2 = trace.times[k] * trace.times[k];
    const double y = -std::log(std::abs(trace.values[k]));
    ss += (y - a * t2) * (y - a * t2);
  }
  GaussianDecayFit fit;
  fit.t_star = 1.0 / std::sqrt(a);
  fit.residual = std::sqrt(ss / static_cast<double>(last + 1));
  return fit;
}

}  // namespace spinbath
