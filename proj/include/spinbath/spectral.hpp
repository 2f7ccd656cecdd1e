// spectral.hpp — eigendecomposition and time evolution.
//
// Two independent evolution routes live here on purpose.  The spectral
// route (eigendecompose + evolve_state) is the production path; the
// fixed-step integrator (propagate_oracle) exists so tests can check
// the spectral route against something that never touches an
// eigensolver.  Do not "optimize" one in terms of the other.
#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "spinbath/errors.hpp"
#include "spinbath/spin_algebra.hpp"

namespace spinbath {

using StateVector = Eigen::VectorXcd;

// Eigensystem of a Hermitian operator.  Eigenvalues ascend; eigenvector
// n sits in column n.  residual_bound is the largest ||H v - E v|| over
// all columns, measured with the sparse operator after any gauge fixing.
struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXcd eigenvectors;
  double residual_bound = 0.0;

  Eigen::Index dim() const { return eigenvalues.size(); }
};

// Gershgorin bound on the spectral radius, cheap and safe for step-size
// selection.
inline double spectral_norm_bound(const ManyBodyOperator& op) {
  const Eigen::Index dim = op.dim();
  Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(dim);
  for (int k = 0; k < op.entries.outerSize(); ++k)
    for (Eigen::SparseMatrix<Complex>::InnerIterator it(op.entries, k); it; ++it)
      row_sums[it.row()] += std::abs(it.value());
  return dim == 0 ? 0.0 : row_sums.maxCoeff();
}

namespace detail {

// Deterministic gauge for eigenvector columns.
//
// Within each cluster of (numerically) degenerate eigenvalues the solver
// returns an arbitrary orthonormal basis of the eigenspace.  We replace
// it by a reproducible one: project the computational basis vectors
// e_0, e_1, ... onto the cluster subspace in index order and keep each
// projection that is linearly independent of what was already accepted
// (modified Gram-Schmidt).  Isolated eigenvectors just get their phase
// pinned: the largest-magnitude component is made real and positive.
inline void fix_gauge(Eigen::VectorXd& evals, Eigen::MatrixXcd& vecs) {
  const Eigen::Index dim = evals.size();
  if (dim == 0) return;
  const double range = evals[dim - 1] - evals[0];
  const double cluster_tol = 1e-12 * std::max(1.0, range);

  Eigen::Index lo = 0;
  while (lo < dim) {
    Eigen::Index hi = lo + 1;
    while (hi < dim && evals[hi] - evals[hi - 1] <= cluster_tol) ++hi;
    const Eigen::Index width = hi - lo;
    if (width > 1) {
      auto block = vecs.middleCols(lo, width);
      Eigen::MatrixXcd fixed(dim, width);
      Eigen::Index accepted = 0;
      for (Eigen::Index j = 0; j < dim && accepted < width; ++j) {
        // projection of e_j onto the cluster subspace
        Eigen::VectorXcd v = block * block.adjoint().col(j);
        for (int pass = 0; pass < 2; ++pass)  // MGS, twice for stability
          for (Eigen::Index k = 0; k < accepted; ++k)
            v -= fixed.col(k).dot(v) * fixed.col(k);
        const double norm = v.norm();
        if (norm > 1e-8) fixed.col(accepted++) = v / norm;
      }
      // Numerically the scan above always completes; keep the original
      // columns (orthonormalized against what was accepted) as a safety
      // net so the result stays an orthonormal basis no matter what.
      for (Eigen::Index c = 0; accepted < width && c < width; ++c) {
        Eigen::VectorXcd v = block.col(c);
        for (int pass = 0; pass < 2; ++pass)
          for (Eigen::Index k = 0; k < accepted; ++k)
            v -= fixed.col(k).dot(v) * fixed.col(k);
        const double norm = v.norm();
        if (norm > 1e-8) fixed.col(accepted++) = v / norm;
      }
      block = fixed;
    }
    // phase convention, applied to every column including cluster ones
    for (Eigen::Index c = lo; c < hi; ++c) {
      Eigen::Index imax = 0;
      double best = 0.0;
      for (Eigen::Index r = 0; r < dim; ++r) {
        const double mag = std::abs(vecs(r, c));
        if (mag > best) { best = mag; imax = r; }
      }
      if (best > 0.0) {
        const Complex phase = std::conj(vecs(imax, c)) / best;
        vecs.col(c) *= phase;
      }
    }
    lo = hi;
  }
}

}  // namespace detail

// Dense eigendecomposition of a Hermitian operator with a deterministic
// gauge.  Throws ContractError when the input is measurably non-Hermitian.
inline SpectralDecomposition eigendecompose(const ManyBodyOperator& op) {
  const Eigen::Index dim = op.dim();
  if (dim == 0) throw ArgumentError("eigendecompose: empty operator");
  Eigen::MatrixXcd dense = op.dense();
  const double scale = std::max(1.0, dense.cwiseAbs().maxCoeff());
  const double defect = (dense - dense.adjoint()).cwiseAbs().maxCoeff();
  if (defect > 1e-10 * scale)
    throw ContractError("eigendecompose: input operator is not Hermitian");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(dense);
  if (solver.info() != Eigen::Success)
    throw ContractError("eigendecompose: eigensolver failed to converge");

  SpectralDecomposition decomp;
  decomp.eigenvalues = solver.eigenvalues();
  decomp.eigenvectors = solver.eigenvectors();
  detail::fix_gauge(decomp.eigenvalues, decomp.eigenvectors);

  // residual against the sparse operator (cheaper than dense GEMM)
  Eigen::MatrixXcd hv = op.entries * decomp.eigenvectors;
  hv.noalias() -= decomp.eigenvectors * decomp.eigenvalues.asDiagonal();
  decomp.residual_bound = hv.colwise().norm().maxCoeff();
  return decomp;
}

// Spectral propagation: psi(t) = sum_n e^{-i E_n t} <n|psi0> |n>.
inline StateVector evolve_state(const SpectralDecomposition& decomp,
                                const StateVector& psi0, double t) {
  if (psi0.size() != decomp.dim())
    throw ArgumentError("evolve_state: state dimension mismatch");
  Eigen::VectorXcd coeffs = decomp.eigenvectors.adjoint() * psi0;
  for (Eigen::Index n = 0; n < coeffs.size(); ++n)
    coeffs[n] *= std::polar(1.0, -decomp.eigenvalues[n] * t);
  return decomp.eigenvectors * coeffs;
}

// Step size for the integrator below: keeps ||H|| dt under `stability`
// and the documented O(t ||H||^5 dt^4 / 120) phase-error bound under
// `target_error`.
inline double oracle_default_dt(const ManyBodyOperator& op, double t_final,
                                double target_error = 1e-8,
                                double stability = 0.05) {
  const double norm = std::max(spectral_norm_bound(op), 1e-12);
  const double dt_stab = stability / norm;
  const double dt_err = std::pow(
      120.0 * target_error / (std::max(t_final, 1e-12) * std::pow(norm, 5)),
      0.25);
  return std::min(dt_stab, dt_err);
}

// Independent evolution oracle: classic 4th-order Runge-Kutta on
// i d/dt psi = H psi with a fixed step.  Global error is O(dt^4 * t).
// Test-only by design — kept free of any eigensolver machinery.
inline StateVector propagate_oracle(const ManyBodyOperator& op,
                                    const StateVector& psi0, double t,
                                    double dt) {
  if (psi0.size() != op.dim())
    throw ArgumentError("propagate_oracle: state dimension mismatch");
  if (dt <= 0.0) throw ArgumentError("propagate_oracle: dt must be positive");
  const Complex mi(0.0, -1.0);
  auto rhs = [&](const StateVector& v) { return (mi * (op.entries * v)).eval(); };

  StateVector psi = psi0;
  const long long steps = static_cast<long long>(std::ceil(t / dt - 1e-12));
  for (long long s = 0; s < steps; ++s) {
    const double h = (s == steps - 1) ? t - dt * static_cast<double>(s) : dt;
    StateVector k1 = rhs(psi);
    StateVector k2 = rhs(psi + (0.5 * h) * k1);
    StateVector k3 = rhs(psi + (0.5 * h) * k2);
    StateVector k4 = rhs(psi + h * k3);
    psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return psi;
}

}  // namespace spinbath
