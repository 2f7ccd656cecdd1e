// model.hpp — the central-spin model: parameters, disorder draws, and
// Hamiltonian construction.
//
// A two-level central system couples longitudinally to N environment
// spins; the environment carries competing interactions tuned by a
// frustration parameter kappa in [0, 1]:
//
//   H_env = -gamma * sum_{i<j} [ (1-kappa) s_i^z s_j^z
//                                + kappa * sum_a w_ij^a s_i^a s_j^a ]
//           - eps_sb * s_0^z  -  h_ext * sum_i s_i^z
//
// kappa = 0 is a uniform Ising ferromagnet, kappa = 1 a fully random
// all-to-all glass.  The central spin in s^z eigenstate sigma adds
//
//   H_cond(sigma) = H_env + (1/2) sum_i delta_i (sigma - 1/2) s_i^z,
//
// which vanishes for sigma = +1/2 (the uncoupled branch) and reduces to
// -(1/2) sum_i delta_i s_i^z for sigma = -1/2 (the coupled branch).
//
// Disorder: delta_i uniform in [-delta, delta], w_ij^a uniform in
// [-omega, omega].  Draws are width-scaled unit draws, so two parameter
// sets differing only in the widths share the same disorder shape when
// given the same seed.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spinbath/errors.hpp"
#include "spinbath/rng.hpp"
#include "spinbath/spin_algebra.hpp"

namespace spinbath {

// Largest environment handled by dense diagonalization.
inline constexpr int kMaxSpins = 14;

struct ModelParams {
  int n_spins = 0;          // N, number of environment spins
  double kappa = 0.0;       // frustration mix, 0 = ferromagnet .. 1 = glass
  double delta = 0.0;       // half-width of central-spin couplings delta_i
  double omega = 1.0;       // half-width of random intra-bath couplings
  double gamma = 1.0;       // overall environment energy scale
  double eps_sb = 1e-3;     // symmetry-breaking z field on site 0
  double h_ext = 0.0;       // uniform external z field
  std::uint64_t seed = 0;   // disorder seed
  bool isotropic_omega = false;  // one draw per pair instead of per axis
};

// Throws ArgumentError / CapacityError if the parameters are unusable.
inline void validate(const ModelParams& p) {
  if (p.n_spins < 1) throw ArgumentError("ModelParams: n_spins must be >= 1");
  if (p.n_spins > kMaxSpins)
    throw CapacityError("ModelParams: n_spins " + std::to_string(p.n_spins) +
                        " exceeds dense-diagonalization cap " +
                        std::to_string(kMaxSpins));
  if (!(p.kappa >= 0.0 && p.kappa <= 1.0))
    throw ArgumentError("ModelParams: kappa must lie in [0, 1]");
  if (p.delta < 0.0) throw ArgumentError("ModelParams: delta must be >= 0");
  if (p.omega < 0.0) throw ArgumentError("ModelParams: omega must be >= 0");
}

// One disorder realization.  omega_pair_axis holds N(N-1)/2 * 3 values
// ordered by (i, j, axis), pairs i < j lexicographic, axes x, y, z.
struct CouplingRealization {
  std::vector<double> delta_i;
  std::vector<double> omega_pair_axis;

  static std::size_t pair_index(int i, int j, int n_spins) {
    // flat index of (i, j), i < j, in lexicographic order
    std::size_t skipped = std::size_t(i) * n_spins - std::size_t(i) * (i + 1) / 2;
    return skipped + std::size_t(j - i - 1);
  }

  double omega(int i, int j, Axis axis, int n_spins) const {
    return omega_pair_axis[3 * pair_index(i, j, n_spins) + static_cast<int>(axis)];
  }
};

/// Draw a realization.  Fixed draw order (the reproducibility contract):
// first delta_i for sites 0..N-1, then the pair couplings by (i, j, axis).
// In isotropic mode one value per pair is drawn, again (i, j) ordered,
// and reused for all three axes.
inline CouplingRealization draw_couplings(const ModelParams& p) {
  validate(p);
  Rng rng(splitmix64(p.seed));
  CouplingRealization r;
  r.delta_i.reserve(p.n_spins);
  for (int i = 0; i < p.n_spins; ++i) r.delta_i.push_back(rng.symmetric(p.delta));
  const std::size_t n_pairs = std::size_t(p.n_spins) * (p.n_spins - 1) / 2;
  r.omega_pair_axis.reserve(3 * n_pairs);
  for (int i = 0; i < p.n_spins; ++i)
    for (int j = i + 1; j < p.n_spins; ++j) {
      if (p.isotropic_omega) {
        const double w = rng.symmetric(p.omega);
        r.omega_pair_axis.insert(r.omega_pair_axis.end(), {w, w, w});
      } else {
        for (int a = 0; a < 3; ++a)
          r.omega_pair_axis.push_back(rng.symmetric(p.omega));
      }
    }
  return r;
}

// Which conditional evolution a central-spin eigenstate generates.
struct Branch {
  enum class Label { coupled, uncoupled };
  Label label;
  double sz;  // central-spin s^z eigenvalue, +-1/2

  static Branch coupled() { return {Label::coupled, -0.5}; }
  static Branch uncoupled() { return {Label::uncoupled, +0.5}; }
};

namespace detail {

inline void check_realization(const ModelParams& p, const CouplingRealization& r,
                              const char* fn) {
  const std::size_t n_pairs = std::size_t(p.n_spins) * (p.n_spins - 1) / 2;
  if (r.delta_i.size() != std::size_t(p.n_spins) ||
      r.omega_pair_axis.size() != 3 * n_pairs)
    throw ArgumentError(std::string(fn) + ": realization size does not match n_spins");
}

// Shared triplet assembly for H_env; the conditional Hamiltonian adds
// its branch term on top of the same list before finalizing.
inline void append_environment_terms(const ModelParams& p,
                                     const CouplingRealization& r,
                                     std::vector<Triplet>& trips) {
  constexpr Axis axes[3] = {Axis::x, Axis::y, Axis::z};
  for (int i = 0; i < p.n_spins; ++i)
    for (int j = i + 1; j < p.n_spins; ++j) {
      const double ising = -p.gamma * (1.0 - p.kappa);
      if (ising != 0.0) append_two_spin(Axis::z, i, j, p.n_spins, ising, trips);
      if (p.kappa != 0.0)
        for (Axis a : axes) {
          const double c = -p.gamma * p.kappa * r.omega(i, j, a, p.n_spins);
          if (c != 0.0) append_two_spin(a, i, j, p.n_spins, c, trips);
        }
    }
  if (p.eps_sb != 0.0)
    append_single_spin(Axis::z, 0, p.n_spins, -p.eps_sb, trips);
  if (p.h_ext != 0.0)
    for (int i = 0; i < p.n_spins; ++i)
      append_single_spin(Axis::z, i, p.n_spins, -p.h_ext, trips);
}

}  // namespace detail

// Environment Hamiltonian H_env alone (what the uncoupled branch sees).
inline ManyBodyOperator build_environment_hamiltonian(const ModelParams& p,
                                                      const CouplingRealization& r) {
  validate(p);
  detail::check_realization(p, r, "build_environment_hamiltonian");
  std::vector<Triplet> trips;
  detail::append_environment_terms(p, r, trips);
  return detail::from_triplets(p.n_spins, trips);
}

// Conditional Hamiltonian H_env + (1/2) sum_i delta_i (sz - 1/2) s_i^z.
// The uncoupled branch (sz = +1/2) reproduces H_env entry for entry.
inline ManyBodyOperator build_conditional_hamiltonian(const ModelParams& p,
                                                      const CouplingRealization& r,
                                                      Branch branch) {
  validate(p);
  detail::check_realization(p, r, "build_conditional_hamiltonian");
  std::vector<Triplet> trips;
  detail::append_environment_terms(p, r, trips);
  const double factor = 0.5 * (branch.sz - 0.5);
  if (factor != 0.0)
    for (int i = 0; i < p.n_spins; ++i)
      if (r.delta_i[i] != 0.0)
        detail::append_single_spin(Axis::z, i, p.n_spins, factor * r.delta_i[i],
                                   trips);
  return detail::from_triplets(p.n_spins, trips);
}

}  // namespace spinbath
