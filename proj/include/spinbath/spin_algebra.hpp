// spin_algebra.hpp — spin-1/2 operators on a labelled product basis.
//
// Basis convention: a basis state is an N-bit integer.  Bit i (site 0 =
// least-significant bit) set means spin i points up, i.e. is in the
// s^z = +1/2 eigenstate.  All operators returned here are expressed in
// that index order: row/column b corresponds to basis integer b.
//
// Matrices are built sparse (triplet form) and densified only where a
// dense algorithm actually needs them.
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "spinbath/errors.hpp"

namespace spinbath {

using Complex = std::complex<double>;
using Triplet = Eigen::Triplet<Complex>;

// Index into the 2^N-dimensional product basis.
using BasisIndex = std::uint64_t;

enum class Axis { x, y, z };

inline const char* axis_name(Axis a) {
  switch (a) {
    case Axis::x: return "x";
    case Axis::y: return "y";
    case Axis::z: return "z";
  }
  return "?";
}

inline bool bit_up(BasisIndex state, int site) {
  return (state >> site) & 1ULL;
}

// s^z eigenvalue of one site in a basis state: +1/2 or -1/2.
inline double z_component(BasisIndex state, int site) {
  return bit_up(state, site) ? 0.5 : -0.5;
}

// Total magnetization sum_i s_i^z of a basis state.
inline double basis_magnetization(BasisIndex state, int n_spins) {
  return static_cast<double>(std::popcount(state)) - 0.5 * n_spins;
}

// A Hermitian operator on the full 2^N-dimensional space.
struct ManyBodyOperator {
  Eigen::SparseMatrix<Complex> entries;

  Eigen::Index dim() const { return entries.rows(); }

  Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(entries); }

  // Largest asymmetry max|A - A^dagger|; algebraically built operators
  // come out exactly Hermitian, so this is 0.0 for anything made here.
  double hermiticity_defect() const {
    Eigen::SparseMatrix<Complex> diff =
        entries - Eigen::SparseMatrix<Complex>(entries.adjoint());
    double worst = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k)
      for (Eigen::SparseMatrix<Complex>::InnerIterator it(diff, k); it; ++it)
        worst = std::max(worst, std::abs(it.value()));
    return worst;
  }
};

namespace detail {

inline void check_site(int site, int n_spins, const char* fn) {
  if (n_spins < 1 || n_spins > 62)
    throw ArgumentError(std::string(fn) + ": n_spins out of range");
  if (site < 0 || site >= n_spins)
    throw ArgumentError(std::string(fn) + ": site " + std::to_string(site) +
                        " outside [0, " + std::to_string(n_spins) + ")");
}

// Action of s^alpha on one site of a basis state.  Returns the image
// basis state; the amplitude is written to `value`.
//
//   s^z |b> = (+-1/2) |b>
//   s^x |b> = (1/2)   |b ^ mask>
//   s^y |b> = (+i/2 if bit set, -i/2 if clear) |b ^ mask>
inline BasisIndex apply_spin(Axis axis, int site, BasisIndex b, Complex& value) {
  const BasisIndex mask = 1ULL << site;
  switch (axis) {
    case Axis::z:
      value = Complex(z_component(b, site), 0.0);
      return b;
    case Axis::x:
      value = Complex(0.5, 0.0);
      return b ^ mask;
    case Axis::y:
      value = bit_up(b, site) ? Complex(0.0, 0.5) : Complex(0.0, -0.5);
      return b ^ mask;
  }
  value = Complex(0.0, 0.0);
  return b;
}

// Append coeff * s_site^axis to a triplet list (one entry per column).
inline void append_single_spin(Axis axis, int site, int n_spins, double coeff,
                               std::vector<Triplet>& out) {
  const BasisIndex dim = 1ULL << n_spins;
  for (BasisIndex b = 0; b < dim; ++b) {
    Complex v;
    const BasisIndex target = apply_spin(axis, site, b, v);
    out.emplace_back(static_cast<int>(target), static_cast<int>(b), coeff * v);
  }
}

// Append coeff * s_i^axis s_j^axis (same axis on two distinct sites).
inline void append_two_spin(Axis axis, int i, int j, int n_spins, double coeff,
                            std::vector<Triplet>& out) {
  const BasisIndex dim = 1ULL << n_spins;
  for (BasisIndex b = 0; b < dim; ++b) {
    Complex vj;
    const BasisIndex mid = apply_spin(axis, j, b, vj);
    Complex vi;
    const BasisIndex target = apply_spin(axis, i, mid, vi);
    out.emplace_back(static_cast<int>(target), static_cast<int>(b),
                     coeff * vi * vj);
  }
}

inline ManyBodyOperator from_triplets(int n_spins, std::vector<Triplet>& trips) {
  const Eigen::Index dim = Eigen::Index(1) << n_spins;
  ManyBodyOperator op;
  op.entries.resize(dim, dim);
  op.entries.setFromTriplets(trips.begin(), trips.end());
  return op;
}

}  // namespace detail

// Operator s_site^axis embedded in the N-spin space.
inline ManyBodyOperator single_spin_operator(Axis axis, int site, int n_spins) {
  detail::check_site(site, n_spins, "single_spin_operator");
  std::vector<Triplet> trips;
  trips.reserve(1ULL << n_spins);
  detail::append_single_spin(axis, site, n_spins, 1.0, trips);
  return detail::from_triplets(n_spins, trips);
}

// Operator s_i^axis s_j^axis for two distinct sites.
inline ManyBodyOperator two_spin_coupling(Axis axis, int i, int j, int n_spins) {
  detail::check_site(i, n_spins, "two_spin_coupling");
  detail::check_site(j, n_spins, "two_spin_coupling");
  if (i == j) throw ArgumentError("two_spin_coupling: sites must differ");
  std::vector<Triplet> trips;
  trips.reserve(1ULL << n_spins);
  detail::append_two_spin(axis, i, j, n_spins, 1.0, trips);
  return detail::from_triplets(n_spins, trips);
}

}  // namespace spinbath
