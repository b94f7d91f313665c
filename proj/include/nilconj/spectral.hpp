#pragma once

#include <complex>
#include <vector>

#include "nilconj/algebra.hpp"

namespace nilconj {

/// Relative tolerance used to cluster eigenvalues of J and J^2.
inline constexpr double kClusterTol = 1e-8;
/// Tolerance of the "is an integer multiple" test on spectral ratios.
inline constexpr double kRationalTol = 1e-9;

/// One eigenvalue of J^2 (as -lambda^2 or +lambda^2) with its plain
/// eigenspace.
struct EigenBlock {
  double lambda = 0.0;     ///< > 0
  int mult = 0;            ///< dim ker(J^2 -+ lambda^2 I)
  int algebraic_mult = 0;  ///< number of eigenvalues of J that square to it
  Mat basis;               ///< dim_v x mult, orthonormal columns
};

struct Spectrum {
  int dim = 0;
  std::vector<EigenBlock> neg;  ///< eigenvalues -lambda^2 of J^2, ascending lambda
  std::vector<EigenBlock> pos;  ///< eigenvalues +lambda^2 of J^2, ascending lambda
  int zero_mult = 0;            ///< dim of the generalized null space of J
  int zero_plain = 0;           ///< dim ker J^2
  int complex_dim = 0;          ///< eigenvalues of J off both axes
  std::vector<std::complex<double>> complex_eigenvalues;  ///< of J^2; diagnostics only
  bool diagonalizable = false;  ///< J^2 has a full eigenbasis

  [[nodiscard]] double lambda_max() const;
};

Spectrum spectrum(const Mat& j);

/// True when b / a is within kRationalTol of a positive integer.
bool is_positive_multiple(double a, double b);

/// Indices of the `neg` blocks with t * lambda in 2 pi Z*.
std::vector<std::size_t> lattice_blocks(const Spectrum& spec, double t);

/// Sum of mult over lattice_blocks(spec, t).
int lattice_sum(const Spectrum& spec, double t);

/// Basis of the direct sum of ker(J^2 + lambda^2 I) over lambda with
/// t * lambda in 2 pi Z*; zero columns when there is none.
Mat lattice_kernel(const Spectrum& spec, double t);
Mat lattice_kernel(const Mat& j, double t);

struct ImageMembership {
  bool is_member = false;
  Vec preimage;          ///< v with (e^{-tJ} - I) v = t x, when is_member
  double overlap = 0.0;  ///< max |<x, w>| over the unit kernel basis
  double residual = 0.0; ///< ||(e^{-tJ} - I) v - t x||
};

/// Decides x in im(e^{-tJ} - I) by <x, w> = 0 for all w in
/// ker(e^{-tJ} - I), with <,> given by gram_v.
ImageMembership image_membership(const Mat& j, double t, const Vec& x, const Mat& gram_v,
                                 double tol = 1e-8);

struct RealEigen {
  double value = 0.0;
  int mult = 0;
  Mat basis;
};

/// A : z -> [x0, J_z x0] on the center, with its negative real spectrum.
struct AOperator {
  Mat matrix;
  std::vector<RealEigen> negative;  ///< ascending
};

AOperator a_operator(const MetricLieAlgebra& alg, const Vec& x0);

}  // namespace nilconj
