#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "nilconj/geometry.hpp"
#include "nilconj/spectral.hpp"

namespace nilconj {

/// t in (0, t_max], with a small relative slack so that both the closed
/// forms and the oracle agree on times that sit exactly at t_max.
inline bool in_time_range(double t, double t_max) { return t > 0.0 && t <= t_max * (1.0 + 1e-8); }

enum class Branch { None, Polynomial, Lattice, Transcendental };
std::string_view to_string(Branch b);

struct ConjugateTime {
  double t = 0.0;
  int multiplicity = 0;
  Branch branch = Branch::None;
  bool tangent = false;  ///< transcendental double root (g - <gdot,gdot> touches zero)
  std::optional<JacobiField> certificate;
};

/// Knobs of the closed-form solvers. Defaults are the documented constants.
struct ConjugateOptions {
  double merge_tol = 1e-9;        ///< relative; coincident lattice times merge
  double equality_tol = 1e-8;     ///< <Jx0, v> == <gdot, gdot> test, relative
  double bisection_tol = 1e-12;   ///< absolute on t
  double tangent_tol = 1e-10;     ///< |g - <gdot,gdot>| accepted as a double root
  bool attach_witnesses = false;
  double witness_step = 1e-3;
};

/// All conjugate times in (0, t_max], sorted, dispatched on (J, x0, dim z).
/// Throws UnsupportedCase for J != 0, x0 != 0, dim z > 1.
std::vector<ConjugateTime> conjugate_times(const GeodesicSpec& geo, double t_max,
                                           const ConjugateOptions& opts = {});

/// J = 0, x0 != 0: t = sqrt(-12 / mu) over negative eigenvalues mu of A.
std::vector<ConjugateTime> polynomial_times(const GeodesicSpec& geo, double t_max,
                                            const ConjugateOptions& opts = {});

/// dim z = 1, z0 = 0: the scalar criterion -12/t^2 = eps <J_z x0, J_z x0>
/// with z a unit central vector. Empty or a single time.
std::vector<ConjugateTime> polynomial_times_scalar(const GeodesicSpec& geo, double t_max);

/// x0 = 0, J != 0: t = 2 pi n / lambda_k with summed multiplicities.
std::vector<ConjugateTime> lattice_times(const GeodesicSpec& geo, double t_max,
                                         const ConjugateOptions& opts = {});

/// g(t) = t <J x0, (e^{-tJ} - I)^{-1} x0>, through a preimage solve.
/// PoleError at lattice t where x0 misses the image; NotInImage off it.
double transcendental_g(const GeodesicSpec& geo, double t);

/// Decomposition of x0 into J^2 eigenspaces, used by the cot/coth form.
struct CotCothForm {
  std::vector<double> cot_lambda, cot_weight;    ///< lambda_k, <A_k, A_k>
  std::vector<double> coth_lambda, coth_weight;  ///< lambda_l, <B_l, B_l>

  [[nodiscard]] double value(double t) const;
  [[nodiscard]] double derivative(double t) const;
};

/// Requires a diagonalizable, nonsingular J^2 (NotDiagonalizable otherwise).
CotCothForm cot_coth_form(const GeodesicSpec& geo);
CotCothForm cot_coth_form(const MetricLieAlgebra& alg, const Mat& j, const Spectrum& spec, const Vec& x0);

/// dim z = 1, z0 != 0, x0 != 0.
std::vector<ConjugateTime> mixed_times(const GeodesicSpec& geo, double t_max,
                                       const ConjugateOptions& opts = {});

/// Explicit Jacobi field vanishing at 0 and ct.t, in the moving frame.
struct Witness {
  Vec zeta;
  FieldFunction field;
};
Witness jacobi_witness(const GeodesicSpec& geo, const ConjugateTime& ct);

/// Samples jacobi_witness on [0, ct.t] (padded for centered stencils).
JacobiField build_jacobi_field(const GeodesicSpec& geo, const ConjugateTime& ct, double step = 1e-3);

}  // namespace nilconj
