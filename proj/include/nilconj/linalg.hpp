#pragma once

#include <Eigen/Dense>

namespace nilconj {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Rank threshold shared by every kernel/rank decision: singular values at
/// or below kRankTol * sigma_max count as zero.
inline constexpr double kRankTol = 1e-10;

/// e^A by Pade-13 scaling and squaring.
Mat expm(const Mat& a);

/// \int_0^t e^{sA} ds, evaluated as the top-right block of
/// exp(t [[A, I], [0, 0]]). Valid for singular A.
Mat integrated_expm(const Mat& a, double t);

/// Orthonormal (Euclidean) basis of ker A, one column per kernel vector.
Mat null_space(const Mat& a, double rel_tol = kRankTol, double reference = 0.0);

/// Orthonormal basis of the column space of A.
Mat column_space(const Mat& a, double rel_tol = kRankTol);

int numerical_rank(const Mat& a, double rel_tol = kRankTol);

/// Spectral-norm distance between the orthogonal projectors onto span(U)
/// and span(V); 0 iff the spans coincide. Either may have zero columns.
double subspace_distance(const Mat& u, const Mat& v);

/// Smallest and largest singular values.
struct SingularRange {
  double min = 0.0;
  double max = 0.0;
};
SingularRange singular_range(const Mat& a);

}  // namespace nilconj
