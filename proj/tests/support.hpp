#pragma once

#include <random>
#include <string>
#include <vector>

#include "nilconj/algebra.hpp"
#include "nilconj/geometry.hpp"
#include "nilconj/linalg.hpp"

namespace nilconj::testing {

inline Vec random_vec(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vec v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

inline AlgebraElement random_element(const MetricLieAlgebra& alg, std::mt19937_64& rng) {
  return {random_vec(alg.dim_center(), rng), random_vec(alg.dim_v(), rng)};
}

inline double max_diff(const AlgebraElement& a, const AlgebraElement& b) { return (a - b).max_abs(); }

/// Least-squares solvability of e v = b, with singular values below
/// tol * scale treated as zero.
inline bool least_squares_solvable(const Mat& e, const Vec& b, double scale, double tol = 1e-8) {
  Eigen::JacobiSVD<Mat> svd(e, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  Vec c = svd.matrixU().transpose() * b;
  for (Eigen::Index i = 0; i < s.size(); ++i) c(i) = s(i) > tol * scale ? c(i) / s(i) : 0.0;
  const Vec v = svd.matrixV() * c.head(s.size());
  return (e * v - b).norm() <= tol * (1.0 + b.norm());
}

/// The four fixtures plus a few random algebras of mixed signature.
inline std::vector<MetricLieAlgebra> test_algebras() {
  std::vector<MetricLieAlgebra> out;
  for (const auto& n : fixture_names()) out.push_back(fixture(n));
  std::mt19937_64 rng(2024);
  out.push_back(random_algebra(2, 4, rng, 1, 1));
  out.push_back(random_algebra(3, 5, rng, 0, 2));
  out.push_back(random_algebra(1, 6, rng, 1, 3));
  return out;
}

}  // namespace nilconj::testing
