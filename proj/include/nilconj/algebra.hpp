#pragma once

#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "nilconj/linalg.hpp"

namespace nilconj {

/// Element of n = z (+) v, split into its center and complement parts.
struct AlgebraElement {
  Vec z;
  Vec v;

  static AlgebraElement zero(int dim_center, int dim_v) {
    return {Vec::Zero(dim_center), Vec::Zero(dim_v)};
  }

  AlgebraElement& operator+=(const AlgebraElement& o) {
    z += o.z;
    v += o.v;
    return *this;
  }
  AlgebraElement& operator-=(const AlgebraElement& o) {
    z -= o.z;
    v -= o.v;
    return *this;
  }
  AlgebraElement& operator*=(double s) {
    z *= s;
    v *= s;
    return *this;
  }
  friend AlgebraElement operator+(AlgebraElement a, const AlgebraElement& b) { return a += b; }
  friend AlgebraElement operator-(AlgebraElement a, const AlgebraElement& b) { return a -= b; }
  friend AlgebraElement operator*(double s, AlgebraElement a) { return a *= s; }

  /// Max-abs over both parts.
  [[nodiscard]] double max_abs() const;
  [[nodiscard]] Vec stacked() const;
};

enum class CausalType { Timelike, Null, Spacelike };

/// A 2-step nilpotent Lie algebra n = z (+) v with a nondegenerate,
/// block-diagonal inner product. Basis order everywhere is z_1..z_p then
/// e_1..e_q. Brackets are stored as one antisymmetric q x q matrix per
/// center direction: [e_a, e_b] = sum_alpha C[alpha](a, b) z_alpha.
///
/// Immutable after construction; the constructor validates every invariant.
class MetricLieAlgebra {
 public:
  MetricLieAlgebra(std::string name, Mat gram, std::vector<Mat> structure);

  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] int dim_center() const { return dim_center_; }
  [[nodiscard]] int dim_v() const { return dim_v_; }
  [[nodiscard]] int dim() const { return dim_center_ + dim_v_; }

  [[nodiscard]] const Mat& gram() const { return gram_; }
  [[nodiscard]] const Mat& gram_center() const { return gram_z_; }
  [[nodiscard]] const Mat& gram_v() const { return gram_v_; }
  [[nodiscard]] const std::vector<Mat>& structure() const { return structure_; }

  /// gram_v^{-1}, cached so J_z is a single product.
  [[nodiscard]] const Mat& gram_v_inverse() const { return gram_v_inv_; }

 private:
  std::string name_;
  int dim_center_;
  int dim_v_;
  Mat gram_;
  Mat gram_z_;
  Mat gram_v_;
  Mat gram_v_inv_;
  std::vector<Mat> structure_;
};

/// Parses an algebra-spec JSON document and validates it.
MetricLieAlgebra load_algebra(std::string_view document);

/// Built-in fixture by name: heis3, pheis3, heis5w, bicenter.
MetricLieAlgebra fixture(std::string_view name);
std::vector<std::string> fixture_names();

/// Fixture name if it is one, otherwise reads the file at `name_or_path`.
MetricLieAlgebra resolve_algebra(const std::string& name_or_path);

/// Inverse of load_algebra: emits the algebra-spec JSON document.
std::string serialize(const MetricLieAlgebra& alg);

/// Random algebra with diagonal +-1 gram. `negative_center` and
/// `negative_v` count the -1 entries in each block.
MetricLieAlgebra random_algebra(int dim_center, int dim_v, std::mt19937_64& rng,
                                int negative_center = 0, int negative_v = 0);

/// [x, y]; the result is always central.
AlgebraElement bracket(const MetricLieAlgebra& alg, const AlgebraElement& x,
                       const AlgebraElement& y);
/// [x, y] for x, y in v, as a center vector.
Vec bracket_v(const MetricLieAlgebra& alg, const Vec& x, const Vec& y);

double inner(const MetricLieAlgebra& alg, const AlgebraElement& u, const AlgebraElement& w);
double inner_center(const MetricLieAlgebra& alg, const Vec& z, const Vec& w);
double inner_v(const MetricLieAlgebra& alg, const Vec& x, const Vec& y);
CausalType causal_type(const MetricLieAlgebra& alg, const AlgebraElement& u,
                       double tol = 1e-14);

/// Matrix of J_z on the v basis: <J_z x, y> = <z, [x, y]>.
Mat j_map(const MetricLieAlgebra& alg, const Vec& z);

/// Basis vector helpers.
Vec unit(int n, int i);

}  // namespace nilconj
