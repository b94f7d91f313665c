#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nilconj/algebra.hpp"
#include "nilconj/geometry.hpp"

namespace nilconj {

struct LocusSample {
  Vec x0;
  double a = 0.0;
  double t = 0.0;
  AlgebraElement point;  ///< exponential coordinates of the conjugate point
  double delta = 0.0;
};

/// Unit central vector and its sign for a one-dimensional center.
struct CenterLine {
  Vec z;
  double epsilon = 1.0;
};

CenterLine center_line(const MetricLieAlgebra& alg);

/// Delta(x0) from the J_z^2 eigen-decomposition of x0; nullopt when
/// Delta^2 <= 0 (no conjugate point on the horizontal geodesic).
std::optional<double> delta(const MetricLieAlgebra& alg, const Vec& x0);

enum class ZPath { Auto, Delta, Polynomial };

/// Conjugate points reached along horizontal geodesics (z0 = 0) in the given
/// directions. Directions without a conjugate time are skipped.
std::vector<LocusSample> sample_Z(const MetricLieAlgebra& alg, const std::vector<Vec>& directions,
                                  ZPath path = ZPath::Auto);

/// x0 rescaled so that <x0, x0> is +-1 (or left alone when null).
Vec normalize_direction(const MetricLieAlgebra& alg, const Vec& x0);

/// The family gamma_a through the horizontal geodesic in direction x0.
/// x0 must already be normalized.
struct FamilyMember {
  Vec z0;
  Vec x0;
  double speed = 0.0;
};

FamilyMember family_member(const MetricLieAlgebra& alg, const Vec& x0, double a);

struct ContinuationOptions {
  double a_max = 0.5;
  double tol = 1e-12;
};

/// Tracks the conjugate time t(a) through the family, starting from
/// 2 sqrt(3) / Delta at a = 0. x0 is normalized first.
std::vector<LocusSample> continuation(const MetricLieAlgebra& alg, const Vec& x0, const std::vector<double>& a_grid,
                                      const ContinuationOptions& opts = {});

enum class ExportFormat { Csv, Obj };

void write_samples_csv(std::ostream& out, const std::vector<LocusSample>& samples);
std::vector<LocusSample> read_samples_csv(std::istream& in, int dim_center, int dim_v);
void write_samples_obj(std::ostream& out, const std::vector<LocusSample>& samples);
void export_samples(const std::vector<LocusSample>& samples, const std::string& path, ExportFormat format);

/// Deterministic set of unit directions in R^q: a circle for q = 2, a
/// Fibonacci sphere for q = 3, seeded Gaussian draws otherwise.
std::vector<Vec> direction_grid(int q, int count, std::uint64_t seed = 0);

}  // namespace nilconj
