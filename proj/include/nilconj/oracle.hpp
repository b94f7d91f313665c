#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nilconj/conjugate.hpp"
#include "nilconj/geometry.hpp"

namespace nilconj {

/// Numerical Jacobi-ODE oracle. Works for every geodesic, including the
/// cases without a closed form.

enum class Execution { Serial, Parallel };

/// Boundary map (zeta, vdot(0)) -> (z(t), v(t)) sampled on a uniform grid.
struct Propagator {
  int dim_center = 0;
  int dim_v = 0;
  double step = 0.0;
  std::vector<double> times;
  /// Full first-order state (zeta, z, v, w) per grid time, one column per
  /// basis initial vector.
  std::vector<Mat> state;

  /// (z, v) rows of the state at grid index k.
  [[nodiscard]] Mat matrix(std::size_t k) const;
};

/// Default grid: 256 steps per unit time, at least 100.
int default_steps(double t_max);

/// Classical RK4 with step t_max / steps. The grid extends two steps past
/// t_max so that minima at t_max can be bracketed.
Propagator integrate_propagator(const GeodesicSpec& geo, double t_max, int steps,
                                Execution exec = Execution::Parallel);

/// M(t) at an arbitrary t inside the grid, by one RK4 step from the node below.
Mat propagator_at(const GeodesicSpec& geo, const Propagator& prop, double t);

struct SigmaScan {
  std::vector<double> times;
  std::vector<double> sigma_min;
  std::vector<double> sigma_max;
};

SigmaScan sigma_scan(const Propagator& prop, Execution exec = Execution::Parallel);

void write_sigma_csv(std::ostream& out, const SigmaScan& scan);

struct DetectedTime {
  double t = 0.0;
  int multiplicity = 0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
};

inline constexpr double kOracleRankTol = 1e-6;

std::vector<DetectedTime> detect_conjugate(const GeodesicSpec& geo, double t_max, int steps,
                                           double rank_tol = kOracleRankTol,
                                           Execution exec = Execution::Parallel);

/// Same, reusing an already integrated propagator.
std::vector<DetectedTime> detect_conjugate(const GeodesicSpec& geo, const Propagator& prop, double t_max,
                                           double rank_tol = kOracleRankTol,
                                           Execution exec = Execution::Parallel);

struct ComparisonReport {
  struct Match {
    ConjugateTime closed;
    DetectedTime detected;
  };
  std::vector<Match> matched;
  std::vector<ConjugateTime> missing;
  std::vector<DetectedTime> spurious;
  std::vector<Match> multiplicity_mismatch;

  [[nodiscard]] bool ok() const { return missing.empty() && spurious.empty() && multiplicity_mismatch.empty(); }
};

inline constexpr double kCompareTol = 1e-5;

ComparisonReport compare(const std::vector<ConjugateTime>& closed, const std::vector<DetectedTime>& detected,
                         double dt_tol = kCompareTol);

}  // namespace nilconj

namespace nilconj {

/// A random geodesic on one of the fixtures, restricted to the cases the
/// closed forms cover.
struct RandomCase {
  std::string algebra;
  Vec z0;
  Vec x0;
  double t_max = 10.0;
};

/// Deterministic for a given seed. Components have magnitude in [0.3, 1].
std::vector<RandomCase> random_cases(int count, std::uint64_t seed);

}  // namespace nilconj
