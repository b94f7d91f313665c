#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "nilconj/algebra.hpp"

namespace nilconj {

/// Geodesic through the identity with initial velocity z0 + x0. Caches
/// J = J_{z0} and the (constant) speed <gdot, gdot>.
class GeodesicSpec {
 public:
  GeodesicSpec(MetricLieAlgebra alg, Vec z0, Vec x0);

  [[nodiscard]] const MetricLieAlgebra& algebra() const { return alg_; }
  [[nodiscard]] const Vec& z0() const { return z0_; }
  [[nodiscard]] const Vec& x0() const { return x0_; }
  [[nodiscard]] const Mat& J() const { return j_; }
  [[nodiscard]] double speed() const { return speed_; }

  /// e^{tJ}
  [[nodiscard]] Mat rotation(double t) const;
  /// x'(t) = e^{tJ} x0
  [[nodiscard]] Vec horizontal_velocity(double t) const;

 private:
  MetricLieAlgebra alg_;
  Vec z0_;
  Vec x0_;
  Mat j_;
  double speed_;
};

/// Levi-Civita connection on left-invariant fields.
AlgebraElement connection(const MetricLieAlgebra& alg, const AlgebraElement& u, const AlgebraElement& w);

/// R(x, y) w from the closed-form tables, extended trilinearly.
AlgebraElement curvature(const MetricLieAlgebra& alg, const AlgebraElement& x,
                         const AlgebraElement& y, const AlgebraElement& w);

/// R(y, gdot(t)) gdot(t) via the closed form along the geodesic.
AlgebraElement jacobi_operator(const GeodesicSpec& geo, double t, const AlgebraElement& y);

/// Left-trivialized velocity z0 + e^{tJ} x0.
AlgebraElement geodesic_velocity(const GeodesicSpec& geo, double t);

/// Exponential coordinates (Z(t), X(t)) of gamma(t).
AlgebraElement geodesic_point(const GeodesicSpec& geo, double t, double abs_tol = 1e-10);

/// A field along the geodesic in the moving frame Y(t) = z(t) + e^{tJ} v(t).
struct FrameValue {
  Vec z;
  Vec v;
};
using FieldFunction = std::function<FrameValue(double)>;

struct FieldSample {
  double t;
  Vec z;
  Vec v;
};

struct JacobiField {
  Vec zeta;
  std::vector<FieldSample> samples;

  /// Sample index closest to t.
  [[nodiscard]] std::size_t nearest(double t) const;
};

/// Samples `f` on a uniform grid covering [t0, t1] with spacing at most
/// `step`, padded by `padding` extra nodes on each side so centered
/// stencils reach the ends. Grid nodes land exactly on t0 and t1.
JacobiField sample_field(const FieldFunction& f, const Vec& zeta, double t0, double t1,
                         double step = 1e-3, int padding = 2);

/// Y(t) = z(t) + e^{tJ} v(t) as an algebra element.
AlgebraElement frame_to_element(const GeodesicSpec& geo, double t, const FrameValue& y);

struct YjResidual {
  Vec z;  ///< zdot - [e^{tJ} v, x'] - zeta
  Vec v;  ///< e^{tJ} vddot + e^{tJ} J vdot - J_zeta x'
  [[nodiscard]] double max_abs() const;
};

/// Residual of the reformulated Jacobi system at the sample nearest t,
/// using centered 4th-order finite differences on the field's samples.
YjResidual yj_residual(const GeodesicSpec& geo, const JacobiField& field, double t);

/// Same residual, differentiating an analytic field with step h.
YjResidual yj_residual(const GeodesicSpec& geo, const FieldFunction& f, const Vec& zeta, double t,
                       double h = 1e-3);

/// nabla^2_gdot Y + R_gdot Y at t, computed numerically in the
/// left-invariant frame: nabla_gdot c = cdot + connection(gdot, c).
AlgebraElement jacobi_defect(const GeodesicSpec& geo, const FieldFunction& f, double t, double h = 1e-3);

/// Writes samples as CSV with columns t, z_1..z_p, v_1..v_q.
void write_field_csv(std::ostream& out, const JacobiField& field);

}  // namespace nilconj
