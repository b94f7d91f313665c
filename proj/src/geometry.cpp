#include "nilconj/geometry.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "nilconj/error.hpp"

namespace nilconj {

GeodesicSpec::GeodesicSpec(MetricLieAlgebra alg, Vec z0, Vec x0)
    : alg_(std::move(alg)), z0_(std::move(z0)), x0_(std::move(x0)) {
  if (z0_.size() != alg_.dim_center() || x0_.size() != alg_.dim_v())
    throw Error(ErrorCode::InvalidArgument, "initial velocity has the wrong dimensions");
  if (!z0_.allFinite() || !x0_.allFinite())
    throw Error(ErrorCode::InvalidArgument, "initial velocity is not finite");
  j_ = j_map(alg_, z0_);
  speed_ = inner_center(alg_, z0_, z0_) + inner_v(alg_, x0_, x0_);
}

Mat GeodesicSpec::rotation(double t) const { return expm(t * j_); }

Vec GeodesicSpec::horizontal_velocity(double t) const { return rotation(t) * x0_; }

AlgebraElement connection(const MetricLieAlgebra& alg, const AlgebraElement& u, const AlgebraElement& w) {
  AlgebraElement out;
  out.z = 0.5 * bracket_v(alg, u.v, w.v);
  out.v = -0.5 * (j_map(alg, u.z) * w.v + j_map(alg, w.z) * u.v);
  return out;
}

AlgebraElement curvature(const MetricLieAlgebra& alg, const AlgebraElement& x,
                         const AlgebraElement& y, const AlgebraElement& w) {
  const Mat j1 = j_map(alg, x.z);
  const Mat j2 = j_map(alg, y.z);
  const Mat j3 = j_map(alg, w.z);
  const Vec& e1 = x.v;
  const Vec& e2 = y.v;
  const Vec& e3 = w.v;

  AlgebraElement out = AlgebraElement::zero(alg.dim_center(), alg.dim_v());
  // R(z1, z2) e3
  out.v += 0.25 * (j1 * (j2 * e3) - j2 * (j1 * e3));
  // R(z1, e2) z3 and R(e1, z2) z3 = -R(z2, e1) z3
  out.v += 0.25 * (j1 * (j3 * e2)) - 0.25 * (j2 * (j3 * e1));
  // R(z1, e2) e3 and R(e1, z2) e3 = -R(z2, e1) e3
  out.z += 0.25 * bracket_v(alg, e2, j1 * e3) - 0.25 * bracket_v(alg, e1, j2 * e3);
  // R(e1, e2) z3
  out.z -= 0.25 * (bracket_v(alg, e1, j3 * e2) + bracket_v(alg, j3 * e1, e2));
  // R(e1, e2) e3
  out.v += 0.25 * (j_map(alg, bracket_v(alg, e1, e3)) * e2 - j_map(alg, bracket_v(alg, e2, e3)) * e1) +
           0.5 * (j_map(alg, bracket_v(alg, e1, e2)) * e3);
  return out;
}

AlgebraElement jacobi_operator(const GeodesicSpec& geo, double t, const AlgebraElement& y) {
  const MetricLieAlgebra& alg = geo.algebra();
  const Mat& j = geo.J();
  const Mat jz = j_map(alg, y.z);
  const Vec& x = y.v;
  const Vec xp = geo.horizontal_velocity(t);
  const Vec jxp = j * xp;

  AlgebraElement out;
  out.v = 0.75 * (j_map(alg, bracket_v(alg, x, xp)) * xp) + 0.5 * (jz * jxp) - 0.25 * (j * (jz * xp)) -
          0.25 * (j * (j * x));
  out.z = -0.5 * bracket_v(alg, x, jxp) + 0.25 * bracket_v(alg, xp, j * x) + 0.25 * bracket_v(alg, xp, jz * xp);
  return out;
}

AlgebraElement geodesic_velocity(const GeodesicSpec& geo, double t) {
  return {geo.z0(), geo.horizontal_velocity(t)};
}

namespace {

// Adaptive Simpson on a vector-valued integrand.
template <typename F>
Vec simpson_step(const F& f, double a, double b, const Vec& fa, const Vec& fm, const Vec& fb,
                 const Vec& whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const Vec flm = f(0.5 * (a + m));
  const Vec frm = f(0.5 * (m + b));
  const Vec left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const Vec right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const Vec delta = left + right - whole;
  if (depth <= 0 || delta.cwiseAbs().maxCoeff() <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
Vec adaptive_simpson(const F& f, double a, double b, double tol) {
  const Vec fa = f(a);
  const Vec fb = f(b);
  const Vec fm = f(0.5 * (a + b));
  const Vec whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace

AlgebraElement geodesic_point(const GeodesicSpec& geo, double t, double abs_tol) {
  const MetricLieAlgebra& alg = geo.algebra();
  AlgebraElement out;
  out.v = integrated_expm(geo.J(), t) * geo.x0();
  out.z = t * geo.z0();
  if (t == 0.0) return out;
  // Zdot = z0 + 1/2 [X, Xdot]
  auto integrand = [&](double s) -> Vec {
    const Vec xs = integrated_expm(geo.J(), s) * geo.x0();
    return 0.5 * bracket_v(alg, xs, geo.horizontal_velocity(s));
  };
  out.z += adaptive_simpson(integrand, 0.0, t, abs_tol);
  return out;
}

// ---------------------------------------------------------------------------
// Fields

std::size_t JacobiField::nearest(double t) const {
  std::size_t best = 0;
  double dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double d = std::abs(samples[i].t - t);
    if (d < dist) {
      dist = d;
      best = i;
    }
  }
  return best;
}

JacobiField sample_field(const FieldFunction& f, const Vec& zeta, double t0, double t1, double step,
                         int padding) {
  if (!(t1 > t0) || !(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "sample_field needs t1 > t0, step > 0");
  const int n = std::max(1, static_cast<int>(std::ceil((t1 - t0) / step - 1e-9)));
  const double h = (t1 - t0) / n;
  JacobiField field;
  field.zeta = zeta;
  field.samples.reserve(n + 1 + 2 * padding);
  for (int i = -padding; i <= n + padding; ++i) {
    const double t = (i == n) ? t1 : t0 + i * h;
    FrameValue y = f(t);
    field.samples.push_back({t, std::move(y.z), std::move(y.v)});
  }
  return field;
}

AlgebraElement frame_to_element(const GeodesicSpec& geo, double t, const FrameValue& y) {
  return {y.z, geo.rotation(t) * y.v};
}

double YjResidual::max_abs() const {
  double m = 0.0;
  if (z.size() > 0) m = std::max(m, z.cwiseAbs().maxCoeff());
  if (v.size() > 0) m = std::max(m, v.cwiseAbs().maxCoeff());
  return m;
}

namespace {

// Centered 4th-order stencils over f(t-2h), f(t-h), f(t), f(t+h), f(t+2h).
template <typename V>
V d1(const V& m2, const V& m1, const V& p1, const V& p2, double h) {
  return V((1.0 / (12.0 * h)) * (m2 - 8.0 * m1 + 8.0 * p1 - p2));
}
template <typename V>
V d2(const V& m2, const V& m1, const V& c, const V& p1, const V& p2, double h) {
  return V((1.0 / (12.0 * h * h)) * (16.0 * m1 - 30.0 * c + 16.0 * p1 - m2 - p2));
}

YjResidual residual_from_derivatives(const GeodesicSpec& geo, double t, const Vec& zeta, const Vec& zdot,
                                     const Vec& v, const Vec& vdot, const Vec& vddot) {
  const MetricLieAlgebra& alg = geo.algebra();
  const Mat rot = geo.rotation(t);
  const Vec xp = rot * geo.x0();
  YjResidual r;
  r.z = zdot - bracket_v(alg, rot * v, xp) - zeta;
  r.v = rot * (vddot + geo.J() * vdot) - j_map(alg, zeta) * xp;
  return r;
}

}  // namespace

YjResidual yj_residual(const GeodesicSpec& geo, const JacobiField& field, double t) {
  const auto& s = field.samples;
  if (s.size() < 5) throw Error(ErrorCode::InsufficientSamples, "need at least 5 samples");
  const std::size_t i = field.nearest(t);
  if (i < 2 || i + 2 >= s.size())
    throw Error(ErrorCode::InsufficientSamples, "t is too close to the ends of the sampled range");
  const double h = s[i + 1].t - s[i].t;
  if (!(h > 0.0) || std::abs(t - s[i].t) > h)
    throw Error(ErrorCode::InsufficientSamples, "t lies outside the sampled range");
  for (int k = -2; k <= 2; ++k) {
    const double expected = s[i].t + k * h;
    if (std::abs(s[i + k].t - expected) > 1e-6 * h)
      throw Error(ErrorCode::InsufficientSamples, "samples are not uniformly spaced around t");
  }
  const Vec zdot = d1(s[i - 2].z, s[i - 1].z, s[i + 1].z, s[i + 2].z, h);
  const Vec vdot = d1(s[i - 2].v, s[i - 1].v, s[i + 1].v, s[i + 2].v, h);
  const Vec vddot = d2(s[i - 2].v, s[i - 1].v, s[i].v, s[i + 1].v, s[i + 2].v, h);
  return residual_from_derivatives(geo, s[i].t, field.zeta, zdot, s[i].v, vdot, vddot);
}

YjResidual yj_residual(const GeodesicSpec& geo, const FieldFunction& f, const Vec& zeta, double t, double h) {
  const FrameValue m2 = f(t - 2 * h), m1 = f(t - h), c = f(t), p1 = f(t + h), p2 = f(t + 2 * h);
  const Vec zdot = d1(m2.z, m1.z, p1.z, p2.z, h);
  const Vec vdot = d1(m2.v, m1.v, p1.v, p2.v, h);
  const Vec vddot = d2(m2.v, m1.v, c.v, p1.v, p2.v, h);
  return residual_from_derivatives(geo, t, zeta, zdot, c.v, vdot, vddot);
}

AlgebraElement jacobi_defect(const GeodesicSpec& geo, const FieldFunction& f, double t, double h) {
  const MetricLieAlgebra& alg = geo.algebra();
  auto curve = [&](double s) { return frame_to_element(geo, s, f(s)); };
  auto covariant = [&](double s) {
    AlgebraElement dc = d1(curve(s - 2 * h), curve(s - h), curve(s + h), curve(s + 2 * h), h);
    return dc + connection(alg, geodesic_velocity(geo, s), curve(s));
  };
  const AlgebraElement dd = d1(covariant(t - 2 * h), covariant(t - h), covariant(t + h), covariant(t + 2 * h), h);
  const AlgebraElement second = dd + connection(alg, geodesic_velocity(geo, t), covariant(t));
  return second + jacobi_operator(geo, t, curve(t));
}

void write_field_csv(std::ostream& out, const JacobiField& field) {
  if (field.samples.empty()) {
    out << "t\n";
    return;
  }
  const auto p = field.samples.front().z.size();
  const auto q = field.samples.front().v.size();
  out << "t";
  for (Eigen::Index i = 0; i < p; ++i) out << ",z_" << i + 1;
  for (Eigen::Index i = 0; i < q; ++i) out << ",v_" << i + 1;
  out << '\n' << std::setprecision(17);
  for (const auto& s : field.samples) {
    out << s.t;
    for (Eigen::Index i = 0; i < p; ++i) out << ',' << s.z(i);
    for (Eigen::Index i = 0; i < q; ++i) out << ',' << s.v(i);
    out << '\n';
  }
}

}  // namespace nilconj
