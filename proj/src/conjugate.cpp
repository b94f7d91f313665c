#include "nilconj/conjugate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nilconj/error.hpp"
#include "nilconj/linalg.hpp"

namespace nilconj {

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::None: return "none";
    case Branch::Polynomial: return "polynomial";
    case Branch::Lattice: return "lattice";
    case Branch::Transcendental: return "transcendental";
  }
  return "none";
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool j_vanishes(const GeodesicSpec& geo) {
  return geo.J().isZero(1e-13 * std::max(1.0, geo.z0().norm()));
}

bool within_range(double t, double t_max) { return in_time_range(t, t_max); }

// With a line center, ker J is central and orthogonal to im J. When the two
// meet only in 0 the group splits off a flat factor along ker J, and the
// conjugate times are those of the geodesic with x0 projected to im J.
GeodesicSpec reduce_kernel(const GeodesicSpec& geo) {
  const Mat& j = geo.J();
  const Mat ker = null_space(j);
  if (ker.cols() == 0) return geo;
  const Mat im = column_space(j);
  const Eigen::Index q = j.rows();
  Mat basis(q, im.cols() + ker.cols());
  basis << im, ker;
  if (basis.cols() != q || numerical_rank(basis) != q)
    throw Error(ErrorCode::UnsupportedCase, "ker J meets im J; mixed closed form unavailable, use the numerical oracle");
  const Vec c = basis.partialPivLu().solve(geo.x0());
  const Vec x_ker = ker * c.tail(ker.cols());
  if (x_ker.norm() <= 1e-12 * geo.x0().norm()) return geo;
  return GeodesicSpec(geo.algebra(), geo.z0(), im * c.head(im.cols()));
}

// Distinct lattice times 2 pi n / lambda_k in (0, t_max], merged at `merge_tol`.
std::vector<double> lattice_candidates(const Spectrum& spec, double t_max, double merge_tol) {
  std::vector<double> raw;
  for (const auto& b : spec.neg) {
    for (int n = 1;; ++n) {
      const double t = kTwoPi * n / b.lambda;
      if (!within_range(t, t_max)) break;
      raw.push_back(t);
    }
  }
  std::sort(raw.begin(), raw.end());
  std::vector<double> out;
  for (double t : raw) {
    if (!out.empty() && t - out.back() <= merge_tol * t) continue;
    out.push_back(t);
  }
  return out;
}

void sort_times(std::vector<ConjugateTime>& times) {
  std::sort(times.begin(), times.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
}

double x_cot_x(double x) { return x == 0.0 ? 1.0 : x / std::tan(x); }
double x_coth_x(double x) { return x == 0.0 ? 1.0 : x / std::tanh(x); }

}  // namespace

std::vector<ConjugateTime> polynomial_times(const GeodesicSpec& geo, double t_max, const ConjugateOptions&) {
  std::vector<ConjugateTime> out;
  const AOperator a = a_operator(geo.algebra(), geo.x0());
  for (const auto& e : a.negative) {
    const double t = std::sqrt(-12.0 / e.value);
    if (within_range(t, t_max)) out.push_back({t, e.mult, Branch::Polynomial, false, std::nullopt});
  }
  sort_times(out);
  return out;
}

std::vector<ConjugateTime> polynomial_times_scalar(const GeodesicSpec& geo, double t_max) {
  const MetricLieAlgebra& alg = geo.algebra();
  if (alg.dim_center() != 1) throw Error(ErrorCode::CenterNotLine, "scalar criterion needs dim z = 1");
  const double gzz = alg.gram_center()(0, 0);
  const double eps = gzz > 0 ? 1.0 : -1.0;
  const Vec z = Vec::Constant(1, 1.0 / std::sqrt(std::abs(gzz)));
  const Vec jx = j_map(alg, z) * geo.x0();
  const double rhs = eps * inner_v(alg, jx, jx);
  std::vector<ConjugateTime> out;
  if (rhs < 0.0) {
    const double t = std::sqrt(-12.0 / rhs);
    if (within_range(t, t_max)) out.push_back({t, 1, Branch::Polynomial, false, std::nullopt});
  }
  return out;
}

std::vector<ConjugateTime> lattice_times(const GeodesicSpec& geo, double t_max, const ConjugateOptions& opts) {
  const Spectrum spec = spectrum(geo.J());
  std::vector<ConjugateTime> out;
  for (double t : lattice_candidates(spec, t_max, opts.merge_tol)) {
    const int mult = lattice_sum(spec, t);
    if (mult > 0) out.push_back({t, mult, Branch::Lattice, false, std::nullopt});
  }
  return out;
}

double transcendental_g(const GeodesicSpec& geo, double t) {
  if (t == 0.0) throw Error(ErrorCode::PoleError, "g is only defined as a limit at t = 0");
  const Vec& x0 = geo.x0();
  const ImageMembership mem = image_membership(geo.J(), t, x0, geo.algebra().gram_v());
  if (!mem.is_member) {
    if (!lattice_blocks(spectrum(geo.J()), t).empty())
      throw Error(ErrorCode::PoleError, "t is a lattice time and x0 is not in im(e^{-tJ} - I)");
    throw Error(ErrorCode::NotInImage, "x0 is not in im(e^{-tJ} - I)");
  }
  // preimage solves (e^{-tJ} - I) v = t x0, so g = <J x0, v>.
  return inner_v(geo.algebra(), geo.J() * x0, mem.preimage);
}

double CotCothForm::value(double t) const {
  double g = 0.0;
  for (std::size_t k = 0; k < cot_lambda.size(); ++k) g += cot_weight[k] * x_cot_x(0.5 * cot_lambda[k] * t);
  for (std::size_t l = 0; l < coth_lambda.size(); ++l) g += coth_weight[l] * x_coth_x(0.5 * coth_lambda[l] * t);
  return g;
}

double CotCothForm::derivative(double t) const {
  double d = 0.0;
  for (std::size_t k = 0; k < cot_lambda.size(); ++k) {
    const double x = 0.5 * cot_lambda[k] * t;
    if (x == 0.0) continue;
    const double s = std::sin(x);
    d += cot_weight[k] * 0.5 * cot_lambda[k] * (std::cos(x) / s - x / (s * s));
  }
  for (std::size_t l = 0; l < coth_lambda.size(); ++l) {
    const double x = 0.5 * coth_lambda[l] * t;
    if (x == 0.0) continue;
    const double s = std::sinh(x);
    d += coth_weight[l] * 0.5 * coth_lambda[l] * (std::cosh(x) / s - x / (s * s));
  }
  return d;
}

CotCothForm cot_coth_form(const MetricLieAlgebra& alg, const Mat& j, const Spectrum& spec, const Vec& x0) {
  (void)j;
  if (!spec.diagonalizable || spec.zero_mult != 0)
    throw Error(ErrorCode::NotDiagonalizable, "cot/coth form needs J^2 diagonalizable and nonsingular");
  const int q = spec.dim;
  Mat basis(q, q);
  int c = 0;
  for (const auto& b : spec.neg) {
    basis.middleCols(c, b.mult) = b.basis;
    c += b.mult;
  }
  for (const auto& b : spec.pos) {
    basis.middleCols(c, b.mult) = b.basis;
    c += b.mult;
  }
  const Vec coeff = basis.fullPivLu().solve(x0);

  CotCothForm form;
  c = 0;
  auto component = [&](const EigenBlock& b) {
    const Vec part = b.basis * coeff.segment(c, b.mult);
    c += b.mult;
    return inner_v(alg, part, part);
  };
  for (const auto& b : spec.neg) {
    form.cot_lambda.push_back(b.lambda);
    form.cot_weight.push_back(component(b));
  }
  for (const auto& b : spec.pos) {
    form.coth_lambda.push_back(b.lambda);
    form.coth_weight.push_back(component(b));
  }
  return form;
}

CotCothForm cot_coth_form(const GeodesicSpec& geo) {
  return cot_coth_form(geo.algebra(), geo.J(), spectrum(geo.J()), geo.x0());
}

namespace {

// Evaluates F(t) = g(t) - <gdot, gdot>, preferring the closed form.
class TranscendentalEquation {
 public:
  TranscendentalEquation(const GeodesicSpec& geo, const Spectrum& spec) : geo_(geo) {
    if (spec.diagonalizable && spec.zero_mult == 0)
      form_ = cot_coth_form(geo.algebra(), geo.J(), spec, geo.x0());
  }

  [[nodiscard]] double operator()(double t) const {
    if (t == 0.0) return inner_v(geo_.algebra(), geo_.x0(), geo_.x0()) - geo_.speed();
    if (form_) return form_->value(t) - geo_.speed();
    return transcendental_g(geo_, t) - geo_.speed();
  }

  [[nodiscard]] std::optional<double> derivative(double t) const {
    if (form_) return form_->derivative(t);
    return std::nullopt;
  }

 private:
  const GeodesicSpec& geo_;
  std::optional<CotCothForm> form_;
};

double bisect(const TranscendentalEquation& f, double a, double b, double fa, double tol) {
  for (int it = 0; it < 200 && (b - a) > tol; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

double polish(const TranscendentalEquation& f, double t, double lo, double hi) {
  for (int it = 0; it < 2; ++it) {
    const auto d = f.derivative(t);
    if (!d || *d == 0.0) break;
    const double ft = f(t);
    const double next = t - ft / *d;
    if (!(next > lo && next < hi) || std::abs(f(next)) > std::abs(ft)) break;
    t = next;
  }
  return t;
}

double golden_min_abs(const TranscendentalEquation& f, double a, double b, double tol) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = std::abs(f(c));
  double fd = std::abs(f(d));
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = std::abs(f(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = std::abs(f(d));
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

std::vector<ConjugateTime> mixed_times(const GeodesicSpec& geo, double t_max, const ConjugateOptions& opts) {
  const MetricLieAlgebra& alg = geo.algebra();
  if (alg.dim_center() != 1) throw Error(ErrorCode::CenterNotLine, "mixed_times needs dim z = 1");
  const GeodesicSpec reduced = reduce_kernel(geo);
  if (reduced.x0() != geo.x0()) {
    if (reduced.x0().squaredNorm() == 0.0) return lattice_times(reduced, t_max, opts);
    return mixed_times(reduced, t_max, opts);
  }
  const Spectrum spec = spectrum(geo.J());
  const Vec jx0 = geo.J() * geo.x0();
  const double speed = geo.speed();

  std::vector<ConjugateTime> out;
  std::vector<double> poles;
  std::vector<double> lattice;
  for (double t : lattice_candidates(spec, t_max, opts.merge_tol)) {
    lattice.push_back(t);
    const int sum = lattice_sum(spec, t);
    const ImageMembership mem = image_membership(geo.J(), t, geo.x0(), alg.gram_v());
    int mult = sum;
    if (!mem.is_member) {
      mult = sum - 1;
      poles.push_back(t);
    } else if (std::abs(inner_v(alg, jx0, mem.preimage) - speed) <= opts.equality_tol * std::max(1.0, std::abs(speed))) {
      mult = sum + 1;
    }
    if (mult > 0) out.push_back({t, mult, Branch::Lattice, false, std::nullopt});
  }

  const TranscendentalEquation f(geo, spec);
  const double lambda_max = spec.lambda_max();
  std::vector<double> breaks{0.0};
  breaks.insert(breaks.end(), poles.begin(), poles.end());
  breaks.push_back(t_max);

  std::vector<ConjugateTime> roots;
  for (std::size_t iv = 0; iv + 1 < breaks.size(); ++iv) {
    const double a = breaks[iv];
    const double b = breaks[iv + 1];
    const double eta = 1e-7 * std::max(1.0, b);
    const bool left_pole = iv > 0;
    const bool right_pole = iv + 2 < breaks.size();
    const double lo = left_pole ? a + eta : a;
    const double hi = right_pole ? b - eta : b;
    if (!(hi > lo)) continue;

    double delta = (b - a) / 64.0;
    if (lambda_max > 0.0) delta = std::min(delta, std::numbers::pi / (4.0 * lambda_max));
    const int n = std::max(2, static_cast<int>(std::ceil((hi - lo) / delta)));
    std::vector<double> ts(n + 1);
    std::vector<double> fs(n + 1);
    try {
      for (int i = 0; i <= n; ++i) {
        ts[i] = (i == n) ? hi : lo + (hi - lo) * i / n;
        fs[i] = f(ts[i]);
      }
    } catch (const Error& e) {
      // x0 misses the image on this whole interval: no transcendental roots.
      if (e.code() == ErrorCode::NotInImage) continue;
      throw;
    }

    for (int i = 0; i < n; ++i) {
      if (fs[i] == 0.0 && ts[i] > 0.0) {
        roots.push_back({ts[i], 1, Branch::Transcendental, false, std::nullopt});
        continue;
      }
      if (fs[i] * fs[i + 1] < 0.0) {
        const double tol = std::max(opts.bisection_tol, 4.0 * std::numeric_limits<double>::epsilon() * ts[i + 1]);
        double t = bisect(f, ts[i], ts[i + 1], fs[i], tol);
        t = polish(f, t, ts[i], ts[i + 1]);
        roots.push_back({t, 1, Branch::Transcendental, false, std::nullopt});
      }
    }
    if (fs[n] == 0.0 && within_range(ts[n], t_max))
      roots.push_back({ts[n], 1, Branch::Transcendental, false, std::nullopt});

    // Double roots: |F| has an interior local minimum without a sign change.
    for (int i = 1; i < n; ++i) {
      const bool same_sign = (fs[i - 1] > 0) == (fs[i] > 0) && (fs[i] > 0) == (fs[i + 1] > 0);
      const bool slope_flips = (fs[i] - fs[i - 1]) * (fs[i + 1] - fs[i]) < 0.0;
      if (!same_sign || !slope_flips || std::abs(fs[i]) > std::abs(fs[i - 1]) || std::abs(fs[i]) > std::abs(fs[i + 1]))
        continue;
      const double t = golden_min_abs(f, ts[i - 1], ts[i + 1], opts.bisection_tol);
      if (std::abs(f(t)) <= opts.tangent_tol * std::max(1.0, std::abs(speed)))
        roots.push_back({t, 1, Branch::Transcendental, true, std::nullopt});
    }
  }

  // A root sitting on a lattice time is already counted by the lattice rule.
  for (const auto& r : roots) {
    const bool on_lattice = std::any_of(lattice.begin(), lattice.end(),
                                        [&](double t) { return std::abs(t - r.t) <= 1e-9 * std::max(1.0, t); });
    if (!on_lattice && within_range(r.t, t_max)) out.push_back(r);
  }
  sort_times(out);
  return out;
}

std::vector<ConjugateTime> conjugate_times(const GeodesicSpec& geo, double t_max, const ConjugateOptions& opts) {
  if (!(t_max > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_max must be positive");
  const bool flat_j = j_vanishes(geo);
  const bool no_x0 = geo.x0().squaredNorm() == 0.0;

  std::vector<ConjugateTime> out;
  if (flat_j && no_x0) {
    return out;
  } else if (flat_j) {
    out = polynomial_times(geo, t_max, opts);
  } else if (no_x0) {
    out = lattice_times(geo, t_max, opts);
  } else if (geo.algebra().dim_center() == 1) {
    out = mixed_times(geo, t_max, opts);
  } else {
    throw Error(ErrorCode::UnsupportedCase,
                "J != 0 and x0 != 0 with dim z > 1 has no closed form; use the numerical oracle");
  }
  if (opts.attach_witnesses) {
    for (auto& ct : out) ct.certificate = build_jacobi_field(geo, ct, opts.witness_step);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Witnesses

namespace {

// Field v(t) = (e^{-tJ} - I) v0 + c t x0, alpha(t) z0 with
// alpha(t) = c t - <J x0, phi(t) v0 - t v0> / <z0, z0>, phi(t) = int_0^t e^{-sJ} ds.
Witness center_line_witness(const GeodesicSpec& geo, const Vec& v0, double c) {
  const MetricLieAlgebra& alg = geo.algebra();
  const Mat j = geo.J();
  const Vec x0 = geo.x0();
  const Vec z0 = geo.z0();
  const Vec jx0 = j * x0;
  const double zz = inner_center(alg, z0, z0);
  const Eigen::Index q = j.rows();

  // Normalize so that (zeta, vdot(0)) has unit size.
  const double scale = std::abs(c) * z0.norm() + (-j * v0 + c * x0).norm();
  const double s = scale > 0.0 ? 1.0 / scale : 1.0;

  Witness w;
  w.zeta = s * c * z0;
  w.field = [=](double t) -> FrameValue {
    const Mat rot_back = expm(-t * j);
    FrameValue y;
    y.v = s * ((rot_back - Mat::Identity(q, q)) * v0 + c * t * x0);
    const Vec phi_v0 = integrated_expm(-j, t) * v0;
    const double alpha = c * t - inner_v(alg, jx0, phi_v0 - t * v0) / zz;
    y.z = s * alpha * z0;
    return y;
  };
  return w;
}

}  // namespace

Witness jacobi_witness(const GeodesicSpec& geo, const ConjugateTime& ct) {
  const MetricLieAlgebra& alg = geo.algebra();
  const double t0 = ct.t;
  const Vec x0 = geo.x0();

  if (ct.branch == Branch::Polynomial) {
    const AOperator a = a_operator(alg, x0);
    const double target = -12.0 / (t0 * t0);
    const RealEigen* best = nullptr;
    for (const auto& e : a.negative)
      if (!best || std::abs(e.value - target) < std::abs(best->value - target)) best = &e;
    if (!best) throw Error(ErrorCode::InvalidArgument, "no eigenvector of A for this time");
    const Vec zeta = best->basis.col(0).normalized();
    const Vec jzx = j_map(alg, zeta) * x0;
    const Vec bz = bracket_v(alg, jzx, x0);
    Witness w;
    w.zeta = zeta;
    w.field = [=](double t) -> FrameValue {
      return {(t * t * t / 6.0 - t0 * t * t / 4.0) * bz + t * zeta, 0.5 * t * (t - t0) * jzx};
    };
    return w;
  }

  if (alg.dim_center() == 1 && x0.squaredNorm() > 0.0) {
    const GeodesicSpec reduced = reduce_kernel(geo);
    if (reduced.x0() != x0) return jacobi_witness(reduced, ct);
  }

  const Spectrum spec = spectrum(geo.J());
  if (ct.branch == Branch::Lattice) {
    const Mat kernel = lattice_kernel(spec, t0);
    if (kernel.cols() == 0) throw Error(ErrorCode::InvalidArgument, "t is not a lattice time");
    if (x0.squaredNorm() == 0.0) {
      const Mat j = geo.J();
      const Vec v0 = kernel.col(0);
      const Eigen::Index q = j.rows();
      Witness w;
      w.zeta = Vec::Zero(alg.dim_center());
      w.field = [=, p = alg.dim_center()](double t) -> FrameValue {
        return {Vec::Zero(p), (expm(-t * j) - Mat::Identity(q, q)) * v0};
      };
      return w;
    }
    if (alg.dim_center() != 1) throw Error(ErrorCode::UnsupportedCase, "mixed witness needs dim z = 1");
    const ImageMembership mem = image_membership(geo.J(), t0, x0, alg.gram_v());
    Vec v0 = kernel.col(0);
    if (!mem.is_member) {
      // Need <J x0, v0> = 0 inside the kernel.
      const Vec jx0 = geo.J() * x0;
      Mat row(1, kernel.cols());
      for (Eigen::Index c = 0; c < kernel.cols(); ++c) row(0, c) = inner_v(alg, jx0, kernel.col(c));
      const Mat free = null_space(row, kRankTol, std::max(1.0, jx0.norm()) * std::max(1.0, alg.gram_v().cwiseAbs().maxCoeff()));
      if (free.cols() == 0) throw Error(ErrorCode::InvalidArgument, "lattice time has no admissible witness");
      v0 = kernel * free.col(0);
    }
    return center_line_witness(geo, v0, 0.0);
  }

  if (ct.branch == Branch::Transcendental) {
    const ImageMembership mem = image_membership(geo.J(), t0, x0, alg.gram_v());
    if (!mem.is_member) throw Error(ErrorCode::NotInImage, "x0 is not in im(e^{-t0 J} - I)");
    return center_line_witness(geo, -mem.preimage, 1.0);
  }
  throw Error(ErrorCode::InvalidArgument, "no witness for branch 'none'");
}

JacobiField build_jacobi_field(const GeodesicSpec& geo, const ConjugateTime& ct, double step) {
  const Witness w = jacobi_witness(geo, ct);
  return sample_field(w.field, w.zeta, 0.0, ct.t, step);
}

}  // namespace nilconj
