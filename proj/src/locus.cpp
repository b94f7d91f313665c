#include "nilconj/locus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "nilconj/conjugate.hpp"
#include "nilconj/error.hpp"
#include "nilconj/spectral.hpp"

namespace nilconj {

namespace {

const double kTwoSqrt3 = 2.0 * std::sqrt(3.0);

}  // namespace

CenterLine center_line(const MetricLieAlgebra& alg) {
  if (alg.dim_center() != 1) throw Error(ErrorCode::CenterNotLine, "this operation needs dim z = 1");
  const double g = alg.gram_center()(0, 0);
  return {Vec::Constant(1, 1.0 / std::sqrt(std::abs(g))), g > 0 ? 1.0 : -1.0};
}

std::optional<double> delta(const MetricLieAlgebra& alg, const Vec& x0) {
  const CenterLine line = center_line(alg);
  if (x0.size() != alg.dim_v()) throw Error(ErrorCode::InvalidArgument, "x0 has the wrong dimension");
  const Mat j = j_map(alg, line.z);
  const Spectrum spec = spectrum(j);
  if (!spec.diagonalizable) throw Error(ErrorCode::NotDiagonalizable, "J_z^2 is not diagonalizable");
  if (x0.squaredNorm() == 0.0) return std::nullopt;

  // Components of x0 along the J_z^2 eigenspaces; the kernel part drops out.
  const int q = alg.dim_v();
  Mat basis(q, q);
  int c = 0;
  for (const auto& b : spec.neg) basis.middleCols(c, b.mult) = b.basis, c += b.mult;
  for (const auto& b : spec.pos) basis.middleCols(c, b.mult) = b.basis, c += b.mult;
  const Mat kernel = null_space(j * j, kRankTol, std::max(1.0, (j * j).norm()));
  basis.rightCols(q - c) = kernel;
  const Vec coeff = basis.fullPivLu().solve(x0);

  double d2 = 0.0;
  c = 0;
  for (const auto& b : spec.neg) {
    const Vec part = b.basis * coeff.segment(c, b.mult);
    d2 -= b.lambda * b.lambda * line.epsilon * inner_v(alg, part, part);
    c += b.mult;
  }
  for (const auto& b : spec.pos) {
    const Vec part = b.basis * coeff.segment(c, b.mult);
    d2 += b.lambda * b.lambda * line.epsilon * inner_v(alg, part, part);
    c += b.mult;
  }
  const Vec jx = j * x0;
  if (d2 <= kClusterTol * jx.squaredNorm()) return std::nullopt;
  return std::sqrt(d2);
}

std::vector<LocusSample> sample_Z(const MetricLieAlgebra& alg, const std::vector<Vec>& directions, ZPath path) {
  if (path == ZPath::Auto) path = alg.dim_center() == 1 ? ZPath::Delta : ZPath::Polynomial;
  std::vector<LocusSample> out;
  const Vec z0 = Vec::Zero(alg.dim_center());
  for (const auto& x0 : directions) {
    const GeodesicSpec geo(alg, z0, x0);
    std::vector<double> times;
    if (path == ZPath::Delta) {
      if (const auto d = delta(alg, x0)) times.push_back(kTwoSqrt3 / *d);
    } else {
      for (const auto& ct : polynomial_times(geo, std::numeric_limits<double>::max(), {})) times.push_back(ct.t);
    }
    for (double t : times) out.push_back({x0, 0.0, t, geodesic_point(geo, t), kTwoSqrt3 / t});
  }
  return out;
}

Vec normalize_direction(const MetricLieAlgebra& alg, const Vec& x0) {
  const double n = inner_v(alg, x0, x0);
  if (std::abs(n) <= 1e-14 * std::max(1.0, x0.squaredNorm())) return x0;
  return x0 / std::sqrt(std::abs(n));
}

FamilyMember family_member(const MetricLieAlgebra& alg, const Vec& x0, double a) {
  const CenterLine line = center_line(alg);
  const double n = inner_v(alg, x0, x0);
  const bool null = std::abs(n) <= 1e-12 * std::max(1.0, x0.squaredNorm());
  FamilyMember m;
  m.z0 = a * line.z;
  if (null) {
    m.x0 = x0;
  } else if ((n > 0) == (line.epsilon > 0)) {
    if (std::abs(a) > 1.0) throw Error(ErrorCode::InvalidArgument, "family parameter must satisfy |a| <= 1");
    m.x0 = std::sqrt(1.0 - a * a) * x0;
  } else {
    m.x0 = std::sqrt(1.0 + a * a) * x0;
  }
  m.speed = inner_center(alg, m.z0, m.z0) + inner_v(alg, m.x0, m.x0);
  return m;
}

namespace {

// g(t) - <gdot, gdot> along one family member, with a derivative when the
// closed form applies.
class FamilyEquation {
 public:
  FamilyEquation(const MetricLieAlgebra& alg, const FamilyMember& m) : geo_(alg, m.z0, m.x0), speed_(m.speed) {
    const Spectrum spec = spectrum(geo_.J());
    if (spec.diagonalizable && spec.zero_mult == 0) form_ = cot_coth_form(alg, geo_.J(), spec, m.x0);
  }

  [[nodiscard]] double value(double t) const {
    return (form_ ? form_->value(t) : transcendental_g(geo_, t)) - speed_;
  }

  [[nodiscard]] double derivative(double t) const {
    if (form_) return form_->derivative(t);
    const double h = 1e-6 * std::max(1.0, t);
    return (value(t + h) - value(t - h)) / (2.0 * h);
  }

  [[nodiscard]] const GeodesicSpec& geodesic() const { return geo_; }

 private:
  GeodesicSpec geo_;
  double speed_;
  std::optional<CotCothForm> form_;
};

std::optional<double> newton(const FamilyEquation& f, double t, double lo, double hi, double tol) {
  for (int it = 0; it < 60; ++it) {
    const double ft = f.value(t);
    const double d = f.derivative(t);
    if (!(std::abs(d) > 0.0)) return std::nullopt;
    const double next = t - ft / d;
    if (!(next > lo && next < hi)) return std::nullopt;
    if (std::abs(next - t) <= tol * std::max(1.0, t)) return next;
    t = next;
  }
  return std::nullopt;
}

std::optional<double> bracketed_root(const FamilyEquation& f, double predictor, double tol) {
  // Walk outward from the predictor and bisect the nearest sign change.
  const double step = 0.01 * predictor;
  auto safe = [&](double t) -> std::optional<double> {
    try {
      return f.value(t);
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  for (int k = 0; k < 100; ++k) {
    for (double dir : {1.0, -1.0}) {
      const double a = predictor + dir * k * step;
      const double b = predictor + dir * (k + 1) * step;
      if (a <= 0.0 || b <= 0.0) continue;
      auto fa = safe(a);
      auto fb = safe(b);
      if (!fa || !fb || (*fa > 0) == (*fb > 0)) continue;
      double lo = std::min(a, b);
      double hi = std::max(a, b);
      double flo = dir > 0 ? *fa : *fb;
      for (int it = 0; it < 200 && hi - lo > tol * std::max(1.0, hi); ++it) {
        const double m = 0.5 * (lo + hi);
        const auto fm = safe(m);
        if (!fm) return std::nullopt;
        if ((*fm > 0) == (flo > 0)) {
          lo = m;
          flo = *fm;
        } else {
          hi = m;
        }
      }
      const double root = 0.5 * (lo + hi);
      // A sign change across a pole leaves |F| large at the midpoint.
      const auto fr = safe(root);
      if (fr && std::abs(*fr) < 1e-6 * std::max(1.0, std::abs(*fa) + std::abs(*fb))) return root;
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<LocusSample> continuation(const MetricLieAlgebra& alg, const Vec& x_in, const std::vector<double>& a_grid,
                                      const ContinuationOptions& opts) {
  const Vec x0 = normalize_direction(alg, x_in);
  const auto d = delta(alg, x0);
  if (!d) throw Error(ErrorCode::InvalidArgument, "continuation needs Delta(x0) > 0");
  const double t_limit = kTwoSqrt3 / *d;
  for (double a : a_grid)
    if (std::abs(a) > opts.a_max) throw Error(ErrorCode::InvalidArgument, "|a| exceeds a_max");

  // Visit |a| in increasing order on each side so every predictor is the
  // previous solution.
  std::vector<std::size_t> order(a_grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return std::abs(a_grid[i]) < std::abs(a_grid[j]); });

  std::vector<LocusSample> out(a_grid.size());
  double last_pos = t_limit;
  double last_neg = t_limit;
  for (std::size_t i : order) {
    const double a = a_grid[i];
    const FamilyMember m = family_member(alg, x0, a);
    const GeodesicSpec geo(alg, m.z0, m.x0);
    double t = t_limit;
    if (a != 0.0) {
      const FamilyEquation f(alg, m);
      const double predictor = a > 0 ? last_pos : last_neg;
      auto root = newton(f, predictor, 0.5 * predictor, 2.0 * predictor, opts.tol);
      if (!root) root = bracketed_root(f, predictor, opts.tol);
      if (!root) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "lost the conjugate time at a = " << a;
        throw Error(ErrorCode::RootLost, msg.str());
      }
      t = *root;
      (a > 0 ? last_pos : last_neg) = t;
    }
    out[i] = {x0, a, t, geodesic_point(geo, t), *d};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Export

namespace {

int columns_center(const std::vector<LocusSample>& s) { return s.empty() ? 0 : static_cast<int>(s[0].point.z.size()); }
int columns_v(const std::vector<LocusSample>& s) { return s.empty() ? 0 : static_cast<int>(s[0].point.v.size()); }

}  // namespace

void write_samples_csv(std::ostream& out, const std::vector<LocusSample>& samples) {
  const int p = columns_center(samples);
  const int q = columns_v(samples);
  out << "a,t,delta";
  for (int i = 1; i <= p; ++i) out << ",z" << i;
  for (int i = 1; i <= q; ++i) out << ",v" << i;
  for (int i = 1; i <= q; ++i) out << ",x0_" << i;
  out << '\n';
  const auto old = out.precision(17);
  for (const auto& s : samples) {
    out << s.a << ',' << s.t << ',' << s.delta;
    for (int i = 0; i < p; ++i) out << ',' << s.point.z(i);
    for (int i = 0; i < q; ++i) out << ',' << s.point.v(i);
    for (int i = 0; i < q; ++i) out << ',' << s.x0(i);
    out << '\n';
  }
  out.precision(old);
}

std::vector<LocusSample> read_samples_csv(std::istream& in, int dim_center, int dim_v) {
  std::string line;
  std::vector<LocusSample> out;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "missing CSV header");
  const std::size_t expected = 3 + dim_center + 2 * static_cast<std::size_t>(dim_v);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "bad CSV cell '" + cell + "'");
      }
    }
    if (vals.size() != expected) throw Error(ErrorCode::ParseError, "CSV row has the wrong number of columns");
    LocusSample s;
    s.a = vals[0];
    s.t = vals[1];
    s.delta = vals[2];
    s.point = AlgebraElement::zero(dim_center, dim_v);
    s.x0 = Vec(dim_v);
    for (int i = 0; i < dim_center; ++i) s.point.z(i) = vals[3 + i];
    for (int i = 0; i < dim_v; ++i) s.point.v(i) = vals[3 + dim_center + i];
    for (int i = 0; i < dim_v; ++i) s.x0(i) = vals[3 + dim_center + dim_v + i];
    out.push_back(std::move(s));
  }
  return out;
}

void write_samples_obj(std::ostream& out, const std::vector<LocusSample>& samples) {
  if (!samples.empty() && columns_center(samples) + columns_v(samples) != 3)
    throw Error(ErrorCode::InvalidArgument, "OBJ export needs a three-dimensional algebra");
  const auto old = out.precision(17);
  out << "# conjugate locus samples (v1 v2 z1)\n";
  for (const auto& s : samples) {
    out << "v " << s.point.v(0) << ' ' << s.point.v(1) << ' ' << s.point.z(0) << '\n';
  }
  out.precision(old);
}

void export_samples(const std::vector<LocusSample>& samples, const std::string& path, ExportFormat format) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  if (format == ExportFormat::Csv)
    write_samples_csv(out, samples);
  else
    write_samples_obj(out, samples);
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

std::vector<Vec> direction_grid(int q, int count, std::uint64_t seed) {
  std::vector<Vec> out;
  if (count <= 0 || q <= 0) return out;
  if (q == 1) {
    out.push_back(Vec::Ones(1));
    if (count > 1) out.push_back(-Vec::Ones(1));
    return out;
  }
  if (q == 2) {
    for (int k = 0; k < count; ++k) {
      const double th = 2.0 * std::numbers::pi * k / count;
      out.push_back((Vec(2) << std::cos(th), std::sin(th)).finished());
    }
    return out;
  }
  if (q == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      const double y = 1.0 - 2.0 * (k + 0.5) / count;
      const double r = std::sqrt(1.0 - y * y);
      const double th = golden * k;
      out.push_back((Vec(3) << r * std::cos(th), y, r * std::sin(th)).finished());
    }
    return out;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int k = 0; k < count; ++k) {
    Vec v(q);
    for (auto& c : v) c = normal(rng);
    out.push_back(v.normalized());
  }
  return out;
}

}  // namespace nilconj
