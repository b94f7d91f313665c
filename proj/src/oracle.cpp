// Keep Eigen's own kernels single-threaded so that results do not depend on
// the thread count.
#define EIGEN_DONT_PARALLELIZE

#include "nilconj/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <random>

#include "nilconj/error.hpp"

namespace nilconj {

namespace {

// Time-dependent blocks of the first-order system in (zeta, z, v, w):
//   z' = zeta + L(t) v,   v' = w,   w' = F(t) zeta - J w.
struct Coefficients {
  Mat L;  // v -> [e^{tJ} v, e^{tJ} x0]
  Mat F;  // zeta -> e^{-tJ} J_zeta e^{tJ} x0
};

class System {
 public:
  explicit System(const GeodesicSpec& geo)
      : geo_(geo), p_(geo.algebra().dim_center()), q_(geo.algebra().dim_v()) {
    for (int a = 0; a < p_; ++a) j_basis_.push_back(j_map(geo.algebra(), unit(p_, a)));
  }

  [[nodiscard]] int p() const { return p_; }
  [[nodiscard]] int q() const { return q_; }
  [[nodiscard]] int dim() const { return 2 * p_ + 2 * q_; }

  [[nodiscard]] Coefficients at(double t) const {
    const Mat rot = expm(t * geo_.J());
    const Mat back = expm(-t * geo_.J());
    const Vec xt = rot * geo_.x0();
    Coefficients c;
    c.L.resize(p_, q_);
    for (int i = 0; i < q_; ++i) c.L.col(i) = bracket_v(geo_.algebra(), rot.col(i), xt);
    c.F.resize(q_, p_);
    for (int a = 0; a < p_; ++a) c.F.col(a) = back * (j_basis_[a] * xt);
    return c;
  }

  [[nodiscard]] Vec rhs(const Coefficients& c, const Vec& y) const {
    const auto zeta = y.segment(0, p_);
    const auto v = y.segment(2 * p_, q_);
    const auto w = y.segment(2 * p_ + q_, q_);
    Vec d(dim());
    d.segment(0, p_).setZero();
    d.segment(p_, p_) = zeta + c.L * v;
    d.segment(2 * p_, q_) = w;
    d.segment(2 * p_ + q_, q_) = c.F * zeta - geo_.J() * w;
    return d;
  }

  [[nodiscard]] Vec rk4(const Coefficients& c0, const Coefficients& cm, const Coefficients& c1, const Vec& y,
                        double h) const {
    const Vec k1 = rhs(c0, y);
    const Vec k2 = rhs(cm, y + 0.5 * h * k1);
    const Vec k3 = rhs(cm, y + 0.5 * h * k2);
    const Vec k4 = rhs(c1, y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  [[nodiscard]] Vec initial(int column) const {
    Vec y = Vec::Zero(dim());
    if (column < p_)
      y(column) = 1.0;
    else
      y(2 * p_ + q_ + (column - p_)) = 1.0;
    return y;
  }

 private:
  const GeodesicSpec& geo_;
  int p_;
  int q_;
  std::vector<Mat> j_basis_;
};

std::pair<double, double> extreme_singular_values(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  const Vec& s = svd.singularValues();
  return {s(s.size() - 1), s(0)};
}

double sigma_min_at(const GeodesicSpec& geo, const Propagator& prop, double t) {
  return extreme_singular_values(propagator_at(geo, prop, t)).first;
}

double golden_min(const GeodesicSpec& geo, const Propagator& prop, double a, double b, double tol) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = sigma_min_at(geo, prop, c);
  double fd = sigma_min_at(geo, prop, d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = sigma_min_at(geo, prop, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = sigma_min_at(geo, prop, d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

Mat Propagator::matrix(std::size_t k) const { return state.at(k).middleRows(dim_center, dim_center + dim_v); }

int default_steps(double t_max) { return std::max(100, static_cast<int>(std::ceil(256.0 * t_max))); }

Propagator integrate_propagator(const GeodesicSpec& geo, double t_max, int steps, Execution exec) {
  if (steps < 100) throw Error(ErrorCode::InvalidArgument, "steps must be at least 100");
  if (!(t_max > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_max must be positive");
  const System sys(geo);
  const bool parallel = exec == Execution::Parallel;
  const int n = steps + 2;
  const double h = t_max / steps;

  // Coefficients on the half-step grid.
  std::vector<Coefficients> coeff(2 * n + 1);
#pragma omp parallel for schedule(static) if (parallel)
  for (int k = 0; k <= 2 * n; ++k) coeff[k] = sys.at(0.5 * h * k);

  Propagator prop;
  prop.dim_center = sys.p();
  prop.dim_v = sys.q();
  prop.step = h;
  prop.times.resize(n + 1);
  for (int k = 0; k <= n; ++k) prop.times[k] = h * k;
  const int cols = sys.p() + sys.q();
  prop.state.assign(n + 1, Mat::Zero(sys.dim(), cols));

#pragma omp parallel for schedule(static) if (parallel)
  for (int c = 0; c < cols; ++c) {
    Vec y = sys.initial(c);
    prop.state[0].col(c) = y;
    for (int k = 0; k < n; ++k) {
      y = sys.rk4(coeff[2 * k], coeff[2 * k + 1], coeff[2 * k + 2], y, h);
      prop.state[k + 1].col(c) = y;
    }
  }
  return prop;
}

Mat propagator_at(const GeodesicSpec& geo, const Propagator& prop, double t) {
  const System sys(geo);
  const auto last = static_cast<long>(prop.times.size()) - 2;
  const long k = std::clamp(static_cast<long>(std::floor(t / prop.step)), 0L, last);
  const double t0 = prop.times[k];
  const double dt = t - t0;
  const Mat& s = prop.state[k];
  if (dt == 0.0) return s.middleRows(sys.p(), sys.p() + sys.q());
  const Coefficients c0 = sys.at(t0);
  const Coefficients cm = sys.at(t0 + 0.5 * dt);
  const Coefficients c1 = sys.at(t);
  Mat out(sys.p() + sys.q(), s.cols());
  for (Eigen::Index c = 0; c < s.cols(); ++c)
    out.col(c) = sys.rk4(c0, cm, c1, s.col(c), dt).segment(sys.p(), sys.p() + sys.q());
  return out;
}

SigmaScan sigma_scan(const Propagator& prop, Execution exec) {
  const bool parallel = exec == Execution::Parallel;
  const auto n = static_cast<long>(prop.times.size());
  SigmaScan scan;
  scan.times = prop.times;
  scan.sigma_min.resize(n);
  scan.sigma_max.resize(n);
#pragma omp parallel for schedule(static) if (parallel)
  for (long k = 0; k < n; ++k) {
    const auto [lo, hi] = extreme_singular_values(prop.matrix(k));
    scan.sigma_min[k] = lo;
    scan.sigma_max[k] = hi;
  }
  return scan;
}

void write_sigma_csv(std::ostream& out, const SigmaScan& scan) {
  const auto old = out.precision(17);
  out << "t,sigma_min,sigma_max\n";
  for (std::size_t k = 0; k < scan.times.size(); ++k)
    out << scan.times[k] << ',' << scan.sigma_min[k] << ',' << scan.sigma_max[k] << '\n';
  out.precision(old);
}

std::vector<DetectedTime> detect_conjugate(const GeodesicSpec& geo, double t_max, int steps, double rank_tol,
                                           Execution exec) {
  return detect_conjugate(geo, integrate_propagator(geo, t_max, steps, exec), t_max, rank_tol, exec);
}

namespace {

// Singular values at grid node k, or nothing off the grid (or at t = 0).
std::optional<Vec> node_singular_values(const Propagator& prop, long k) {
  if (k < 1 || k >= static_cast<long>(prop.times.size())) return std::nullopt;
  return Eigen::JacobiSVD<Mat>(prop.matrix(static_cast<std::size_t>(k))).singularValues();
}

}  // namespace

std::vector<DetectedTime> detect_conjugate(const GeodesicSpec& geo, const Propagator& prop, double t_max,
                                           double rank_tol, Execution exec) {
  const SigmaScan scan = sigma_scan(prop, exec);
  const auto n = scan.times.size();
  constexpr int kSub = 64;
  constexpr long kWindow = 8;
  constexpr double kDip = 0.1;

  std::vector<DetectedTime> found;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double s = scan.sigma_min[k];
    if (s > scan.sigma_min[k - 1] || s > scan.sigma_min[k + 1]) continue;
    if (s == scan.sigma_min[k - 1] && s == scan.sigma_min[k + 1]) continue;

    const auto below = node_singular_values(prop, static_cast<long>(k) - kWindow);
    const auto above = node_singular_values(prop, static_cast<long>(k) + kWindow);

    // Sub-scan the two neighbouring cells; close zeros can share a cell.
    const double lo = scan.times[k - 1];
    const double hi = scan.times[k + 1];
    std::vector<double> us(kSub + 1);
    std::vector<double> vals(kSub + 1);
    for (int j = 0; j <= kSub; ++j) {
      us[j] = lo + (hi - lo) * j / kSub;
      vals[j] = j == 0 ? scan.sigma_min[k - 1] : j == kSub ? scan.sigma_min[k + 1] : sigma_min_at(geo, prop, us[j]);
    }
    for (int j = 1; j < kSub; ++j) {
      if (vals[j] > vals[j - 1] || vals[j] > vals[j + 1]) continue;
      const double t = golden_min(geo, prop, us[j - 1], us[j + 1], 1e-9);
      Eigen::JacobiSVD<Mat> svd(propagator_at(geo, prop, t));
      const Vec& sv = svd.singularValues();
      const double threshold = rank_tol * sv(0);
      // A rank drop is a dip: the same singular value must be much larger a
      // few cells away. This rejects flat rounding noise once sigma_max has
      // grown far beyond sigma_min.
      auto dips = [&](Eigen::Index i) {
        for (const auto& nb : {below, above})
          if (nb && sv(i) > kDip * (*nb)(i)) return false;
        return true;
      };
      int mult = 0;
      for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) <= threshold && dips(i)) ++mult;
      if (mult > 0) found.push_back({t, mult, sv(sv.size() - 1), sv(0)});
    }
  }

  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  std::vector<DetectedTime> out;
  for (const auto& d : found) {
    if (!in_time_range(d.t, t_max)) continue;
    if (!out.empty() && d.t - out.back().t <= 1e-7) {
      if (d.sigma_min < out.back().sigma_min) out.back() = d;
      continue;
    }
    out.push_back(d);
  }
  return out;
}

ComparisonReport compare(const std::vector<ConjugateTime>& closed, const std::vector<DetectedTime>& detected,
                         double dt_tol) {
  ComparisonReport report;
  std::vector<bool> used(detected.size(), false);
  for (const auto& c : closed) {
    std::size_t best = detected.size();
    for (std::size_t i = 0; i < detected.size(); ++i) {
      if (used[i] || std::abs(detected[i].t - c.t) > dt_tol) continue;
      if (best == detected.size() || std::abs(detected[i].t - c.t) < std::abs(detected[best].t - c.t)) best = i;
    }
    if (best == detected.size()) {
      report.missing.push_back(c);
      continue;
    }
    used[best] = true;
    if (detected[best].multiplicity == c.multiplicity)
      report.matched.push_back({c, detected[best]});
    else
      report.multiplicity_mismatch.push_back({c, detected[best]});
  }
  for (std::size_t i = 0; i < detected.size(); ++i)
    if (!used[i]) report.spurious.push_back(detected[i]);
  return report;
}

}  // namespace nilconj

namespace nilconj {

std::vector<RandomCase> random_cases(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> magnitude(0.3, 1.0);
  std::bernoulli_distribution negative(0.5);
  auto component = [&] { return (negative(rng) ? -1.0 : 1.0) * magnitude(rng); };

  const auto names = fixture_names();
  std::vector<RandomCase> out;
  for (int i = 0; i < count; ++i) {
    const MetricLieAlgebra alg = fixture(names[i % names.size()]);
    // Central, horizontal, then mixed where the center is a line.
    int kind = static_cast<int>((i / names.size()) % 3);
    if (kind == 2 && alg.dim_center() != 1) kind = i % 2;
    RandomCase c;
    c.algebra = alg.name();
    c.z0 = Vec::Zero(alg.dim_center());
    c.x0 = Vec::Zero(alg.dim_v());
    if (kind != 1)
      for (auto& x : c.z0) x = component();
    if (kind != 0)
      for (auto& x : c.x0) x = component();
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace nilconj
