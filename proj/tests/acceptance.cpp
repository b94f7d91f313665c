#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "nilconj/cli.hpp"
#include "nilconj/conjugate.hpp"
#include "nilconj/linalg.hpp"
#include "nilconj/locus.hpp"
#include "nilconj/oracle.hpp"
#include "nilconj/spectral.hpp"
#include "support.hpp"

using namespace nilconj;

namespace {

constexpr double kPi = std::numbers::pi;
const double kTwoSqrt3 = 2.0 * std::sqrt(3.0);

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::string failures;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    failures += (pass ? "" : "; ") + what;
    pass = false;
  }
};

Vec random_vec(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

AlgebraElement random_element(const MetricLieAlgebra& alg, std::mt19937_64& rng) {
  return {random_vec(alg.dim_center(), rng), random_vec(alg.dim_v(), rng)};
}

std::string sci(double x) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(2) << x;
  return s.str();
}

std::vector<DetectedTime> oracle(const GeodesicSpec& geo, double t_max) {
  return detect_conjugate(geo, t_max, default_steps(t_max));
}

GeodesicSpec geodesic(const char* name, Vec z0, Vec x0) { return GeodesicSpec(fixture(name), std::move(z0), std::move(x0)); }

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

// Closed-form times must match the expected list exactly in count and
// multiplicity and within tol in t; the oracle must agree within oracle_tol.
void expect_times(Outcome& o, const std::string& label, const GeodesicSpec& geo, double t_max,
                  const std::vector<std::pair<double, int>>& expected, double tol, double oracle_tol) {
  const auto closed = conjugate_times(geo, t_max);
  bool ok = closed.size() == expected.size();
  for (std::size_t k = 0; ok && k < closed.size(); ++k)
    ok = std::abs(closed[k].t - expected[k].first) <= tol && closed[k].multiplicity == expected[k].second;
  o.require(ok, label + " closed form");
  o.require(compare(closed, oracle(geo, t_max), oracle_tol).ok(), label + " oracle");
}

Outcome criterion1() {
  Outcome o;
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (const auto& name : fixture_names()) {
    const auto alg = fixture(name);
    for (int i = 0; i < 1000; ++i) {
      const auto x = random_element(alg, rng);
      const auto y = random_element(alg, rng);
      const auto w = random_element(alg, rng);
      const double torsion = (connection(alg, x, y) - connection(alg, y, x) - bracket(alg, x, y)).max_abs();
      const double metric = std::abs(inner(alg, connection(alg, x, y), w) + inner(alg, y, connection(alg, x, w)));
      const auto commutator = connection(alg, x, connection(alg, y, w)) - connection(alg, y, connection(alg, x, w)) -
                              connection(alg, bracket(alg, x, y), w);
      const double tables = (curvature(alg, x, y, w) - commutator).max_abs();
      worst = std::max({worst, torsion, metric, tables});
    }
  }
  o.require(worst <= 1e-12, "max error " + sci(worst));
  o.detail << " max error " << sci(worst) << " (tol 1e-12)";
  return o;
}

// For any field Y = z + e^{tJ} v and any constant zeta, the Jacobi defect
// is expressed through the yj residual r: its center part is r_z' and its
// v part is r_v - J_{r_z} x'.
Outcome criterion2() {
  Outcome o;
  std::mt19937_64 rng(202);
  double worst = 0.0;
  const double h = 1e-3;
  for (const auto& name : fixture_names()) {
    const auto alg = fixture(name);
    const int p = alg.dim_center();
    const int q = alg.dim_v();
    for (int i = 0; i < 100; ++i) {
      const GeodesicSpec geo(alg, random_vec(p, rng), random_vec(q, rng));
      Mat zc(p, 4);
      Mat vc(q, 4);
      for (int d = 0; d < 4; ++d) {
        zc.col(d) = random_vec(p, rng);
        vc.col(d) = random_vec(q, rng);
      }
      const FieldFunction f = [zc, vc](double t) {
        const Vec powers = vec({1.0, t, t * t, t * t * t});
        return FrameValue{zc * powers, vc * powers};
      };
      const Vec zeta = random_vec(p, rng);
      const double t = 0.2 + 3.0 * std::abs(random_vec(1, rng)(0));
      auto rz = [&](double s) { return Vec(yj_residual(geo, f, zeta, s, h).z); };
      const Vec rz_dot = (rz(t - 2 * h) - 8.0 * rz(t - h) + 8.0 * rz(t + h) - rz(t + 2 * h)) / (12.0 * h);
      const YjResidual r = yj_residual(geo, f, zeta, t, h);
      const AlgebraElement defect = jacobi_defect(geo, f, t, h);
      const Vec v_part = r.v - j_map(alg, r.z) * geo.horizontal_velocity(t);
      worst = std::max({worst, (defect.z - rz_dot).cwiseAbs().maxCoeff(), (defect.v - v_part).cwiseAbs().maxCoeff()});
    }
  }
  o.require(worst <= 1e-6, "max error " + sci(worst));
  o.detail << " max error " << sci(worst) << " (tol 1e-6)";
  return o;
}

Outcome criterion3() {
  Outcome o;
  const double t_max = 13.0;
  expect_times(o, "heis3", geodesic("heis3", vec({1}), Vec::Zero(2)), t_max, {{2 * kPi, 2}, {4 * kPi, 2}}, 1e-12,
               1e-6);
  expect_times(o, "heis5w", geodesic("heis5w", vec({1}), Vec::Zero(4)), t_max,
               {{kPi, 2}, {2 * kPi, 4}, {3 * kPi, 2}, {4 * kPi, 4}}, 1e-12, 1e-6);
  o.detail << " heis3 {2pi, 4pi} x2, heis5w {pi..4pi} x{2,4,2,4}, oracle tol 1e-6";
  return o;
}

Outcome criterion4() {
  Outcome o;
  expect_times(o, "pheis3", geodesic("pheis3", vec({0}), unit(2, 0)), 10.0, {{kTwoSqrt3, 1}}, 1e-10, 1e-6);
  expect_times(o, "bicenter", geodesic("bicenter", vec({0, 0}), unit(3, 0)), 10.0, {{kTwoSqrt3, 1}}, 1e-10, 1e-6);
  expect_times(o, "heis3", geodesic("heis3", vec({0}), unit(2, 0)), 50.0, {}, 0.0, 1e-6);
  o.detail << " pheis3, bicenter t = 2 sqrt 3; heis3 none on (0, 50]";
  return o;
}

Outcome criterion5() {
  Outcome o;
  // u coth u = 2 with t = 2u, by plain bisection.
  double lo = 1.0;
  double hi = 3.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid / std::tanh(mid) < 2.0 ? lo : hi) = mid;
  }
  const double root = lo + hi;
  const auto ph = geodesic("pheis3", vec({1}), unit(2, 0));
  const auto closed = conjugate_times(ph, 10.0);
  o.require(closed.size() == 1 && std::abs(closed[0].t - root) <= 1e-9 && closed[0].multiplicity == 1,
            "pheis3 closed form");
  o.require(compare(closed, oracle(ph, 10.0), 1e-5).ok(), "pheis3 oracle");

  const auto hm = geodesic("heis3", vec({1}), unit(2, 0));
  const double t_max = 4 * kPi - 1e-3;
  const auto times = conjugate_times(hm, t_max);
  const bool shape = times.size() == 2 && std::abs(times[0].t - 2 * kPi) <= 1e-10 && times[0].multiplicity == 1 &&
                     times[0].branch == Branch::Lattice && times[1].branch == Branch::Transcendental &&
                     times[1].t > 2 * kPi && times[1].t < 4 * kPi && times[1].multiplicity == 1;
  o.require(shape, "heis3 closed form");
  o.require(compare(times, oracle(hm, t_max), 1e-5).ok(), "heis3 oracle");
  o.detail << " pheis3 t = " << std::setprecision(12) << root;
  if (shape) o.detail << ", heis3 t = 2pi and " << times[1].t;
  return o;
}

Outcome criterion6() {
  Outcome o;
  struct Case {
    GeodesicSpec geo;
    double t_max;
  };
  std::vector<Case> cases{
      {geodesic("heis3", vec({1}), Vec::Zero(2)), 13.0},     {geodesic("heis5w", vec({1}), Vec::Zero(4)), 13.0},
      {geodesic("pheis3", vec({0}), unit(2, 0)), 10.0},      {geodesic("bicenter", vec({0, 0}), unit(3, 0)), 10.0},
      {geodesic("pheis3", vec({1}), unit(2, 0)), 10.0},      {geodesic("heis3", vec({1}), unit(2, 0)), 12.0},
      {geodesic("heis5w", vec({1}), vec({0.5, 0, 0.5, 0})), 13.0},
  };
  for (const auto& c : random_cases(40, 606)) cases.push_back({GeodesicSpec(fixture(c.algebra), c.z0, c.x0), c.t_max});

  ConjugateOptions opts;
  opts.attach_witnesses = true;
  int count = 0;
  double start = 0.0;
  double end = 0.0;
  double yj = 0.0;
  for (const auto& c : cases) {
    for (const auto& ct : conjugate_times(c.geo, c.t_max, opts)) {
      ++count;
      if (!ct.certificate) {
        o.require(false, "missing witness at t = " + std::to_string(ct.t));
        continue;
      }
      const JacobiField& f = *ct.certificate;
      const auto& s0 = f.samples[f.nearest(0.0)];
      const auto& s1 = f.samples[f.nearest(ct.t)];
      start = std::max(start, std::hypot(s0.z.norm(), s0.v.norm()));
      end = std::max(end, std::hypot(s1.z.norm(), s1.v.norm()));
      for (std::size_t k = 2; k + 2 < f.samples.size(); k += 7) yj = std::max(yj, yj_residual(c.geo, f, f.samples[k].t).max_abs());
    }
  }
  o.require(start == 0.0, "|Y(0)| = " + sci(start));
  o.require(end <= 1e-8, "|Y(t0)| = " + sci(end));
  o.require(yj <= 1e-6, "yj residual " + sci(yj));
  o.detail << " " << count << " witnesses, max |Y(t0)| " << sci(end) << ", max yj residual " << sci(yj);
  return o;
}

Outcome criterion7() {
  Outcome o;
  std::mt19937_64 rng(707);
  std::uniform_int_distribution<int> pick_n(1, 3);
  int kernel_bad = 0;
  int image_bad = 0;
  int draws = 0;
  for (const auto& name : fixture_names()) {
    const auto alg = fixture(name);
    const int q = alg.dim_v();
    const Mat id = Mat::Identity(q, q);
    for (int i = 0; i < 125; ++i, ++draws) {
      const Mat j = j_map(alg, random_vec(alg.dim_center(), rng));
      const Spectrum s = spectrum(j);
      double t = 0.3 + 5.0 * std::abs(random_vec(1, rng)(0));
      if (i % 2 == 0 && !s.neg.empty()) t = 2.0 * kPi * pick_n(rng) / s.neg[i % s.neg.size()].lambda;

      // ker(e^{tJ} - I) is the lattice kernel plus ker J.
      const Mat e = expm(t * j) - id;
      const Mat numeric = null_space(e, 1e-8, std::max(1.0, (e + id).norm()));
      const Mat ker_j = null_space(j, 1e-10, 1.0);
      const Mat lk = lattice_kernel(s, t);
      Mat both(q, lk.cols() + ker_j.cols());
      both << lk, ker_j;
      if (numerical_rank(both) != numeric.cols() || subspace_distance(column_space(both), numeric) > 1e-6) ++kernel_bad;

      Vec x = random_vec(q, rng);
      const Mat em = expm(-t * j) - id;
      if (i % 3 == 0) x = em * random_vec(q, rng) / t;
      const auto m = image_membership(j, t, x, alg.gram_v());
      const bool solvable = testing::least_squares_solvable(em, t * x, std::max(1.0, (em + id).norm()));
      if (m.is_member != solvable) ++image_bad;
    }
  }
  o.require(kernel_bad == 0, std::to_string(kernel_bad) + " kernel mismatches");
  o.require(image_bad == 0, std::to_string(image_bad) + " image mismatches");
  o.detail << " " << draws << " draws, kernel mismatches " << kernel_bad << ", image mismatches " << image_bad;
  return o;
}

Outcome criterion8() {
  Outcome o;
  const auto alg = fixture("pheis3");
  std::vector<double> grid;
  for (int i = -8; i <= 8; ++i) grid.push_back(0.025 * i);
  const auto track = continuation(alg, unit(2, 0), grid);
  double ratio = 0.0;
  bool bound = true;
  int confirmed = 0;
  for (const auto& s : track) {
    const double gap = std::abs(s.t - kTwoSqrt3);
    bound = bound && gap <= 0.5 * s.a * s.a;
    if (s.a != 0.0) ratio = std::max(ratio, gap / (s.a * s.a));
    const FamilyMember m = family_member(alg, s.x0, s.a);
    const GeodesicSpec g(alg, m.z0, m.x0);
    const double t_max = s.t + 0.5;
    bool hit = false;
    for (const auto& d : oracle(g, t_max)) hit = hit || std::abs(d.t - s.t) <= 1e-5;
    confirmed += hit ? 1 : 0;
  }
  o.require(bound, "|t(a) - 2 sqrt 3| exceeds 0.5 a^2");
  o.require(confirmed == static_cast<int>(track.size()), "oracle missed samples");
  o.detail << " max |t(a) - 2 sqrt 3| / a^2 = " << std::setprecision(4) << ratio << " (bound 0.5) over |a| <= 0.2,"
           << " oracle confirmed " << confirmed << "/" << track.size() << " within 1e-5";
  return o;
}

Outcome criterion9() {
  Outcome o;
  // Products with a line whose central direction is not hit by any bracket,
  // so that J_{z0} = 0 for a nonzero z0.
  std::vector<GeodesicSpec> cases;
  for (const auto& name : fixture_names()) {
    const auto alg = fixture(name);
    cases.emplace_back(alg, Vec::Zero(alg.dim_center()), Vec::Zero(alg.dim_v()));
  }
  for (double sign : {1.0, -1.0}) {
    Mat gram = Mat::Identity(4, 4);
    gram(1, 1) = sign;
    Mat c1 = Mat::Zero(2, 2);
    c1(0, 1) = 1.0;
    c1(1, 0) = -1.0;
    const MetricLieAlgebra alg("heis3xR", gram, {c1, Mat::Zero(2, 2)});
    cases.emplace_back(alg, vec({0, 1}), Vec::Zero(2));
  }
  const double t_max = 50.0;
  double c = std::numeric_limits<double>::infinity();
  int detected = 0;
  for (const auto& g : cases) {
    o.require(j_map(g.algebra(), g.z0()).isZero(0.0), "J_z0 != 0");
    const Propagator prop = integrate_propagator(g, t_max, default_steps(t_max));
    const SigmaScan scan = sigma_scan(prop);
    for (std::size_t k = 1; k < scan.times.size(); ++k) c = std::min(c, scan.sigma_min[k] / scan.times[k]);
    detected += static_cast<int>(detect_conjugate(g, prop, t_max).size());
  }
  o.require(detected == 0, std::to_string(detected) + " rank drops");
  o.require(c > 0.0, "c = " + sci(c));
  o.detail << " " << cases.size() << " geodesics, sigma_min >= " << std::setprecision(6) << c << " t";
  return o;
}

Outcome criterion10() {
  Outcome o;
  const std::uint64_t seed = 1010;
  int bad = 0;
  const auto cases = random_cases(200, seed);
  for (const auto& c : cases) {
    const GeodesicSpec g(fixture(c.algebra), c.z0, c.x0);
    if (!compare(conjugate_times(g, c.t_max), oracle(g, c.t_max), 1e-5).ok()) ++bad;
  }
  o.require(bad == 0, std::to_string(bad) + " discrepancies");
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run({"compare", "--random", "200", "--seed", std::to_string(seed)}, out, err);
  o.require(code == 0, "compare exited with " + std::to_string(code));
  o.detail << " " << cases.size() << " geodesics, " << bad << " discrepancies, compare exit " << code;
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"connection and curvature identities", criterion1},
      {"Jacobi reformulation", criterion2},
      {"central geodesics", criterion3},
      {"horizontal geodesics", criterion4},
      {"mixed geodesics", criterion5},
      {"witness fields", criterion6},
      {"lattice kernel and image membership", criterion7},
      {"continuation near a = 0", criterion8},
      {"flat geodesics", criterion9},
      {"random cross-validation", criterion10},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << ":" << o.detail.str();
    if (!o.pass) std::cout << " | failed: " << o.failures;
    std::cout << " [" << std::fixed << std::setprecision(1) << secs << "s]" << std::defaultfloat << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
