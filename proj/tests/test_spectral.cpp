#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nilconj/spectral.hpp"
#include "support.hpp"

using namespace nilconj;
using nilconj::testing::random_vec;

namespace {

Mat j_of(const char* name) { return j_map(fixture(name), Vec::Ones(fixture(name).dim_center())); }

}  // namespace

TEST_SUITE("spectral") {
  TEST_CASE("spectrum examples") {
    const Spectrum h = spectrum(j_of("heis3"));
    REQUIRE(h.neg.size() == 1);
    CHECK(h.neg[0].lambda == doctest::Approx(1.0));
    CHECK(h.neg[0].mult == 2);
    CHECK(h.pos.empty());
    CHECK(h.zero_mult == 0);
    CHECK(h.diagonalizable);

    const Spectrum p = spectrum(j_of("pheis3"));
    CHECK(p.neg.empty());
    REQUIRE(p.pos.size() == 1);
    CHECK(p.pos[0].lambda == doctest::Approx(1.0));
    CHECK(p.pos[0].mult == 2);
    CHECK(p.diagonalizable);

    const Spectrum w = spectrum(j_of("heis5w"));
    REQUIRE(w.neg.size() == 2);
    CHECK(w.neg[0].lambda == doctest::Approx(1.0));
    CHECK(w.neg[1].lambda == doctest::Approx(2.0));
    CHECK(w.neg[0].mult == 2);
    CHECK(w.neg[1].mult == 2);

    const Spectrum zero = spectrum(Mat::Zero(3, 3));
    CHECK(zero.zero_mult == 3);
    CHECK(zero.diagonalizable);
  }

  TEST_CASE("nilpotent J is not diagonalizable") {
    Mat n = Mat::Zero(3, 3);
    n(0, 1) = 1.0;
    n(1, 2) = 1.0;
    const Spectrum s = spectrum(n);
    CHECK(s.zero_mult == 3);
    CHECK(s.zero_plain == 2);
    CHECK_FALSE(s.diagonalizable);
  }

  TEST_CASE("lattice kernel examples") {
    const Mat jh = j_of("heis3");
    CHECK(lattice_kernel(jh, 2.0 * std::numbers::pi).cols() == 2);
    CHECK(lattice_kernel(jh, std::numbers::pi).cols() == 0);
    const Mat jw = j_of("heis5w");
    const Mat k = lattice_kernel(jw, std::numbers::pi);
    CHECK(k.cols() == 2);
    CHECK((jw * jw * k + 4.0 * k).norm() <= 1e-12);
  }

  TEST_CASE("lattice kernel equals the numerical kernel") {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> pick_n(1, 3);
    int skipped = 0;
    for (const auto& alg : nilconj::testing::test_algebras()) {
      for (int i = 0; i < 20; ++i) {
        const Mat j = j_map(alg, random_vec(alg.dim_center(), rng));
        const Spectrum s = spectrum(j);
        // Hit a lattice time half of the time.
        double t = 0.3 + 5.0 * std::abs(random_vec(1, rng)(0));
        if (i % 2 == 0 && !s.neg.empty()) t = 2.0 * std::numbers::pi * pick_n(rng) / s.neg[i % s.neg.size()].lambda;
        const Mat e = expm(t * j) - Mat::Identity(j.rows(), j.rows());
        // Past this growth the numerical kernel drowns in rounding.
        if (e.norm() > 1e6) {
          ++skipped;
          continue;
        }
        const Mat numeric = null_space(e, 1e-8, std::max(1.0, (e + Mat::Identity(j.rows(), j.rows())).norm()));
        const Mat ker_j = null_space(j, 1e-10, 1.0);
        // The numerical kernel also contains ker J; compare modulo that part.
        Mat lk = lattice_kernel(s, t);
        Mat both(j.rows(), lk.cols() + ker_j.cols());
        both << lk, ker_j;
        CHECK(numerical_rank(both) == numeric.cols());
        CHECK(subspace_distance(column_space(both), numeric) <= 1e-6);
      }
    }
    CHECK(skipped <= 10);
  }

  TEST_CASE("image membership examples") {
    const Mat jh = j_of("heis3");
    const Mat g = Mat::Identity(2, 2);
    CHECK_FALSE(image_membership(jh, 2.0 * std::numbers::pi, unit(2, 0), g).is_member);
    const auto m = image_membership(jh, std::numbers::pi, unit(2, 0), g);
    REQUIRE(m.is_member);
    CHECK((m.preimage + 0.5 * std::numbers::pi * unit(2, 0)).norm() <= 1e-12);
    const auto any = image_membership(j_of("pheis3"), 1.3, (Vec(2) << 0.2, 0.9).finished(),
                                      fixture("pheis3").gram_v());
    CHECK(any.is_member);
  }

  TEST_CASE("image membership agrees with least squares") {
    std::mt19937_64 rng(9);
    for (const auto& alg : nilconj::testing::test_algebras()) {
      for (int i = 0; i < 30; ++i) {
        const Mat j = j_map(alg, random_vec(alg.dim_center(), rng));
        const Spectrum s = spectrum(j);
        double t = 0.5 + 3.0 * std::abs(random_vec(1, rng)(0));
        if (i % 2 == 0 && !s.neg.empty()) t = 2.0 * std::numbers::pi / s.neg[0].lambda;
        Vec x = random_vec(alg.dim_v(), rng);
        // Every third draw lies in the image by construction.
        const Mat e = expm(-t * j) - Mat::Identity(j.rows(), j.rows());
        if (i % 3 == 0) x = e * random_vec(alg.dim_v(), rng) / t;
        const auto m = image_membership(j, t, x, alg.gram_v());
        const double scale = std::max(1.0, (e + Mat::Identity(j.rows(), j.rows())).norm());
        const bool solvable = nilconj::testing::least_squares_solvable(e, t * x, scale);
        CHECK(m.is_member == solvable);
        if (m.is_member) CHECK(m.residual <= 1e-8 * (1.0 + x.norm()));
      }
    }
  }

  TEST_CASE("A operator examples") {
    const auto h = a_operator(fixture("heis3"), unit(2, 0));
    CHECK(h.matrix(0, 0) == doctest::Approx(1.0));
    CHECK(h.negative.empty());
    const auto p = a_operator(fixture("pheis3"), unit(2, 0));
    CHECK(p.matrix(0, 0) == doctest::Approx(-1.0));
    REQUIRE(p.negative.size() == 1);
    CHECK(p.negative[0].value == doctest::Approx(-1.0));
    const auto b = a_operator(fixture("bicenter"), unit(3, 0));
    CHECK((b.matrix - Eigen::Vector2d(1.0, -1.0).asDiagonal().toDenseMatrix()).norm() <= 1e-15);
    REQUIRE(b.negative.size() == 1);
    CHECK(b.negative[0].mult == 1);
  }

  TEST_CASE("A operator quadratic form") {
    std::mt19937_64 rng(10);
    for (const auto& alg : nilconj::testing::test_algebras()) {
      for (int i = 0; i < 50; ++i) {
        const Vec x0 = random_vec(alg.dim_v(), rng);
        const Vec z = random_vec(alg.dim_center(), rng);
        const Mat a = a_operator(alg, x0).matrix;
        const Vec jx = j_map(alg, z) * x0;
        CHECK(std::abs(inner_center(alg, a * z, z) - inner_v(alg, jx, jx)) <= 1e-12);
      }
    }
  }

  TEST_CASE("spectrum completeness") {
    std::mt19937_64 rng(11);
    for (const auto& alg : nilconj::testing::test_algebras()) {
      for (int i = 0; i < 20; ++i) {
        const Spectrum s = spectrum(j_map(alg, random_vec(alg.dim_center(), rng)));
        int dims = s.zero_mult + s.complex_dim;
        for (const auto& b : s.neg) dims += b.algebraic_mult;
        for (const auto& b : s.pos) dims += b.algebraic_mult;
        CHECK(dims == alg.dim_v());
        if (s.diagonalizable) {
          int plain = s.zero_plain;
          for (const auto& b : s.neg) plain += b.mult;
          for (const auto& b : s.pos) plain += b.mult;
          CHECK(plain == alg.dim_v());
        }
      }
    }
  }

  TEST_CASE("rational multiples") {
    CHECK(is_positive_multiple(1.0, 2.0));
    CHECK(is_positive_multiple(0.5, 1.5));
    CHECK_FALSE(is_positive_multiple(2.0, 1.0));
    CHECK_FALSE(is_positive_multiple(1.0, std::sqrt(2.0)));
    CHECK_FALSE(is_positive_multiple(1.0, -1.0));
  }
}
