#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "nilconj/error.hpp"
#include "nilconj/locus.hpp"
#include "nilconj/oracle.hpp"
#include "support.hpp"

using namespace nilconj;

namespace {

const double kTwoSqrt3 = 2.0 * std::sqrt(3.0);

ErrorCode error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_SUITE("locus") {
  TEST_CASE("delta examples") {
    CHECK(delta(fixture("pheis3"), unit(2, 0)).value() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_FALSE(delta(fixture("heis3"), unit(2, 0)).has_value());
    CHECK_FALSE(delta(fixture("pheis3"), Vec::Zero(2)).has_value());
    CHECK(error_of([] { (void)delta(fixture("bicenter"), unit(3, 0)); }) == ErrorCode::CenterNotLine);
  }

  TEST_CASE("delta agrees with -eps <Jx0, Jx0>") {
    std::mt19937_64 rng(17);
    for (const char* name : {"heis3", "pheis3", "heis5w"}) {
      const auto alg = fixture(name);
      const CenterLine line = center_line(alg);
      for (int i = 0; i < 50; ++i) {
        const Vec x0 = nilconj::testing::random_vec(alg.dim_v(), rng);
        const Vec jx = j_map(alg, line.z) * x0;
        const double d2 = -line.epsilon * inner_v(alg, jx, jx);
        const auto d = delta(alg, x0);
        CHECK(d.has_value() == (d2 > 0));
        if (d) CHECK(*d * *d == doctest::Approx(d2).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("delta needs a diagonalizable J^2") {
    // Null basis on v where J_z is nilpotent.
    Mat gram = Mat::Zero(4, 4);
    gram(0, 0) = 1.0;
    gram(1, 3) = gram(3, 1) = 1.0;
    gram(2, 2) = 1.0;
    Mat c = Mat::Zero(3, 3);
    c(0, 1) = 1.0;
    c(1, 0) = -1.0;
    const MetricLieAlgebra alg("nilpotent", gram, {c});
    const Mat j = j_map(alg, Vec::Ones(1));
    REQUIRE((j * j * j).isZero(1e-14));
    REQUIRE_FALSE((j * j).isZero(1e-14));
    CHECK(error_of([&] { (void)delta(alg, unit(3, 1)); }) == ErrorCode::NotDiagonalizable);
  }

  TEST_CASE("sample_Z examples") {
    const auto p = sample_Z(fixture("pheis3"), {unit(2, 0)});
    REQUIRE(p.size() == 1);
    CHECK(p[0].t == doctest::Approx(kTwoSqrt3).epsilon(1e-14));
    CHECK((p[0].point.v - kTwoSqrt3 * unit(2, 0)).norm() <= 1e-12);
    CHECK(p[0].point.z.norm() <= 1e-12);
    CHECK(p[0].delta > 0.0);

    CHECK(sample_Z(fixture("heis3"), direction_grid(2, 24)).empty());

    const auto b = sample_Z(fixture("bicenter"), {unit(3, 0)});
    REQUIRE(b.size() == 1);
    CHECK((b[0].point.v - kTwoSqrt3 * unit(3, 0)).norm() <= 1e-12);
  }

  TEST_CASE("both Z paths agree on pheis3") {
    const auto alg = fixture("pheis3");
    const auto dirs = direction_grid(2, 64);
    const auto a = sample_Z(alg, dirs, ZPath::Delta);
    const auto b = sample_Z(alg, dirs, ZPath::Polynomial);
    REQUIRE(a.size() == b.size());
    REQUIRE_FALSE(a.empty());
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(std::abs(a[k].t - b[k].t) <= 1e-10);
      CHECK((a[k].point - b[k].point).max_abs() <= 1e-10);
    }
  }

  TEST_CASE("family speeds per causal class") {
    const auto alg = fixture("pheis3");
    const double eps = center_line(alg).epsilon;
    for (double a : {0.0, 0.1, -0.3}) {
      CHECK(family_member(alg, unit(2, 0), a).speed == doctest::Approx(eps));
      CHECK(family_member(alg, unit(2, 1), a).speed == doctest::Approx(-eps));
      CHECK(family_member(alg, Vec::Ones(2), a).speed == doctest::Approx(a * a * eps));
    }
  }

  TEST_CASE("continuation") {
    const auto alg = fixture("pheis3");
    const auto zero = continuation(alg, unit(2, 0), {0.0});
    CHECK(zero[0].t == doctest::Approx(kTwoSqrt3).epsilon(1e-14));

    const std::vector<double> grid{-0.2, -0.1, -0.05, -0.025, 0.025, 0.05, 0.1, 0.2};
    const auto track = continuation(alg, unit(2, 0), grid);
    REQUIRE(track.size() == grid.size());
    for (std::size_t k = 0; k + 1 < 4; ++k)
      CHECK(std::abs(track[k].t - kTwoSqrt3) > std::abs(track[k + 1].t - kTwoSqrt3));
    for (std::size_t k = 4; k + 1 < grid.size(); ++k)
      CHECK(std::abs(track[k].t - kTwoSqrt3) < std::abs(track[k + 1].t - kTwoSqrt3));
    // |t(a) - t(0)| <= C a^2 with a fixed C.
    for (const auto& s : track) CHECK(std::abs(s.t - kTwoSqrt3) <= 3.0 * s.a * s.a);

    CHECK(error_of([&] { (void)continuation(fixture("heis3"), unit(2, 0), {0.1}); }) == ErrorCode::InvalidArgument);
    CHECK(error_of([&] { (void)continuation(alg, unit(2, 0), {0.9}); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("continuation samples are smooth and oracle confirmed") {
    const auto alg = fixture("pheis3");
    std::vector<double> grid;
    for (int i = -8; i <= 8; ++i) grid.push_back(0.025 * i);
    const auto track = continuation(alg, unit(2, 0), grid);
    for (std::size_t k = 1; k + 1 < track.size(); ++k) {
      const double second = (track[k + 1].t - 2 * track[k].t + track[k - 1].t) / (0.025 * 0.025);
      CHECK(std::abs(second) <= 10.0);
    }
    for (const auto& s : track) {
      if (s.a == 0.0) continue;
      const FamilyMember m = family_member(alg, s.x0, s.a);
      const GeodesicSpec g(alg, m.z0, m.x0);
      const double t_max = s.t + 0.5;
      bool confirmed = false;
      for (const auto& d : detect_conjugate(g, t_max, default_steps(t_max)))
        confirmed = confirmed || std::abs(d.t - s.t) <= 1e-5;
      CHECK(confirmed);
    }
  }

  TEST_CASE("null direction family") {
    const auto alg = fixture("pheis3");
    // x0 = e1 + e2 is null; Delta = 0 here, so the family has no anchor.
    CHECK_FALSE(delta(alg, Vec::Ones(2)).has_value());
  }

  TEST_CASE("CSV export") {
    std::ostringstream empty;
    write_samples_csv(empty, {});
    CHECK(empty.str() == "a,t,delta\n");

    const auto track = continuation(fixture("pheis3"), unit(2, 0), {-0.1, 0.0, 0.1});
    std::stringstream ss;
    write_samples_csv(ss, track);
    const auto back = read_samples_csv(ss, 1, 2);
    REQUIRE(back.size() == track.size());
    for (std::size_t k = 0; k < track.size(); ++k) {
      CHECK(std::abs(back[k].a - track[k].a) <= 1e-15);
      CHECK(std::abs(back[k].t - track[k].t) <= 1e-15);
      CHECK(std::abs(back[k].delta - track[k].delta) <= 1e-15);
      CHECK((back[k].point - track[k].point).max_abs() <= 1e-15);
      CHECK((back[k].x0 - track[k].x0).cwiseAbs().maxCoeff() <= 1e-15);
    }
  }

  TEST_CASE("OBJ export") {
    const auto one = sample_Z(fixture("pheis3"), {unit(2, 0)});
    std::ostringstream os;
    write_samples_obj(os, one);
    std::istringstream is(os.str());
    int vertices = 0;
    for (std::string line; std::getline(is, line);) vertices += line.rfind("v ", 0) == 0;
    CHECK(vertices == 1);
    std::ostringstream bad;
    CHECK_THROWS_AS(write_samples_obj(bad, sample_Z(fixture("bicenter"), {unit(3, 0)})), Error);
  }

  TEST_CASE("export to a file") {
    const auto path = (std::filesystem::temp_directory_path() / "nilconj_locus_test.csv").string();
    export_samples(sample_Z(fixture("pheis3"), {unit(2, 0)}), path, ExportFormat::Csv);
    CHECK(std::filesystem::exists(path));
    std::filesystem::remove(path);
    CHECK(error_of([] { export_samples({}, "/nonexistent/dir/x.csv", ExportFormat::Csv); }) == ErrorCode::IoError);
  }

  TEST_CASE("direction grids") {
    CHECK(direction_grid(2, 8).size() == 8);
    const auto s = direction_grid(3, 100);
    for (const auto& v : s) CHECK(v.norm() == doctest::Approx(1.0));
    const auto a = direction_grid(5, 10, 3);
    const auto b = direction_grid(5, 10, 3);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);
  }
}
