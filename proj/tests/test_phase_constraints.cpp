#include <doctest.h>

#include "risbeam/phase_constraints.hpp"
#include "test_helpers.hpp"

using namespace risbeam;

TEST_CASE("alphabet values are unit modulus and offset by half a step") {
  for (int l : {2, 3, 4, 8, 16, 64}) {
    const auto a = alphabet(l);
    REQUIRE(a.values.size() == static_cast<std::size_t>(l));
    for (int k = 0; k < l; ++k) {
      CHECK(std::abs(a.values[k]) == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(a.phases[k] == doctest::Approx(2 * kPi * k / l + kPi / l));
    }
  }
  CHECK_THROWS_AS(alphabet(1), std::invalid_argument);
}

TEST_CASE("alphabet points are hull vertices and the origin is interior") {
  for (int l : {2, 3, 4, 8, 16}) {
    const auto a = alphabet(l);
    const auto hull = hull_halfplanes(a);
    for (cplx v : a.values) {
      CHECK(hull.contains(v, 1e-12));
      CHECK_FALSE(hull.contains(1.001 * v, 1e-9));
    }
    CHECK(hull.contains(0.0));
  }
}

TEST_CASE("hull membership matches convex combinations") {
  Rng rng(7);
  for (int l : {3, 4, 8}) {
    const auto a = alphabet(l);
    const auto hull = hull_halfplanes(a);
    for (int k = 0; k < 2000; ++k) {
      std::vector<double> wts(l);
      double s = 0;
      for (auto& x : wts) s += (x = -std::log(rng.uniform(1e-12, 1.0)));
      cplx p = 0;
      for (int i = 0; i < l; ++i) p += wts[i] / s * a.values[i];
      CHECK(hull.violation(p) < 1e-12);
    }
  }
}

TEST_CASE("polygon vertices are tight on their two edges") {
  for (const auto& region : {hull_halfplanes(alphabet(4)), hull_halfplanes(alphabet(2)), hull_halfplanes(alphabet(7)),
                             disc_polygon(RegionKind::ConstantModulus)}) {
    for (const auto& v : region.vertices) {
      const auto& ea = region.halfplanes[v.edge_a];
      const auto& eb = region.halfplanes[v.edge_b];
      CHECK(std::abs((std::conj(ea.normal) * v.point).real() - ea.offset) < 1e-12);
      CHECK(std::abs((std::conj(eb.normal) * v.point).real() - eb.offset) < 1e-12);
      CHECK(std::abs(std::imag(std::conj(ea.normal) * eb.normal)) > 1e-9);
    }
  }
}

TEST_CASE("disc polygon is inscribed in the unit circle") {
  const auto d = disc_polygon(RegionKind::PerElementPower);
  CHECK(d.vertices.size() == static_cast<std::size_t>(kDiscPolygonSides));
  for (const auto& v : d.vertices) CHECK(std::abs(v.point) == doctest::Approx(1.0));
  CHECK_FALSE(d.contains(cplx(1.01, 0.0)));
}

TEST_CASE("discrete projection picks the nearest alphabet value") {
  Rng rng(13);
  for (int l : {2, 4, 8, 64}) {
    const auto a = alphabet(l);
    for (int k = 0; k < 500; ++k) {
      const cplx w = rng.complex_normal(1.0);
      double best = 1e9;
      int idx = -1;
      for (int i = 0; i < l; ++i) {
        const double d = std::abs(w / std::abs(w) - a.values[i]);
        if (d < best - 1e-14) best = d, idx = i;
      }
      CHECK(project_discrete_index(w, a) == idx);
      CHECK(project_discrete(w, a) == a.values[idx]);
    }
  }
}

TEST_CASE("projection of an alphabet value is the identity") {
  const auto a = alphabet(8);
  for (int i = 0; i < 8; ++i) CHECK(project_discrete_index(a.values[i], a) == i);
  CHECK(std::abs(project_cmc({3.0, 4.0}) - cplx(0.6, 0.8)) < 1e-15);
}

TEST_CASE("mode-wise projection") {
  const auto a = alphabet(4);
  CVector w(3);
  w << cplx(0.2, 0.1), cplx(-0.5, 0.4), cplx(0.0, -0.9);
  CHECK((project(w, ConstraintMode::Hull, a) - w).norm() == 0.0);
  CHECK((project(w, ConstraintMode::Power, a) - w).norm() == 0.0);
  for (auto v : project(w, ConstraintMode::ConstantModulus, a)) CHECK(std::abs(v) == doctest::Approx(1.0));
  const CVector d = project(w, ConstraintMode::Discrete, a);
  for (auto v : d) CHECK(std::find(a.values.begin(), a.values.end(), v) != a.values.end());
}

TEST_CASE("mode names round-trip") {
  for (auto m : {ConstraintMode::Discrete, ConstraintMode::Hull, ConstraintMode::ConstantModulus, ConstraintMode::Power})
    CHECK(parse_mode(to_string(m)) == m);
  CHECK_THROWS_AS(parse_mode("lattice"), std::invalid_argument);
}
