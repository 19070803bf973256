#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "polyfix/errors.hpp"
#include "polyfix/polynorm.hpp"
#include "polyfix/rng.hpp"

using namespace polyfix;

namespace {

// Hexagon dual ball: six unit functionals at 60 degree spacing.
PolyhedralNorm hexagon_norm() {
  Matrix rows(6, 2);
  for (int k = 0; k < 6; ++k) {
    const double a = k * M_PI / 3.0;
    rows(k, 0) = std::cos(a);
    rows(k, 1) = std::sin(a);
  }
  return PolyhedralNorm::custom(rows);
}

// Duality map recomputed directly from the definition.
std::vector<int> brute_face(const PolyhedralNorm& n, const Vector& x, double tol) {
  double best = -1e300;
  for (int i = 0; i < n.num_extremes(); ++i) {
    best = std::max(best, n.extreme(i).dot(x));
  }
  std::vector<int> hits;
  for (int i = 0; i < n.num_extremes(); ++i) {
    if (n.extreme(i).dot(x) >= best - tol * std::max(1.0, best)) hits.push_back(i);
  }
  return hits;
}

}  // namespace

TEST_CASE("built-in norms agree with closed forms") {
  Rng rng(7);
  const PolyhedralNorm linf = PolyhedralNorm::linf(3);
  const PolyhedralNorm l1 = PolyhedralNorm::l1(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector x = rng.uniform_box(3, 5.0);
    CHECK(linf.value(x) == doctest::Approx(x.cwiseAbs().maxCoeff()).epsilon(1e-12));
    CHECK(l1.value(x) == doctest::Approx(x.cwiseAbs().sum()).epsilon(1e-12));
  }
}

TEST_CASE("norm axioms hold for every family") {
  Rng rng(8);
  for (const PolyhedralNorm& n :
       {PolyhedralNorm::linf(4), PolyhedralNorm::l1(4)}) {
    for (int trial = 0; trial < 200; ++trial) {
      const Vector x = rng.uniform_box(4, 3.0);
      const Vector y = rng.uniform_box(4, 3.0);
      const double t = rng.uniform(-2.0, 2.0);
      CHECK(n.value(x) >= 0.0);
      CHECK(n.value(x + y) <= n.value(x) + n.value(y) + 1e-12);
      CHECK(n.value(t * x) == doctest::Approx(std::abs(t) * n.value(x)).epsilon(1e-12));
    }
    CHECK(n.value(Vector::Zero(4)) == 0.0);
  }
  const PolyhedralNorm hex = hexagon_norm();
  Rng rng2(9);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector x = rng2.uniform_box(2, 3.0);
    const Vector y = rng2.uniform_box(2, 3.0);
    CHECK(hex.value(x + y) <= hex.value(x) + hex.value(y) + 1e-12);
    CHECK(hex.value(x) == doctest::Approx(hex.value(-x)).epsilon(1e-12));
  }
}

TEST_CASE("validation accepts the shipped families and flags bad data") {
  CHECK(PolyhedralNorm::linf(3).validate().symmetric);
  CHECK(PolyhedralNorm::l1(2).validate().spanning);
  CHECK(hexagon_norm().validate().symmetric);

  Matrix asym(3, 2);
  asym << 1, 0, -1, 0, 0, 1;  // e2 has no antipode
  CHECK_FALSE(PolyhedralNorm::custom(asym).validate().symmetric);

  Matrix flat(2, 2);
  flat << 1, 0, -1, 0;  // spans only the first axis
  CHECK_FALSE(PolyhedralNorm::custom(flat).validate().spanning);
}

TEST_CASE("duality map equals the brute-force attaining set") {
  Rng rng(10);
  for (const PolyhedralNorm& n :
       {PolyhedralNorm::linf(3), PolyhedralNorm::l1(3), hexagon_norm()}) {
    for (int trial = 0; trial < 300; ++trial) {
      const Vector x = rng.uniform_box(n.ambient_dim(), 2.0);
      CHECK(n.duality_map(x, 1e-9).indices == brute_face(n, x, 1e-9));
    }
  }
}

TEST_CASE("duality map at zero is the whole dual ball") {
  const PolyhedralNorm n = PolyhedralNorm::linf(2);
  CHECK(n.duality_map(Vector::Zero(2), 1e-9) == n.full_face());
}

TEST_CASE("perturbations inside the stability radius only shrink the face") {
  // 1000 trials per family; the radius (1 - c) ||x|| / 4 keeps J(x + y)
  // inside J(x).
  for (const PolyhedralNorm& n :
       {PolyhedralNorm::linf(4), PolyhedralNorm::l1(4), hexagon_norm()}) {
    Rng rng(11);
    int checked = 0;
    while (checked < 1000) {
      const Vector x = rng.uniform_box(n.ambient_dim(), 2.0);
      if (n.value(x) < 1e-6) continue;
      const double radius = n.stability_radius(x);
      if (radius <= 0.0) continue;
      Vector y = rng.uniform_box(n.ambient_dim(), 1.0);
      const double len = n.value(y);
      if (len < 1e-12) continue;
      y *= rng.uniform(0.0, 1.0) * radius / len;
      const DualFace fx = n.duality_map(x, 1e-9);
      const DualFace fxy = n.duality_map(x + y, 1e-9);
      CHECK(fxy.subset_of(fx));
      ++checked;
    }
  }
}

TEST_CASE("stability radius scales and vanishes only in degenerate spots") {
  const PolyhedralNorm n = PolyhedralNorm::linf(2);
  Vector x(2);
  x << 1.0, 0.2;  // J = {e1}, gap c = 0.2
  const double r = n.stability_radius(x);
  CHECK(r == doctest::Approx((1.0 - 0.2) / 4.0).epsilon(1e-12));
  // doubling x doubles the radius
  CHECK(n.stability_radius(2 * x) == doctest::Approx(2 * r).epsilon(1e-12));
}

TEST_CASE("agreement subspace of a face") {
  const PolyhedralNorm n = PolyhedralNorm::linf(3);
  // single functional: no constraints
  CHECK(n.l_e_subspace(n.duality_map(Vector::Unit(3, 0), 1e-9)).dim() == 3);
  // e1 and e2 agree exactly on x1 = x2
  Vector x(3);
  x << 1.0, 1.0, 0.0;
  const Subspace l = n.l_e_subspace(n.duality_map(x, 1e-9));
  REQUIRE(l.dim() == 2);
  Vector diag(3);
  diag << 1.0, 1.0, 0.0;
  CHECK(l.contains(diag, 1e-9));
  Vector e3 = Vector::Unit(3, 2);
  CHECK(l.contains(e3, 1e-9));
  Vector skew(3);
  skew << 1.0, -1.0, 0.0;
  CHECK_FALSE(l.contains(skew, 1e-6));
  // the full face pins everything to zero
  CHECK(n.l_e_subspace(n.full_face()).dim() == 0);
}

TEST_CASE("sampled face fragments span the agreement subspace") {
  // 100 draws of y; mutual containment between span(F_J(y) - y) + y ... the
  // face samples live in the affine face, their differences span the same
  // subspace l_e_subspace reports.
  for (const PolyhedralNorm& n : {PolyhedralNorm::linf(3), PolyhedralNorm::l1(3)}) {
    Rng rng(12);
    int done = 0;
    while (done < 100) {
      const Vector y = rng.uniform_box(3, 2.0);
      if (n.value(y) < 1e-3) continue;
      const DualFace face = n.duality_map(y, 1e-9);
      const Subspace l = n.l_e_subspace(face);
      const FaceSample sample = face_of_ball(n, face, 1e-9, 40, 4000, rng);
      REQUIRE_FALSE(sample.empty_face);  // y / ||y|| witnesses the face
      // mutual containment at 1e-9: every sampled point sits inside the
      // agreement subspace, and the sampled span reaches its dimension
      for (const Vector& p : sample.points) CHECK(l.contains(p, 1e-9));
      for (int c = 0; c < l.dim(); ++c) {
        CHECK(sample.span.contains(l.basis.col(c), 1e-9));
      }
      CHECK(sample.span.dim() == l.dim());
      CHECK(sample.span_matches);
      CHECK(sample.span_defect <= 1e-9);
      ++done;
    }
  }
}

TEST_CASE("face containment helpers") {
  const DualFace a({0, 2});
  const DualFace b({0, 1, 2});
  CHECK(a.subset_of(b));
  CHECK(a.proper_subset_of(b));
  CHECK_FALSE(b.subset_of(a));
  CHECK(a.subset_of(a));
  CHECK_FALSE(a.proper_subset_of(a));
  CHECK(a.contains(2));
  CHECK_FALSE(a.contains(1));
}

TEST_CASE("dimension mismatches throw") {
  const PolyhedralNorm n = PolyhedralNorm::linf(3);
  CHECK_THROWS_AS(n.value(Vector::Zero(2)), Error);
  CHECK_THROWS_AS(n.duality_map(Vector::Zero(4), 1e-9), Error);
}
