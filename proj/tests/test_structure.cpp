#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "polyfix/dynamics.hpp"
#include "polyfix/errors.hpp"
#include "polyfix/rng.hpp"
#include "polyfix/structure.hpp"

using namespace polyfix;

namespace {

MapFn merge_pair() {
  return [](const Vector& x) {
    Vector y(3);
    const double avg = 0.5 * (x[0] + x[1]);
    y << avg, avg, x[2];
    return y;
  };
}

MapFn sin_curve() {
  return [](const Vector& x) {
    Vector y(2);
    y << x[0], std::sin(x[0]);
    return y;
  };
}

MapFn rotation90() {
  return [](const Vector& x) {
    Vector y(2);
    y << -x[1], x[0];
    return y;
  };
}

std::set<std::vector<int>> face_set(const std::vector<LockedSet>& sets) {
  std::set<std::vector<int>> out;
  for (const LockedSet& s : sets) out.insert(s.face.indices);
  return out;
}

std::set<std::vector<int>> face_set(const std::vector<DualFace>& faces) {
  std::set<std::vector<int>> out;
  for (const DualFace& f : faces) out.insert(f.indices);
  return out;
}

Subspace span_of(std::initializer_list<Vector> vs) {
  Matrix m(vs.begin()->size(), static_cast<int>(vs.size()));
  int c = 0;
  for (const Vector& v : vs) m.col(c++) = v;
  return column_span(m);
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Vector vec3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

}  // namespace

TEST_CASE("agreement membership checks functionals one by one") {
  const PolyhedralNorm norm = PolyhedralNorm::linf(2);
  // f moves only the second coordinate away from the curve
  const MapFn f = sin_curve();
  const Vector off = vec2(1.0, 0.2);  // f(off) = (1, sin 1) != off
  CHECK(s_e_member(f, norm, DualFace({0}), off, 1e-9));       // e1 stays
  CHECK(s_e_member(f, norm, DualFace({0, 2}), off, 1e-9));    // +-e1 stay
  CHECK_FALSE(s_e_member(f, norm, DualFace({1}), off, 1e-9)); // e2 moves
  const Vector on = vec2(1.0, std::sin(1.0));
  CHECK(s_e_member(f, norm, norm.full_face(), on, 1e-9));
}

TEST_CASE("locked faces of the pair-merging map") {
  // fixed plane x1 = x2; the shipped minimal faces are the two signed
  // versions of {e1, e2} and the two singletons {e3}, {-e3}
  const PolyhedralNorm norm = PolyhedralNorm::linf(3);
  const std::vector<Vector> fixed = {vec3(0.0, 0.0, 0.0), vec3(1.0, 1.0, 0.5),
                                     vec3(-0.5, -0.5, 1.0), vec3(0.3, 0.3, -1.2)};
  const std::vector<LockedSet> locked = find_locked_sets(merge_pair(), norm, fixed);
  // linf extreme order: e1 e2 e3 -e1 -e2 -e3
  const std::set<std::vector<int>> faces = face_set(locked);
  CHECK(faces.count({0, 1}));
  CHECK(faces.count({3, 4}));
  CHECK(faces.count({2}));
  CHECK(faces.count({5}));
  CHECK(faces.count({0, 1, 2, 3, 4, 5}));  // diagonal witness

  const std::vector<LockedSet> minimal = minimal_locked(locked);
  CHECK(face_set(minimal) ==
        std::set<std::vector<int>>{{0, 1}, {3, 4}, {2}, {5}});
  for (const LockedSet& s : minimal) {
    CHECK(s_e_member(merge_pair(), norm, s.face, s.witness_v, 1e-9));
    CHECK(s_e_member(merge_pair(), norm, s.face, s.witness_w, 1e-9));
    CHECK(norm.duality_map(s.witness_v - s.witness_w, 1e-9) == s.face);
  }
}

TEST_CASE("near-duplicate fixed points do not spawn noise faces") {
  const PolyhedralNorm norm = PolyhedralNorm::linf(2);
  // two copies of the origin differing by solver noise
  const std::vector<Vector> fixed = {vec2(0.0, 0.0), vec2(3e-11, -8e-11)};
  const std::vector<LockedSet> locked =
      find_locked_sets(rotation90(), norm, fixed, 1e-9, 1e-6);
  REQUIRE(locked.size() == 1);
  CHECK(locked[0].face == norm.full_face());
}

TEST_CASE("V is the meet of the minimal agreement subspaces") {
  const PolyhedralNorm norm = PolyhedralNorm::linf(3);
  const std::vector<Vector> fixed = {vec3(0.0, 0.0, 0.0), vec3(1.0, 1.0, 0.5),
                                     vec3(-0.5, -0.5, 1.0)};
  const std::vector<LockedSet> minimal =
      minimal_locked(find_locked_sets(merge_pair(), norm, fixed));
  const Subspace v = v_of_f(norm, minimal);
  REQUIRE(v.dim() == 2);
  CHECK(v.contains(vec3(1.0, 1.0, 0.0), 1e-9));
  CHECK(v.contains(vec3(0.0, 0.0, 1.0), 1e-9));
  CHECK_FALSE(v.contains(vec3(1.0, 0.0, 0.0), 1e-6));
}

TEST_CASE("fixed points outside V raise the containment alarm") {
  const PolyhedralNorm norm = PolyhedralNorm::linf(3);
  const std::vector<Vector> fixed = {vec3(0.0, 0.0, 0.0), vec3(1.0, 1.0, 0.5)};
  const std::vector<LockedSet> minimal =
      minimal_locked(find_locked_sets(merge_pair(), norm, fixed));
  // a point off the plane x1 = x2 cannot be covered by these faces
  CHECK_THROWS_WITH_AS(
      v_of_f(norm, minimal, kRankTol, {vec3(1.0, -1.0, 0.0)}, 1e-8),
      doctest::Contains("CONTAINMENT-VIOLATION"), Error);
}

TEST_CASE("retract derivative along V is the curve Jacobian") {
  const PolyhedralNorm norm = PolyhedralNorm::linf(2);
  const Subspace v = Subspace::full(2);
  const Vector u = vec2(0.6, -0.3);
  const Matrix a = derivative_of_retract(sin_curve(), norm, v, u);
  // retract sends (x1, x2) to (x1, sin x1); the Jacobian rows follow
  CHECK(a(0, 0) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(a(0, 1) == doctest::Approx(0.0).epsilon(1e-7));
  CHECK(a(1, 0) == doctest::Approx(std::cos(0.6)).epsilon(1e-6));
  CHECK(a(1, 1) == doctest::Approx(0.0).epsilon(1e-7));
  CHECK((a * a - a).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("derivative requires the base point inside V") {
  const PolyhedralNorm norm = PolyhedralNorm::linf(2);
  const Subspace diag = span_of({vec2(1.0, 1.0)});
  CHECK_THROWS_WITH_AS(
      derivative_of_retract(sin_curve(), norm, diag, vec2(1.0, 0.0)),
      doctest::Contains("PRECONDITION-UNMET"), Error);
}

TEST_CASE("differentiable point search lands on an idempotent derivative") {
  const PolyhedralNorm norm = PolyhedralNorm::linf(2);
  Rng rng(41);
  const DerivativeSearch search =
      differentiable_point_search(sin_curve(), norm, Subspace::full(2), rng);
  CHECK(search.a2_defect <= 1e-8);
  CHECK(search.attempts >= 1);
  CHECK(search.a(1, 0) == doctest::Approx(std::cos(search.u[0])).epsilon(1e-5));
}

TEST_CASE("projection checks: exact norms on the full space") {
  const PolyhedralNorm norm = PolyhedralNorm::linf(2);
  const ProjectionCheck good = verify_projection(Matrix::Identity(2, 2), norm);
  CHECK(good.exact_norm);
  CHECK(good.nonexpansive);
  CHECK(good.a2_defect == 0.0);
  CHECK(good.opnorm_estimate == doctest::Approx(1.0));

  const ProjectionCheck bad = verify_projection(2.0 * Matrix::Identity(2, 2), norm);
  CHECK_FALSE(bad.nonexpansive);
  CHECK(bad.a2_defect == doctest::Approx(2.0));  // (2I)^2 - 2I = 2I
}

TEST_CASE("projection checks: sampling restricted to a subspace") {
  // A = [[1,0],[c,0]] is nonexpansive only along its fixed line when |c|<=1
  Matrix a(2, 2);
  a << 1, 0, 0.7, 0;
  const Subspace domain = span_of({vec2(1.0, 0.7)});
  const ProjectionCheck check =
      verify_projection(a, PolyhedralNorm::linf(2), 1e-8, domain, 200, 5);
  CHECK_FALSE(check.exact_norm);
  CHECK(check.nonexpansive);
  CHECK(check.opnorm_estimate <= 1.0 + 1e-8);
  CHECK(check.a2_defect <= 1e-12);
}

TEST_CASE("modulus classes of a subspace basis") {
  // diagonal of R^2: both coordinates share one class
  CHECK(partition_support(span_of({vec2(1.0, 1.0)})) ==
        std::vector<std::vector<int>>{{0, 1}});
  // anti-diagonal: still one class, signs differ
  CHECK(partition_support(span_of({vec2(1.0, -1.0)})) ==
        std::vector<std::vector<int>>{{0, 1}});
  // full space: singleton classes
  CHECK(partition_support(Subspace::full(2)) ==
        std::vector<std::vector<int>>{{0}, {1}});
  // zero subspace: one all-zero class
  CHECK(partition_support(Subspace::zero(2)) ==
        std::vector<std::vector<int>>{{0, 1}});
  // mixed: x1 = x2 plane in R^3 leaves x3 alone
  CHECK(partition_support(span_of({vec3(1.0, 1.0, 0.0), vec3(0.0, 0.0, 1.0)})) ==
        std::vector<std::vector<int>>{{0, 1}, {2}});
}

TEST_CASE("sign-pattern projection for the sup norm") {
  // shipped value: averaging over the diagonal class
  const Matrix p = projection_linf(span_of({vec2(1.0, 1.0)}));
  CHECK(p(0, 0) == 0.5);
  CHECK(p(0, 1) == 0.5);
  CHECK(p(1, 0) == 0.5);
  CHECK(p(1, 1) == 0.5);
  CHECK((p * p - p).cwiseAbs().maxCoeff() <= 1e-12);
  const OperatorNormResult opnorm = operator_norm(p, PolyhedralNorm::linf(2));
  CHECK(opnorm.exact);
  CHECK(opnorm.value <= 1.0 + 1e-12);

  // anti-diagonal flips the off-diagonal signs
  const Matrix q = projection_linf(span_of({vec2(1.0, -1.0)}));
  CHECK(q(0, 1) == doctest::Approx(-0.5).epsilon(1e-12));

  // identity on the full space, zero on the zero subspace
  CHECK((projection_linf(Subspace::full(3)) - Matrix::Identity(3, 3)).norm() == 0.0);
  CHECK(projection_linf(Subspace::zero(3)).norm() == 0.0);
}

TEST_CASE("sign-pattern projection rejects subspaces of the wrong shape") {
  // moduli differ across the only class representative: the sign pattern
  // e1 scaled cannot lie inside span{(1, 0.5)}
  CHECK_THROWS_WITH_AS(projection_linf(span_of({vec2(1.0, 0.5)})),
                       doctest::Contains("STRUCTURE-MISMATCH"), Error);
  // a plane whose classes cannot rebuild it
  CHECK_THROWS_WITH_AS(
      projection_linf(span_of({vec3(1.0, 1.0, 0.0), vec3(1.0, -1.0, 1.0)})),
      doctest::Contains("STRUCTURE-MISMATCH"), Error);
}

TEST_CASE("coordinate projection for the 1-norm") {
  const Matrix p = projection_l1({0, 2}, 3);
  Matrix want = Matrix::Zero(3, 3);
  want(0, 0) = 1.0;
  want(2, 2) = 1.0;
  CHECK((p - want).norm() == 0.0);
  CHECK((p * p - p).cwiseAbs().maxCoeff() <= 1e-12);
  const OperatorNormResult opnorm = operator_norm(p, PolyhedralNorm::l1(3));
  CHECK(opnorm.exact);
  CHECK(opnorm.value <= 1.0 + 1e-12);
  CHECK_THROWS_AS(projection_l1({3}, 3), Error);
}

TEST_CASE("support extraction demands a coordinate subspace") {
  const PolyhedralNorm norm = PolyhedralNorm::l1(3);
  const std::vector<int> support =
      support_of_v(span_of({vec3(1.0, 0.0, 0.0), vec3(0.0, 0.0, 1.0)}), norm);
  CHECK(support == std::vector<int>{0, 2});
  CHECK(support_of_v(Subspace::zero(3), norm).empty());
  CHECK(support_of_v(Subspace::full(3), norm) == std::vector<int>{0, 1, 2});
  CHECK_THROWS_WITH_AS(support_of_v(span_of({vec3(1.0, 1.0, 0.0)}), norm),
                       doctest::Contains("STRUCTURE-MISMATCH"), Error);
}

TEST_CASE("linearization on the fixed subspace recovers the rotation") {
  const PolyhedralNorm norm = PolyhedralNorm::linf(2);
  const MapFn f = rotation90();
  const MapFn f4 = [f](const Vector& x) { return iterate_map(f, x, 4); };
  // f^4 = id, so A = I and W = R^2
  const Matrix a = Matrix::Identity(2, 2);
  const Subspace w = Subspace::full(2);
  const Linearization lin = linearize_on_fix(f, f4, norm, a, w, 40, 17);
  CHECK(lin.linearity_defect <= 1e-10);
  // on the identity basis the matrix is the rotation itself
  Matrix want(2, 2);
  want << 0, -1, 1, 0;
  CHECK((lin.on_w - want).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(linear_period(lin.on_w, 8) == 4);
}

TEST_CASE("superposition failures raise the linearity alarm") {
  const PolyhedralNorm norm = PolyhedralNorm::linf(1);
  // g is nonexpansive but curved on its fixed set; feeding it as the acting
  // map with a trivial retract exposes the violation
  const MapFn curved = [](const Vector& x) { return Vector(x.array().sin().matrix()); };
  const MapFn ident = [](const Vector& x) { return x; };
  CHECK_THROWS_WITH_AS(
      linearize_on_fix(curved, ident, norm, Matrix::Identity(1, 1), Subspace::full(1), 40, 17),
      doctest::Contains("LINEARITY-VIOLATION"), Error);
}

TEST_CASE("matrix powers reaching the identity") {
  Matrix rot(2, 2);
  rot << 0, -1, 1, 0;
  CHECK(linear_period(Matrix::Identity(3, 3), 5) == 1);
  CHECK(linear_period(-Matrix::Identity(2, 2), 5) == 2);
  CHECK(linear_period(rot, 5) == 4);
  CHECK(linear_period(rot, 3) == 0);  // cap too small
  CHECK(linear_period(0.5 * Matrix::Identity(2, 2), 64) == 0);
  CHECK(linear_period(Matrix(0, 0), 5) == 1);
}

TEST_CASE("affine combinations of fixed points stay fixed in strictly convex norms") {
  // Euclidean orthogonal projection onto the diagonal line
  const MapFn proj = [](const Vector& x) {
    const double t = 0.5 * (x[0] + x[1]);
    return vec2(t, t);
  };
  const std::vector<Vector> fixed = {vec2(0.0, 0.0), vec2(1.0, 1.0), vec2(-2.0, -2.0)};
  const AffineFixAudit audit = affine_fix_audit(proj, true, fixed, 100, 19);
  CHECK(audit.samples == 100);
  CHECK(audit.max_defect <= 1e-10);
  CHECK_THROWS_WITH_AS(affine_fix_audit(proj, false, fixed, 10, 19),
                       doctest::Contains("PRECONDITION-UNMET"), Error);
}

TEST_CASE("grid oracle matches hand-enumerated minimal faces") {
  // pair-merging map: four minimal faces
  const OracleResult merge = oracle_locked_faces_linf(merge_pair(), 3);
  CHECK(face_set(merge.minimal) ==
        std::set<std::vector<int>>{{0, 1}, {3, 4}, {2}, {5}});
  // rotation: only the diagonal full face survives
  const OracleResult rot = oracle_locked_faces_linf(rotation90(), 2);
  CHECK(face_set(rot.minimal) == std::set<std::vector<int>>{{0, 1, 2, 3}});
  // sin curve: the first coordinate never moves
  const OracleResult sc = oracle_locked_faces_linf(sin_curve(), 2);
  CHECK(face_set(sc.minimal) == std::set<std::vector<int>>{{0}, {2}});
  CHECK_THROWS_AS(oracle_locked_faces_linf(merge_pair(), 4), Error);
}

TEST_CASE("harvest converges everywhere for a gentle map") {
  const Harvest h =
      harvest_fixed_points(sin_curve(), PolyhedralNorm::linf(2), 16, 3);
  CHECK(h.runs.size() == 16);
  CHECK(h.converged.size() == 16);
  for (const Vector& p : h.converged) {
    CHECK(std::abs(p[1] - std::sin(p[0])) <= 1e-9);
  }
}

TEST_CASE("full pipeline on the sine curve") {
  StructurePipelineParams params;
  params.starts = 32;
  params.seed = 5;
  const StructureReport r =
      run_structure_pipeline(sin_curve(), PolyhedralNorm::linf(2), params);
  CHECK(r.converged == 32);
  CHECK(face_set(minimal_locked(r.minimal)) ==
        std::set<std::vector<int>>{{0}, {2}});
  CHECK(r.v.dim() == 2);
  CHECK(r.w.dim() == 1);
  CHECK(r.a2_defect <= 1e-8);
  CHECK(r.projection_nonexpansive);
  CHECK(r.isometry.pairs == 250);
  CHECK(r.isometry.max_defect <= 1e-7);
  CHECK(r.isometry.inverse_defect <= 1e-8);
  CHECK(r.value_preservation <= 1e-8);
  CHECK(r.discovery_stabilized);
}

TEST_CASE("pipeline refuses maps with empty fixed sets") {
  const MapFn shift = [](const Vector& x) {
    Vector y = x;
    y[0] += 1.0;
    return y;
  };
  StructurePipelineParams params;
  params.starts = 4;
  params.max_iter = 2000;
  CHECK_THROWS_WITH_AS(
      run_structure_pipeline(shift, PolyhedralNorm::linf(2), params),
      doctest::Contains("PRECONDITION-UNMET"), Error);
}

TEST_CASE("pipeline handles an off-origin fixed line") {
  // translate the sine curve up by one: fixed set {(t, 1 + sin t)}
  const MapFn lifted = [](const Vector& x) {
    Vector y(2);
    y << x[0], 1.0 + std::sin(x[0]);
    return y;
  };
  StructurePipelineParams params;
  params.starts = 32;
  params.seed = 6;
  const StructureReport r =
      run_structure_pipeline(lifted, PolyhedralNorm::linf(2), params);
  CHECK(r.w.dim() == 1);
  CHECK(r.a2_defect <= 1e-8);
  CHECK(r.isometry.max_defect <= 1e-7);
  // faces live in the translated frame but match the original shape
  CHECK(face_set(r.minimal) == std::set<std::vector<int>>{{0}, {2}});
}
