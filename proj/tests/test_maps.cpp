#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "polyfix/errors.hpp"
#include "polyfix/maps.hpp"
#include "polyfix/rng.hpp"

using namespace polyfix;

namespace {

MapSpec rotation90() {
  Matrix m(2, 2);
  m << 0, -1, 1, 0;
  return MapSpec::affine(m, Vector::Zero(2));
}

}  // namespace

TEST_CASE("affine maps apply as m x + b") {
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  Vector b(2);
  b << -1, 1;
  const MapSpec f = MapSpec::affine(m, b);
  Vector x(2);
  x << 1, 1;
  const Vector y = f.apply(x);
  CHECK(y[0] == doctest::Approx(2.0));
  CHECK(y[1] == doctest::Approx(8.0));
  CHECK(f.dim_in() == 2);
  CHECK(f.dim_out() == 2);
}

TEST_CASE("layer maps broadcast and mix activations") {
  Matrix w(2, 2);
  w << 1, 0, 1, 0;
  Layer layer;
  layer.w = w;
  layer.b = Vector::Zero(2);
  layer.act = {Activation::Identity, Activation::Sin};
  const MapSpec f = MapSpec::analytic_layers({layer});
  Vector x(2);
  x << 0.7, -3.0;
  const Vector y = f.apply(x);
  CHECK(y[0] == doctest::Approx(0.7));
  CHECK(y[1] == doctest::Approx(std::sin(0.7)));
}

TEST_CASE("activation names round-trip") {
  for (Activation a : {Activation::Identity, Activation::Tanh, Activation::Sin}) {
    CHECK(activation_from_string(to_string(a)) == a);
  }
  CHECK_THROWS_AS(activation_from_string("relu"), Error);
}

TEST_CASE("tensor maps normalize slices in log space") {
  // order 2: f(x)_i = log sum_j c_ij exp(x_j); rows sum to 1 so f(0) = 0
  const MapSpec f = MapSpec::tensor_h(2, 2, {0.5, 0.5, 0.25, 0.75});
  CHECK(f.apply(Vector::Zero(2)).cwiseAbs().maxCoeff() < 1e-14);
  // translation along the diagonal passes through
  Vector ones(2);
  ones << 1, 1;
  const Vector y = f.apply(3.0 * ones);
  CHECK(y[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(y[1] == doctest::Approx(3.0).epsilon(1e-12));
  // all-zero slice cannot be normalized
  CHECK_THROWS_AS(MapSpec::tensor_h(2, 2, {0.0, 0.0, 0.25, 0.75}).apply(Vector::Zero(2)),
                  Error);
}

TEST_CASE("composites apply left to right") {
  Matrix m(2, 2);
  m << 2, 0, 0, 2;  // doubling, then negation
  const MapSpec f =
      MapSpec::composite({MapSpec::affine(m, Vector::Zero(2)),
                          MapSpec::affine(-Matrix::Identity(2, 2), Vector::Zero(2))});
  Vector x(2);
  x << 1, -1;
  const Vector y = f.apply(x);
  CHECK(y[0] == doctest::Approx(-2.0));
  CHECK(y[1] == doctest::Approx(2.0));
}

TEST_CASE("operator norms of matrices under built-in norms are exact") {
  Matrix m(2, 2);
  m << 0.5, -0.5, 0.5, 0.5;
  const OperatorNormResult sup = operator_norm(m, PolyhedralNorm::linf(2));
  CHECK(sup.exact);
  CHECK(sup.value == doctest::Approx(1.0).epsilon(1e-12));  // max row abs sum
  const OperatorNormResult one = operator_norm(m, PolyhedralNorm::l1(2));
  CHECK(one.exact);
  CHECK(one.value == doctest::Approx(1.0).epsilon(1e-12));  // max col abs sum
}

TEST_CASE("nonexpansiveness certificates: exact pass") {
  const LipschitzCertificate cert =
      certify_nonexpansive(rotation90(), PolyhedralNorm::linf(2), 100, 3);
  CHECK(cert.pass);
  CHECK(cert.method == LipschitzCertificate::Method::ExactOperatorNorm);
  CHECK(cert.bound == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("nonexpansiveness certificates: exact fail for an expanding map") {
  const LipschitzCertificate cert = certify_nonexpansive(
      MapSpec::affine(2.0 * Matrix::Identity(2, 2), Vector::Zero(2)),
      PolyhedralNorm::linf(2), 100, 3);
  CHECK_FALSE(cert.pass);
  CHECK(cert.bound == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("nonexpansiveness certificates: sampled bounds are witnessed") {
  // tensor map has no exact certificate; the sampled bound must stay <= 1
  const MapSpec tensor = MapSpec::tensor_h(2, 2, {0.5, 0.5, 0.25, 0.75});
  const LipschitzCertificate cert =
      certify_nonexpansive(tensor, PolyhedralNorm::linf(2), 2000, 5);
  CHECK(cert.pass);
  CHECK(cert.method == LipschitzCertificate::Method::Sampled);
  CHECK(cert.bound <= 1.0 + 1e-8);
  CHECK(cert.bound > 0.5);  // the bound is a genuine supremum estimate
  // the witness pair attains the reported bound
  const PolyhedralNorm norm = PolyhedralNorm::linf(2);
  const Vector fx = tensor.apply(cert.worst_x);
  const Vector fy = tensor.apply(cert.worst_y);
  const double ratio =
      norm.value(fx - fy) / norm.value(cert.worst_x - cert.worst_y);
  CHECK(ratio == doctest::Approx(cert.bound).epsilon(1e-9));
}

TEST_CASE("layer certificates are conservative products of layer norms") {
  // sin(2x): the layer bound ||W|| = 2 fails the certificate, and the true
  // constant (attained near the origin) really is 2
  Layer layer;
  layer.w = 2.0 * Matrix::Identity(1, 1);
  layer.b = Vector::Zero(1);
  layer.act = {Activation::Sin};
  const LipschitzCertificate cert = certify_nonexpansive(
      MapSpec::analytic_layers({layer}), PolyhedralNorm::linf(1), 100, 9);
  CHECK_FALSE(cert.pass);
  CHECK(cert.method == LipschitzCertificate::Method::ExactOperatorNorm);
  CHECK(cert.bound == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("custom norms force sampling and catch expansion") {
  Matrix rows(4, 2);
  rows << 1, 0, -1, 0, 0, 1, 0, -1;
  const PolyhedralNorm diamond = PolyhedralNorm::custom(rows);
  const LipschitzCertificate fail = certify_nonexpansive(
      MapSpec::affine(2.0 * Matrix::Identity(2, 2), Vector::Zero(2)), diamond, 500, 9);
  CHECK_FALSE(fail.pass);
  CHECK(fail.method == LipschitzCertificate::Method::Sampled);
  CHECK(fail.bound == doctest::Approx(2.0).epsilon(1e-9));
  const LipschitzCertificate pass = certify_nonexpansive(
      MapSpec::affine(0.5 * Matrix::Identity(2, 2), Vector::Zero(2)), diamond, 500, 9);
  CHECK(pass.pass);
  CHECK(pass.bound == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("dimension mismatches are rejected") {
  CHECK_THROWS_AS(rotation90().apply(Vector::Zero(3)), Error);
  Matrix m(2, 3);
  m.setZero();
  CHECK_THROWS_AS(MapSpec::affine(m, Vector::Zero(3)), Error);
}
