#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "polyfix/numerics.hpp"
#include "polyfix/polynorm.hpp"

namespace polyfix {

// Callable view of a map; core routines accept this so they can run on
// iterated powers and translated copies without new spec objects.
using MapFn = std::function<Vector(const Vector&)>;

enum class Activation { Identity, Tanh, Sin };

Activation activation_from_string(const std::string& name);
const char* to_string(Activation a);
double activation_apply(Activation a, double t);

struct AffineMap {
  Matrix m;
  Vector b;
};

// One layer x -> act(Wx + b). Activations apply per output component;
// a single entry broadcasts over all components. All stock activations are
// 1-Lipschitz and real analytic, which keeps layer certificates exact.
struct Layer {
  Matrix w;
  Vector b;
  std::vector<Activation> act;

  Activation activation_for(int component) const {
    return act.size() == 1 ? act[0] : act[static_cast<std::size_t>(component)];
  }
};

struct AnalyticLayersMap {
  std::vector<Layer> layers;
};

// Order-m nonnegative tensor in the log coordinates where the associated
// power-style map is sup-norm nonexpansive:
//   g(y)_i = log( sum_{j_2..j_m} A[i, j_2, .., j_m] * exp(y_{j_2} + .. + y_{j_m}) ) / (m-1).
// Coefficients are stored flat, row-major by the index tuple.
struct TensorHMap {
  int order = 2;
  int n = 1;
  std::vector<double> coefficients;

  std::size_t flat_index(const std::vector<int>& idx) const;
};

class MapSpec;

struct CompositeMap {
  std::vector<MapSpec> maps;  // applied left to right
};

class MapSpec {
 public:
  using Variant = std::variant<AffineMap, AnalyticLayersMap, TensorHMap, CompositeMap>;

  explicit MapSpec(Variant v);

  static MapSpec affine(Matrix m, Vector b);
  static MapSpec analytic_layers(std::vector<Layer> layers);
  static MapSpec tensor_h(int order, int n, std::vector<double> coefficients);
  static MapSpec composite(std::vector<MapSpec> maps);

  const Variant& variant() const { return *variant_; }
  std::string kind() const;
  int dim_in() const;
  int dim_out() const;

  Vector apply(const Vector& x) const;
  MapFn fn() const;

 private:
  // shared_ptr keeps MapSpec cheaply copyable despite the recursive variant.
  std::shared_ptr<const Variant> variant_;
};

struct OperatorNormResult {
  double value = 0.0;
  bool exact = false;  // closed form (row/column sums); otherwise a sampled lower bound
};

// Operator norm of M with respect to N: exact for the built-in l1/linf
// kinds, sampled lower bound for custom norms.
OperatorNormResult operator_norm(const Matrix& m, const PolyhedralNorm& norm,
                                 int trials = 2000, std::uint64_t seed = 7);

struct SamplingDomain {
  Vector center;  // empty = origin
  double radius = 2.0;
};

struct LipschitzCertificate {
  enum class Method { ExactOperatorNorm, Sampled };
  Method method = Method::Sampled;
  double bound = 0.0;  // sampled bounds are lower estimates of the true constant
  int trials = 0;
  bool pass = false;
  Vector worst_x, worst_y;  // pair attaining the sampled bound
};

const char* to_string(LipschitzCertificate::Method m);

// Certifies ||f(x) - f(y)|| <= ||x - y||. Affine and layer maps under the
// built-in norms get exact operator-norm certificates; everything else is
// sampled over random pairs drawn from the given domain. PASS means
// bound <= 1 + tol; a sampled FAIL carries the witness pair.
LipschitzCertificate certify_nonexpansive(const MapSpec& f, const PolyhedralNorm& norm,
                                          int trials, std::uint64_t seed,
                                          const SamplingDomain& domain = {},
                                          double tol = 1e-8);

}  // namespace polyfix
