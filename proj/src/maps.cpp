#include "polyfix/maps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polyfix/errors.hpp"
#include "polyfix/parallel.hpp"
#include "polyfix/rng.hpp"

namespace polyfix {

Activation activation_from_string(const std::string& name) {
  if (name == "identity") return Activation::Identity;
  if (name == "tanh") return Activation::Tanh;
  if (name == "sin") return Activation::Sin;
  throw config_error("unknown activation '" + name + "'");
}

const char* to_string(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Tanh: return "tanh";
    case Activation::Sin: return "sin";
  }
  return "?";
}

double activation_apply(Activation a, double t) {
  switch (a) {
    case Activation::Identity: return t;
    case Activation::Tanh: return std::tanh(t);
    case Activation::Sin: return std::sin(t);
  }
  return t;
}

std::size_t TensorHMap::flat_index(const std::vector<int>& idx) const {
  std::size_t flat = 0;
  for (int v : idx) flat = flat * static_cast<std::size_t>(n) + static_cast<std::size_t>(v);
  return flat;
}

MapSpec::MapSpec(Variant v) : variant_(std::make_shared<const Variant>(std::move(v))) {}

MapSpec MapSpec::affine(Matrix m, Vector b) {
  if (m.rows() != b.size()) throw dimension_mismatch("affine map: offset size != rows");
  if (!all_finite(m) || !all_finite(b)) throw out_of_range("affine map: non-finite entries");
  return MapSpec(Variant(AffineMap{std::move(m), std::move(b)}));
}

MapSpec MapSpec::analytic_layers(std::vector<Layer> layers) {
  if (layers.empty()) throw config_error("analytic layers map: needs at least one layer");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& l = layers[i];
    if (l.w.rows() != l.b.size()) {
      throw dimension_mismatch("layer " + std::to_string(i) + ": offset size != rows");
    }
    if (l.act.size() != 1 && l.act.size() != static_cast<std::size_t>(l.w.rows())) {
      throw dimension_mismatch("layer " + std::to_string(i) +
                               ": need one activation or one per output component");
    }
    if (i + 1 < layers.size() && layers[i + 1].w.cols() != l.w.rows()) {
      throw dimension_mismatch("layer " + std::to_string(i + 1) + ": width mismatch");
    }
  }
  return MapSpec(Variant(AnalyticLayersMap{std::move(layers)}));
}

MapSpec MapSpec::tensor_h(int order, int n, std::vector<double> coefficients) {
  if (order < 2) throw config_error("tensor map: order >= 2 required");
  if (n < 1) throw config_error("tensor map: n >= 1 required");
  std::size_t expected = 1;
  for (int i = 0; i < order; ++i) expected *= static_cast<std::size_t>(n);
  if (coefficients.size() != expected) {
    throw dimension_mismatch("tensor map: expected n^order coefficients");
  }
  for (double c : coefficients) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw out_of_range("tensor map: coefficients must be finite and >= 0");
    }
  }
  return MapSpec(Variant(TensorHMap{order, n, std::move(coefficients)}));
}

MapSpec MapSpec::composite(std::vector<MapSpec> maps) {
  if (maps.empty()) throw config_error("composite map: needs at least one component");
  for (std::size_t i = 1; i < maps.size(); ++i) {
    if (maps[i].dim_in() != maps[i - 1].dim_out()) {
      throw dimension_mismatch("composite map: stage " + std::to_string(i) +
                               " input dimension mismatch");
    }
  }
  return MapSpec(Variant(CompositeMap{std::move(maps)}));
}

std::string MapSpec::kind() const {
  struct Visitor {
    std::string operator()(const AffineMap&) const { return "affine"; }
    std::string operator()(const AnalyticLayersMap&) const { return "analytic_layers"; }
    std::string operator()(const TensorHMap&) const { return "tensor_h"; }
    std::string operator()(const CompositeMap&) const { return "composite"; }
  };
  return std::visit(Visitor{}, *variant_);
}

int MapSpec::dim_in() const {
  struct Visitor {
    int operator()(const AffineMap& m) const { return static_cast<int>(m.m.cols()); }
    int operator()(const AnalyticLayersMap& m) const {
      return static_cast<int>(m.layers.front().w.cols());
    }
    int operator()(const TensorHMap& m) const { return m.n; }
    int operator()(const CompositeMap& m) const { return m.maps.front().dim_in(); }
  };
  return std::visit(Visitor{}, *variant_);
}

int MapSpec::dim_out() const {
  struct Visitor {
    int operator()(const AffineMap& m) const { return static_cast<int>(m.m.rows()); }
    int operator()(const AnalyticLayersMap& m) const {
      return static_cast<int>(m.layers.back().w.rows());
    }
    int operator()(const TensorHMap& m) const { return m.n; }
    int operator()(const CompositeMap& m) const { return m.maps.back().dim_out(); }
  };
  return std::visit(Visitor{}, *variant_);
}

namespace {

Vector apply_tensor(const TensorHMap& t, const Vector& y) {
  const int n = t.n;
  const int arity = t.order - 1;  // summed indices per slice
  std::size_t slice_size = 1;
  for (int k = 0; k < arity; ++k) slice_size *= static_cast<std::size_t>(n);

  // exponent for every summed index tuple, enumerated in flat order
  std::vector<double> exponents(slice_size);
  std::vector<int> idx(static_cast<std::size_t>(arity), 0);
  for (std::size_t offset = 0; offset < slice_size; ++offset) {
    double e = 0.0;
    for (int k = 0; k < arity; ++k) e += y[idx[static_cast<std::size_t>(k)]];
    exponents[offset] = e;
    for (int k = arity - 1; k >= 0; --k) {
      if (++idx[static_cast<std::size_t>(k)] < n) break;
      idx[static_cast<std::size_t>(k)] = 0;
    }
  }

  Vector out(n);
  for (int i = 0; i < n; ++i) {
    const std::size_t slice_base = static_cast<std::size_t>(i) * slice_size;
    // log-sum-exp over the slice, guarded against overflow
    double max_exponent = -std::numeric_limits<double>::infinity();
    for (std::size_t offset = 0; offset < slice_size; ++offset) {
      if (t.coefficients[slice_base + offset] > 0.0) {
        max_exponent = std::max(max_exponent, exponents[offset]);
      }
    }
    if (!std::isfinite(max_exponent)) {
      throw singular_normalization("tensor map: slice " + std::to_string(i) +
                                   " has no positive coefficient");
    }
    double sum = 0.0;
    for (std::size_t offset = 0; offset < slice_size; ++offset) {
      const double coeff = t.coefficients[slice_base + offset];
      if (coeff > 0.0) sum += coeff * std::exp(exponents[offset] - max_exponent);
    }
    out[i] = (max_exponent + std::log(sum)) / static_cast<double>(arity);
  }
  return out;
}

}  // namespace

Vector MapSpec::apply(const Vector& x) const {
  if (x.size() != dim_in()) {
    throw dimension_mismatch("apply: input has dimension " + std::to_string(x.size()) +
                             ", map expects " + std::to_string(dim_in()));
  }
  struct Visitor {
    const Vector& x;
    Vector operator()(const AffineMap& m) const { return m.m * x + m.b; }
    Vector operator()(const AnalyticLayersMap& m) const {
      Vector v = x;
      for (const Layer& layer : m.layers) {
        Vector pre = layer.w * v + layer.b;
        for (int i = 0; i < pre.size(); ++i) {
          pre[i] = activation_apply(layer.activation_for(i), pre[i]);
        }
        v = std::move(pre);
      }
      return v;
    }
    Vector operator()(const TensorHMap& m) const { return apply_tensor(m, x); }
    Vector operator()(const CompositeMap& m) const {
      Vector v = x;
      for (const MapSpec& stage : m.maps) v = stage.apply(v);
      return v;
    }
  };
  return std::visit(Visitor{x}, *variant_);
}

MapFn MapSpec::fn() const {
  MapSpec copy = *this;
  return [copy](const Vector& x) { return copy.apply(x); };
}

OperatorNormResult operator_norm(const Matrix& m, const PolyhedralNorm& norm,
                                 int trials, std::uint64_t seed) {
  if (m.cols() != norm.ambient_dim()) {
    throw dimension_mismatch("operator_norm: matrix columns != norm dimension");
  }
  if (norm.kind() == NormKind::LInf) {
    return {m.cwiseAbs().rowwise().sum().maxCoeff(), true};
  }
  if (norm.kind() == NormKind::L1) {
    return {m.cwiseAbs().colwise().sum().maxCoeff(), true};
  }
  // Custom norms: sampled lower bound over random directions.
  Rng rng(seed);
  double best = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Vector x = rng.gaussian(static_cast<int>(m.cols()));
    const double nx = norm.value(x);
    if (nx <= 0) continue;
    best = std::max(best, norm.value(m * x) / nx);
  }
  return {best, false};
}

const char* to_string(LipschitzCertificate::Method m) {
  return m == LipschitzCertificate::Method::ExactOperatorNorm ? "exact-operator-norm"
                                                              : "sampled";
}

namespace {

// Exact bound when the variant is built from linear parts and 1-Lipschitz
// componentwise activations under a built-in norm; NaN when only sampling
// applies.
double exact_bound(const MapSpec::Variant& v, const PolyhedralNorm& norm) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (norm.kind() == NormKind::Custom) return nan;
  struct Visitor {
    const PolyhedralNorm& norm;
    double operator()(const AffineMap& m) const {
      return operator_norm(m.m, norm).value;
    }
    double operator()(const AnalyticLayersMap& m) const {
      // componentwise 1-Lipschitz activations leave both built-in norms
      // nonexpansive, so the product of layer operator norms is an upper
      // bound for the whole stack
      double product = 1.0;
      for (const Layer& layer : m.layers) {
        // intermediate widths live in the same norm family
        const PolyhedralNorm layer_norm =
            norm.kind() == NormKind::LInf
                ? PolyhedralNorm::linf(static_cast<int>(layer.w.cols()))
                : PolyhedralNorm::l1(static_cast<int>(layer.w.cols()));
        product *= operator_norm(layer.w, layer_norm).value;
      }
      return product;
    }
    double operator()(const TensorHMap&) const {
      return std::numeric_limits<double>::quiet_NaN();
    }
    double operator()(const CompositeMap& m) const {
      double product = 1.0;
      for (const MapSpec& stage : m.maps) {
        const double b = exact_bound(stage.variant(), norm);
        if (std::isnan(b)) return b;
        product *= b;
      }
      return product;
    }
  };
  return std::visit(Visitor{norm}, v);
}

}  // namespace

LipschitzCertificate certify_nonexpansive(const MapSpec& f, const PolyhedralNorm& norm,
                                          int trials, std::uint64_t seed,
                                          const SamplingDomain& domain, double tol) {
  if (trials < 1) throw out_of_range("certify_nonexpansive: trials >= 1");
  if (f.dim_in() != norm.ambient_dim() || f.dim_out() != norm.ambient_dim()) {
    throw dimension_mismatch("certify_nonexpansive: map and norm dimensions differ");
  }

  LipschitzCertificate cert;
  const double exact = exact_bound(f.variant(), norm);
  if (!std::isnan(exact)) {
    cert.method = LipschitzCertificate::Method::ExactOperatorNorm;
    cert.bound = exact;
    cert.trials = 0;
    cert.pass = exact <= 1.0 + tol;
    return cert;
  }

  const int n = norm.ambient_dim();
  const Vector center =
      domain.center.size() == n ? domain.center : Vector::Zero(n);

  // Per-trial derived seeds: the max-reduction result is independent of how
  // trials are scheduled.
  std::vector<double> ratio(static_cast<std::size_t>(trials), 0.0);
  std::vector<Vector> xs(static_cast<std::size_t>(trials)), ys(static_cast<std::size_t>(trials));
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
    Rng rng(Rng::derive(seed, t));
    const Vector x = center + rng.uniform_box(n, domain.radius);
    const Vector y = center + rng.uniform_box(n, domain.radius);
    const double denom = norm.value(x - y);
    if (denom <= 1e-14) return;
    ratio[t] = norm.value(f.apply(x) - f.apply(y)) / denom;
    xs[t] = x;
    ys[t] = y;
  });

  cert.method = LipschitzCertificate::Method::Sampled;
  cert.trials = trials;
  std::size_t worst = 0;
  for (std::size_t t = 1; t < ratio.size(); ++t) {
    if (ratio[t] > ratio[worst]) worst = t;
  }
  cert.bound = ratio[worst];
  if (xs[worst].size() == n) {
    cert.worst_x = xs[worst];
    cert.worst_y = ys[worst];
  }
  cert.pass = cert.bound <= 1.0 + tol;
  return cert;
}

}  // namespace polyfix
