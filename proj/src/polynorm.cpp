#include "polyfix/polynorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "polyfix/errors.hpp"

namespace polyfix {

DualFace::DualFace(std::vector<int> idx) : indices(std::move(idx)) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
}

bool DualFace::contains(int i) const {
  return std::binary_search(indices.begin(), indices.end(), i);
}

bool DualFace::subset_of(const DualFace& other) const {
  return std::includes(other.indices.begin(), other.indices.end(),
                       indices.begin(), indices.end());
}

bool DualFace::proper_subset_of(const DualFace& other) const {
  return size() < other.size() && subset_of(other);
}

std::string DualFace::to_string() const {
  std::ostringstream out;
  out << '{';
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i) out << ',';
    out << indices[i];
  }
  out << '}';
  return out.str();
}

const char* to_string(NormKind kind) {
  switch (kind) {
    case NormKind::LInf: return "linf";
    case NormKind::L1: return "l1";
    case NormKind::Custom: return "custom";
  }
  return "?";
}

PolyhedralNorm::PolyhedralNorm(Matrix extremes, NormKind kind,
                               std::vector<int> antipode)
    : extremes_(std::move(extremes)), kind_(kind), antipode_(std::move(antipode)) {
  if (extremes_.rows() < 1 || extremes_.cols() < 1) {
    throw dimension_mismatch("PolyhedralNorm: need at least one functional");
  }
  if (!all_finite(extremes_)) {
    throw out_of_range("PolyhedralNorm: non-finite functional entries");
  }
  if (antipode_.empty()) {
    // Pair every functional with its antipode; validate() reports a missing
    // -phi instead of throwing here. Quadratic, but custom norms are small.
    const int k = num_extremes();
    antipode_.assign(k, -1);
    for (int i = 0; i < k; ++i) {
      if (antipode_[i] >= 0) continue;
      for (int j = 0; j < k; ++j) {
        if (j == i) continue;
        if ((extremes_.row(i) + extremes_.row(j)).norm() <= 1e-12) {
          antipode_[i] = j;
          antipode_[j] = i;
          break;
        }
      }
    }
  }
}

PolyhedralNorm PolyhedralNorm::linf(int n) {
  if (n < 1) throw out_of_range("linf norm: n >= 1 required");
  Matrix rows(2 * n, n);
  rows.setZero();
  std::vector<int> antipode(2 * n);
  for (int i = 0; i < n; ++i) {
    rows(i, i) = 1.0;       // e_i
    rows(n + i, i) = -1.0;  // -e_i
    antipode[i] = n + i;
    antipode[n + i] = i;
  }
  return PolyhedralNorm(std::move(rows), NormKind::LInf, std::move(antipode));
}

PolyhedralNorm PolyhedralNorm::l1(int n) {
  if (n < 1) throw out_of_range("l1 norm: n >= 1 required");
  if (n > 16) throw out_of_range("l1 norm: 2^n dual extremes stored explicitly, n <= 16");
  const int count = 1 << n;
  Matrix rows(count, n);
  std::vector<int> antipode(count);
  for (int mask = 0; mask < count; ++mask) {
    for (int i = 0; i < n; ++i) {
      rows(mask, i) = (mask >> i) & 1 ? 1.0 : -1.0;
    }
    antipode[mask] = ~mask & (count - 1);
  }
  return PolyhedralNorm(std::move(rows), NormKind::L1, std::move(antipode));
}

PolyhedralNorm PolyhedralNorm::custom(Matrix dual_extreme_rows) {
  return PolyhedralNorm(std::move(dual_extreme_rows), NormKind::Custom, {});
}

DualFace PolyhedralNorm::full_face() const {
  std::vector<int> all(num_extremes());
  for (int i = 0; i < num_extremes(); ++i) all[i] = i;
  return DualFace(std::move(all));
}

double PolyhedralNorm::value(const Vector& x) const {
  if (x.size() != ambient_dim()) {
    throw dimension_mismatch("norm value: vector dimension mismatch");
  }
  return (extremes_ * x).maxCoeff();
}

DualFace PolyhedralNorm::duality_map(const Vector& x, double tol) const {
  if (x.size() != ambient_dim()) {
    throw dimension_mismatch("duality_map: vector dimension mismatch");
  }
  if (tol < 0) throw out_of_range("duality_map: tol >= 0 required");
  const Vector values = extremes_ * x;
  const double norm = values.maxCoeff();
  const double threshold = norm - tol * std::max(1.0, norm);
  std::vector<int> hits;
  for (int i = 0; i < num_extremes(); ++i) {
    if (values[i] >= threshold) hits.push_back(i);
  }
  return DualFace(std::move(hits));
}

double PolyhedralNorm::stability_radius(const Vector& x, double face_tol) const {
  const double norm = value(x);
  if (norm == 0.0) return std::numeric_limits<double>::infinity();
  const DualFace face = duality_map(x, face_tol);
  const Vector values = extremes_ * x;
  double c = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < num_extremes(); ++i) {
    if (!face.contains(i)) c = std::max(c, values[i] / norm);
  }
  // A symmetric spanning extreme set puts some functional outside the face
  // of any nonzero x; treat the degenerate case like x = 0 anyway.
  if (!std::isfinite(c)) return std::numeric_limits<double>::infinity();
  return (1.0 - c) * norm / 4.0;
}

Subspace PolyhedralNorm::l_e_subspace(const DualFace& face, double tol) const {
  if (face.empty()) throw out_of_range("l_e_subspace: face must be nonempty");
  const int n = ambient_dim();
  if (face.size() == 1) return Subspace::full(n);
  Matrix diffs(face.size() - 1, n);
  const auto base = extremes_.row(face.indices[0]);
  for (int i = 1; i < face.size(); ++i) {
    diffs.row(i - 1) = extremes_.row(face.indices[i]) - base;
  }
  return nullspace(diffs, tol);
}

namespace {

// Squared distance from target to the convex hull of the rows of `hull`,
// by Frank-Wolfe on the simplex. Desk-scale replacement for an LP.
double hull_distance_sq(const Matrix& hull, const Vector& target, int iters) {
  const int k = static_cast<int>(hull.rows());
  Vector lambda = Vector::Constant(k, 1.0 / k);
  Vector point = hull.transpose() * lambda;
  for (int t = 0; t < iters; ++t) {
    const Vector grad = hull * (point - target);
    int best = 0;
    grad.minCoeff(&best);
    const Vector vertex = hull.row(best).transpose();
    const Vector dir = vertex - point;
    const double denom = dir.squaredNorm();
    if (denom <= 0) break;
    double step = -dir.dot(point - target) / denom;
    step = std::clamp(step, 0.0, 1.0);
    if (step <= 0) break;
    point += step * dir;
  }
  return (point - target).squaredNorm();
}

}  // namespace

NormValidation PolyhedralNorm::validate(double tol, int extremality_cap) const {
  NormValidation report;
  const int k = num_extremes();

  report.symmetric = true;
  for (int i = 0; i < k; ++i) {
    if (antipode_[i] < 0) {
      report.symmetric = false;
      report.violations.push_back("missing antipode for functional " + std::to_string(i));
      break;
    }
  }

  Eigen::JacobiSVD<Matrix> svd(extremes_);
  const auto& sigma = svd.singularValues();
  report.spanning = sigma.size() == ambient_dim() &&
                    sigma(sigma.size() - 1) > tol * sigma(0);
  if (!report.spanning) {
    report.violations.push_back("dual extremes do not span the ambient space");
  }

  if (k >= 2 && k <= extremality_cap) {
    report.extremality_checked = true;
    report.extreme = true;
    Matrix others(k - 1, ambient_dim());
    for (int i = 0; i < k; ++i) {
      int row = 0;
      for (int j = 0; j < k; ++j) {
        if (j != i) others.row(row++) = extremes_.row(j);
      }
      const double d2 = hull_distance_sq(others, extreme(i), 2000);
      if (d2 <= 1e-12) {
        report.extreme = false;
        report.violations.push_back("functional " + std::to_string(i) +
                                    " lies in the hull of the others");
      }
    }
  }
  return report;
}

FaceSample face_of_ball(const PolyhedralNorm& norm, const DualFace& face,
                        double tol, int wanted_samples, int max_draws, Rng& rng) {
  FaceSample result;
  const Subspace le = norm.l_e_subspace(face, kRankTol);
  if (le.dim() == 0) {
    result.empty_face = true;
    return result;
  }

  for (int draw = 0; draw < max_draws &&
                     static_cast<int>(result.points.size()) < wanted_samples;
       ++draw) {
    Vector coeffs = rng.gaussian(le.dim());
    Vector z = le.basis * coeffs;
    const double nz = norm.value(z);
    if (nz <= 0) continue;
    z /= nz;
    if (face.subset_of(norm.duality_map(z, tol))) {
      result.points.push_back(z);
    } else if (face.subset_of(norm.duality_map(-z, tol))) {
      result.points.push_back(-z);
    }
  }

  if (result.points.empty()) {
    result.empty_face = true;
    return result;
  }

  Matrix stacked(norm.ambient_dim(), result.points.size());
  for (std::size_t i = 0; i < result.points.size(); ++i) {
    stacked.col(static_cast<int>(i)) = result.points[i];
  }
  result.span = column_span(stacked, kRankTol);

  double defect = 0.0;
  for (int j = 0; j < result.span.dim(); ++j) {
    defect = std::max(defect, le.containment_defect(result.span.basis.col(j)));
  }
  for (int j = 0; j < le.dim(); ++j) {
    defect = std::max(defect, result.span.containment_defect(le.basis.col(j)));
  }
  result.span_defect = defect;
  result.span_matches = result.span.dim() == le.dim() && defect <= tol;
  return result;
}

}  // namespace polyfix
