#include "polyfix/numerics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "polyfix/errors.hpp"

namespace polyfix {

bool all_finite(const Vector& v) { return v.allFinite(); }
bool all_finite(const Matrix& m) { return m.allFinite(); }

Vector Subspace::project(const Vector& x) const {
  if (dim() == 0) return Vector::Zero(x.size());
  return basis * (basis.transpose() * x);
}

double Subspace::containment_defect(const Vector& x) const {
  return (x - project(x)).norm();
}

bool Subspace::contains(const Vector& x, double tol) const {
  return containment_defect(x) <= tol * std::max(1.0, x.norm());
}

Subspace nullspace(const Matrix& m, double tol) {
  if (tol <= 0) throw out_of_range("nullspace: tol must be > 0");
  const int n = static_cast<int>(m.cols());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  const double cutoff = sigma.size() > 0 ? tol * sigma(0) : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cutoff) ++rank;
  }
  // Right singular vectors beyond the rank span the kernel.
  return Subspace(svd.matrixV().rightCols(n - rank));
}

Subspace column_span(const Matrix& m, double tol) {
  if (m.cols() == 0) return Subspace::zero(static_cast<int>(m.rows()));
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU);
  const auto& sigma = svd.singularValues();
  const double cutoff = sigma.size() > 0 ? tol * sigma(0) : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cutoff) ++rank;
  }
  return Subspace(svd.matrixU().leftCols(rank));
}

Subspace intersect(const Subspace& s1, const Subspace& s2, double tol) {
  if (s1.ambient() != s2.ambient()) {
    throw dimension_mismatch("intersect: ambient dimensions differ");
  }
  const int n = s1.ambient();
  if (s1.dim() == 0 || s2.dim() == 0) return Subspace::zero(n);

  // x in s1 cap s2  <=>  x = B1 a = B2 b; stack [B1 | -B2] and read a from
  // its kernel. Images B1 a of kernel vectors are independent because the
  // bases are.
  Matrix stacked(n, s1.dim() + s2.dim());
  stacked.leftCols(s1.dim()) = s1.basis;
  stacked.rightCols(s2.dim()) = -s2.basis;
  const Subspace ker = nullspace(stacked, tol);
  if (ker.dim() == 0) return Subspace::zero(n);

  Matrix images = s1.basis * ker.basis.topRows(s1.dim());
  return column_span(images, tol);
}

bool subspace_equal(const Subspace& s1, const Subspace& s2, double tol) {
  if (s1.ambient() != s2.ambient()) return false;
  if (s1.dim() != s2.dim()) return false;
  for (int j = 0; j < s1.dim(); ++j) {
    if (!s2.contains(s1.basis.col(j), tol)) return false;
  }
  for (int j = 0; j < s2.dim(); ++j) {
    if (!s1.contains(s2.basis.col(j), tol)) return false;
  }
  return true;
}

namespace {

void enumerate_partitions(int remaining, int max_part, long long lcm_so_far,
                          std::set<long long>& out) {
  if (remaining == 0) {
    out.insert(lcm_so_far);
    return;
  }
  for (int part = std::min(remaining, max_part); part >= 1; --part) {
    enumerate_partitions(remaining - part, part, std::lcm(lcm_so_far, (long long)part),
                         out);
  }
}

}  // namespace

std::vector<long long> partitions_lcm_set(int n) {
  if (n < 1 || n > 20) throw out_of_range("partitions_lcm_set: need 1 <= n <= 20");
  std::set<long long> values;
  enumerate_partitions(n, n, 1, values);
  return {values.begin(), values.end()};
}

long long landau(int n) {
  const auto values = partitions_lcm_set(n);
  return values.back();
}

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long long result = 1;
  for (int i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
  }
  return result;
}

long long period_scan_bound(int n) {
  long long best = 0;
  for (int k = 0; k <= n; ++k) best = std::max(best, binomial(n, k));
  return (1LL << n) * best;
}

}  // namespace polyfix
