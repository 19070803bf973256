#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace polyfix {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Default relative cutoff for rank decisions: singular values below
// tol * sigma_max count as zero. Instances here are tiny (n <= ~10).
inline constexpr double kRankTol = 1e-9;

bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

// Linear subspace of R^n held as an orthonormal column basis. dim 0 is the
// zero subspace (basis is n x 0).
struct Subspace {
  Matrix basis;

  Subspace() : basis(0, 0) {}
  explicit Subspace(Matrix b) : basis(std::move(b)) {}

  static Subspace zero(int ambient) { return Subspace(Matrix(ambient, 0)); }
  static Subspace full(int ambient) {
    return Subspace(Matrix::Identity(ambient, ambient));
  }

  int ambient() const { return static_cast<int>(basis.rows()); }
  int dim() const { return static_cast<int>(basis.cols()); }

  // Orthogonal projection onto the subspace.
  Vector project(const Vector& x) const;
  // Distance-based membership: || x - proj(x) || <= tol * max(1, ||x||_2).
  bool contains(const Vector& x, double tol = kRankTol) const;
  double containment_defect(const Vector& x) const;
};

// Orthonormal basis for { x : M x = 0 }. Columns of M beyond its rank count:
// singular values below tol * sigma_max are treated as zero. A full-rank M
// yields the zero subspace.
Subspace nullspace(const Matrix& m, double tol = kRankTol);

// Orthonormal basis for the column space of M (rank decided as above).
Subspace column_span(const Matrix& m, double tol = kRankTol);

// Basis of s1 cap s2. Requires equal ambient dimensions.
Subspace intersect(const Subspace& s1, const Subspace& s2, double tol = kRankTol);

// Equality by mutual membership of basis vectors (bases are not canonical).
bool subspace_equal(const Subspace& s1, const Subspace& s2, double tol = kRankTol);

// All values lcm(parts) over the integer partitions of n, sorted ascending.
// Valid for 1 <= n <= 20.
std::vector<long long> partitions_lcm_set(int n);

// Maximal order of a permutation on n letters: max of partitions_lcm_set(n).
long long landau(int n);

long long binomial(int n, int k);

// 2^n * max_k C(n, k): the sharpest published cap on minimal periods of
// sup-norm nonexpansive maps on R^n. Used as the default period-scan ceiling.
long long period_scan_bound(int n);

}  // namespace polyfix
