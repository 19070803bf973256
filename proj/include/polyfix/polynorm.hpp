#pragma once

#include <string>
#include <vector>

#include "polyfix/numerics.hpp"
#include "polyfix/rng.hpp"

namespace polyfix {

// Face of the dual unit ball, stored extensionally as the sorted set of
// dual extreme-point indices it contains. The face lattice is never built
// globally; only faces arising as duality-map values are materialized.
struct DualFace {
  std::vector<int> indices;  // sorted, unique

  DualFace() = default;
  explicit DualFace(std::vector<int> idx);

  int size() const { return static_cast<int>(indices.size()); }
  bool empty() const { return indices.empty(); }
  bool contains(int i) const;
  bool subset_of(const DualFace& other) const;
  bool proper_subset_of(const DualFace& other) const;
  bool operator==(const DualFace& other) const { return indices == other.indices; }
  bool operator<(const DualFace& other) const { return indices < other.indices; }
  std::string to_string() const;
};

enum class NormKind { LInf, L1, Custom };

const char* to_string(NormKind kind);

struct NormValidation {
  bool symmetric = false;
  bool spanning = false;
  bool extreme = false;        // no functional in the hull of the others
  bool extremality_checked = false;  // skipped above the cap
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// A norm given by the finite extreme-point set of its dual unit ball:
// ||x|| = max_phi phi(x) over the stored functionals. The set must be
// symmetric (phi present => -phi present) and span R^n so the value is a
// genuine norm.
class PolyhedralNorm {
 public:
  static PolyhedralNorm linf(int n);
  // Dual extremes are all 2^n sign vectors, stored explicitly; n <= 16.
  static PolyhedralNorm l1(int n);
  static PolyhedralNorm custom(Matrix dual_extreme_rows);

  int ambient_dim() const { return static_cast<int>(extremes_.cols()); }
  int num_extremes() const { return static_cast<int>(extremes_.rows()); }
  NormKind kind() const { return kind_; }
  const Matrix& extremes() const { return extremes_; }
  Vector extreme(int i) const { return extremes_.row(i).transpose(); }

  // For the built-in norms: index of -phi_i. Computed for custom norms too.
  int antipode(int i) const { return antipode_[i]; }
  DualFace full_face() const;

  double value(const Vector& x) const;

  // All extreme functionals attaining the norm at x, up to a relative
  // tolerance: phi(x) >= ||x|| - tol * max(1, ||x||). This single knob
  // decides face membership everywhere downstream. x = 0 yields the full
  // dual ball (every index).
  DualFace duality_map(const Vector& x, double tol) const;

  // Constructive safety margin for face stability: every y with
  // ||y|| <= radius has duality_map(x + y) contained in duality_map(x).
  // Computed as (1 - c) ||x|| / 4 where c is the largest value phi(x)/||x||
  // over extremes outside the face; +infinity for x = 0.
  double stability_radius(const Vector& x, double face_tol = 1e-9) const;

  // The subspace where all functionals of the face agree:
  // { x : phi(x) = psi(x) for all phi, psi in face }. A singleton face
  // imposes no constraint (full space).
  Subspace l_e_subspace(const DualFace& face, double tol = kRankTol) const;

  NormValidation validate(double tol = 1e-9, int extremality_cap = 64) const;

 private:
  PolyhedralNorm(Matrix extremes, NormKind kind, std::vector<int> antipode);

  Matrix extremes_;  // one functional per row
  NormKind kind_;
  std::vector<int> antipode_;
};

struct FaceSample {
  std::vector<Vector> points;   // unit vectors on the face
  Subspace span;                // span of the sampled points
  bool empty_face = false;      // no sample found within the draw budget
  bool span_matches = false;    // span == l_e_subspace(face) by mutual membership
  double span_defect = 0.0;     // worst one-sided containment defect
};

// Samples the primal-ball face { x in B_X : phi(x) = 1 for all phi in face }
// by drawing directions inside l_e_subspace(face) and keeping normalized
// points whose duality map still covers the face. Verifies that the span of
// the samples equals l_e_subspace(face). Meaningful when the face arises as
// a duality-map value; other faces may come back empty.
FaceSample face_of_ball(const PolyhedralNorm& norm, const DualFace& face,
                        double tol, int wanted_samples, int max_draws, Rng& rng);

}  // namespace polyfix
