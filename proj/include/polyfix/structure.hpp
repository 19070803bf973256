#pragma once

#include <cstdint>
#include <vector>

#include "polyfix/dynamics.hpp"
#include "polyfix/maps.hpp"
#include "polyfix/numerics.hpp"
#include "polyfix/polynorm.hpp"
#include "polyfix/rng.hpp"

namespace polyfix {

// Witnessed locked face: face = J(witness_v - witness_w) with both witnesses
// agreeing with their images on every functional of the face. The diagonal
// witness v = w carries the full extreme set.
struct LockedSet {
  DualFace face;
  Vector witness_v;
  Vector witness_w;
};

// Membership in S_E(f): every functional indexed by the face moves by at
// most tol * max(1, ||x||) under f.
bool s_e_member(const MapFn& f, const PolyhedralNorm& norm, const DualFace& face,
                const Vector& x, double tol);

// Locked faces witnessed by ordered pairs of the given fixed points, plus
// the diagonal full-face set. Pairs closer than min_separation are skipped:
// two converged copies of one fixed point would produce a noise face.
// Duplicate faces keep the widest-separated witnesses. Sorted by face.
std::vector<LockedSet> find_locked_sets(const MapFn& f, const PolyhedralNorm& norm,
                                        const std::vector<Vector>& fixed_points,
                                        double face_tol = 1e-9,
                                        double min_separation = 1e-6);

// Faces containing no other discovered face properly. Discovery is sample
// limited, so this upper-approximates true minimality.
std::vector<LockedSet> minimal_locked(const std::vector<LockedSet>& sets);

// V(f): intersection of the agreement subspaces of the minimal faces. Every
// supplied fixed point (translated to the basepoint frame) must lie inside;
// a miss throws CONTAINMENT-VIOLATION and signals under-discovery of locked
// faces or tolerance trouble.
Subspace v_of_f(const PolyhedralNorm& norm, const std::vector<LockedSet>& minimal,
                double rank_tol = kRankTol,
                const std::vector<Vector>& fixed_points_in_frame = {},
                double containment_tol = 1e-8);

// Central finite differences of the retract along a basis of V at u,
// extended by zero on the orthogonal complement: A = D * basis^T. Retract
// evaluations push past fp_tol to their numerical floor so the difference
// quotients stay clean at step h.
Matrix derivative_of_retract(const MapFn& f, const PolyhedralNorm& norm,
                             const Subspace& v, const Vector& u, double h = 1e-5,
                             double fp_tol = 1e-10, long max_iter = 200000);

struct DerivativeSearch {
  Matrix a;
  Vector u;
  double a2_defect = 0.0;
  int attempts = 0;
};

// Draws u from a box in V until the finite-difference derivative satisfies
// A^2 = A within check_tol; differentiability holds almost everywhere, so a
// bad draw is retried. Throws NO-DIFFERENTIABLE-POINT-FOUND when the budget
// runs out.
DerivativeSearch differentiable_point_search(const MapFn& f, const PolyhedralNorm& norm,
                                             const Subspace& v, Rng& rng,
                                             double h = 1e-5, double fp_tol = 1e-10,
                                             double check_tol = 1e-8,
                                             int retry_budget = 16,
                                             double box_radius = 1.0,
                                             long max_iter = 200000);

struct ProjectionCheck {
  double a2_defect = 0.0;
  double opnorm_estimate = 0.0;
  bool exact_norm = false;     // row/column sums; otherwise a sampled lower bound
  bool nonexpansive = false;   // opnorm_estimate <= 1 + tol
};

// A^2 = A defect plus an operator-norm bound. Exact when the domain is the
// full space under a built-in norm; otherwise sampled along the domain
// subspace. An empty domain (ambient 0) means the full space.
ProjectionCheck verify_projection(const Matrix& a, const PolyhedralNorm& norm,
                                  double tol = 1e-8,
                                  const Subspace& domain = Subspace(),
                                  int samples = 400, std::uint64_t seed = 11);

struct IsometryCheck {
  int pairs = 0;
  double max_defect = 0.0;      // | ||R(x) - R(y)|| - ||x - y|| |
  double inverse_defect = 0.0;  // max ||A(R(x)) - x|| over sampled x
};

// Samples pairs in W, compares distances before and after the retract, and
// audits that A inverts R on W.
IsometryCheck verify_isometry(const MapFn& f, const PolyhedralNorm& norm,
                              const Matrix& a, const Subspace& w, int pairs,
                              std::uint64_t seed, double fp_tol = 1e-10,
                              long max_iter = 200000, double box_radius = 2.0);

// Worst disagreement |phi(R(x)) - phi(x)| and |phi(Ax) - phi(x)| over the
// functionals of the given faces and samples x drawn from V.
double value_preservation_defect(const MapFn& f, const PolyhedralNorm& norm,
                                 const std::vector<DualFace>& faces,
                                 const Subspace& v, const Matrix& a, int samples,
                                 std::uint64_t seed, double fp_tol = 1e-10,
                                 long max_iter = 200000, double box_radius = 2.0);

// Classes of coordinates whose moduli agree across the whole subspace, read
// off the basis rows (two coordinates agree iff their rows are equal up to
// one global sign). All identically-zero coordinates form a single class.
// Indices 0-based; classes and their contents sorted.
std::vector<std::vector<int>> partition_support(const Subspace& v,
                                                double tol = kRankTol);

// Sign-pattern averaging projection onto V: sum over modulus classes of
// (1/|I_k|) v_k v_k^T where v_k is the class sign pattern. Requires V to be
// spanned by those sign vectors (the shape agreement subspaces take under
// the sup norm); throws STRUCTURE-MISMATCH otherwise.
Matrix projection_linf(const Subspace& v, double tol = kRankTol);

// Coordinate projection onto the support set (0-based indices).
Matrix projection_l1(const std::vector<int>& support, int n);

// Coordinates not identically zero on V. V must be exactly the coordinate
// subspace on those indices (the shape agreement subspaces take under the
// 1-norm); throws STRUCTURE-MISMATCH otherwise.
std::vector<int> support_of_v(const Subspace& v, const PolyhedralNorm& norm,
                              double tol = kRankTol);

struct Linearization {
  Matrix on_w;     // dim W x dim W in the coordinates of the W basis
  Matrix ambient;  // n x n extension, zero off W
  double linearity_defect = 0.0;
  int samples = 0;
};

// Matrix of x -> A(f(R(x))) on a basis of W, where R retracts onto the fixed
// set of fix_of (pass f itself, or its q-fold iterate when linearizing over
// a periodic orbit). The map is linear on W because surjective isometries
// between normed spaces are affine; a sampled superposition audit guards the
// preconditions and throws LINEARITY-VIOLATION on failure.
Linearization linearize_on_fix(const MapFn& f, const MapFn& fix_of,
                               const PolyhedralNorm& norm, const Matrix& a,
                               const Subspace& w, int samples, std::uint64_t seed,
                               double fp_tol = 1e-10, double audit_tol = 1e-8,
                               long max_iter = 200000);

// Smallest k <= cap with M^k = I within tol (max entry); 0 when none. The
// empty 0 x 0 matrix has period 1.
int linear_period(const Matrix& m, int cap, double tol = 1e-8);

struct AffineFixAudit {
  double max_defect = 0.0;
  int samples = 0;
};

// Strictly convex cross-check: residuals of f along random affine
// combinations (1-t)x + ty of known fixed points, t in [-2, 3], Euclidean
// norm. The caller asserts strict convexity via the flag.
AffineFixAudit affine_fix_audit(const MapFn& f, bool norm_strictly_convex,
                                const std::vector<Vector>& fixed_points,
                                int samples, std::uint64_t seed, double tol = 1e-8);

// Exhaustive locked-face oracle for the sup norm in dimension n <= 3: every
// face of the dual ball is tested for witness pairs on a dense grid of
// points that agree with their images on the face. Returns all locked faces
// and the inclusion-minimal ones.
struct OracleOptions {
  double lo = -2.0;
  double hi = 2.0;
  int points_per_axis = 9;
  double face_tol = 1e-9;
  double member_tol = 1e-9;
};

struct OracleResult {
  std::vector<DualFace> locked;
  std::vector<DualFace> minimal;
};

OracleResult oracle_locked_faces_linf(const MapFn& f, int n,
                                      const OracleOptions& opts = OracleOptions());

// Fixed points from many random starts, one derived seed per start; runs is
// indexed by start so results do not depend on scheduling.
struct Harvest {
  std::vector<FixedPointResult> runs;
  std::vector<Vector> converged;  // points of the converged runs, start order
};

Harvest harvest_fixed_points(const MapFn& f, const PolyhedralNorm& norm, int starts,
                             std::uint64_t seed, double fp_tol = 1e-10,
                             long max_iter = 200000, double box_radius = 2.0);

struct StructurePipelineParams {
  int starts = 64;
  std::uint64_t seed = 1;
  double fp_tol = 1e-10;
  double face_tol = 1e-9;
  double check_tol = 1e-8;
  double rank_tol = kRankTol;
  long max_iter = 200000;
  double h = 1e-5;
  int retry_budget = 16;
  int isometry_pairs = 250;
  int value_samples = 200;
  double box_radius = 2.0;
  double min_pair_separation = 1e-6;
};

// Full fixed-point geometry of one map. Witnesses and fixed points are kept
// in original coordinates; u, V, A, W live in the frame translated so that
// `basepoint` sits at the origin.
struct StructureReport {
  int starts = 0;
  int converged = 0;
  std::vector<Vector> fixed_points;
  Vector basepoint;
  std::vector<LockedSet> locked;
  std::vector<LockedSet> minimal;
  bool discovery_stabilized = false;  // no new face in the last half of starts
  Subspace v;
  Vector u;
  Matrix a;
  int derivative_attempts = 0;
  Subspace w;
  double a2_defect = 0.0;
  double opnorm_estimate = 0.0;
  bool opnorm_exact = false;
  bool projection_nonexpansive = false;
  IsometryCheck isometry;
  double value_preservation = 0.0;
};

// Harvest, translate to a basepoint, discover locked faces, intersect their
// agreement subspaces, differentiate the retract, and audit the results.
// Throws PRECONDITION-UNMET when no start converges (fixed set may be empty).
StructureReport run_structure_pipeline(const MapFn& f, const PolyhedralNorm& norm,
                                       const StructurePipelineParams& params);

}  // namespace polyfix
