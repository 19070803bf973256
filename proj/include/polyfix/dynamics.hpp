#pragma once

#include <vector>

#include "polyfix/maps.hpp"
#include "polyfix/numerics.hpp"
#include "polyfix/polynorm.hpp"

namespace polyfix {

// Outcome of the averaged fixed-point iteration. `converged` is a status,
// not an error: the fixed set may be empty, in which case the best iterate
// seen is returned with its residual.
struct FixedPointResult {
  Vector point;
  long iterations = 0;
  double residual = 0.0;  // ||f(point) - point|| in the ambient norm
  bool converged = false;
  std::vector<double> residual_trace;  // filled only when requested
};

struct IterationOptions {
  double fp_tol = 1e-10;
  long max_iter = 200000;
  // Keep iterating past fp_tol while the residual still improves.  Used by
  // finite differencing, where evaluation error must sit far below h * tol.
  bool best_effort = false;
  bool record_residuals = false;
};

// x <- (f(x) + x) / 2 until the residual ||f(x) - x|| drops below fp_tol.
// The residual is non-increasing along the iteration when f is nonexpansive.
FixedPointResult krasnoselskii(const MapFn& f, const Vector& x0,
                               const PolyhedralNorm& norm,
                               const IterationOptions& opts = {});

// The limit map R of the averaged iteration, evaluated at x. Idempotent and
// nonexpansive onto the fixed set; equals krasnoselskii(...).point.
Vector retract(const MapFn& f, const Vector& x, const PolyhedralNorm& norm,
               double fp_tol = 1e-10, long max_iter = 200000);

// f applied `times` times (by repeated evaluation, never composition).
Vector iterate_map(const MapFn& f, Vector x, long times);

// Periodic orbit: `points` lists the minimal_period distinct orbit points
// starting at `representative`, with f cycling the list within orbit_tol.
struct Orbit {
  Vector representative;
  std::vector<Vector> points;
  int minimal_period = 0;
  long detected_lag = 0;         // recurrence lag that triggered convergence
  long transient_iterations = 0; // plain iterations before recurrence fired
  double cycle_defect = 0.0;     // max ||f(points[i]) - points[i+1]||
  double min_separation = 0.0;   // min pairwise orbit distance (0 if q = 1)
};

struct OrbitOptions {
  double orbit_tol = 1e-8;
  double fp_tol = 1e-10;
  long max_iter = 200000;
  // Largest recurrence lag scanned. 0 derives the permutation-order bound
  // for the ambient dimension, truncated at p_cap.
  long p_max = 0;
  long p_cap = 4096;
};

// Scans iterates of f for near-recurrence at lags 1..p_max, converges the
// averaged iteration of f^p from the recurrence point, then reduces p to the
// minimal period. Throws NO-ORBIT-FOUND when the scan budget is exhausted.
Orbit find_orbit(const MapFn& f, const Vector& x0, const PolyhedralNorm& norm,
                 const OrbitOptions& opts = {});

// Smallest divisor d of p with ||f^d(xi) - xi|| < orbit_tol. Verifies the d
// orbit points are pairwise separated; throws AMBIGUOUS-PERIOD when any pair
// lands inside the tolerance collision band [orbit_tol, 10 * orbit_tol).
int minimal_period(const MapFn& f, const Vector& xi, long p,
                   const PolyhedralNorm& norm, double orbit_tol = 1e-8);

// Period-bound audit for an observed least common multiple q in dimension n.
struct BoundAudit {
  long q = 0;
  int n = 0;
  int p_norm = 0;  // 1 or 0 standing for infinity; recorded, not branched on
  bool divides_q = true;             // every observed period divides q
  bool permutation_order_form = false;  // q in S union 2S, S = lcm set
  bool below_2n = false;                // q <= 2^n
  bool below_best_known = false;        // q <= 2^n * max_k C(n,k)
};

// p_norm: 1 for the l1 family, 0 for sup. `observed` holds the individual
// minimal periods folded into q; empty means nothing to check for divides_q.
BoundAudit audit_period(long q, int n, int p_norm,
                        const std::vector<int>& observed = {});

long lcm_of_observed_periods(const std::vector<Orbit>& orbits);

}  // namespace polyfix
