#include "polyfix/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "polyfix/errors.hpp"

namespace polyfix {

namespace {

// Ascending divisors of p.
std::vector<long> divisors_of(long p) {
  std::vector<long> small, large;
  for (long d = 1; d * d <= p; ++d) {
    if (p % d != 0) continue;
    small.push_back(d);
    if (d != p / d) large.push_back(p / d);
  }
  small.insert(small.end(), large.rbegin(), large.rend());
  return small;
}

}  // namespace

FixedPointResult krasnoselskii(const MapFn& f, const Vector& x0,
                               const PolyhedralNorm& norm,
                               const IterationOptions& opts) {
  if (opts.fp_tol <= 0.0) {
    throw config_error("krasnoselskii: fp_tol must be positive");
  }
  if (x0.size() != norm.ambient_dim()) {
    throw dimension_mismatch("krasnoselskii: x0 has dimension " +
                             std::to_string(x0.size()) + ", norm expects " +
                             std::to_string(norm.ambient_dim()));
  }

  Vector x = x0;
  Vector fx = f(x);
  if (fx.size() != x.size()) {
    throw dimension_mismatch("krasnoselskii: map is not an endomorphism");
  }
  double r = norm.value(fx - x);

  FixedPointResult out;
  out.point = x;
  out.residual = r;
  if (opts.record_residuals) out.residual_trace.push_back(r);

  // Best-effort mode pushes past fp_tol until the residual stops making
  // relative progress; the floor absorbs roundoff jitter near convergence.
  const double floor_tol = 1e-15 * std::max(1.0, norm.value(x0));
  const long patience = 64;
  long last_gain = 0;

  long k = 0;
  while (k < opts.max_iter) {
    if (opts.best_effort) {
      if (r <= floor_tol) break;
      if (r <= opts.fp_tol && k - last_gain >= patience) break;
    } else if (r <= opts.fp_tol) {
      break;
    }
    ++k;
    x = 0.5 * (x + fx);
    fx = f(x);
    r = norm.value(fx - x);
    if (opts.record_residuals) out.residual_trace.push_back(r);
    if (r < out.residual * 0.999 || r < out.residual - floor_tol) last_gain = k;
    if (r < out.residual) {
      out.residual = r;
      out.point = x;
    }
  }
  out.iterations = k;
  out.converged = out.residual <= opts.fp_tol;
  return out;
}

Vector retract(const MapFn& f, const Vector& x, const PolyhedralNorm& norm,
               double fp_tol, long max_iter) {
  IterationOptions opts;
  opts.fp_tol = fp_tol;
  opts.max_iter = max_iter;
  return krasnoselskii(f, x, norm, opts).point;
}

Vector iterate_map(const MapFn& f, Vector x, long times) {
  for (long i = 0; i < times; ++i) x = f(x);
  return x;
}

Orbit find_orbit(const MapFn& f, const Vector& x0, const PolyhedralNorm& norm,
                 const OrbitOptions& opts) {
  const int n = norm.ambient_dim();
  if (x0.size() != n) {
    throw dimension_mismatch("find_orbit: x0 has dimension " +
                             std::to_string(x0.size()) + ", norm expects " +
                             std::to_string(n));
  }
  if (opts.orbit_tol <= 0.0 || opts.fp_tol <= 0.0) {
    throw config_error("find_orbit: tolerances must be positive");
  }
  long p_max = opts.p_max;
  if (p_max <= 0) {
    p_max = static_cast<long>(
        std::min<long long>(period_scan_bound(n), opts.p_cap));
  }

  // Ring buffer of the last p_max + 1 iterates of f; slot i % (p_max + 1)
  // holds f^i(x0). Recurrence at lag p compares against a live slot.
  const long ring = p_max + 1;
  std::vector<Vector> window(static_cast<std::size_t>(ring));
  window[0] = x0;

  Vector x = x0;
  long detected_p = 0;
  long detected_at = 0;
  for (long k = 1; k <= opts.max_iter; ++k) {
    x = f(x);
    const long limit = std::min(p_max, k);
    for (long p = 1; p <= limit; ++p) {
      const Vector& past = window[static_cast<std::size_t>((k - p) % ring)];
      if (norm.value(x - past) < opts.orbit_tol) {
        detected_p = p;
        break;
      }
    }
    if (detected_p > 0) {
      detected_at = k;
      break;
    }
    window[static_cast<std::size_t>(k % ring)] = x;
  }
  if (detected_p == 0) {
    std::ostringstream msg;
    msg << "no recurrence at lags 1.." << p_max << " within " << opts.max_iter
        << " iterations (fixed sets of the iterates may be empty)";
    throw no_orbit_found(msg.str());
  }

  // Converge the averaged iteration of f^p from the recurrence point.
  const long p = detected_p;
  MapFn fp = [&f, p](const Vector& y) { return iterate_map(f, y, p); };
  IterationOptions it;
  it.fp_tol = opts.fp_tol;
  it.max_iter = opts.max_iter;
  FixedPointResult fixed = krasnoselskii(fp, x, norm, it);
  if (!fixed.converged) {
    std::ostringstream msg;
    msg << "recurrence at lag " << p << " found, but the averaged iteration "
        << "of the " << p << "-fold map stalled at residual "
        << fixed.residual;
    throw no_orbit_found(msg.str());
  }

  Orbit orbit;
  orbit.representative = fixed.point;
  orbit.detected_lag = p;
  orbit.transient_iterations = detected_at;
  orbit.minimal_period = minimal_period(f, fixed.point, p, norm, opts.orbit_tol);

  orbit.points.reserve(static_cast<std::size_t>(orbit.minimal_period));
  Vector y = fixed.point;
  for (int i = 0; i < orbit.minimal_period; ++i) {
    orbit.points.push_back(y);
    y = f(y);
  }
  // y now holds f^q(representative); closure of the cycle.
  orbit.cycle_defect = norm.value(y - fixed.point);
  for (int i = 0; i + 1 < orbit.minimal_period; ++i) {
    orbit.cycle_defect = std::max(
        orbit.cycle_defect, norm.value(f(orbit.points[static_cast<std::size_t>(i)]) -
                                       orbit.points[static_cast<std::size_t>(i) + 1]));
  }
  orbit.min_separation = 0.0;
  if (orbit.minimal_period > 1) {
    orbit.min_separation = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < orbit.points.size(); ++i) {
      for (std::size_t j = i + 1; j < orbit.points.size(); ++j) {
        orbit.min_separation = std::min(
            orbit.min_separation, norm.value(orbit.points[i] - orbit.points[j]));
      }
    }
  }
  return orbit;
}

int minimal_period(const MapFn& f, const Vector& xi, long p,
                   const PolyhedralNorm& norm, double orbit_tol) {
  if (p < 1) throw precondition_unmet("minimal_period: p >= 1 required");

  long chosen = 0;
  Vector x = xi;
  long steps = 0;
  for (long d : divisors_of(p)) {
    while (steps < d) {
      x = f(x);
      ++steps;
    }
    if (norm.value(x - xi) < orbit_tol) {
      chosen = d;
      break;
    }
  }
  if (chosen == 0) {
    throw precondition_unmet(
        "minimal_period: ||f^p(xi) - xi|| >= orbit_tol; xi is not a periodic "
        "point at this tolerance");
  }

  if (chosen >= 2) {
    std::vector<Vector> pts;
    pts.reserve(static_cast<std::size_t>(chosen));
    Vector y = xi;
    for (long i = 0; i < chosen; ++i) {
      pts.push_back(y);
      y = f(y);
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        const double dist = norm.value(pts[i] - pts[j]);
        if (dist < 10.0 * orbit_tol) {
          std::ostringstream msg;
          msg << "orbit points " << i << " and " << j << " are " << dist
              << " apart with orbit_tol " << orbit_tol
              << "; distinctness cannot be decided at this tolerance";
          throw ambiguous_period(msg.str());
        }
      }
    }
  }
  return static_cast<int>(chosen);
}

BoundAudit audit_period(long q, int n, int p_norm,
                        const std::vector<int>& observed) {
  if (q < 1) throw precondition_unmet("audit_period: q >= 1 required");
  if (n < 1 || n > 20) {
    throw out_of_range("audit_period: n must lie in 1..20");
  }
  if (p_norm != 0 && p_norm != 1) {
    throw config_error("audit_period: p_norm must be 1 or 0 (sup)");
  }

  BoundAudit audit;
  audit.q = q;
  audit.n = n;
  audit.p_norm = p_norm;
  audit.divides_q = std::all_of(observed.begin(), observed.end(),
                                [q](int d) { return d >= 1 && q % d == 0; });

  const std::vector<long long> lcms = partitions_lcm_set(n);
  const auto has = [&lcms](long long v) {
    return std::binary_search(lcms.begin(), lcms.end(), v);
  };
  audit.permutation_order_form = has(q) || (q % 2 == 0 && has(q / 2));
  audit.below_2n = q <= (1LL << n);
  audit.below_best_known = q <= period_scan_bound(n);
  return audit;
}

long lcm_of_observed_periods(const std::vector<Orbit>& orbits) {
  if (orbits.empty()) {
    throw precondition_unmet("lcm_of_observed_periods: empty orbit list");
  }
  long q = 1;
  for (const Orbit& orbit : orbits) {
    if (orbit.minimal_period < 1) {
      throw precondition_unmet("lcm_of_observed_periods: orbit without period");
    }
    q = std::lcm(q, static_cast<long>(orbit.minimal_period));
  }
  return q;
}

}  // namespace polyfix
