#include "polyfix/structure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "polyfix/errors.hpp"
#include "polyfix/parallel.hpp"

namespace polyfix {

namespace {

IterationOptions tight_options(double fp_tol, long max_iter) {
  IterationOptions opts;
  opts.fp_tol = fp_tol;
  opts.max_iter = max_iter;
  opts.best_effort = true;
  return opts;
}

double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

std::set<DualFace> face_set(const std::vector<LockedSet>& sets) {
  std::set<DualFace> out;
  for (const LockedSet& s : sets) out.insert(s.face);
  return out;
}

}  // namespace

bool s_e_member(const MapFn& f, const PolyhedralNorm& norm, const DualFace& face,
                const Vector& x, double tol) {
  if (x.size() != norm.ambient_dim()) {
    throw dimension_mismatch("s_e_member: point dimension " +
                             std::to_string(x.size()) + " vs norm " +
                             std::to_string(norm.ambient_dim()));
  }
  const Vector shift = f(x) - x;
  const double scale = std::max(1.0, norm.value(x));
  for (int idx : face.indices) {
    if (idx < 0 || idx >= norm.num_extremes()) {
      throw out_of_range("s_e_member: face index " + std::to_string(idx));
    }
    if (std::abs(norm.extremes().row(idx).dot(shift)) > tol * scale) return false;
  }
  return true;
}

std::vector<LockedSet> find_locked_sets(const MapFn& f, const PolyhedralNorm& norm,
                                        const std::vector<Vector>& fixed_points,
                                        double face_tol, double min_separation) {
  (void)f;  // witnesses are fixed points, so membership in S_E holds for every E
  std::map<DualFace, LockedSet> by_face;
  std::map<DualFace, double> spread;
  for (std::size_t i = 0; i < fixed_points.size(); ++i) {
    for (std::size_t j = 0; j < fixed_points.size(); ++j) {
      if (i == j) continue;
      const Vector d = fixed_points[i] - fixed_points[j];
      const double sep = norm.value(d);
      if (sep < min_separation) continue;
      DualFace face = norm.duality_map(d, face_tol);
      auto it = spread.find(face);
      if (it == spread.end() || sep > it->second) {
        spread[face] = sep;
        by_face[face] = LockedSet{face, fixed_points[i], fixed_points[j]};
      }
    }
  }
  if (!fixed_points.empty()) {
    DualFace full = norm.full_face();
    if (by_face.find(full) == by_face.end()) {
      by_face[full] = LockedSet{full, fixed_points.front(), fixed_points.front()};
    }
  }
  std::vector<LockedSet> out;
  out.reserve(by_face.size());
  for (auto& entry : by_face) out.push_back(std::move(entry.second));
  return out;
}

std::vector<LockedSet> minimal_locked(const std::vector<LockedSet>& sets) {
  std::vector<LockedSet> out;
  for (const LockedSet& s : sets) {
    bool minimal = true;
    for (const LockedSet& t : sets) {
      if (t.face.proper_subset_of(s.face)) {
        minimal = false;
        break;
      }
    }
    if (minimal) out.push_back(s);
  }
  return out;
}

Subspace v_of_f(const PolyhedralNorm& norm, const std::vector<LockedSet>& minimal,
                double rank_tol, const std::vector<Vector>& fixed_points_in_frame,
                double containment_tol) {
  if (minimal.empty()) {
    throw precondition_unmet("v_of_f: no locked faces to intersect");
  }
  Subspace v = Subspace::full(norm.ambient_dim());
  for (const LockedSet& s : minimal) {
    v = intersect(v, norm.l_e_subspace(s.face, rank_tol), rank_tol);
  }
  for (const Vector& y : fixed_points_in_frame) {
    const double defect = v.containment_defect(y);
    if (defect > containment_tol * std::max(1.0, y.norm())) {
      std::ostringstream msg;
      msg << "fixed point sits " << defect << " outside the intersection of "
          << minimal.size() << " agreement subspaces (dim " << v.dim()
          << "); locked-face discovery is incomplete or tolerances clash";
      throw containment_violation(msg.str());
    }
  }
  return v;
}

Matrix derivative_of_retract(const MapFn& f, const PolyhedralNorm& norm,
                             const Subspace& v, const Vector& u, double h,
                             double fp_tol, long max_iter) {
  const int n = norm.ambient_dim();
  if (v.ambient() != n || u.size() != n) {
    throw dimension_mismatch("derivative_of_retract: ambient dimensions differ");
  }
  if (h <= 0.0) throw config_error("derivative_of_retract: h must be positive");
  if (!v.contains(u, 1e-8)) {
    throw precondition_unmet("derivative_of_retract: u is not in V");
  }
  const int d = v.dim();
  if (d == 0) return Matrix::Zero(n, n);

  const IterationOptions opts = tight_options(fp_tol, max_iter);
  std::vector<Vector> shifted(static_cast<std::size_t>(2 * d));
  parallel_for(static_cast<std::size_t>(2 * d), [&](std::size_t t) {
    const int j = static_cast<int>(t) / 2;
    const double sign = (t % 2 == 0) ? 1.0 : -1.0;
    const Vector x = u + sign * h * v.basis.col(j);
    shifted[t] = krasnoselskii(f, x, norm, opts).point;
  });

  Matrix diff(n, d);
  for (int j = 0; j < d; ++j) {
    diff.col(j) = (shifted[static_cast<std::size_t>(2 * j)] -
                   shifted[static_cast<std::size_t>(2 * j) + 1]) /
                  (2.0 * h);
  }
  return diff * v.basis.transpose();
}

DerivativeSearch differentiable_point_search(const MapFn& f, const PolyhedralNorm& norm,
                                             const Subspace& v, Rng& rng, double h,
                                             double fp_tol, double check_tol,
                                             int retry_budget, double box_radius,
                                             long max_iter) {
  if (retry_budget < 1) {
    throw config_error("differentiable_point_search: retry budget must be >= 1");
  }
  double best_defect = std::numeric_limits<double>::infinity();
  for (int attempt = 1; attempt <= retry_budget; ++attempt) {
    const Vector u = v.basis * rng.uniform_box(v.dim(), box_radius);
    const Matrix a = derivative_of_retract(f, norm, v, u, h, fp_tol, max_iter);
    const double defect = max_abs(a * a - a);
    if (defect <= check_tol) {
      return DerivativeSearch{a, u, defect, attempt};
    }
    best_defect = std::min(best_defect, defect);
  }
  std::ostringstream msg;
  msg << "no draw in " << retry_budget << " attempts gave a projection-like "
      << "derivative (best idempotence defect " << best_defect
      << ", threshold " << check_tol << ")";
  throw no_differentiable_point(msg.str());
}

ProjectionCheck verify_projection(const Matrix& a, const PolyhedralNorm& norm,
                                  double tol, const Subspace& domain, int samples,
                                  std::uint64_t seed) {
  const int n = norm.ambient_dim();
  if (a.rows() != n || a.cols() != n) {
    throw dimension_mismatch("verify_projection: matrix must be n x n");
  }
  ProjectionCheck check;
  check.a2_defect = max_abs(a * a - a);

  const bool full_domain = domain.ambient() == 0 || domain.dim() == domain.ambient();
  if (full_domain) {
    const OperatorNormResult op = operator_norm(a, norm);
    check.opnorm_estimate = op.value;
    check.exact_norm = op.exact;
  } else {
    Rng rng(seed);
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
      const Vector x = domain.basis * rng.uniform_box(domain.dim(), 1.0);
      const double nx = norm.value(x);
      if (nx < 1e-12) continue;
      worst = std::max(worst, norm.value(a * x) / nx);
    }
    check.opnorm_estimate = worst;
    check.exact_norm = false;
  }
  check.nonexpansive = check.opnorm_estimate <= 1.0 + tol;
  return check;
}

IsometryCheck verify_isometry(const MapFn& f, const PolyhedralNorm& norm,
                              const Matrix& a, const Subspace& w, int pairs,
                              std::uint64_t seed, double fp_tol, long max_iter,
                              double box_radius) {
  IsometryCheck check;
  if (w.dim() == 0 || pairs <= 0) return check;
  check.pairs = pairs;

  const IterationOptions opts = tight_options(fp_tol, max_iter);
  std::vector<double> defect(static_cast<std::size_t>(pairs), 0.0);
  std::vector<double> inverse(static_cast<std::size_t>(pairs), 0.0);
  parallel_for(static_cast<std::size_t>(pairs), [&](std::size_t k) {
    Rng rng(Rng::derive(seed, k));
    const Vector x = w.basis * rng.uniform_box(w.dim(), box_radius);
    const Vector y = w.basis * rng.uniform_box(w.dim(), box_radius);
    const Vector rx = krasnoselskii(f, x, norm, opts).point;
    const Vector ry = krasnoselskii(f, y, norm, opts).point;
    defect[k] = std::abs(norm.value(rx - ry) - norm.value(x - y));
    inverse[k] = std::max(norm.value(a * rx - x), norm.value(a * ry - y));
  });
  check.max_defect = *std::max_element(defect.begin(), defect.end());
  check.inverse_defect = *std::max_element(inverse.begin(), inverse.end());
  return check;
}

double value_preservation_defect(const MapFn& f, const PolyhedralNorm& norm,
                                 const std::vector<DualFace>& faces,
                                 const Subspace& v, const Matrix& a, int samples,
                                 std::uint64_t seed, double fp_tol, long max_iter,
                                 double box_radius) {
  std::set<int> functional_set;
  for (const DualFace& face : faces) {
    functional_set.insert(face.indices.begin(), face.indices.end());
  }
  if (functional_set.empty() || samples <= 0) return 0.0;
  const std::vector<int> functionals(functional_set.begin(), functional_set.end());

  const IterationOptions opts = tight_options(fp_tol, max_iter);
  std::vector<double> defect(static_cast<std::size_t>(samples), 0.0);
  parallel_for(static_cast<std::size_t>(samples), [&](std::size_t k) {
    Rng rng(Rng::derive(seed, k));
    const Vector x = v.basis * rng.uniform_box(v.dim(), box_radius);
    const Vector rx = krasnoselskii(f, x, norm, opts).point;
    const Vector ax = a * x;
    double worst = 0.0;
    for (int idx : functionals) {
      const auto phi = norm.extremes().row(idx);
      worst = std::max(worst, std::abs(phi.dot(rx - x)));
      worst = std::max(worst, std::abs(phi.dot(ax - x)));
    }
    defect[k] = worst;
  });
  return *std::max_element(defect.begin(), defect.end());
}

std::vector<std::vector<int>> partition_support(const Subspace& v, double tol) {
  const int n = v.ambient();
  std::vector<std::vector<int>> classes;
  std::vector<int> reps;  // representative row per class, -1 for the zero class
  int zero_class = -1;
  for (int i = 0; i < n; ++i) {
    const auto row = v.basis.row(i);
    const bool zero = v.dim() == 0 || row.cwiseAbs().maxCoeff() <= tol;
    if (zero) {
      if (zero_class < 0) {
        zero_class = static_cast<int>(classes.size());
        classes.push_back({});
        reps.push_back(-1);
      }
      classes[static_cast<std::size_t>(zero_class)].push_back(i);
      continue;
    }
    bool placed = false;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      if (reps[c] < 0) continue;
      const auto rep = v.basis.row(reps[c]);
      if ((row - rep).cwiseAbs().maxCoeff() <= tol ||
          (row + rep).cwiseAbs().maxCoeff() <= tol) {
        classes[c].push_back(i);
        placed = true;
        break;
      }
    }
    if (!placed) {
      classes.push_back({i});
      reps.push_back(i);
    }
  }
  return classes;  // scan order sorts classes by first element and contents
}

Matrix projection_linf(const Subspace& v, double tol) {
  const int n = v.ambient();
  Matrix p = Matrix::Zero(n, n);
  int nonzero_classes = 0;
  for (const std::vector<int>& cls : partition_support(v, tol)) {
    const int rep = cls.front();
    if (v.dim() == 0 || v.basis.row(rep).cwiseAbs().maxCoeff() <= tol) continue;
    ++nonzero_classes;
    Vector pattern = Vector::Zero(n);
    const auto rep_row = v.basis.row(rep);
    for (int i : cls) {
      pattern[i] = (v.basis.row(i) - rep_row).cwiseAbs().maxCoeff() <= tol ? 1.0 : -1.0;
    }
    if (!v.contains(pattern, tol)) {
      std::ostringstream msg;
      msg << "modulus class starting at coordinate " << rep
          << " has no sign-pattern vector inside V (containment defect "
          << v.containment_defect(pattern)
          << "); V is not an agreement subspace of the sup norm";
      throw structure_mismatch(msg.str());
    }
    p += (1.0 / static_cast<double>(cls.size())) * pattern * pattern.transpose();
  }
  if (nonzero_classes != v.dim()) {
    throw structure_mismatch(
        "projection target would have rank " + std::to_string(nonzero_classes) +
        " but V has dimension " + std::to_string(v.dim()));
  }
  // Belt checks; unreachable once every pattern lies in V.
  if (max_abs(p * p - p) > 1e-12 ||
      (v.dim() > 0 && max_abs(p * v.basis - v.basis) > 1e-9) ||
      (n > 0 && p.cwiseAbs().rowwise().sum().maxCoeff() > 1.0 + 1e-12)) {
    throw structure_mismatch("constructed matrix is not a nonexpansive projection");
  }
  return p;
}

Matrix projection_l1(const std::vector<int>& support, int n) {
  if (n < 0) throw out_of_range("projection_l1: negative dimension");
  Matrix p = Matrix::Zero(n, n);
  for (int i : support) {
    if (i < 0 || i >= n) {
      throw out_of_range("projection_l1: support index " + std::to_string(i) +
                         " outside 0.." + std::to_string(n - 1));
    }
    p(i, i) = 1.0;
  }
  return p;
}

std::vector<int> support_of_v(const Subspace& v, const PolyhedralNorm& norm,
                              double tol) {
  if (v.ambient() != norm.ambient_dim()) {
    throw dimension_mismatch("support_of_v: ambient dimensions differ");
  }
  std::vector<int> support;
  for (int i = 0; i < v.ambient(); ++i) {
    if (v.dim() > 0 && v.basis.row(i).cwiseAbs().maxCoeff() > tol) {
      support.push_back(i);
    }
  }
  if (static_cast<int>(support.size()) != v.dim()) {
    std::ostringstream msg;
    msg << "V has dimension " << v.dim() << " but " << support.size()
        << " live coordinates; it is not a coordinate subspace, which the "
        << "1-norm face structure requires";
    throw structure_mismatch(msg.str());
  }
  return support;
}

Linearization linearize_on_fix(const MapFn& f, const MapFn& fix_of,
                               const PolyhedralNorm& norm, const Matrix& a,
                               const Subspace& w, int samples, std::uint64_t seed,
                               double fp_tol, double audit_tol, long max_iter) {
  const int n = norm.ambient_dim();
  const int d = w.dim();
  Linearization lin;
  lin.ambient = Matrix::Zero(n, n);
  lin.on_w = Matrix(d, d);
  if (d == 0) return lin;

  const IterationOptions opts = tight_options(fp_tol, max_iter);
  const auto phi = [&](const Vector& x) -> Vector {
    return a * f(krasnoselskii(fix_of, x, norm, opts).point);
  };

  std::vector<Vector> images(static_cast<std::size_t>(d));
  parallel_for(static_cast<std::size_t>(d), [&](std::size_t j) {
    images[j] = phi(w.basis.col(static_cast<int>(j)));
  });
  for (int j = 0; j < d; ++j) {
    lin.on_w.col(j) = w.basis.transpose() * images[static_cast<std::size_t>(j)];
  }
  lin.ambient = w.basis * lin.on_w * w.basis.transpose();

  lin.samples = std::max(samples, 0);
  if (lin.samples > 0) {
    std::vector<double> defect(static_cast<std::size_t>(lin.samples), 0.0);
    parallel_for(static_cast<std::size_t>(lin.samples), [&](std::size_t k) {
      Rng rng(Rng::derive(seed, k));
      const Vector x = w.basis * rng.uniform_box(d, 1.0);
      const Vector y = w.basis * rng.uniform_box(d, 1.0);
      const double alpha = rng.uniform(-1.5, 1.5);
      const double beta = rng.uniform(-1.5, 1.5);
      const Vector combo = alpha * x + beta * y;
      const Vector r = phi(combo) - alpha * phi(x) - beta * phi(y);
      defect[k] = norm.value(r) / std::max(1.0, norm.value(combo));
    });
    lin.linearity_defect = *std::max_element(defect.begin(), defect.end());
    if (lin.linearity_defect > audit_tol) {
      std::ostringstream msg;
      msg << "superposition fails at relative residual " << lin.linearity_defect
          << " (threshold " << audit_tol
          << "); the map does not act linearly on W";
      throw linearity_violation(msg.str());
    }
  }
  return lin;
}

int linear_period(const Matrix& m, int cap, double tol) {
  if (m.rows() != m.cols()) {
    throw dimension_mismatch("linear_period: matrix must be square");
  }
  if (m.rows() == 0) return 1;
  const Matrix eye = Matrix::Identity(m.rows(), m.cols());
  Matrix power = eye;
  for (int k = 1; k <= cap; ++k) {
    power = power * m;
    if (max_abs(power - eye) <= tol) return k;
  }
  return 0;
}

AffineFixAudit affine_fix_audit(const MapFn& f, bool norm_strictly_convex,
                                const std::vector<Vector>& fixed_points,
                                int samples, std::uint64_t seed, double tol) {
  (void)tol;
  if (!norm_strictly_convex) {
    throw precondition_unmet(
        "affine_fix_audit: the ambient norm must be strictly convex");
  }
  AffineFixAudit audit;
  if (fixed_points.size() < 2 || samples <= 0) return audit;
  audit.samples = samples;

  std::vector<double> defect(static_cast<std::size_t>(samples), 0.0);
  parallel_for(static_cast<std::size_t>(samples), [&](std::size_t k) {
    Rng rng(Rng::derive(seed, k));
    const std::size_t count = fixed_points.size();
    const auto pick = [&]() -> std::size_t {
      return std::min(count - 1, static_cast<std::size_t>(rng.uniform() *
                                                          static_cast<double>(count)));
    };
    const Vector& x = fixed_points[pick()];
    const Vector& y = fixed_points[pick()];
    const double t = rng.uniform(-2.0, 3.0);
    const Vector z = (1.0 - t) * x + t * y;
    defect[k] = (f(z) - z).norm();
  });
  audit.max_defect = *std::max_element(defect.begin(), defect.end());
  return audit;
}

OracleResult oracle_locked_faces_linf(const MapFn& f, int n,
                                      const OracleOptions& opts) {
  if (n < 1 || n > 3) {
    throw out_of_range("oracle_locked_faces_linf: exhaustive search is n <= 3");
  }
  if (opts.points_per_axis < 2) {
    throw config_error("oracle_locked_faces_linf: need at least 2 grid points");
  }
  const PolyhedralNorm norm = PolyhedralNorm::linf(n);

  // Grid points and, per point, the bitmask of functionals it agrees with.
  std::size_t total = 1;
  for (int k = 0; k < n; ++k) total *= static_cast<std::size_t>(opts.points_per_axis);
  std::vector<Vector> grid(total);
  std::vector<unsigned> agree(total, 0);
  const double step = (opts.hi - opts.lo) / (opts.points_per_axis - 1);
  parallel_for(total, [&](std::size_t g) {
    Vector x(n);
    std::size_t rest = g;
    for (int k = 0; k < n; ++k) {
      x[k] = opts.lo + step * static_cast<double>(rest % opts.points_per_axis);
      rest /= static_cast<std::size_t>(opts.points_per_axis);
    }
    const Vector shift = f(x) - x;
    const double cap = opts.member_tol * std::max(1.0, norm.value(x));
    unsigned mask = 0;
    for (int idx = 0; idx < norm.num_extremes(); ++idx) {
      if (std::abs(norm.extremes().row(idx).dot(shift)) <= cap) {
        mask |= 1u << idx;
      }
    }
    grid[g] = x;
    agree[g] = mask;
  });

  const auto face_mask = [](const DualFace& face) {
    unsigned mask = 0;
    for (int idx : face.indices) mask |= 1u << idx;
    return mask;
  };

  std::set<DualFace> locked;
  locked.insert(norm.full_face());  // diagonal witness v = w
  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t j = 0; j < total; ++j) {
      if (i == j) continue;
      const DualFace face = norm.duality_map(grid[i] - grid[j], opts.face_tol);
      if (locked.count(face)) continue;
      const unsigned mask = face_mask(face);
      if ((agree[i] & mask) == mask && (agree[j] & mask) == mask) {
        locked.insert(face);
      }
    }
  }

  OracleResult result;
  result.locked.assign(locked.begin(), locked.end());
  for (const DualFace& face : result.locked) {
    bool minimal = true;
    for (const DualFace& other : result.locked) {
      if (other.proper_subset_of(face)) {
        minimal = false;
        break;
      }
    }
    if (minimal) result.minimal.push_back(face);
  }
  return result;
}

Harvest harvest_fixed_points(const MapFn& f, const PolyhedralNorm& norm, int starts,
                             std::uint64_t seed, double fp_tol, long max_iter,
                             double box_radius) {
  if (starts < 1) throw config_error("harvest_fixed_points: starts must be >= 1");
  Harvest harvest;
  harvest.runs.resize(static_cast<std::size_t>(starts));
  IterationOptions opts;
  opts.fp_tol = fp_tol;
  opts.max_iter = max_iter;
  parallel_for(static_cast<std::size_t>(starts), [&](std::size_t i) {
    Rng rng(Rng::derive(seed, i));
    const Vector x0 = rng.uniform_box(norm.ambient_dim(), box_radius);
    harvest.runs[i] = krasnoselskii(f, x0, norm, opts);
  });
  for (const FixedPointResult& run : harvest.runs) {
    if (run.converged) harvest.converged.push_back(run.point);
  }
  return harvest;
}

StructureReport run_structure_pipeline(const MapFn& f, const PolyhedralNorm& norm,
                                       const StructurePipelineParams& params) {
  StructureReport report;
  report.starts = params.starts;

  const Harvest harvest =
      harvest_fixed_points(f, norm, params.starts, params.seed, params.fp_tol,
                           params.max_iter, params.box_radius);
  report.converged = static_cast<int>(harvest.converged.size());
  if (harvest.converged.empty()) {
    throw precondition_unmet(
        "no start converged to a fixed point; the fixed set may be empty");
  }
  report.fixed_points = harvest.converged;
  report.basepoint = harvest.converged.front();

  report.locked = find_locked_sets(f, norm, report.fixed_points, params.face_tol,
                                   params.min_pair_separation);
  report.minimal = minimal_locked(report.locked);

  // Stabilization: faces found using only the first half of the starts.
  std::vector<Vector> first_half;
  const int half = (params.starts + 1) / 2;
  for (std::size_t i = 0; i < harvest.runs.size() && static_cast<int>(i) < half; ++i) {
    if (harvest.runs[i].converged) first_half.push_back(harvest.runs[i].point);
  }
  report.discovery_stabilized =
      face_set(find_locked_sets(f, norm, first_half, params.face_tol,
                                params.min_pair_separation)) ==
      face_set(report.locked);

  // Translate the basepoint to the origin; faces are translation invariant,
  // the subspaces are not.
  const Vector base = report.basepoint;
  const MapFn frame_map = [f, base](const Vector& y) -> Vector {
    return f(y + base) - base;
  };
  std::vector<Vector> frame_points;
  frame_points.reserve(report.fixed_points.size());
  for (const Vector& x : report.fixed_points) frame_points.push_back(x - base);

  report.v = v_of_f(norm, report.minimal, params.rank_tol, frame_points,
                    params.check_tol);

  Rng derivative_rng(Rng::derive(params.seed, 0x0d1f));
  const DerivativeSearch search = differentiable_point_search(
      frame_map, norm, report.v, derivative_rng, params.h, params.fp_tol,
      params.check_tol, params.retry_budget, 1.0, params.max_iter);
  report.u = search.u;
  report.a = search.a;
  report.a2_defect = search.a2_defect;
  report.derivative_attempts = search.attempts;

  report.w = column_span(report.a * report.v.basis, params.rank_tol);

  const ProjectionCheck projection =
      verify_projection(report.a, norm, params.check_tol, report.v, 400,
                        Rng::derive(params.seed, 0x09e7));
  report.opnorm_estimate = projection.opnorm_estimate;
  report.opnorm_exact = projection.exact_norm;
  report.projection_nonexpansive = projection.nonexpansive;

  report.isometry = verify_isometry(frame_map, norm, report.a, report.w,
                                    params.isometry_pairs,
                                    Rng::derive(params.seed, 0x150f),
                                    params.fp_tol, params.max_iter,
                                    params.box_radius);

  std::vector<DualFace> minimal_faces;
  minimal_faces.reserve(report.minimal.size());
  for (const LockedSet& s : report.minimal) minimal_faces.push_back(s.face);
  report.value_preservation = value_preservation_defect(
      frame_map, norm, minimal_faces, report.v, report.a, params.value_samples,
      Rng::derive(params.seed, 0x7a1e), params.fp_tol, params.max_iter,
      params.box_radius);

  return report;
}

}  // namespace polyfix
