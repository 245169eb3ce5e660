// Transport of k-currents along flows: pushforward solution families,
// Lie-derivative pairings, weak residuals, the space-time currents Z/U/W,
// and the back-transport constancy diagnostic.
#pragma once

#include "ct/currents.hpp"
#include "ct/numeric.hpp"
#include "ct/parallel.hpp"

namespace ct {

struct SolutionFamily {
  enum class Provenance { pushforward, external };

  int n = 0, k = 0;
  std::vector<double> grid;                 // t_0 < ... < t_M in [0,1]
  std::vector<DiscreteCurrent> slices;      // T_{t_i}
  std::vector<DiscreteCurrent> boundaries;  // boundary companions of T_{t_i}
  Provenance provenance = Provenance::external;

  std::size_t size() const { return grid.size(); }

  void validate() const {
    if (grid.size() != slices.size() || grid.size() != boundaries.size())
      throw std::invalid_argument("SolutionFamily: grid/slice count mismatch");
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
      if (!(grid[i] < grid[i + 1])) throw std::invalid_argument("SolutionFamily: grid must increase");
    for (const auto& s : slices)
      if (s.n() != n || s.grade() != k) throw std::invalid_argument("SolutionFamily: slice shape mismatch");
    for (const auto& s : boundaries)
      if (s.n() != n || (k > 0 && s.grade() != k - 1)) throw std::invalid_argument("SolutionFamily: boundary shape mismatch");
  }

  // sup_i of M(T_i) + M(dT_i); the discrete integrability bookkeeping
  double sup_mass() const {
    double m = 0.0;
    for (std::size_t i = 0; i < slices.size(); ++i) m = std::max(m, mass(slices[i]) + mass(boundaries[i]));
    return m;
  }
};

inline std::vector<double> uniform_grid(std::size_t slices_count) {
  std::vector<double> g(slices_count + 1);
  for (std::size_t i = 0; i <= slices_count; ++i) g[i] = static_cast<double>(i) / static_cast<double>(slices_count);
  return g;
}

// Pushforward solution of the transport initial-value problem on a time
// grid: T_{t_i} = (Phi_{t_i})_* of the refined, discretized initial current,
// boundaries transported alongside. Trajectories are advanced slice to
// slice (the flow semigroup), with substeps obeying the tolerance rule.
inline SolutionFamily solve_gte(const PolyhedralCurrent& initial, const VectorField& b,
                                const std::vector<double>& grid, int subdivision_levels, int q, double tol) {
  if (grid.size() < 2) throw std::invalid_argument("solve_gte: need at least two grid times");
  for (double t : grid)
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("solve_gte: grid must lie in [0,1]");
  if (grid.front() != 0.0) throw std::invalid_argument("solve_gte: grid must start at 0");
  const PolyhedralCurrent refined = subdivide(initial, subdivision_levels);
  const DiscreteCurrent base = discretize(refined, q);
  const DiscreteCurrent base_boundary = discretize(boundary(refined), q);

  SolutionFamily F;
  F.n = initial.n();
  F.k = initial.grade();
  F.grid = grid;
  F.provenance = SolutionFamily::Provenance::pushforward;
  F.slices.reserve(grid.size());
  F.boundaries.reserve(grid.size());

  const double hmax = std::pow(tol, 0.25) / (1.0 + b.lip_bound());

  auto march = [&](const DiscreteCurrent& start, std::vector<DiscreteCurrent>& out) {
    const int kk = start.grade();
    out.push_back(start);
    Mat pts = start.points();
    std::vector<Mat> jac(start.natoms(), Mat::Identity(b.dim(), b.dim()));
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const double dt = grid[i] - grid[i - 1];
      const int substeps = std::max(1, static_cast<int>(std::ceil(dt / hmax)));
      parallel_for(start.natoms(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t a = lo; a < hi; ++a) {
          Vec x = pts.col(static_cast<Eigen::Index>(a));
          detail::integrate(b, dt, substeps, x, &jac[a]);
          pts.col(static_cast<Eigen::Index>(a)) = x;
        }
      });
      DiscreteCurrent slice(start.n(), kk, start.natoms());
      slice.set_simple_atoms(start.simple_atoms());
      slice.points() = pts;
      parallel_for(start.natoms(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t a = lo; a < hi; ++a)
          slice.taus().col(static_cast<Eigen::Index>(a)) =
              exterior_power_matrix(jac[a], kk) * start.taus().col(static_cast<Eigen::Index>(a));
      });
      out.push_back(std::move(slice));
    }
  };

  march(base, F.slices);
  march(base_boundary, F.boundaries);
  F.validate();
  return F;
}

// <L_b T, omega> = -<b ^ dT, omega> - <b ^ T, d omega>, the second term
// realizing the boundary of b ^ T through the differential adjunction.
inline double lie_pair(const DiscreteCurrent& T, const DiscreteCurrent& dT, const VectorField& b,
                       const PolyForm& w) {
  if (w.grade() != T.grade()) throw std::invalid_argument("lie_pair: form grade mismatch");
  double first = 0.0;
  if (dT.natoms() > 0) first = pair_current(wedge_field(b, dT), w);
  const double second = pair_current(wedge_field(b, T), w.ext_d());
  return -first - second;
}

struct WeakResidualOptions {
  int min_support_points = 8;
};

// Composite-Simpson residual of the weak formulation against psi(t) w(x):
// integral of psi' <T_t, w> plus psi [<b ^ T_t, dw> + <b ^ dT_t, w>].
inline double weak_residual(const SolutionFamily& F, const VectorField& b, const TimeTest& psi,
                            const PolyForm& w, const WeakResidualOptions& opt = {}) {
  F.validate();
  if (F.grid.size() < 3 || (F.grid.size() - 1) % 2 != 0)
    throw std::invalid_argument("weak_residual: need a uniform grid with an even interval count");
  const double dt = F.grid[1] - F.grid[0];
  if (psi.support_lo() < F.grid.front() || psi.support_hi() > F.grid.back())
    throw std::invalid_argument("weak_residual: family does not cover the test support");
  int inside = 0;
  for (double t : F.grid)
    if (t > psi.support_lo() && t < psi.support_hi()) ++inside;
  if (inside < opt.min_support_points)
    throw std::invalid_argument("weak_residual: grid too coarse across the test support");

  const PolyForm dw = w.ext_d();
  const auto sw = simpson_weights(F.grid.size(), dt);
  CompensatedSum acc;
  for (std::size_t i = 0; i < F.grid.size(); ++i) {
    const double t = F.grid[i];
    const double p = psi.value(t), dp = psi.deriv(t);
    if (p == 0.0 && dp == 0.0) continue;
    double term = 0.0;
    if (dp != 0.0) term += dp * pair_current(F.slices[i], w);
    if (p != 0.0) {
      term += p * pair_current(wedge_field(b, F.slices[i]), dw);
      if (F.boundaries[i].natoms() > 0) term += p * pair_current(wedge_field(b, F.boundaries[i]), w);
    }
    acc.add(sw[i] * term);
  }
  return acc.value();
}

// Space-time currents carry grade k+1 atoms in R^{1+d} whose first
// coordinate is time.
struct SpaceTimeCurrent {
  DiscreteCurrent atoms;
  explicit SpaceTimeCurrent(DiscreteCurrent a) : atoms(std::move(a)) {}
};

// Z: pushforward of the cylinder [0,1] x T under (t,x) -> (t, Phi_t(x)).
// The time interval is partitioned into slabs so tensor-form pairings are
// integrated accurately in time; each prism node advects once along its
// trajectory across all slabs.
inline SpaceTimeCurrent cylinder_pushforward(const PolyhedralCurrent& initial, const VectorField& b,
                                             std::size_t time_slabs, int subdivision_levels, int q, double tol) {
  if (time_slabs < 1) throw std::invalid_argument("cylinder_pushforward: need at least one time slab");
  const PolyhedralCurrent refined = subdivide(initial, subdivision_levels);
  const int d = initial.n();
  const int k = initial.grade();
  // reference prism decomposition of [0,1] x simplex, nodes shared by slabs
  PolyhedralCurrent unit_slab = product_interval(0.0, 1.0, refined);
  const auto rule = simplex_rule(k + 1, q);
  const double slab_dt = 1.0 / static_cast<double>(time_slabs);

  const std::size_t per_slab = unit_slab.simplices().size() * rule.size();
  DiscreteCurrent atoms(1 + d, k + 1, per_slab * time_slabs);

  // For each (prism simplex, node): one spatial point with an arithmetic
  // progression of times across slabs; integrate incrementally.
  parallel_for(unit_slab.simplices().size(), [&](std::size_t lo, std::size_t hi) {
    const double hmax = std::pow(tol, 0.25) / (1.0 + b.lip_bound());
    for (std::size_t s = lo; s < hi; ++s) {
      const Simplex& ref = unit_slab.simplices()[s];
      const double vol_unit = simplex_volume(ref);
      if (vol_unit == 0.0) {
        for (std::size_t slab = 0; slab < time_slabs; ++slab)
          for (std::size_t r = 0; r < rule.size(); ++r) {
            const std::size_t i = slab * per_slab + s * rule.size() + r;
            atoms.points().col(static_cast<Eigen::Index>(i)).setZero();
          }
        continue;
      }
      const KVector dir_unit = simplex_direction(ref);
      for (std::size_t r = 0; r < rule.size(); ++r) {
        const Vec node = ref.vertices * rule[r].bary;  // (t in [0,1], x)
        const double tfrac = node[0];
        const Vec x0 = node.tail(d);
        // scaling [0,1] -> [0, slab_dt] in time: the simplex direction and
        // volume pick up one factor of slab_dt on the time axis
        Vec scaled_dir = dir_unit.coeffs();
        const auto& Is = multi_indices(1 + d, k + 1);
        for (std::size_t ridx = 0; ridx < Is.size(); ++ridx)
          if (!Is[ridx].empty() && Is[ridx][0] == 1) scaled_dir[static_cast<Eigen::Index>(ridx)] *= slab_dt;
        // note: volume of the scaled simplex = vol_unit * |scaled wedge| / |unit wedge|
        const double scaled_norm = scaled_dir.norm();
        const KVector dir(1 + d, k + 1, scaled_dir / scaled_norm);
        const double vol = vol_unit * scaled_norm;  // dir_unit has unit norm
        // advance the trajectory through t = (slab + tfrac) * slab_dt
        Vec x = x0;
        Mat J = Mat::Identity(d, d);
        double t_cur = 0.0;
        for (std::size_t slab = 0; slab < time_slabs; ++slab) {
          const double t_node = (static_cast<double>(slab) + tfrac) * slab_dt;
          const double dt = t_node - t_cur;
          const int substeps = std::max(1, static_cast<int>(std::ceil(std::abs(dt) / hmax)));
          detail::integrate(b, dt, substeps, x, &J);
          t_cur = t_node;
          // assemble D Psi and push the space-time direction
          Mat DPsi = Mat::Zero(1 + d, 1 + d);
          DPsi(0, 0) = 1.0;
          DPsi.block(1, 0, d, 1) = b.value(x);
          DPsi.block(1, 1, d, d) = J;
          const std::size_t i = slab * per_slab + s * rule.size() + r;
          Vec pt(1 + d);
          pt[0] = t_node;
          pt.tail(d) = x;
          atoms.points().col(static_cast<Eigen::Index>(i)) = pt;
          atoms.taus().col(static_cast<Eigen::Index>(i)) =
              (ref.weight * vol * rule[r].weight) * (exterior_power_matrix(DPsi, k + 1) * dir.coeffs());
        }
      }
    }
  });
  return SpaceTimeCurrent(std::move(atoms));
}

// U: the space-time lift [(1, b(x)) ^ tau](t_i, x_j) with Simpson weights in
// time, reusing the family grid.
inline SpaceTimeCurrent spacetime_lift(const SolutionFamily& F, const VectorField& b) {
  F.validate();
  if (F.grid.size() < 3 || (F.grid.size() - 1) % 2 != 0)
    throw std::invalid_argument("spacetime_lift: need a uniform grid with an even interval count");
  const double dt = F.grid[1] - F.grid[0];
  const auto sw = simpson_weights(F.grid.size(), dt);
  const int d = F.n;
  std::size_t total = 0;
  for (const auto& s : F.slices) total += s.natoms();
  DiscreteCurrent atoms(1 + d, F.k + 1, total);  // (1,b) ^ tau stays simple
  std::size_t i = 0;
  for (std::size_t si = 0; si < F.grid.size(); ++si) {
    const double t = F.grid[si];
    const DiscreteCurrent& slice = F.slices[si];
    for (std::size_t a = 0; a < slice.natoms(); ++a, ++i) {
      const Vec x = slice.point(a);
      Vec xt(1 + d);
      xt[0] = t;
      xt.tail(d) = x;
      Vec bb(1 + d);
      bb[0] = 1.0;
      bb.tail(d) = b.value(x);
      // embed the space k-vector: indices shift by one
      KVector tau_space = slice.tau(a);
      KVector tau_st(1 + d, F.k);
      const auto& Is = multi_indices(d, F.k);
      for (std::size_t r = 0; r < Is.size(); ++r) {
        if (tau_space[r] == 0.0) continue;
        MultiIndex J(Is[r]);
        for (int& v : J) v += 1;
        tau_st[multi_index_rank(1 + d, J)] = tau_space[r];
      }
      const KVector u = wedge(KVector::from_vector(bb), tau_st);
      atoms.points().col(static_cast<Eigen::Index>(i)) = xt;
      atoms.taus().col(static_cast<Eigen::Index>(i)) = sw[si] * u.coeffs();
    }
  }
  return SpaceTimeCurrent(std::move(atoms));
}

// Max over the tensor-form panel of |<U, d eta>|; the discrete boundary
// residual of the space-time lift.
inline double boundary_residual_spacetime(const SpaceTimeCurrent& U, const std::vector<TensorForm>& panel) {
  double worst = 0.0;
  for (const auto& eta : panel) worst = std::max(worst, std::abs(pair_current(U.atoms, eta.ext_d())));
  return worst;
}

struct VerticalityReport {
  double residual = 0.0;        // max over the panel of |<W, t*alpha ^ p*d beta>|
  double max_vertical_defect = 0.0;  // per-atom |DPsi^{-1}(1, b) - (1, 0)|
};

// W = (Psi^{-1})_* U, built atomwise through (s,y) -> (s, Phi_{-s}(y)). Also
// verifies per atom that the space-time direction (1, b(y)) maps to (1, 0).
inline VerticalityReport verticality_residual(const SpaceTimeCurrent& U, const VectorField& b,
                                              const std::vector<std::pair<TimeTest, PolyForm>>& panel,
                                              double tol) {
  const int d = b.dim();
  if (U.atoms.n() != 1 + d) throw std::invalid_argument("verticality_residual: dimension mismatch");
  const int kk = U.atoms.grade();
  DiscreteCurrent W(1 + d, kk, U.atoms.natoms());
  W.set_simple_atoms(false);
  std::vector<double> defects(U.atoms.natoms(), 0.0);
  parallel_for(U.atoms.natoms(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const Vec p = U.atoms.point(i);
      const double s = p[0];
      const Vec y = p.tail(d);
      Vec image;
      Mat DPsiInv;
      spacetime_inverse(b, s, y, tol, &image, &DPsiInv);
      Vec dir(1 + d);
      dir[0] = 1.0;
      dir.tail(d) = b.value(y);
      Vec vert = DPsiInv * dir;
      vert[0] -= 1.0;
      defects[i] = vert.norm();
      W.points().col(static_cast<Eigen::Index>(i)) = image;
      W.taus().col(static_cast<Eigen::Index>(i)) =
          exterior_power_matrix(DPsiInv, kk) * U.atoms.taus().col(static_cast<Eigen::Index>(i));
    }
  });
  VerticalityReport rep;
  for (double v : defects) rep.max_vertical_defect = std::max(rep.max_vertical_defect, v);
  for (const auto& [alpha, beta] : panel) {
    const TensorForm eta = TensorForm::time_profile(alpha, beta.ext_d());
    rep.residual = std::max(rep.residual, std::abs(pair_current(W, eta)));
  }
  return rep;
}

// m_i(beta) = <(Phi_{-t_i})_* T_{t_i}, beta>; returns max_i,beta of
// |m_i - m_0|. Constant (up to integrator error) exactly when the family is
// the pushforward solution.
inline double constancy_diagnostic(const SolutionFamily& F, const VectorField& b,
                                   const std::vector<PolyForm>& beta_panel, double tol) {
  F.validate();
  double worst = 0.0;
  std::vector<double> base(beta_panel.size(), 0.0);
  for (std::size_t i = 0; i < F.grid.size(); ++i) {
    const DiscreteCurrent back =
        (F.grid[i] == 0.0) ? F.slices[i] : pushforward_flow(F.slices[i], b, -F.grid[i], tol);
    for (std::size_t p = 0; p < beta_panel.size(); ++p) {
      const double m = pair_current(back, beta_panel[p]);
      if (i == 0)
        base[p] = m;
      else
        worst = std::max(worst, std::abs(m - base[p]));
    }
  }
  return worst;
}

}  // namespace ct
