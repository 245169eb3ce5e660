// The grade-0 specialization: signed measures as particle clouds advected by
// the flow, distributional residuals, the flowed-test-function diagnostic,
// and an independent upwind finite-volume oracle on a uniform grid.
#pragma once

#include "ct/flow.hpp"
#include "ct/numeric.hpp"
#include "ct/parallel.hpp"

namespace ct {

// Signed measures are kept as two nonnegative clouds so total variation
// stays exact bookkeeping.
struct ParticleCloud {
  Mat points;   // d x N
  Vec weights;  // N, nonnegative

  std::size_t size() const { return static_cast<std::size_t>(weights.size()); }
};

struct ParticleMeasure {
  ParticleCloud pos, neg;

  int dim() const { return static_cast<int>(pos.points.rows() ? pos.points.rows() : neg.points.rows()); }

  static ParticleMeasure from_signed(const Mat& points, const Vec& weights) {
    if (points.cols() != weights.size()) throw std::invalid_argument("ParticleMeasure: point/weight mismatch");
    std::vector<Eigen::Index> ip, in;
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
      if (weights[i] > 0.0) ip.push_back(i);
      else if (weights[i] < 0.0) in.push_back(i);
    }
    ParticleMeasure m;
    m.pos.points = Mat(points.rows(), static_cast<Eigen::Index>(ip.size()));
    m.pos.weights = Vec(static_cast<Eigen::Index>(ip.size()));
    for (std::size_t j = 0; j < ip.size(); ++j) {
      m.pos.points.col(static_cast<Eigen::Index>(j)) = points.col(ip[j]);
      m.pos.weights[static_cast<Eigen::Index>(j)] = weights[ip[j]];
    }
    m.neg.points = Mat(points.rows(), static_cast<Eigen::Index>(in.size()));
    m.neg.weights = Vec(static_cast<Eigen::Index>(in.size()));
    for (std::size_t j = 0; j < in.size(); ++j) {
      m.neg.points.col(static_cast<Eigen::Index>(j)) = points.col(in[j]);
      m.neg.weights[static_cast<Eigen::Index>(j)] = -weights[in[j]];
    }
    return m;
  }

  double total_variation() const {
    CompensatedSum acc;
    for (Eigen::Index i = 0; i < pos.weights.size(); ++i) acc.add(pos.weights[i]);
    for (Eigen::Index i = 0; i < neg.weights.size(); ++i) acc.add(neg.weights[i]);
    return acc.value();
  }

  // <mu, f> for a scalar function
  template <class F>
  double integrate(const F& f) const {
    CompensatedSum acc;
    for (Eigen::Index i = 0; i < pos.weights.size(); ++i) acc.add(pos.weights[i] * f(Vec(pos.points.col(i))));
    for (Eigen::Index i = 0; i < neg.weights.size(); ++i) acc.add(-neg.weights[i] * f(Vec(neg.points.col(i))));
    return acc.value();
  }
};

// Pushforward of a measure under the flow: points advected, weights kept.
inline ParticleMeasure push_measure(const ParticleMeasure& mu, const VectorField& b, double t, double tol) {
  ParticleMeasure out = mu;
  auto advect_cloud = [&](ParticleCloud& c) {
    parallel_for(c.size(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i)
        c.points.col(static_cast<Eigen::Index>(i)) =
            advect(b, Vec(c.points.col(static_cast<Eigen::Index>(i))), t, tol, false, false).endpoint;
    });
  };
  advect_cloud(out.pos);
  advect_cloud(out.neg);
  return out;
}

struct MeasureFamily {
  std::vector<double> grid;
  std::vector<ParticleMeasure> slices;

  void validate() const {
    if (grid.size() != slices.size()) throw std::invalid_argument("MeasureFamily: grid/slice mismatch");
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
      if (!(grid[i] < grid[i + 1])) throw std::invalid_argument("MeasureFamily: grid must increase");
  }
};

inline MeasureFamily solve_continuity(const ParticleMeasure& mu0, const VectorField& b,
                                      const std::vector<double>& grid, double tol) {
  MeasureFamily F;
  F.grid = grid;
  F.slices.reserve(grid.size());
  ParticleMeasure cur = mu0;
  double t_prev = grid.empty() ? 0.0 : grid.front();
  if (!grid.empty() && grid.front() != 0.0) throw std::invalid_argument("solve_continuity: grid must start at 0");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0) cur = push_measure(cur, b, grid[i] - t_prev, tol);
    t_prev = grid[i];
    F.slices.push_back(cur);
  }
  F.validate();
  return F;
}

// Product test function alpha(t) beta(x) with beta a scalar 0-form (with
// cutoff) whose gradient is available in closed form.
struct SpaceTimeTest {
  TimeTest alpha;
  PolyForm beta;  // grade 0

  SpaceTimeTest(TimeTest a, PolyForm b) : alpha(std::move(a)), beta(std::move(b)) {
    if (beta.grade() != 0) throw std::invalid_argument("SpaceTimeTest: beta must be a 0-form");
  }

  double value(double t, const Vec& x) const { return alpha.value(t) * beta.eval(x)[std::size_t{0}]; }
  double dt(double t, const Vec& x) const { return alpha.deriv(t) * beta.eval(x)[std::size_t{0}]; }
  Vec grad_x(double t, const Vec& x) const {
    const KCovector g = beta.ext_d().eval(x);
    return alpha.value(t) * g.coeffs();
  }
};

// Simpson-in-time, exact-in-space evaluation of
// integral of [dt psi + b . grad psi] d mu_t dt.
inline double continuity_residual(const MeasureFamily& F, const VectorField& b, const SpaceTimeTest& psi) {
  F.validate();
  if (F.grid.size() < 3 || (F.grid.size() - 1) % 2 != 0)
    throw std::invalid_argument("continuity_residual: need a uniform grid with an even interval count");
  if (psi.alpha.support_lo() < F.grid.front() || psi.alpha.support_hi() > F.grid.back())
    throw std::invalid_argument("continuity_residual: family does not cover the test support");
  const double dt = F.grid[1] - F.grid[0];
  const auto sw = simpson_weights(F.grid.size(), dt);
  const PolyForm dbeta = psi.beta.ext_d();
  CompensatedSum acc;
  for (std::size_t i = 0; i < F.grid.size(); ++i) {
    const double t = F.grid[i];
    const double a = psi.alpha.value(t), da = psi.alpha.deriv(t);
    if (a == 0.0 && da == 0.0) continue;
    const double inner = F.slices[i].integrate([&](const Vec& x) {
      double v = da * psi.beta.eval(x)[std::size_t{0}];
      if (a != 0.0) v += a * b.value(x).dot(dbeta.eval(x).coeffs());
      return v;
    });
    acc.add(sw[i] * inner);
  }
  return acc.value();
}

// integral of alpha'(t) <(Phi_{-t})_# mu_t, beta> dt by explicit back-flow;
// eps > 0 back-flows along the mollified field instead.
inline double flowed_test_residual(const MeasureFamily& F, const FieldPtr& b, const TimeTest& alpha,
                                   const PolyForm& beta, double eps, double tol) {
  F.validate();
  if (beta.grade() != 0) throw std::invalid_argument("flowed_test_residual: beta must be a 0-form");
  if (F.grid.size() < 3 || (F.grid.size() - 1) % 2 != 0)
    throw std::invalid_argument("flowed_test_residual: need a uniform grid with an even interval count");
  if (eps < 0.0) throw std::invalid_argument("flowed_test_residual: eps must be >= 0");
  FieldPtr back = b;
  if (eps > 0.0) back = std::make_shared<MollifiedField>(b, eps);
  const double dt = F.grid[1] - F.grid[0];
  const auto sw = simpson_weights(F.grid.size(), dt);
  CompensatedSum acc;
  for (std::size_t i = 0; i < F.grid.size(); ++i) {
    const double t = F.grid[i];
    const double da = alpha.deriv(t);
    if (da == 0.0) continue;
    const ParticleMeasure pulled = (t == 0.0) ? F.slices[i] : push_measure(F.slices[i], *back, -t, tol);
    const double m = pulled.integrate([&](const Vec& x) { return beta.eval(x)[std::size_t{0}]; });
    acc.add(sw[i] * da * m);
  }
  return acc.value();
}

// Uniform-grid densities; cell sums are tracked exactly by the conservative
// oracle below.
struct GridMeasure {
  Vec origin;
  double h = 0.0;
  std::vector<int> extents;
  Vec cells;  // row-major densities (mass per cell volume)

  int dim() const { return static_cast<int>(origin.size()); }
  std::size_t cell_count() const { return static_cast<std::size_t>(cells.size()); }

  std::size_t flatten(const std::vector<int>& idx) const {
    std::size_t f = 0;
    for (std::size_t a = 0; a < extents.size(); ++a) f = f * extents[a] + static_cast<std::size_t>(idx[a]);
    return f;
  }

  Vec cell_center(std::size_t flat) const {
    const int d = dim();
    Vec c(d);
    for (int a = d - 1; a >= 0; --a) {
      c[a] = origin[a] + (static_cast<double>(flat % extents[a]) + 0.5) * h;
      flat /= extents[a];
    }
    return c;
  }

  double cell_volume() const { return std::pow(h, dim()); }

  double total_mass() const {
    CompensatedSum acc;
    for (Eigen::Index i = 0; i < cells.size(); ++i) acc.add(cells[i]);
    return acc.value() * cell_volume();
  }

  template <class F>
  double integrate(const F& f) const {
    CompensatedSum acc;
    for (std::size_t i = 0; i < cell_count(); ++i) acc.add(cells[static_cast<Eigen::Index>(i)] * f(cell_center(i)));
    return acc.value() * cell_volume();
  }
};

// First-order upwind finite-volume evolution of the conservative form; the
// independent oracle for the continuity scenarios. Fluxes telescope, so the
// total signed mass is constant to rounding. Zero-inflow boundaries.
inline GridMeasure fv_oracle(const GridMeasure& mu0, const VectorField& b, double t, double cfl) {
  if (cfl <= 0.0 || cfl > 0.5) throw std::invalid_argument("fv_oracle: need 0 < cfl <= 0.5");
  if (t < 0.0) throw std::invalid_argument("fv_oracle: negative time not supported");
  const int d = mu0.dim();
  if (b.dim() != d) throw std::invalid_argument("fv_oracle: dimension mismatch");
  GridMeasure m = mu0;
  if (t == 0.0) return m;

  // face-normal velocities, precomputed per axis at face centers
  std::vector<std::vector<double>> face_vel(d);
  std::vector<std::size_t> stride(d, 1);
  for (int a = d - 2; a >= 0; --a) stride[a] = stride[a + 1] * static_cast<std::size_t>(m.extents[a + 1]);
  double vmax = 0.0;
  for (int a = 0; a < d; ++a) {
    // interior faces along axis a: extents[a]-1 per line
    std::size_t nfaces = 1;
    for (int q = 0; q < d; ++q) nfaces *= static_cast<std::size_t>(q == a ? m.extents[q] - 1 : m.extents[q]);
    face_vel[a].resize(nfaces);
    std::vector<int> idx(d, 0);
    for (std::size_t f = 0; f < nfaces; ++f) {
      Vec x(d);
      for (int q = 0; q < d; ++q)
        x[q] = m.origin[q] + (static_cast<double>(idx[q]) + (q == a ? 1.0 : 0.5)) * m.h;
      const double v = b.value(x)[a];
      face_vel[a][f] = v;
      vmax = std::max(vmax, std::abs(v));
      int p = d - 1;
      while (p >= 0 && idx[p] + 1 == (p == a ? m.extents[p] - 1 : m.extents[p])) idx[p--] = 0;
      if (p < 0) break;
      ++idx[p];
    }
  }
  if (vmax == 0.0) return m;
  const int steps = static_cast<int>(std::ceil(t * vmax / (cfl * m.h)));
  const double dt = t / steps;

  Vec next = m.cells;
  for (int s = 0; s < steps; ++s) {
    next = m.cells;
    for (int a = 0; a < d; ++a) {
      std::vector<int> idx(d, 0);
      const std::size_t nfaces = face_vel[a].size();
      for (std::size_t f = 0; f < nfaces; ++f) {
        // face between cell idx (left, index idx[a]) and idx+1 along a
        std::vector<int> left = idx, right = idx;
        right[a] += 1;
        const std::size_t li = m.flatten(left), ri = m.flatten(right);
        const double v = face_vel[a][f];
        const double upwind = v >= 0.0 ? m.cells[static_cast<Eigen::Index>(li)] : m.cells[static_cast<Eigen::Index>(ri)];
        const double flux = v * upwind * dt / m.h;
        next[static_cast<Eigen::Index>(li)] -= flux;
        next[static_cast<Eigen::Index>(ri)] += flux;
        int p = d - 1;
        while (p >= 0 && idx[p] + 1 == (p == a ? m.extents[p] - 1 : m.extents[p])) idx[p--] = 0;
        if (p < 0) break;
        ++idx[p];
      }
    }
    m.cells.swap(next);
  }
  return m;
}

// Max over the test panel of |<mu, beta> - <nu, beta>|.
inline double dual_distance(const ParticleMeasure& mu, const GridMeasure& nu, const std::vector<PolyForm>& panel) {
  double worst = 0.0;
  for (const auto& beta : panel) {
    if (beta.grade() != 0) throw std::invalid_argument("dual_distance: panel must hold 0-forms");
    const double a = mu.integrate([&](const Vec& x) { return beta.eval(x)[std::size_t{0}]; });
    const double g = nu.integrate([&](const Vec& x) { return beta.eval(x)[std::size_t{0}]; });
    worst = std::max(worst, std::abs(a - g));
  }
  return worst;
}

}  // namespace ct
