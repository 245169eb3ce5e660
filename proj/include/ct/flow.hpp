// Flows of bounded Lipschitz vector fields: the analytic/grid field catalog
// with reported Lip/sup bounds, RK4 trajectory integration, and Jacobian
// transport along trajectories via the variational equation.
#pragma once

#include <memory>
#include <optional>

#include "ct/forms.hpp"
#include "ct/quadrature.hpp"

namespace ct {

class VectorField {
 public:
  virtual ~VectorField() = default;
  virtual int dim() const = 0;
  virtual Vec value(const Vec& x) const = 0;
  virtual Mat jacobian(const Vec& x) const = 0;
  virtual std::string kind() const = 0;
  double lip_bound() const { return lip_; }
  double sup_bound() const { return sup_; }

 protected:
  double lip_ = 0.0;  // valid upper bound for Lip(b)
  double sup_ = 0.0;  // valid upper bound for |b| on the declared domain
};

using FieldPtr = std::shared_ptr<const VectorField>;

class ConstantField final : public VectorField {
 public:
  explicit ConstantField(Vec c) : c_(std::move(c)) {
    lip_ = 0.0;
    sup_ = c_.norm();
  }
  int dim() const override { return static_cast<int>(c_.size()); }
  Vec value(const Vec&) const override { return c_; }
  Mat jacobian(const Vec&) const override { return Mat::Zero(c_.size(), c_.size()); }
  std::string kind() const override { return "constant"; }

 private:
  Vec c_;
};

// b(x) = A x; sup bound reported on |x| <= domain_radius.
class LinearField : public VectorField {
 public:
  LinearField(Mat A, double domain_radius) : A_(std::move(A)) {
    const double opnorm = A_.jacobiSvd().singularValues()[0];
    lip_ = opnorm;
    sup_ = opnorm * domain_radius;
  }
  int dim() const override { return static_cast<int>(A_.rows()); }
  Vec value(const Vec& x) const override { return A_ * x; }
  Mat jacobian(const Vec&) const override { return A_; }
  std::string kind() const override { return "linear"; }

 protected:
  Mat A_;
};

// Planar rotation with angular velocity omega: b(x) = omega (-x2, x1).
class RotationField final : public LinearField {
 public:
  RotationField(double omega, double domain_radius)
      : LinearField((Mat(2, 2) << 0.0, -omega, omega, 0.0).finished(), domain_radius), omega_(omega) {}
  std::string kind() const override { return "rotation"; }
  double omega() const { return omega_; }

 private:
  double omega_;
};

// b(x) = (x2, 0, ..., 0).
class ShearField final : public LinearField {
 public:
  explicit ShearField(int d, double domain_radius) : LinearField(shear_matrix(d), domain_radius) {}
  std::string kind() const override { return "shear"; }

 private:
  static Mat shear_matrix(int d) {
    Mat A = Mat::Zero(d, d);
    A(0, 1) = 1.0;
    return A;
  }
};

// Compactly supported rotation: b(x) = omega * rho(|x|^2) (-x2, x1) with the
// quintic plateau profile rho. Nonlinear, C^1, globally Lipschitz.
class SwirlField final : public VectorField {
 public:
  SwirlField(double omega, double r_in, double r_out)
      : omega_(omega), bump_(Vec::Zero(2), r_in, r_out) {
    sup_ = std::abs(omega) * r_out;
    // |Db| <= |omega| (rho + 2 |rho'| |x|^2) pointwise
    lip_ = std::abs(omega) * (1.0 + 2.0 * bump_.max_abs_d1() * r_out * r_out);
  }
  int dim() const override { return 2; }
  Vec value(const Vec& x) const override {
    const double rho = bump_.deriv_u(x.squaredNorm(), 0);
    Vec v(2);
    v << -x[1], x[0];
    return omega_ * rho * v;
  }
  Mat jacobian(const Vec& x) const override {
    const double u = x.squaredNorm();
    const double rho = bump_.deriv_u(u, 0);
    const double drho = bump_.deriv_u(u, 1);
    Vec perp(2);
    perp << -x[1], x[0];
    Mat J(2, 2);
    J << 0.0, -rho, rho, 0.0;
    J += 2.0 * drho * perp * x.transpose();
    return omega_ * J;
  }
  std::string kind() const override { return "swirl"; }

 private:
  double omega_;
  RadialBump bump_;
};

// Gradient field b = amplitude * grad B(u(x)) = amplitude * B'(u) 2(x - c).
class BumpGradientField final : public VectorField {
 public:
  BumpGradientField(double amplitude, RadialBump bump) : amp_(amplitude), bump_(std::move(bump)) {
    const double r2 = bump_.u_out();
    sup_ = std::abs(amp_) * 2.0 * bump_.max_abs_d1() * std::sqrt(r2);
    lip_ = std::abs(amp_) * (2.0 * bump_.max_abs_d1() + 4.0 * bump_.max_abs_d2() * r2);
  }
  int dim() const override { return static_cast<int>(bump_.center().size()); }
  Vec value(const Vec& x) const override {
    return amp_ * 2.0 * bump_.deriv_u(bump_.u_of(x), 1) * (x - bump_.center());
  }
  Mat jacobian(const Vec& x) const override {
    const double u = bump_.u_of(x);
    const Vec r = x - bump_.center();
    const int d = dim();
    return amp_ * (2.0 * bump_.deriv_u(u, 1) * Mat::Identity(d, d) +
                   4.0 * bump_.deriv_u(u, 2) * r * r.transpose());
  }
  std::string kind() const override { return "bump_gradient"; }

 private:
  double amp_;
  RadialBump bump_;
};

// Uniform-grid sampled field with piecewise-multilinear interpolation.
// Outside the grid box the field continues with the boundary values of the
// clamped interpolation (still Lipschitz). Db uses central differences at
// the interpolation scale.
class GridField final : public VectorField {
 public:
  GridField(Vec origin, double spacing, std::vector<int> extents, Mat samples)
      : origin_(std::move(origin)), h_(spacing), ext_(std::move(extents)), samples_(std::move(samples)) {
    d_ = static_cast<int>(origin_.size());
    if (static_cast<int>(ext_.size()) != d_) throw std::invalid_argument("GridField: extents/origin mismatch");
    std::size_t total = 1;
    for (int e : ext_) {
      if (e < 2) throw std::invalid_argument("GridField: need >= 2 samples per axis");
      total *= static_cast<std::size_t>(e);
    }
    if (samples_.rows() != d_ || static_cast<std::size_t>(samples_.cols()) != total)
      throw std::invalid_argument("GridField: sample count mismatch");
    // reported bounds computed from samples and the interpolation structure
    sup_ = 0.0;
    for (Eigen::Index c = 0; c < samples_.cols(); ++c) sup_ = std::max(sup_, samples_.col(c).norm());
    double lip2 = 0.0;
    for (int axis = 0; axis < d_; ++axis) {
      double worst = 0.0;
      for (Eigen::Index c = 0; c < samples_.cols(); ++c) {
        auto idx = unflatten(static_cast<std::size_t>(c));
        if (idx[axis] + 1 >= ext_[axis]) continue;
        idx[axis] += 1;
        worst = std::max(worst, (samples_.col(static_cast<Eigen::Index>(flatten(idx))) - samples_.col(c)).norm() / h_);
      }
      lip2 += worst * worst;
    }
    lip_ = std::sqrt(lip2);
  }

  int dim() const override { return d_; }

  Vec value(const Vec& x) const override {
    std::vector<int> base(d_);
    std::vector<double> frac(d_);
    for (int a = 0; a < d_; ++a) {
      double s = (x[a] - origin_[a]) / h_;
      s = std::min(std::max(s, 0.0), static_cast<double>(ext_[a] - 1));
      int i = std::min(static_cast<int>(std::floor(s)), ext_[a] - 2);
      base[a] = i;
      frac[a] = s - i;
    }
    Vec acc = Vec::Zero(d_);
    const int corners = 1 << d_;
    std::vector<int> idx(d_);
    for (int c = 0; c < corners; ++c) {
      double w = 1.0;
      for (int a = 0; a < d_; ++a) {
        const int bit = (c >> a) & 1;
        idx[a] = base[a] + bit;
        w *= bit ? frac[a] : 1.0 - frac[a];
      }
      if (w != 0.0) acc += w * samples_.col(static_cast<Eigen::Index>(flatten(idx)));
    }
    return acc;
  }

  Mat jacobian(const Vec& x) const override {
    Mat J(d_, d_);
    const double dh = 0.5 * h_;
    for (int a = 0; a < d_; ++a) {
      Vec xp = x, xm = x;
      xp[a] += dh;
      xm[a] -= dh;
      J.col(a) = (value(xp) - value(xm)) / (2.0 * dh);
    }
    return J;
  }

  std::string kind() const override { return "grid"; }
  double spacing() const { return h_; }

 private:
  std::size_t flatten(const std::vector<int>& idx) const {
    std::size_t f = 0;
    for (int a = 0; a < d_; ++a) f = f * static_cast<std::size_t>(ext_[a]) + static_cast<std::size_t>(idx[a]);
    return f;
  }
  std::vector<int> unflatten(std::size_t f) const {
    std::vector<int> idx(d_);
    for (int a = d_ - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(f % static_cast<std::size_t>(ext_[a]));
      f /= static_cast<std::size_t>(ext_[a]);
    }
    return idx;
  }

  Vec origin_;
  double h_;
  std::vector<int> ext_;
  Mat samples_;  // d x prod(extents), last axis fastest
  int d_;
};

// Mollification b_eps = b * phi_eps by tensor Gauss quadrature against the
// normalized quintic kernel. Preserves Lip and sup bounds (convex average of
// translates); equals b exactly on affine fields.
class MollifiedField final : public VectorField {
 public:
  MollifiedField(FieldPtr base, double eps, int points_per_axis = 8)
      : base_(std::move(base)), eps_(eps) {
    if (eps <= 0.0) throw std::invalid_argument("MollifiedField: eps must be positive");
    const int d = base_->dim();
    RadialBump kernel(Vec::Zero(d), 0.0, 1.0);  // profile in the scaled offset
    const auto gl = detail::gauss_jacobi01(points_per_axis, 0);
    std::vector<int> idx(d, 0);
    double total = 0.0;
    while (true) {
      Vec y(d);
      double w = 1.0;
      for (int a = 0; a < d; ++a) {
        y[a] = (2.0 * gl.x[idx[a]] - 1.0) * eps;
        w *= 2.0 * gl.w[idx[a]];
      }
      const double kw = w * kernel.deriv_u(y.squaredNorm() / (eps * eps), 0);
      if (kw > 0.0) {
        offsets_.push_back(y);
        weights_.push_back(kw);
        total += kw;
      }
      int p = d - 1;
      while (p >= 0 && idx[p] + 1 == points_per_axis) idx[p--] = 0;
      if (p < 0) break;
      ++idx[p];
    }
    for (double& w : weights_) w /= total;
    lip_ = base_->lip_bound();
    sup_ = base_->sup_bound();
  }

  int dim() const override { return base_->dim(); }
  Vec value(const Vec& x) const override {
    Vec acc = Vec::Zero(dim());
    for (std::size_t q = 0; q < offsets_.size(); ++q) acc += weights_[q] * base_->value(x - offsets_[q]);
    return acc;
  }
  Mat jacobian(const Vec& x) const override {
    Mat acc = Mat::Zero(dim(), dim());
    for (std::size_t q = 0; q < offsets_.size(); ++q) acc += weights_[q] * base_->jacobian(x - offsets_[q]);
    return acc;
  }
  std::string kind() const override { return "mollified(" + base_->kind() + ")"; }
  double eps() const { return eps_; }

 private:
  FieldPtr base_;
  double eps_;
  std::vector<Vec> offsets_;
  std::vector<double> weights_;
};

struct FlowResult {
  Vec endpoint;
  std::optional<Mat> jacobian;
  int steps = 0;
  double est_error = 0.0;
};

namespace detail {

// One RK4 step of the coupled system x' = b(x), J' = Db(x) J.
inline void rk4_step(const VectorField& b, double h, Vec& x, Mat* J) {
  const Vec k1 = b.value(x);
  const Vec k2 = b.value(x + 0.5 * h * k1);
  const Vec k3 = b.value(x + 0.5 * h * k2);
  const Vec k4 = b.value(x + h * k3);
  if (J) {
    const Mat K1 = b.jacobian(x) * (*J);
    const Mat K2 = b.jacobian(x + 0.5 * h * k1) * ((*J) + 0.5 * h * K1);
    const Mat K3 = b.jacobian(x + 0.5 * h * k2) * ((*J) + 0.5 * h * K2);
    const Mat K4 = b.jacobian(x + h * k3) * ((*J) + h * K3);
    *J += (h / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4);
  }
  x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline int step_count(const VectorField& b, double t, double tol) {
  if (tol <= 0.0) throw std::invalid_argument("advect: tolerance must be positive");
  const double hmax = std::pow(tol, 0.25) / (1.0 + b.lip_bound());
  const double at = std::abs(t);
  if (at == 0.0) return 0;
  const double raw = std::ceil(at / hmax);
  if (raw > 5e8) throw std::runtime_error("advect: step underflow (too many steps for requested tolerance)");
  return static_cast<int>(raw);
}

inline void integrate(const VectorField& b, double t, int nsteps, Vec& x, Mat* J) {
  if (nsteps == 0) return;
  const double h = t / nsteps;
  for (int i = 0; i < nsteps; ++i) rk4_step(b, h, x, J);
}

}  // namespace detail

// Endpoint of the flow from x over time t (negative t runs the inverse
// flow), verified by step-halving. Deterministic for fixed inputs.
inline FlowResult advect(const VectorField& b, const Vec& x, double t, double tol,
                         bool with_jacobian = false, bool verify = true) {
  if (x.size() != b.dim()) throw std::invalid_argument("advect: dimension mismatch");
  const int n1 = detail::step_count(b, t, tol);
  FlowResult r;
  Vec xf = x;
  Mat J = Mat::Identity(b.dim(), b.dim());
  if (verify && n1 > 0) {
    Vec xc = x;
    detail::integrate(b, t, n1, xc, nullptr);
    detail::integrate(b, t, 2 * n1, xf, with_jacobian ? &J : nullptr);
    r.est_error = (xf - xc).norm() / 15.0;
    r.steps = 3 * n1;
  } else {
    detail::integrate(b, t, n1, xf, with_jacobian ? &J : nullptr);
    r.steps = n1;
    r.est_error = 0.0;
  }
  r.endpoint = std::move(xf);
  if (with_jacobian) r.jacobian = std::move(J);
  return r;
}

// D Phi_t(x), transported along the trajectory.
inline Mat jacobian_action(const VectorField& b, const Vec& x, double t, double tol) {
  return *advect(b, x, t, tol, true).jacobian;
}

// |Phi_t(Phi_s(x)) - Phi_{t+s}(x)|
inline double semigroup_defect(const VectorField& b, const Vec& x, double s, double t, double tol) {
  const Vec mid = advect(b, x, s, tol).endpoint;
  const Vec two = advect(b, mid, t, tol).endpoint;
  const Vec one = advect(b, x, s + t, tol).endpoint;
  return (two - one).norm();
}

// |Phi_h(x) - x - h b(x)|, integrated well below the h^2 scale.
inline double taylor_defect(const VectorField& b, const Vec& x, double h) {
  if (h == 0.0) throw std::invalid_argument("taylor_defect: h must be nonzero");
  const double tol = std::min(1e-12, 1e-4 * h * h);
  const Vec end = advect(b, x, h, tol).endpoint;
  return (end - x - h * b.value(x)).norm();
}

// Space-time flow map Psi(t,x) = (t, Phi_t(x)) and its inverse, realized by
// composing trajectory integration with time bookkeeping. The Jacobians are
// assembled from the trajectory Jacobian and the field value.
struct SpaceTimePoint {
  double t = 0.0;
  Vec x;
};

inline void spacetime_forward(const VectorField& b, double t, const Vec& x, double tol, Vec* image, Mat* jac) {
  FlowResult r = advect(b, x, t, tol, jac != nullptr, false);
  const int d = b.dim();
  if (image) {
    image->resize(1 + d);
    (*image)[0] = t;
    image->tail(d) = r.endpoint;
  }
  if (jac) {
    jac->resize(1 + d, 1 + d);
    jac->setZero();
    (*jac)(0, 0) = 1.0;
    jac->block(1, 0, d, 1) = b.value(r.endpoint);  // d/dt (t, Phi_t(x)) in direction (1,0)
    jac->block(1, 1, d, d) = *r.jacobian;
  }
}

inline void spacetime_inverse(const VectorField& b, double s, const Vec& y, double tol, Vec* image, Mat* jac) {
  FlowResult r = advect(b, y, -s, tol, jac != nullptr, false);
  const int d = b.dim();
  if (image) {
    image->resize(1 + d);
    (*image)[0] = s;
    image->tail(d) = r.endpoint;
  }
  if (jac) {
    jac->resize(1 + d, 1 + d);
    jac->setZero();
    (*jac)(0, 0) = 1.0;
    jac->block(1, 0, d, 1) = -b.value(r.endpoint);  // d/ds (s, Phi_{-s}(y)) in direction (1,0)
    jac->block(1, 1, d, d) = *r.jacobian;
  }
}

}  // namespace ct
