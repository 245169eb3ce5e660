// Mass and comass norms on graded vectors, computed by multi-start ascent
// over orthonormal frames (comass) and a dual alternating scheme (mass).
// Both report certified-lower-bound style estimates with agreement counts.
#pragma once

#include <random>

#include "ct/exterior.hpp"

namespace ct {

struct ComassOptions {
  int restarts = 64;
  int max_iters = 400;
  double rel_improvement_tol = 1e-10;
  double grad_tol = 1e-12;
  double agreement_tol = 1e-8;
};

struct MassOptions {
  int starts = 8;
  int max_outer = 60;
  double rel_improvement_tol = 1e-10;
  ComassOptions inner;   // normalization calls inside the ascent
  ComassOptions polish;  // final renormalization of each settled direction
  MassOptions() {
    inner.restarts = 8;
    inner.max_iters = 150;
    inner.rel_improvement_tol = 1e-9;
    polish.restarts = 24;
    polish.max_iters = 400;
    polish.rel_improvement_tol = 1e-11;
  }
};

struct NormEstimate {
  double value = 0.0;
  int agreement = 0;   // restarts/starts that reached the best value
  bool converged = true;
};

namespace detail {

// <v_1 ^ ... ^ v_k, alpha> for the columns of V.
inline double frame_value(const Mat& V, const KCovector& alpha) {
  const int k = static_cast<int>(V.cols());
  KVector w = KVector::basis(alpha.n(), 0, {});
  for (int j = 0; j < k; ++j) w = wedge(w, KVector::from_vector(V.col(j)));
  return pair(w, alpha);
}

// Coefficient vector of v_1 ^ ... ^ v_k for the columns of V.
inline Vec frame_value_vector(const Mat& V, int n, int k) {
  if (V.rows() != n || V.cols() != k) return Vec::Zero(static_cast<Eigen::Index>(binomial(n, k)));
  KVector w = KVector::basis(n, 0, {});
  for (int j = 0; j < k; ++j) w = wedge(w, KVector::from_vector(V.col(j)));
  return w.coeffs();
}

// Euclidean gradient of frame_value with respect to the frame columns.
inline Mat frame_gradient(const Mat& V, const KCovector& alpha) {
  const int n = alpha.n();
  const int k = static_cast<int>(V.cols());
  Mat G(n, k);
  MultiIndex merged;
  for (int j = 0; j < k; ++j) {
    KVector sigma = KVector::basis(n, 0, {});
    for (int m = 0; m < k; ++m)
      if (m != j) sigma = wedge(sigma, KVector::from_vector(V.col(m)));
    const double sgn = (j % 2 == 0) ? 1.0 : -1.0;
    const auto& Ks = multi_indices(n, k - 1);
    Vec g = Vec::Zero(n);
    for (std::size_t r = 0; r < Ks.size(); ++r) {
      const double c = sigma[r];
      if (c == 0.0) continue;
      for (int i = 1; i <= n; ++i) {
        const int s = merge_sign({i}, Ks[r], &merged);
        if (s == 0) continue;
        g[i - 1] += c * s * alpha[multi_index_rank(n, merged)];
      }
    }
    G.col(j) = sgn * g;
  }
  return G;
}

// Thin-QR retraction with positive diagonal of R.
inline Mat qr_retract(const Mat& A) {
  Eigen::HouseholderQR<Mat> qr(A);
  Mat Q = qr.householderQ() * Mat::Identity(A.rows(), A.cols());
  Mat R = Q.transpose() * A;
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    if (R(j, j) < 0) Q.col(j) *= -1.0;
  return Q;
}

inline Mat random_frame(int n, int k, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat A(n, k);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = gauss(rng);
  return qr_retract(A);
}

// Projected ascent over orthonormal k-frames from one start; returns the
// best value found (a feasible lower bound for the comass).
inline double comass_ascent(Mat V, const KCovector& alpha, const ComassOptions& opt, bool* hit_stationary,
                            Mat* frame_out = nullptr) {
  double f = frame_value(V, alpha);
  if (f < 0) {  // flip one column to start on the positive side
    V.col(0) *= -1.0;
    f = -f;
  }
  double step = 0.5;
  *hit_stationary = false;
  for (int iter = 0; iter < opt.max_iters; ++iter) {
    const Mat G = frame_gradient(V, alpha);
    const Mat VtG = V.transpose() * G;
    const Mat xi = G - V * (0.5 * (VtG + VtG.transpose()));
    if (xi.norm() <= opt.grad_tol * std::max(1.0, std::abs(f))) {
      *hit_stationary = true;
      break;
    }
    bool improved = false;
    double f_new = f;
    for (int halvings = 0; halvings < 45; ++halvings) {
      const Mat Vt = qr_retract(V + step * xi);
      const double ft = frame_value(Vt, alpha);
      if (ft > f) {
        V = Vt;
        f_new = ft;
        improved = true;
        step *= 1.5;
        break;
      }
      step *= 0.5;
    }
    if (!improved) {
      *hit_stationary = true;
      break;
    }
    const double rel = (f_new - f) / std::max(1.0, std::abs(f_new));
    f = f_new;
    if (rel < opt.rel_improvement_tol) {
      *hit_stationary = true;
      break;
    }
  }
  if (frame_out) *frame_out = V;
  return f;
}

}  // namespace detail

// Comass: sup of <v_1 ^ ... ^ v_k, alpha> over orthonormal k-frames. When
// `witness` is given it receives the maximizing frame (the active support
// functional, used by the dual mass scheme).
inline NormEstimate comass(const KCovector& alpha, const ComassOptions& opt, std::mt19937_64& rng,
                           Mat* witness = nullptr) {
  const int n = alpha.n(), k = alpha.grade();
  NormEstimate est;
  if (alpha.is_zero()) {
    est.agreement = opt.restarts;
    if (witness) *witness = Mat::Zero(n, k);
    return est;
  }
  if (k == 0 || k == n) {
    // single coefficient; the only frames are orientations
    est.value = std::abs(alpha[0]);
    est.agreement = opt.restarts;
    if (witness) *witness = Mat::Identity(n, k);
    return est;
  }
  std::vector<double> values;
  values.reserve(opt.restarts);
  bool any_stationary = false;
  Mat best_frame;
  for (int r = 0; r < opt.restarts; ++r) {
    bool stat = false;
    Mat frame;
    const double v =
        detail::comass_ascent(detail::random_frame(n, k, rng), alpha, opt, &stat, witness ? &frame : nullptr);
    if (values.empty() || v > *std::max_element(values.begin(), values.end())) best_frame = frame;
    values.push_back(v);
    any_stationary = any_stationary || stat;
  }
  const double best = *std::max_element(values.begin(), values.end());
  int agree = 0;
  for (double v : values)
    if (v >= best - opt.agreement_tol * std::max(1.0, best)) ++agree;
  est.value = best;
  est.agreement = agree;
  est.converged = any_stationary;
  if (witness) *witness = best_frame;
  return est;
}

inline NormEstimate comass(const KCovector& alpha, const ComassOptions& opt = {}, std::uint64_t seed = 2026u) {
  std::mt19937_64 rng(seed);
  return comass(alpha, opt, rng);
}

// Mass: sup of <eta, alpha> over covectors of comass <= 1, computed by
// ascent in alpha with comass renormalization. Grades 0, 1, n-1, n are
// simple, where the mass equals the Euclidean norm.
inline NormEstimate mass_norm(const KVector& eta, const MassOptions& opt, std::mt19937_64& rng) {
  const int n = eta.n(), k = eta.grade();
  NormEstimate est;
  if (eta.is_zero()) {
    est.agreement = opt.starts;
    return est;
  }
  if (k == 0 || k == 1 || k == n - 1 || k == n) {
    est.value = eta.norm();
    est.agreement = opt.starts;
    return est;
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> values;
  bool any_converged = false;
  const Vec eta_dir = eta.coeffs() / eta.norm();
  for (int s = 0; s < opt.starts; ++s) {
    Vec a0;
    if (s == 0) {
      a0 = eta.coeffs();
    } else {
      a0 = Vec(eta.coeffs().size());
      for (Eigen::Index i = 0; i < a0.size(); ++i) a0[i] = gauss(rng);
    }
    KCovector alpha(n, k, a0);
    Mat witness;
    NormEstimate c = comass(alpha, opt.inner, rng, &witness);
    if (c.value <= 1e-300) continue;
    alpha *= 1.0 / c.value;
    double val = pair(eta, alpha);
    double step = 0.5;
    bool settled = false;
    for (int outer = 0; outer < opt.max_outer; ++outer) {
      // ascent directions for <eta, alpha>/comass(alpha): the subgradient of
      // the quotient through the active frame, the raw objective gradient,
      // and a random probe to step across nonsmooth kinks
      const Vec support = detail::frame_value_vector(witness, n, k);
      Vec rand_dir(alpha.coeffs().size());
      for (Eigen::Index i = 0; i < rand_dir.size(); ++i) rand_dir[i] = gauss(rng);
      rand_dir.normalize();
      const Vec subgrad = eta_dir - (val / eta.norm()) * support;
      const std::vector<Vec> dirs = {subgrad, eta_dir, rand_dir};
      bool improved = false;
      double val_new = val;
      for (const Vec& d : dirs) {
        double local = step;
        for (int halvings = 0; halvings < 8; ++halvings) {
          KCovector trial(n, k, alpha.coeffs() + local * d);
          Mat wtrial;
          NormEstimate ct_ = comass(trial, opt.inner, rng, &wtrial);
          if (ct_.value <= 1e-300) {
            local *= 0.5;
            continue;
          }
          trial *= 1.0 / ct_.value;
          const double vt = pair(eta, trial);
          if (vt > val) {
            alpha = trial;
            witness = wtrial;
            val_new = vt;
            improved = true;
            step = std::min(1e3, local * 1.3);
            break;
          }
          local *= 0.5;
        }
        if (improved) break;
      }
      if (!improved) {
        // the halvings already probed steps down to step / 2^12
        settled = true;
        break;
      }
      const double rel = (val_new - val) / std::max(1.0, std::abs(val_new));
      val = val_new;
      if (rel < opt.rel_improvement_tol) {
        settled = true;
        break;
      }
    }
    // polish: re-normalize the settled direction with a stronger comass run
    const NormEstimate cf = comass(alpha, opt.polish, rng);
    if (cf.value > 1e-300) val = pair(eta, alpha) / cf.value;
    values.push_back(val);
    any_converged = any_converged || settled;
  }
  double best = eta.norm();  // mass >= Euclidean norm, attained by eta itself
  for (double v : values) best = std::max(best, v);
  int agree = 0;
  for (double v : values)
    if (v >= best - 1e-8 * std::max(1.0, best)) ++agree;
  est.value = best;
  est.agreement = std::max(agree, values.empty() ? 1 : 0);
  est.converged = any_converged || values.empty();
  return est;
}

inline NormEstimate mass_norm(const KVector& eta, const MassOptions& opt = {}, std::uint64_t seed = 2026u) {
  std::mt19937_64 rng(seed);
  return mass_norm(eta, opt, rng);
}

}  // namespace ct
