// Test-only oracles, independent of the library's optimization and
// differentiation paths.
#pragma once

#include <Eigen/Eigenvalues>

#include <random>

#include "ct/exterior.hpp"
#include "ct/forms.hpp"

namespace ct_oracle {

using ct::KCovector;
using ct::KVector;
using ct::Mat;
using ct::Vec;

// Gram-Schmidt orthonormalization (deliberately not the library's QR path).
inline Mat gram_schmidt(Mat A) {
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) A.col(j) -= A.col(i).dot(A.col(j)) * A.col(i);
    const double nrm = A.col(j).norm();
    A.col(j) /= nrm;
  }
  return A;
}

inline double frame_pairing(const Mat& V, const KCovector& alpha) {
  KVector w = KVector::basis(alpha.n(), 0, {});
  for (Eigen::Index j = 0; j < V.cols(); ++j) w = ct::wedge(w, KVector::from_vector(V.col(j)));
  return ct::pair(w, alpha);
}

// Brute-force comass: dense random frame sampling plus random-perturbation
// hill climbing around the best frame.
inline double brute_force_comass(const KCovector& alpha, std::size_t samples, int refine_rounds,
                                 std::mt19937_64& rng) {
  const int n = alpha.n(), k = alpha.grade();
  if (k == 0 || k == n) return std::abs(alpha[0]);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_mat = [&]() {
    Mat A(n, k);
    for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = gauss(rng);
    return A;
  };
  double best = 0.0;
  Mat best_frame = gram_schmidt(random_mat());
  for (std::size_t s = 0; s < samples; ++s) {
    const Mat V = gram_schmidt(random_mat());
    const double v = std::abs(frame_pairing(V, alpha));
    if (v > best) {
      best = v;
      best_frame = V;
    }
  }
  double sigma = 0.3;
  for (int r = 0; r < refine_rounds; ++r) {
    bool improved = false;
    for (int trial = 0; trial < 200; ++trial) {
      Mat P = best_frame;
      for (Eigen::Index i = 0; i < P.size(); ++i) P.data()[i] += sigma * gauss(rng);
      const Mat V = gram_schmidt(P);
      const double v = std::abs(frame_pairing(V, alpha));
      if (v > best) {
        best = v;
        best_frame = V;
        improved = true;
      }
    }
    if (!improved) sigma *= 0.5;
  }
  return best;
}

// Canonical invariants of a grade-2 object via the spectrum of its skew
// coefficient matrix: eigenvalues come in +- i lambda pairs. For 2-vectors
// the mass is sum(lambda); for 2-covectors the comass is max(lambda).
template <class Tag>
std::vector<double> skew_spectrum(const ct::Graded<Tag>& g) {
  if (g.grade() != 2) throw std::invalid_argument("skew_spectrum: grade-2 input required");
  const int n = g.n();
  Mat A = Mat::Zero(n, n);
  const auto& Is = ct::multi_indices(n, 2);
  for (std::size_t r = 0; r < Is.size(); ++r) {
    A(Is[r][0] - 1, Is[r][1] - 1) = g[r];
    A(Is[r][1] - 1, Is[r][0] - 1) = -g[r];
  }
  Eigen::EigenSolver<Mat> es(A);
  std::vector<double> lambdas;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double im = es.eigenvalues()[i].imag();
    if (im > 1e-12) lambdas.push_back(im);
  }
  std::sort(lambdas.begin(), lambdas.end(), std::greater<double>());
  return lambdas;
}

// Central finite differences of a form's coefficient field; reconstructs
// the exterior derivative without the library's ext_d code path.
inline KCovector finite_difference_d(const ct::PolyForm& w, const Vec& x, double h) {
  const int n = w.n(), k = w.grade();
  KCovector out(n, k + 1);
  const auto& Js = ct::multi_indices(n, k + 1);
  for (std::size_t rj = 0; rj < Js.size(); ++rj) {
    const ct::MultiIndex& J = Js[rj];
    double acc = 0.0;
    for (std::size_t m = 0; m < J.size(); ++m) {
      ct::MultiIndex I;
      for (std::size_t q = 0; q < J.size(); ++q)
        if (q != m) I.push_back(J[q]);
      Vec xp = x, xm = x;
      xp[J[m] - 1] += h;
      xm[J[m] - 1] -= h;
      const double dplus = w.eval(xp)[ct::multi_index_rank(n, I)];
      const double dminus = w.eval(xm)[ct::multi_index_rank(n, I)];
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      acc += sign * (dplus - dminus) / (2.0 * h);
    }
    out[rj] = acc;
  }
  return out;
}

// Exact integral of a monomial over the unit simplex in the coordinates
// x_1..x_D (barycentric remainder excluded): Dirichlet's formula.
inline double simplex_monomial_integral(const std::vector<int>& exps) {
  const int D = static_cast<int>(exps.size());
  int total = D;
  double num = 1.0;
  for (int e : exps) {
    for (int j = 2; j <= e; ++j) num *= j;
    total += e;
  }
  double den = 1.0;
  for (int j = 2; j <= total; ++j) den *= j;
  return num / den;
}

}  // namespace ct_oracle
