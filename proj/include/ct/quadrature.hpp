// Quadrature on the unit simplex: classical positive symmetric rules for
// dims 1-2, conical-product (Gauss-Jacobi) rules for higher dims. Weights
// are normalized to sum to 1, i.e. relative to the simplex measure.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace ct {

struct QuadNode {
  Eigen::VectorXd bary;  // dim+1 barycentric coordinates, nonnegative, sum 1
  double weight;         // relative weight; all rules here are positive
};

namespace detail {

struct Rule1D {
  std::vector<double> x, w;  // on [0,1] with weight (1-x)^alpha
};

// Golub-Welsch for the Jacobi weight (1-x)^alpha on [-1,1], mapped to [0,1].
inline Rule1D gauss_jacobi01(int m, int alpha) {
  const double a = static_cast<double>(alpha), b = 0.0;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k < m; ++k) {
    double diag;
    if (k == 0) {
      diag = (b - a) / (a + b + 2.0);
    } else {
      const double s = 2.0 * k + a + b;
      diag = (b * b - a * a) / (s * (s + 2.0));
    }
    T(k, k) = diag;
    if (k >= 1) {
      const double s = 2.0 * k + a + b;
      const double num = 4.0 * k * (k + a) * (k + b) * (k + a + b);
      const double den = s * s * (s + 1.0) * (s - 1.0);
      const double off = std::sqrt(num / den);
      T(k, k - 1) = off;
      T(k - 1, k) = off;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  const double mu0 = std::pow(2.0, a + b + 1.0) / (a + 1.0);  // beta = 0
  Rule1D r;
  r.x.resize(m);
  r.w.resize(m);
  for (int i = 0; i < m; ++i) {
    const double xi = es.eigenvalues()[i];
    const double v0 = es.eigenvectors()(0, i);
    r.x[i] = 0.5 * (1.0 + xi);
    r.w[i] = std::pow(2.0, -a - 1.0) * mu0 * v0 * v0;
  }
  return r;
}

inline void push_node(std::vector<QuadNode>& out, std::initializer_list<double> bary, double w) {
  QuadNode q;
  q.bary = Eigen::VectorXd(static_cast<Eigen::Index>(bary.size()));
  Eigen::Index i = 0;
  for (double v : bary) q.bary[i++] = v;
  q.weight = w;
  out.push_back(q);
}

inline std::vector<QuadNode> triangle_rule(int degree) {
  std::vector<QuadNode> r;
  if (degree <= 1) {
    push_node(r, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 1.0);
  } else if (degree == 2) {
    for (int i = 0; i < 3; ++i) {
      double b[3] = {1.0 / 6, 1.0 / 6, 1.0 / 6};
      b[i] = 2.0 / 3;
      push_node(r, {b[0], b[1], b[2]}, 1.0 / 3);
    }
  } else if (degree <= 4) {
    // 6-point degree-4 rule, two symmetric orbits
    const double a1 = 0.816847572980459, b1 = 0.091576213509771, w1 = 0.109951743655322;
    const double a2 = 0.108103018168070, b2 = 0.445948490915965, w2 = 0.223381589678011;
    for (int i = 0; i < 3; ++i) {
      double p[3] = {b1, b1, b1};
      p[i] = a1;
      push_node(r, {p[0], p[1], p[2]}, w1);
      double q[3] = {b2, b2, b2};
      q[i] = a2;
      push_node(r, {q[0], q[1], q[2]}, w2);
    }
  } else if (degree <= 5) {
    const double s15 = std::sqrt(15.0);
    push_node(r, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 9.0 / 40);
    const double b1 = (6.0 - s15) / 21.0, w1 = (155.0 - s15) / 1200.0;
    const double b2 = (6.0 + s15) / 21.0, w2 = (155.0 + s15) / 1200.0;
    for (int i = 0; i < 3; ++i) {
      double p[3] = {b1, b1, b1};
      p[i] = 1.0 - 2.0 * b1;
      push_node(r, {p[0], p[1], p[2]}, w1);
      double q[3] = {b2, b2, b2};
      q[i] = 1.0 - 2.0 * b2;
      push_node(r, {q[0], q[1], q[2]}, w2);
    }
  } else {
    throw std::invalid_argument("triangle_rule: unsupported degree");
  }
  return r;
}

// Conical product rule: exact for total degree <= 2m-1 with m points per
// axis, positive weights, any simplex dimension.
inline std::vector<QuadNode> conical_rule(int dim, int degree) {
  const int m = (degree + 2) / 2;
  std::vector<Rule1D> axes;
  axes.reserve(dim);
  for (int j = 0; j < dim; ++j) axes.push_back(gauss_jacobi01(m, dim - 1 - j));
  std::vector<QuadNode> out;
  std::vector<int> idx(dim, 0);
  double dimfact = 1.0;
  for (int j = 2; j <= dim; ++j) dimfact *= j;
  while (true) {
    Eigen::VectorXd x(dim);
    double w = 1.0, rem = 1.0;
    for (int j = 0; j < dim; ++j) {
      x[j] = axes[j].x[idx[j]] * rem;
      rem -= x[j];
      w *= axes[j].w[idx[j]];
    }
    QuadNode q;
    q.bary = Eigen::VectorXd(dim + 1);
    q.bary[0] = rem;
    for (int j = 0; j < dim; ++j) q.bary[j + 1] = x[j];
    q.weight = w * dimfact;  // raw weights sum to 1/dim!
    out.push_back(q);
    int p = dim - 1;
    while (p >= 0 && idx[p] + 1 == m) idx[p--] = 0;
    if (p < 0) break;
    ++idx[p];
  }
  return out;
}

}  // namespace detail

inline std::vector<QuadNode> simplex_rule(int dim, int degree) {
  if (dim < 0) throw std::invalid_argument("simplex_rule: negative dimension");
  if (degree < 1 || degree > 5) throw std::invalid_argument("simplex_rule: supported degrees are 1..5");
  std::vector<QuadNode> r;
  if (dim == 0) {
    detail::push_node(r, {1.0}, 1.0);
    return r;
  }
  if (dim == 1) {
    const auto g = detail::gauss_jacobi01((degree + 2) / 2, 0);
    for (std::size_t i = 0; i < g.x.size(); ++i) detail::push_node(r, {1.0 - g.x[i], g.x[i]}, g.w[i]);
    return r;
  }
  if (dim == 2) return detail::triangle_rule(degree);
  if (dim == 3 && degree <= 2) {
    if (degree <= 1) {
      detail::push_node(r, {0.25, 0.25, 0.25, 0.25}, 1.0);
    } else {
      const double a = (5.0 + 3.0 * std::sqrt(5.0)) / 20.0;
      const double b = (5.0 - std::sqrt(5.0)) / 20.0;
      for (int i = 0; i < 4; ++i) {
        double p[4] = {b, b, b, b};
        p[i] = a;
        detail::push_node(r, {p[0], p[1], p[2], p[3]}, 0.25);
      }
    }
    return r;
  }
  return detail::conical_rule(dim, degree);
}

}  // namespace ct
