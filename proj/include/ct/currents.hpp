// Finite-mass k-currents in two layers: weighted oriented simplices with
// exact combinatorial boundary, and atomic currents (point, k-vector) that
// pairings, pushforwards, and wedges act on.
#pragma once

#include <map>

#include "ct/exterior.hpp"
#include "ct/flow.hpp"
#include "ct/forms.hpp"
#include "ct/norms.hpp"
#include "ct/numeric.hpp"
#include "ct/parallel.hpp"
#include "ct/quadrature.hpp"

namespace ct {

struct Simplex {
  Mat vertices;  // n x (k+1), orientation = column order
  double weight = 1.0;
};

inline double simplex_volume(const Simplex& s) {
  const int k = static_cast<int>(s.vertices.cols()) - 1;
  if (k == 0) return 1.0;
  Mat E(s.vertices.rows(), k);
  for (int j = 0; j < k; ++j) E.col(j) = s.vertices.col(j + 1) - s.vertices.col(0);
  double kfact = 1.0;
  for (int j = 2; j <= k; ++j) kfact *= j;
  const double g = (E.transpose() * E).determinant();
  return g <= 0.0 ? 0.0 : std::sqrt(g) / kfact;
}

// Unit simple k-vector spanning the simplex, oriented by the vertex order.
inline KVector simplex_direction(const Simplex& s) {
  const int n = static_cast<int>(s.vertices.rows());
  const int k = static_cast<int>(s.vertices.cols()) - 1;
  KVector w = KVector::basis(n, 0, {});
  for (int j = 0; j < k; ++j)
    w = wedge(w, KVector::from_vector(Vec(s.vertices.col(j + 1) - s.vertices.col(0))));
  const double nrm = w.norm();
  if (nrm == 0.0) throw std::invalid_argument("simplex_direction: degenerate simplex");
  return w * (1.0 / nrm);
}

class PolyhedralCurrent {
 public:
  PolyhedralCurrent(int n, int k) : n_(n), k_(k) {
    if (n < 0 || n > max_ambient_dim || k < 0 || k > n) throw std::invalid_argument("PolyhedralCurrent: bad (n,k)");
  }

  int n() const { return n_; }
  int grade() const { return k_; }
  const std::vector<Simplex>& simplices() const { return simplices_; }
  bool integral() const { return integral_; }
  void set_integral(bool v) { integral_ = v; }

  void add(Simplex s) {
    if (s.vertices.rows() != n_ || s.vertices.cols() != k_ + 1)
      throw std::invalid_argument("PolyhedralCurrent::add: simplex shape mismatch");
    simplices_.push_back(std::move(s));
  }

  double mass() const {
    CompensatedSum acc;
    for (const auto& s : simplices_) acc.add(std::abs(s.weight) * simplex_volume(s));
    return acc.value();
  }

 private:
  int n_, k_;
  std::vector<Simplex> simplices_;
  bool integral_ = false;
};

// Combinatorial boundary: alternating-sign faces merged by vertex set (up to
// orientation parity); coefficients below 1e-14 are dropped, so interior
// faces of a chain cancel exactly.
inline PolyhedralCurrent boundary(const PolyhedralCurrent& P) {
  if (P.grade() == 0) throw std::invalid_argument("boundary: 0-currents have no boundary");
  const int n = P.n(), k = P.grade();
  struct FaceAcc {
    Mat vertices;
    double weight = 0.0;
  };
  std::map<std::vector<double>, FaceAcc> faces;
  for (const auto& s : P.simplices()) {
    for (int omit = 0; omit <= k; ++omit) {
      Mat f(n, k);
      int c = 0;
      for (int j = 0; j <= k; ++j)
        if (j != omit) f.col(c++) = s.vertices.col(j);
      const double face_sign = (omit % 2 == 0) ? 1.0 : -1.0;
      // canonical vertex order: coordinate-lexicographic, tracking parity
      std::vector<int> order(k);
      for (int j = 0; j < k; ++j) order[j] = j;
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        for (int r = 0; r < n; ++r) {
          if (f(r, a) < f(r, b)) return true;
          if (f(r, a) > f(r, b)) return false;
        }
        return false;
      });
      int parity = 1;
      std::vector<int> perm = order;
      for (int i = 0; i < k; ++i) {
        while (perm[i] != i) {
          std::swap(perm[i], perm[perm[i]]);
          parity = -parity;
        }
      }
      Mat sorted(n, k);
      std::vector<double> key;
      key.reserve(static_cast<std::size_t>(n) * k);
      for (int j = 0; j < k; ++j) {
        sorted.col(j) = f.col(order[j]);
        for (int r = 0; r < n; ++r) key.push_back(sorted(r, j));
      }
      auto& acc = faces[key];
      if (acc.weight == 0.0 && acc.vertices.size() == 0) acc.vertices = sorted;
      acc.weight += face_sign * parity * s.weight;
    }
  }
  PolyhedralCurrent out(n, k - 1);
  out.set_integral(P.integral());
  for (auto& [key, acc] : faces) {
    if (std::abs(acc.weight) < 1e-14) continue;
    out.add({acc.vertices, acc.weight});
  }
  return out;
}

class DiscreteCurrent {
 public:
  DiscreteCurrent(int n, int k, std::size_t natoms = 0) : n_(n), k_(k) {
    if (n < 0 || n > max_ambient_dim || k < 0 || k > n) throw std::invalid_argument("DiscreteCurrent: bad (n,k)");
    points_ = Mat::Zero(n, static_cast<Eigen::Index>(natoms));
    taus_ = Mat::Zero(static_cast<Eigen::Index>(binomial(n, k)), static_cast<Eigen::Index>(natoms));
  }

  int n() const { return n_; }
  int grade() const { return k_; }
  std::size_t natoms() const { return static_cast<std::size_t>(points_.cols()); }
  bool simple_atoms() const { return simple_; }
  void set_simple_atoms(bool v) { simple_ = v; }

  const Mat& points() const { return points_; }
  const Mat& taus() const { return taus_; }
  Mat& points() { return points_; }
  Mat& taus() { return taus_; }

  Vec point(std::size_t i) const { return points_.col(static_cast<Eigen::Index>(i)); }
  KVector tau(std::size_t i) const { return KVector(n_, k_, taus_.col(static_cast<Eigen::Index>(i))); }

  void set_atom(std::size_t i, const Vec& x, const KVector& t) {
    points_.col(static_cast<Eigen::Index>(i)) = x;
    taus_.col(static_cast<Eigen::Index>(i)) = t.coeffs();
  }

 private:
  int n_, k_;
  Mat points_, taus_;
  bool simple_ = true;
};

// Quadrature realization: atoms at simplex nodes carrying
// (unit direction) x weight x (volume x node weight).
inline DiscreteCurrent discretize(const PolyhedralCurrent& P, int q) {
  const auto rule = simplex_rule(P.grade(), q);
  std::size_t total = 0;
  for (const auto& s : P.simplices()) {
    (void)s;
    total += rule.size();
  }
  DiscreteCurrent out(P.n(), P.grade(), total);
  std::size_t i = 0;
  for (const auto& s : P.simplices()) {
    const double vol = simplex_volume(s);
    if (vol == 0.0) {
      for (std::size_t qn = 0; qn < rule.size(); ++qn, ++i)
        out.points().col(static_cast<Eigen::Index>(i)) = s.vertices.col(0);
      continue;  // degenerate: zero atoms at the base vertex
    }
    const KVector dir = simplex_direction(s);
    for (const auto& node : rule) {
      const Vec x = s.vertices * node.bary;
      out.points().col(static_cast<Eigen::Index>(i)) = x;
      out.taus().col(static_cast<Eigen::Index>(i)) = (s.weight * vol * node.weight) * dir.coeffs();
      ++i;
    }
  }
  return out;
}

inline double pair_current(const DiscreteCurrent& T, const FormEvaluator& w) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < T.natoms(); ++i) {
    const KCovector c = w(T.point(i));
    acc.add(T.taus().col(static_cast<Eigen::Index>(i)).dot(c.coeffs()));
  }
  return acc.value();
}

inline double pair_current(const DiscreteCurrent& T, const PolyForm& w) {
  if (w.n() != T.n() || w.grade() != T.grade())
    throw std::invalid_argument("pair_current: dimension/grade mismatch");
  CompensatedSum acc;
  for (std::size_t i = 0; i < T.natoms(); ++i) {
    const KCovector c = w.eval(T.point(i));
    acc.add(T.taus().col(static_cast<Eigen::Index>(i)).dot(c.coeffs()));
  }
  return acc.value();
}

// Pairing of a space-time current (first coordinate = time) with a tensor form.
inline double pair_current(const DiscreteCurrent& T, const TensorForm& w) {
  if (w.space_dim() + 1 != T.n() || w.grade() != T.grade())
    throw std::invalid_argument("pair_current: tensor form shape mismatch");
  CompensatedSum acc;
  for (std::size_t i = 0; i < T.natoms(); ++i) {
    const Vec p = T.point(i);
    const KCovector c = w.eval(p[0], p.tail(p.size() - 1));
    acc.add(T.taus().col(static_cast<Eigen::Index>(i)).dot(c.coeffs()));
  }
  return acc.value();
}

inline double mass(const DiscreteCurrent& T, const MassOptions& opt = {}, std::uint64_t seed = 2026u) {
  CompensatedSum acc;
  if (T.simple_atoms()) {
    for (std::size_t i = 0; i < T.natoms(); ++i) acc.add(T.taus().col(static_cast<Eigen::Index>(i)).norm());
  } else {
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < T.natoms(); ++i) acc.add(mass_norm(T.tau(i), opt, rng).value);
  }
  return acc.value();
}

// v ^ T: atoms (x_i, v(x_i) ^ tau_i).
inline DiscreteCurrent wedge_field(const VectorField& v, const DiscreteCurrent& T) {
  if (v.dim() != T.n()) throw std::invalid_argument("wedge_field: dimension mismatch");
  if (T.grade() + 1 > T.n()) throw std::invalid_argument("wedge_field: grade overflow");
  DiscreteCurrent out(T.n(), T.grade() + 1, T.natoms());
  out.set_simple_atoms(T.simple_atoms());
  for (std::size_t i = 0; i < T.natoms(); ++i) {
    const KVector w = wedge(KVector::from_vector(v.value(T.point(i))), T.tau(i));
    out.points().col(static_cast<Eigen::Index>(i)) = T.points().col(static_cast<Eigen::Index>(i));
    out.taus().col(static_cast<Eigen::Index>(i)) = w.coeffs();
  }
  return out;
}

// Pointwise pushforward along the flow: atoms map to
// (Phi_t(x_i), Wedge^k DPhi_t(x_i)[tau_i]).
inline DiscreteCurrent pushforward_flow(const DiscreteCurrent& T, const VectorField& b, double t, double tol,
                                        bool verify = false) {
  if (b.dim() != T.n()) throw std::invalid_argument("pushforward_flow: dimension mismatch");
  DiscreteCurrent out(T.n(), T.grade(), T.natoms());
  out.set_simple_atoms(T.simple_atoms());
  parallel_for(T.natoms(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const FlowResult r = advect(b, T.point(i), t, tol, true, verify);
      out.points().col(static_cast<Eigen::Index>(i)) = r.endpoint;
      out.taus().col(static_cast<Eigen::Index>(i)) =
          exterior_power_matrix(*r.jacobian, T.grade()) * T.taus().col(static_cast<Eigen::Index>(i));
    }
  });
  return out;
}

// [a,b] x T as a polyhedral current in R^{1+n}: each k-simplex prism is
// split into k+1 simplices (staircase), oriented so the product carries
// e_0 ^ tau.
inline PolyhedralCurrent product_interval(double a, double b, const PolyhedralCurrent& P) {
  if (!(a < b)) throw std::invalid_argument("product_interval: need a < b");
  const int n = P.n(), k = P.grade();
  PolyhedralCurrent out(1 + n, k + 1);
  out.set_integral(P.integral());
  for (const auto& s : P.simplices()) {
    // bottom copies p_i = (a, v_i), top copies q_i = (b, v_i)
    for (int j = 0; j <= k; ++j) {
      Mat child(1 + n, k + 2);
      int c = 0;
      for (int i = 0; i <= j; ++i) {
        child(0, c) = a;
        child.block(1, c, n, 1) = s.vertices.col(i);
        ++c;
      }
      for (int i = j; i <= k; ++i) {
        child(0, c) = b;
        child.block(1, c, n, 1) = s.vertices.col(i);
        ++c;
      }
      const double sign = (j % 2 == 0) ? 1.0 : -1.0;
      out.add({std::move(child), sign * s.weight});
    }
  }
  return out;
}

namespace detail {

inline void barycentric_children(const Simplex& s, std::vector<Simplex>& out) {
  const int k = static_cast<int>(s.vertices.cols()) - 1;
  std::vector<int> perm(k + 1);
  for (int i = 0; i <= k; ++i) perm[i] = i;
  do {
    int parity = 1;
    {
      std::vector<int> p = perm;
      for (int i = 0; i <= k; ++i)
        while (p[i] != i) {
          std::swap(p[i], p[p[i]]);
          parity = -parity;
        }
    }
    Mat child(s.vertices.rows(), k + 1);
    Vec acc = Vec::Zero(s.vertices.rows());
    for (int j = 0; j <= k; ++j) {
      acc += s.vertices.col(perm[j]);
      child.col(j) = acc / (j + 1.0);
    }
    out.push_back({std::move(child), parity * s.weight});
  } while (std::next_permutation(perm.begin(), perm.end()));
}

}  // namespace detail

// Refinement: midpoint split for segments, red refinement for triangles,
// barycentric subdivision for higher grades. Weighted volume is preserved.
inline PolyhedralCurrent subdivide(const PolyhedralCurrent& P, int levels) {
  if (levels < 0) throw std::invalid_argument("subdivide: negative level");
  PolyhedralCurrent cur = P;
  for (int l = 0; l < levels; ++l) {
    PolyhedralCurrent next(P.n(), P.grade());
    next.set_integral(P.integral());
    for (const auto& s : cur.simplices()) {
      const int k = P.grade();
      if (k == 0) {
        next.add(s);
      } else if (k == 1) {
        const Vec m = 0.5 * (s.vertices.col(0) + s.vertices.col(1));
        Mat a(P.n(), 2), b(P.n(), 2);
        a.col(0) = s.vertices.col(0);
        a.col(1) = m;
        b.col(0) = m;
        b.col(1) = s.vertices.col(1);
        next.add({std::move(a), s.weight});
        next.add({std::move(b), s.weight});
      } else if (k == 2) {
        const Vec v0 = s.vertices.col(0), v1 = s.vertices.col(1), v2 = s.vertices.col(2);
        const Vec m01 = 0.5 * (v0 + v1), m02 = 0.5 * (v0 + v2), m12 = 0.5 * (v1 + v2);
        auto tri = [&](const Vec& x, const Vec& y, const Vec& z) {
          Mat m(P.n(), 3);
          m.col(0) = x;
          m.col(1) = y;
          m.col(2) = z;
          next.add({std::move(m), s.weight});
        };
        tri(v0, m01, m02);
        tri(m01, v1, m12);
        tri(m02, m12, v2);
        tri(m01, m12, m02);
      } else {
        std::vector<Simplex> children;
        detail::barycentric_children(s, children);
        for (auto& c : children) next.add(std::move(c));
      }
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace ct
