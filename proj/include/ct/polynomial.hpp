// Sparse multivariate polynomials with closed-form derivatives.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

namespace ct {

class Polynomial {
 public:
  struct Term {
    std::vector<int> exps;  // one exponent per variable
    double c = 0.0;
  };

  explicit Polynomial(int nvars = 0) : nvars_(nvars) {}

  static Polynomial constant(int nvars, double c) {
    Polynomial p(nvars);
    if (c != 0.0) p.terms_.push_back({std::vector<int>(nvars, 0), c});
    return p;
  }
  static Polynomial variable(int nvars, int axis) {
    Polynomial p(nvars);
    std::vector<int> e(nvars, 0);
    e.at(axis) = 1;
    p.terms_.push_back({std::move(e), 1.0});
    return p;
  }
  static Polynomial monomial(int nvars, std::vector<int> exps, double c) {
    Polynomial p(nvars);
    if (static_cast<int>(exps.size()) != nvars) throw std::invalid_argument("monomial: exponent count mismatch");
    if (c != 0.0) p.terms_.push_back({std::move(exps), c});
    return p;
  }
  template <class Rng>
  static Polynomial random(int nvars, int max_total_degree, Rng& rng) {
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    Polynomial p(nvars);
    std::vector<int> e(nvars, 0);
    // enumerate all monomials of total degree <= max_total_degree
    while (true) {
      p.terms_.push_back({e, coeff(rng)});
      int axis = 0;
      while (axis < nvars) {
        ++e[axis];
        int total = 0;
        for (int v : e) total += v;
        if (total <= max_total_degree) break;
        e[axis] = 0;
        ++axis;
      }
      if (axis == nvars) break;
      if (nvars == 0) break;
    }
    p.normalize();
    return p;
  }

  int nvars() const { return nvars_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  int total_degree() const {
    int d = 0;
    for (const auto& t : terms_) {
      int s = 0;
      for (int v : t.exps) s += v;
      d = std::max(d, s);
    }
    return d;
  }

  double eval(const Eigen::VectorXd& x) const {
    if (x.size() != nvars_) throw std::invalid_argument("Polynomial::eval: dimension mismatch");
    double acc = 0.0;
    for (const auto& t : terms_) {
      double m = t.c;
      for (int a = 0; a < nvars_; ++a)
        for (int e = 0; e < t.exps[a]; ++e) m *= x[a];
      acc += m;
    }
    return acc;
  }

  Polynomial derivative(int axis) const {
    Polynomial out(nvars_);
    for (const auto& t : terms_) {
      if (t.exps[axis] == 0) continue;
      Term d = t;
      d.c = t.c * t.exps[axis];
      d.exps[axis] -= 1;
      out.terms_.push_back(std::move(d));
    }
    out.normalize();
    return out;
  }

  Polynomial& operator+=(const Polynomial& o) {
    if (nvars_ != o.nvars_) throw std::invalid_argument("Polynomial: variable count mismatch");
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    normalize();
    return *this;
  }
  Polynomial& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto& t : terms_) t.c *= s;
    return *this;
  }
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator-(Polynomial a) { return a *= -1.0; }

  Polynomial operator*(const Polynomial& o) const {
    if (nvars_ != o.nvars_) throw std::invalid_argument("Polynomial: variable count mismatch");
    Polynomial out(nvars_);
    for (const auto& ta : terms_)
      for (const auto& tb : o.terms_) {
        Term t;
        t.exps.resize(nvars_);
        for (int a = 0; a < nvars_; ++a) t.exps[a] = ta.exps[a] + tb.exps[a];
        t.c = ta.c * tb.c;
        out.terms_.push_back(std::move(t));
      }
    out.normalize();
    return out;
  }

  double max_abs_coeff() const {
    double m = 0.0;
    for (const auto& t : terms_) m = std::max(m, std::abs(t.c));
    return m;
  }

  void normalize() {
    std::map<std::vector<int>, double> acc;
    for (auto& t : terms_) acc[t.exps] += t.c;
    terms_.clear();
    for (auto& [e, c] : acc)
      if (c != 0.0) terms_.push_back({e, c});
  }

 private:
  int nvars_;
  std::vector<Term> terms_;
};

}  // namespace ct
