// Differential test forms: polynomial coefficients times an optional radial
// C^2 cutoff, with closed-form exterior derivative; compactly supported time
// test profiles; and space-time tensor forms t*alpha ^ p*beta.
#pragma once

#include <functional>
#include <optional>

#include "ct/exterior.hpp"
#include "ct/norms.hpp"
#include "ct/polynomial.hpp"

namespace ct {

// Radial cutoff, a quintic C^2 plateau profile in u = |x - center|^2:
// identically 1 for |x| <= r_in, identically 0 for |x| >= r_out.
class RadialBump {
 public:
  RadialBump(Vec center, double r_in, double r_out)
      : center_(std::move(center)), u_in_(r_in * r_in), u_out_(r_out * r_out) {
    if (!(0.0 <= r_in && r_in < r_out)) throw std::invalid_argument("RadialBump: need 0 <= r_in < r_out");
  }

  const Vec& center() const { return center_; }
  double r_in() const { return std::sqrt(u_in_); }
  double r_out() const { return std::sqrt(u_out_); }
  double u_in() const { return u_in_; }
  double u_out() const { return u_out_; }

  double u_of(const Vec& x) const { return (x - center_).squaredNorm(); }

  // order-th derivative with respect to u; order <= 3
  double deriv_u(double u, int order) const {
    const double t = 1.0 / (u_out_ - u_in_);
    const double s = (u - u_in_) * t;
    if (s <= 0.0) return order == 0 ? 1.0 : 0.0;
    if (s >= 1.0) return 0.0;
    switch (order) {
      case 0:
        return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
      case 1:
        return -(30.0 * s * s - 60.0 * s * s * s + 30.0 * s * s * s * s) * t;
      case 2:
        return -(60.0 * s - 180.0 * s * s + 120.0 * s * s * s) * t * t;
      case 3:
        return -(60.0 - 360.0 * s + 360.0 * s * s) * t * t * t;
      default:
        throw std::invalid_argument("RadialBump: derivative order must be <= 3");
    }
  }

  double value(const Vec& x) const { return deriv_u(u_of(x), 0); }
  double operator()(const Vec& x) const { return value(x); }

  // |d/du| bounds over the whole profile, used for field Lipschitz bounds
  double max_abs_d1() const { return 1.875 / (u_out_ - u_in_); }  // max |q'| = 15/8
  double max_abs_d2() const { return 5.773502691896258 / ((u_out_ - u_in_) * (u_out_ - u_in_)); }  // max |q''| = 10/sqrt(3)

 private:
  Vec center_;
  double u_in_, u_out_;
};

// k-form with coefficients sum_j p_j(x) * B^(j)(u(x)) per basis covector.
class PolyForm {
 public:
  struct Term {
    std::size_t rank = 0;  // rank of the basis multi-index
    int bump_order = 0;    // derivative order of the cutoff factor
    Polynomial p;
  };

  PolyForm(int n, int k) : n_(n), k_(k) {
    if (n < 0 || n > max_ambient_dim || k < 0 || k > n) throw std::invalid_argument("PolyForm: bad (n,k)");
  }

  static PolyForm constant(int n, const KCovector& a) {
    PolyForm w(n, a.grade());
    if (a.n() != n) throw std::invalid_argument("PolyForm::constant: dimension mismatch");
    for (Eigen::Index r = 0; r < a.coeffs().size(); ++r)
      if (a.coeffs()[r] != 0.0)
        w.terms_.push_back({static_cast<std::size_t>(r), 0, Polynomial::constant(n, a.coeffs()[r])});
    return w;
  }

  static PolyForm from_components(int n, int k, const std::vector<std::pair<MultiIndex, Polynomial>>& comps,
                                  std::optional<RadialBump> bump = std::nullopt) {
    PolyForm w(n, k);
    for (const auto& [I, p] : comps) {
      if (static_cast<int>(I.size()) != k) throw std::invalid_argument("PolyForm: component grade mismatch");
      if (p.nvars() != n) throw std::invalid_argument("PolyForm: polynomial variable count mismatch");
      w.terms_.push_back({multi_index_rank(n, I), 0, p});
    }
    w.bump_ = std::move(bump);
    w.merge();
    return w;
  }

  static PolyForm assemble(int n, int k, std::vector<Term> terms, std::optional<RadialBump> bump) {
    PolyForm w(n, k);
    w.terms_ = std::move(terms);
    w.bump_ = std::move(bump);
    w.merge();
    return w;
  }

  int n() const { return n_; }
  int grade() const { return k_; }
  bool has_bump() const { return bump_.has_value(); }
  const std::optional<RadialBump>& bump() const { return bump_; }
  const std::vector<Term>& terms() const { return terms_; }

  KCovector eval(const Vec& x) const {
    if (x.size() != n_) throw std::invalid_argument("PolyForm::eval: dimension mismatch");
    KCovector out(n_, k_);
    if (bump_) {
      const double u = bump_->u_of(x);
      if (u >= bump_->u_out()) return out;  // exactly zero outside the support
      for (const auto& t : terms_) {
        const double b = bump_->deriv_u(u, t.bump_order);
        if (b != 0.0) out[t.rank] += t.p.eval(x) * b;
      }
    } else {
      for (const auto& t : terms_) out[t.rank] += t.p.eval(x);
    }
    return out;
  }

  // Exterior derivative, closed form via the product rule on p * B^(j).
  PolyForm ext_d() const {
    if (k_ == n_) throw std::invalid_argument("PolyForm::ext_d: grade n form has no exterior derivative here");
    PolyForm out(n_, k_ + 1);
    out.bump_ = bump_;
    const auto& Is = multi_indices(n_, k_);
    MultiIndex merged;
    for (const auto& t : terms_) {
      const MultiIndex& I = Is[t.rank];
      for (int axis = 0; axis < n_; ++axis) {
        const int s = merge_sign({axis + 1}, I, &merged);
        if (s == 0) continue;
        const std::size_t r = multi_index_rank(n_, merged);
        Polynomial dp = t.p.derivative(axis);
        if (!dp.empty()) out.terms_.push_back({r, t.bump_order, std::move(dp) * static_cast<double>(s)});
        if (bump_) {
          // d/dx_axis B^(j)(u) = B^(j+1)(u) * 2 (x_axis - c_axis)
          Polynomial chain = (Polynomial::variable(n_, axis) + Polynomial::constant(n_, -bump_->center()[axis])) * 2.0;
          out.terms_.push_back({r, t.bump_order + 1, (t.p * chain) * static_cast<double>(s)});
        }
      }
    }
    out.merge();
    return out;
  }

  PolyForm& operator*=(double s) {
    for (auto& t : terms_) t.p *= s;
    return *this;
  }
  friend PolyForm operator*(PolyForm w, double s) { return w *= s; }
  friend PolyForm operator-(PolyForm w) { return w *= -1.0; }
  PolyForm& operator+=(const PolyForm& o) {
    if (n_ != o.n_ || k_ != o.k_) throw std::invalid_argument("PolyForm: shape mismatch");
    const bool same_bump = (!bump_ && !o.bump_) ||
                           (bump_ && o.bump_ && bump_->center() == o.bump_->center() &&
                            bump_->u_in() == o.bump_->u_in() && bump_->u_out() == o.bump_->u_out());
    if (!same_bump) throw std::invalid_argument("PolyForm: cannot add forms with different cutoffs");
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    merge();
    return *this;
  }

  double max_abs_coeff() const {
    double m = 0.0;
    for (const auto& t : terms_) m = std::max(m, t.p.max_abs_coeff());
    return m;
  }

  void merge() {
    std::vector<Term> merged;
    for (auto& t : terms_) {
      bool found = false;
      for (auto& m : merged)
        if (m.rank == t.rank && m.bump_order == t.bump_order) {
          m.p += t.p;
          found = true;
          break;
        }
      if (!found) merged.push_back(std::move(t));
    }
    std::erase_if(merged, [](const Term& t) { return t.p.empty(); });
    std::sort(merged.begin(), merged.end(), [](const Term& a, const Term& b) {
      return a.rank != b.rank ? a.rank < b.rank : a.bump_order < b.bump_order;
    });
    terms_ = std::move(merged);
  }

 private:
  int n_, k_;
  std::optional<RadialBump> bump_;
  std::vector<Term> terms_;
};

// Wedge of two polynomial forms; at most one operand may carry a cutoff.
inline PolyForm wedge(const PolyForm& a, const PolyForm& b) {
  if (a.n() != b.n()) throw std::invalid_argument("wedge(PolyForm): dimension mismatch");
  if (a.has_bump() && b.has_bump()) throw std::invalid_argument("wedge(PolyForm): both operands carry cutoffs");
  if (a.grade() + b.grade() > a.n()) throw std::invalid_argument("wedge(PolyForm): grade overflow");
  const int n = a.n();
  const auto& Ia = multi_indices(n, a.grade());
  const auto& Ib = multi_indices(n, b.grade());
  MultiIndex merged;
  std::vector<PolyForm::Term> terms;
  for (const auto& ta : a.terms())
    for (const auto& tb : b.terms()) {
      const int s = merge_sign(Ia[ta.rank], Ib[tb.rank], &merged);
      if (s == 0) continue;
      PolyForm::Term t;
      t.rank = multi_index_rank(n, merged);
      t.bump_order = ta.bump_order + tb.bump_order;
      t.p = (ta.p * tb.p) * static_cast<double>(s);
      terms.push_back(std::move(t));
    }
  return PolyForm::assemble(n, a.grade() + b.grade(), std::move(terms),
                            a.has_bump() ? a.bump() : b.bump());
}

// C^1 compactly supported scalar profile on (0,1): cubic ramps between
// knots t0 < t1 <= t2 < t3, identically 1 on [t1, t2]. Cubic pieces keep
// composite Simpson exact on panels that do not straddle a knot, so time
// quadratures of psi' telescope to rounding when the knots sit on the
// even-grid lattice.
class TimeTest {
 public:
  TimeTest(double t0, double t1, double t2, double t3) : t0_(t0), t1_(t1), t2_(t2), t3_(t3) {
    if (!(0.0 < t0 && t0 < t1 && t1 <= t2 && t2 < t3 && t3 < 1.0))
      throw std::invalid_argument("TimeTest: need 0 < t0 < t1 <= t2 < t3 < 1");
  }

  double value(double t) const { return eval(t, 0); }
  double deriv(double t) const { return eval(t, 1); }

  double eval(double t, int order) const {
    if (t <= t0_ || t >= t3_) return 0.0;
    if (t >= t1_ && t <= t2_) return order == 0 ? 1.0 : 0.0;
    if (t < t1_) return ramp((t - t0_) / (t1_ - t0_), order, 1.0 / (t1_ - t0_));
    return ramp((t3_ - t) / (t3_ - t2_), order, -1.0 / (t3_ - t2_));
  }

  double support_lo() const { return t0_; }
  double support_hi() const { return t3_; }
  std::vector<double> knots() const { return {t0_, t1_, t2_, t3_}; }

  // knots moved to the nearest multiples of `lattice` (shape preserved)
  TimeTest snapped(double lattice) const {
    auto snap = [&](double t) { return std::round(t / lattice) * lattice; };
    double s0 = std::max(lattice, snap(t0_));
    double s1 = std::max(s0 + lattice, snap(t1_));
    double s3 = std::min(1.0 - lattice, snap(t3_));
    double s2 = std::min(s3 - lattice, snap(t2_));
    if (s2 < s1) s2 = s1;
    if (!(0.0 < s0 && s0 < s1 && s1 <= s2 && s2 < s3 && s3 < 1.0))
      throw std::invalid_argument("TimeTest::snapped: lattice too coarse for the profile");
    return TimeTest(s0, s1, s2, s3);
  }

 private:
  static double ramp(double s, int order, double slope) {
    switch (order) {
      case 0:
        return s * s * (3.0 - 2.0 * s);
      case 1:
        return 6.0 * s * (1.0 - s) * slope;
      case 2:
        return (6.0 - 12.0 * s) * slope * slope;
      default:
        throw std::invalid_argument("TimeTest: derivative order must be <= 2");
    }
  }

  double t0_, t1_, t2_, t3_;
};

// Tensor (space-time) forms: sums of f(t) [dt ^] beta~ where beta~ is a
// space form embedded in R^{1+d} (indices shifted by one).
class TensorForm {
 public:
  struct Term {
    TimeTest profile;
    int t_deriv = 0;  // evaluate profile or its derivative
    bool has_dt = false;
    PolyForm space;
    double scale = 1.0;
  };

  // t* psi ^ p* beta with psi a 0-form in time
  static TensorForm time_profile(const TimeTest& psi, const PolyForm& beta) {
    TensorForm f(beta.n(), beta.grade());
    f.terms_.push_back({psi, 0, false, beta, 1.0});
    return f;
  }
  // t* (a dt) ^ p* beta with a dt a 1-form in time
  static TensorForm time_one_form(const TimeTest& a, const PolyForm& beta) {
    TensorForm f(beta.n(), beta.grade() + 1);
    f.terms_.push_back({a, 0, true, beta, 1.0});
    return f;
  }
  // t* d psi ^ p* beta = psi'(t) dt ^ p* beta
  static TensorForm time_one_form_deriv(const TimeTest& psi, const PolyForm& beta) {
    TensorForm f(beta.n(), beta.grade() + 1);
    f.terms_.push_back({psi, 1, true, beta, 1.0});
    return f;
  }

  int space_dim() const { return d_; }
  int grade() const { return degree_; }
  const std::vector<Term>& terms() const { return terms_; }

  KCovector eval(double t, const Vec& x) const {
    if (x.size() != d_) throw std::invalid_argument("TensorForm::eval: space dimension mismatch");
    KCovector out(1 + d_, degree_);
    for (const auto& term : terms_) {
      const double f = term.scale * term.profile.eval(t, term.t_deriv);
      if (f == 0.0) continue;
      const KCovector sc = term.space.eval(x);
      const auto& Is = multi_indices(d_, term.space.grade());
      for (std::size_t r = 0; r < Is.size(); ++r) {
        const double c = sc[r];
        if (c == 0.0) continue;
        MultiIndex J;
        J.reserve(degree_);
        if (term.has_dt) J.push_back(1);
        for (int idx : Is[r]) J.push_back(idx + 1);
        out[multi_index_rank(1 + d_, J)] += f * c;
      }
    }
    return out;
  }

  // d(t*alpha ^ p*beta) via the Leibniz split.
  TensorForm ext_d() const {
    TensorForm out(d_, degree_ + 1);
    for (const auto& term : terms_) {
      if (term.has_dt) {
        // d alpha = 0 for a 1-form in one time variable: only -f dt ^ d beta
        if (term.space.grade() < d_)
          out.terms_.push_back({term.profile, term.t_deriv, true, term.space.ext_d(), -term.scale});
      } else {
        out.terms_.push_back({term.profile, term.t_deriv + 1, true, term.space, term.scale});
        if (term.space.grade() < d_)
          out.terms_.push_back({term.profile, term.t_deriv, false, term.space.ext_d(), term.scale});
      }
    }
    return out;
  }

 private:
  TensorForm(int d, int degree) : d_(d), degree_(degree) {}

  int d_;
  int degree_;
  std::vector<Term> terms_;
};

// Pointwise covector field used by pairings that accept arbitrary forms.
using FormEvaluator = std::function<KCovector(const Vec&)>;

// Certified lower bound for the form comass over a sample grid.
struct GridSpec {
  Vec lo, hi;
  int points_per_axis = 9;
};

inline double comass_sup(const PolyForm& w, std::optional<GridSpec> box, const ComassOptions& opt,
                         std::mt19937_64& rng) {
  GridSpec g;
  if (box) {
    g = *box;
  } else if (w.has_bump()) {
    const auto& b = *w.bump();
    g.lo = (b.center().array() - b.r_out()).matrix();
    g.hi = (b.center().array() + b.r_out()).matrix();
  } else {
    throw std::invalid_argument("comass_sup: unbounded support without an explicit box");
  }
  if (g.lo.size() != w.n() || g.hi.size() != w.n()) throw std::invalid_argument("comass_sup: box dimension mismatch");
  const int m = std::max(2, g.points_per_axis);
  std::vector<int> idx(w.n(), 0);
  double best = 0.0;
  Vec x(w.n());
  while (true) {
    for (int a = 0; a < w.n(); ++a) x[a] = g.lo[a] + (g.hi[a] - g.lo[a]) * idx[a] / static_cast<double>(m - 1);
    const KCovector c = w.eval(x);
    if (!c.is_zero()) best = std::max(best, comass(c, opt, rng).value);
    int p = w.n() - 1;
    while (p >= 0 && idx[p] + 1 == m) idx[p--] = 0;
    if (p < 0) break;
    ++idx[p];
  }
  return best;
}

// Seeded library: polynomial coefficients of bounded total degree with
// coefficients in [-1,1], optional shared cutoff.
inline PolyForm random_poly_form(std::uint64_t seed, int n, int k, int degree,
                                 std::optional<RadialBump> bump = std::nullopt) {
  std::mt19937_64 rng(seed);
  std::vector<std::pair<MultiIndex, Polynomial>> comps;
  for (const auto& I : multi_indices(n, k)) comps.emplace_back(I, Polynomial::random(n, degree, rng));
  return PolyForm::from_components(n, k, comps, std::move(bump));
}

inline TimeTest random_time_test(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double t0 = 0.05 + 0.15 * u(rng);
  const double t1 = t0 + 0.1 + 0.15 * u(rng);
  const double t3 = 0.95 - 0.15 * u(rng);
  const double t2 = t3 - (0.1 + 0.15 * u(rng));
  return TimeTest(t0, t1, std::max(t1, t2), t3);
}

}  // namespace ct
