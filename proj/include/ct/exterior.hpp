// Exterior algebra over R^n: graded multivectors with dense coefficients on
// the lexicographic multi-index basis, wedge/pairing, linear push/pull, span.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ct {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr int max_ambient_dim = 16;

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

// Strictly increasing 1-based index tuple; grade = size().
using MultiIndex = std::vector<int>;

namespace detail {

struct IndexTables {
  // all[n][k] = multi-indices of {1..n} choose k, lexicographic
  std::vector<std::vector<std::vector<MultiIndex>>> all;

  IndexTables() {
    all.resize(max_ambient_dim + 1);
    for (int n = 0; n <= max_ambient_dim; ++n) {
      all[n].resize(n + 1);
      for (int k = 0; k <= n; ++k) {
        auto& dst = all[n][k];
        dst.reserve(binomial(n, k));
        MultiIndex cur(k);
        // iterative enumeration in lexicographic order
        for (int i = 0; i < k; ++i) cur[i] = i + 1;
        if (k == 0) {
          dst.push_back({});
          continue;
        }
        while (true) {
          dst.push_back(cur);
          int pos = k - 1;
          while (pos >= 0 && cur[pos] == n - (k - 1 - pos)) --pos;
          if (pos < 0) break;
          ++cur[pos];
          for (int i = pos + 1; i < k; ++i) cur[i] = cur[i - 1] + 1;
        }
      }
    }
  }
};

inline const IndexTables& tables() {
  static const IndexTables t;
  return t;
}

}  // namespace detail

inline const std::vector<MultiIndex>& multi_indices(int n, int k) {
  if (n < 0 || n > max_ambient_dim || k < 0 || k > n)
    throw std::invalid_argument("multi_indices: need 0 <= k <= n <= 16");
  return detail::tables().all[n][k];
}

// Lexicographic rank of a strictly increasing tuple within {1..n} choose k.
inline std::size_t multi_index_rank(int n, const MultiIndex& I) {
  const int k = static_cast<int>(I.size());
  std::size_t rank = 0;
  int prev = 0;
  for (int j = 0; j < k; ++j) {
    if (I[j] <= prev || I[j] > n) throw std::invalid_argument("multi_index_rank: not strictly increasing in range");
    for (int v = prev + 1; v < I[j]; ++v) rank += binomial(n - v, k - 1 - j);
    prev = I[j];
  }
  return rank;
}

// Sign of sorting the concatenation (I, J) into increasing order; 0 if they
// share an index. Writes the merged tuple to `out` when non-null.
inline int merge_sign(const MultiIndex& I, const MultiIndex& J, MultiIndex* out = nullptr) {
  std::size_t a = 0, b = 0;
  int sign = 1;
  MultiIndex merged;
  merged.reserve(I.size() + J.size());
  while (a < I.size() && b < J.size()) {
    if (I[a] == J[b]) return 0;
    if (I[a] < J[b]) {
      merged.push_back(I[a++]);
    } else {
      // J[b] jumps over the remaining entries of I
      if ((I.size() - a) % 2 == 1) sign = -sign;
      merged.push_back(J[b++]);
    }
  }
  while (a < I.size()) merged.push_back(I[a++]);
  while (b < J.size()) merged.push_back(J[b++]);
  if (out) *out = std::move(merged);
  return sign;
}

// Graded coefficient vector over the e_I (resp. e^I) basis. KVector and
// KCovector share the representation but are distinct types.
template <class Tag>
class Graded {
 public:
  Graded() : n_(0), k_(0), coeffs_(Vec::Zero(1)) {}
  Graded(int n, int k) : n_(n), k_(k) {
    check_dims(n, k);
    coeffs_ = Vec::Zero(static_cast<Eigen::Index>(binomial(n, k)));
  }
  Graded(int n, int k, Vec coeffs) : n_(n), k_(k), coeffs_(std::move(coeffs)) {
    check_dims(n, k);
    if (coeffs_.size() != static_cast<Eigen::Index>(binomial(n, k)))
      throw std::invalid_argument("Graded: coefficient length must be C(n,k)");
  }

  static Graded basis(int n, int k, const MultiIndex& I) {
    Graded g(n, k);
    if (static_cast<int>(I.size()) != k) throw std::invalid_argument("basis: |I| != k");
    g.coeffs_[static_cast<Eigen::Index>(multi_index_rank(n, I))] = 1.0;
    return g;
  }
  static Graded from_vector(const Vec& v) {
    Graded g(static_cast<int>(v.size()), 1);
    g.coeffs_ = v;
    return g;
  }

  int n() const { return n_; }
  int grade() const { return k_; }
  const Vec& coeffs() const { return coeffs_; }
  Vec& coeffs() { return coeffs_; }
  double operator[](std::size_t r) const { return coeffs_[static_cast<Eigen::Index>(r)]; }
  double& operator[](std::size_t r) { return coeffs_[static_cast<Eigen::Index>(r)]; }
  double coeff(const MultiIndex& I) const { return coeffs_[static_cast<Eigen::Index>(multi_index_rank(n_, I))]; }

  double norm() const { return coeffs_.norm(); }
  bool is_zero(double tol = 0.0) const { return coeffs_.lpNorm<Eigen::Infinity>() <= tol; }

  Graded& operator+=(const Graded& o) {
    require_same_shape(o);
    coeffs_ += o.coeffs_;
    return *this;
  }
  Graded& operator-=(const Graded& o) {
    require_same_shape(o);
    coeffs_ -= o.coeffs_;
    return *this;
  }
  Graded& operator*=(double s) {
    coeffs_ *= s;
    return *this;
  }
  friend Graded operator+(Graded a, const Graded& b) { return a += b; }
  friend Graded operator-(Graded a, const Graded& b) { return a -= b; }
  friend Graded operator*(double s, Graded a) { return a *= s; }
  friend Graded operator*(Graded a, double s) { return a *= s; }
  friend Graded operator-(Graded a) { return a *= -1.0; }

  void require_same_shape(const Graded& o) const {
    if (n_ != o.n_ || k_ != o.k_) throw std::invalid_argument("Graded: dimension/grade mismatch");
  }

 private:
  static void check_dims(int n, int k) {
    if (n < 0 || n > max_ambient_dim) throw std::invalid_argument("Graded: ambient dimension must be in [0,16]");
    if (k < 0 || k > n) throw std::invalid_argument("Graded: grade must satisfy 0 <= k <= n");
  }

  int n_;
  int k_;
  Vec coeffs_;
};

struct VectorTag {};
struct CovectorTag {};
using KVector = Graded<VectorTag>;
using KCovector = Graded<CovectorTag>;

template <class Tag>
Graded<Tag> wedge(const Graded<Tag>& a, const Graded<Tag>& b) {
  if (a.n() != b.n()) throw std::invalid_argument("wedge: ambient dimension mismatch");
  const int n = a.n(), j = a.grade(), k = b.grade();
  if (j + k > n) throw std::invalid_argument("wedge: grade overflow (j + k > n)");
  Graded<Tag> out(n, j + k);
  const auto& Is = multi_indices(n, j);
  const auto& Js = multi_indices(n, k);
  MultiIndex merged;
  for (std::size_t ia = 0; ia < Is.size(); ++ia) {
    const double ca = a[ia];
    if (ca == 0.0) continue;
    for (std::size_t ib = 0; ib < Js.size(); ++ib) {
      const double cb = b[ib];
      if (cb == 0.0) continue;
      const int s = merge_sign(Is[ia], Js[ib], &merged);
      if (s == 0) continue;
      out[multi_index_rank(n, merged)] += s * ca * cb;
    }
  }
  return out;
}

inline double pair(const KVector& v, const KCovector& a) {
  if (v.n() != a.n() || v.grade() != a.grade()) throw std::invalid_argument("pair: dimension/grade mismatch");
  return v.coeffs().dot(a.coeffs());
}

// Matrix of k x k minors: entry (rank J over rows, rank I over cols) is
// det(S[J, I]). Applying it to k-vector coefficients realizes the k-th
// exterior power of S; the transpose realizes the covector pullback.
inline Mat exterior_power_matrix(const Mat& S, int k) {
  const int n_out = static_cast<int>(S.rows());
  const int n_in = static_cast<int>(S.cols());
  if (!S.allFinite()) throw std::invalid_argument("exterior_power_matrix: non-finite matrix");
  if (k < 0 || k > std::min(n_in, n_out)) {
    return Mat::Zero(static_cast<Eigen::Index>(binomial(n_out, k)), static_cast<Eigen::Index>(binomial(n_in, k)));
  }
  const auto& rows = multi_indices(n_out, k);
  const auto& cols = multi_indices(n_in, k);
  Mat M(rows.size(), cols.size());
  Mat minor(k, k);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) minor(i, j) = S(rows[r][i] - 1, cols[c][j] - 1);
      M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = (k == 0) ? 1.0 : minor.determinant();
    }
  }
  return M;
}

inline KVector push_linear(const Mat& S, const KVector& v) {
  if (static_cast<int>(S.cols()) != v.n()) throw std::invalid_argument("push_linear: input dimension mismatch");
  const int k = v.grade();
  if (k > static_cast<int>(S.rows())) throw std::invalid_argument("push_linear: grade exceeds output dimension");
  return KVector(static_cast<int>(S.rows()), k, exterior_power_matrix(S, k) * v.coeffs());
}

inline KCovector pull_linear(const Mat& S, const KCovector& a) {
  if (static_cast<int>(S.rows()) != a.n()) throw std::invalid_argument("pull_linear: output dimension mismatch");
  const int k = a.grade();
  if (k > static_cast<int>(S.cols())) throw std::invalid_argument("pull_linear: grade exceeds input dimension");
  return KCovector(static_cast<int>(S.cols()), k, exterior_power_matrix(S, k).transpose() * a.coeffs());
}

// Contraction matrix whose columns are the 1-slots <g, e^K ^ e^i> over all
// (k-1)-multi-indices K; its column space is span(g).
template <class Tag>
Mat contraction_matrix(const Graded<Tag>& g) {
  const int n = g.n(), k = g.grade();
  if (k == 0) return Mat::Zero(n, 0);
  const auto& Ks = multi_indices(n, k - 1);
  Mat B = Mat::Zero(n, static_cast<Eigen::Index>(Ks.size()));
  MultiIndex merged;
  for (std::size_t c = 0; c < Ks.size(); ++c) {
    for (int i = 1; i <= n; ++i) {
      const MultiIndex single{i};
      const int s = merge_sign(Ks[c], single, &merged);
      if (s == 0) continue;
      B(i - 1, static_cast<Eigen::Index>(c)) = s * g[multi_index_rank(n, merged)];
    }
  }
  return B;
}

// Orthonormal basis (columns) of the smallest subspace W with g in Wedge_k(W).
// Numerical rank cut: singular values > 1e-10 x largest.
template <class Tag>
Mat span_of(const Graded<Tag>& g, double rel_threshold = 1e-10) {
  if (g.is_zero()) throw std::invalid_argument("span_of: zero multivector");
  if (g.grade() == 0) return Mat::Zero(g.n(), 0);
  const Mat B = contraction_matrix(g);
  Eigen::JacobiSVD<Mat> svd(B, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double cut = rel_threshold * sv[0];
  int r = 0;
  while (r < sv.size() && sv[r] > cut) ++r;
  return svd.matrixU().leftCols(r);
}

inline std::string to_string(const MultiIndex& I) {
  std::string s = "(";
  for (std::size_t i = 0; i < I.size(); ++i) s += (i ? "," : "") + std::to_string(I[i]);
  return s + ")";
}

}  // namespace ct
